//! Node group assignments for the fairness metrics.

use crate::error::{Error, Result};
use crate::graph::Gso;
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Non-overlapping assignment of `N` nodes to `G` groups.
///
/// Stored as one 0-based group id per node; the binary indicator matrix
/// `Z`, the per-group sizes and the masked degree vectors are derived views.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupAssignment {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

impl GroupAssignment {
    /// Build from 0-based group labels. Every group in `0..G` must be
    /// non-empty and `G >= 2`.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Groups("no nodes".into()));
        }
        let g = labels.iter().max().map_or(0, |m| m + 1);
        if g < 2 {
            return Err(Error::Groups("need at least two groups".into()));
        }
        let mut sizes = vec![0usize; g];
        for &l in &labels {
            sizes[l] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Groups(format!("group {empty} is empty")));
        }
        Ok(Self { labels, sizes })
    }

    /// Two equal halves: nodes `0..n/2` in group 0, the rest in group 1.
    pub fn balanced_halves(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| usize::from(i >= n / 2)).collect())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn n_groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_min(&self) -> usize {
        *self.sizes.iter().min().unwrap()
    }

    pub fn n_max(&self) -> usize {
        *self.sizes.iter().max().unwrap()
    }

    /// 0-based group id of node `i`.
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Nodes belonging to group `g`.
    pub fn members(&self, g: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.labels[i] == g).collect()
    }

    /// Indicator vector `z^(g)`.
    pub fn indicator<T: Scalar>(&self, g: usize) -> DVector<T> {
        DVector::from_fn(self.n(), |i, _| {
            if self.labels[i] == g {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// The `N x G` indicator matrix `Z`.
    pub fn indicator_matrix<T: Scalar>(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.n(), self.n_groups(), |i, g| {
            if self.labels[i] == g {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// `|| Z^T 1 ||_2^2 = sum_g N_g^2`, a recurring bound ingredient.
    pub fn sizes_sq_sum(&self) -> f64 {
        self.sizes.iter().map(|&s| (s * s) as f64).sum()
    }

    /// Guard used by the group-wise metrics: every `N_g^2 - N_g` must be
    /// positive.
    pub fn require_min_size_two(&self) -> Result<()> {
        if self.n_min() < 2 {
            return Err(Error::GroupTooSmall(self.n_min()));
        }
        Ok(())
    }

    fn check_n<T: Scalar>(&self, gso: &Gso<T>) -> Result<()> {
        if gso.n() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: gso.n(),
            });
        }
        Ok(())
    }
}

/// Masked degree vectors `d^(g) = d o z^(g)`, one per group; they sum to `d`.
pub fn masked_degrees<T: Scalar>(gso: &Gso<T>, groups: &GroupAssignment) -> Result<Vec<DVector<T>>> {
    groups.check_n(gso)?;
    let d = gso.degrees();
    Ok((0..groups.n_groups())
        .map(|g| {
            DVector::from_fn(groups.n(), |i, _| {
                if groups.label(i) == g {
                    d[i]
                } else {
                    T::zero()
                }
            })
        })
        .collect())
}
