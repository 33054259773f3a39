//! Dyadic demographic-parity bias metrics.
//!
//! Group-wise bias compares the average edge weight within each group
//! against the average weight across each group pair; node-wise bias
//! compares, per node, the average weight toward each group. Both come in
//! three equivalent evaluation forms:
//!
//! - spatial: straight from the GSO entries;
//! - spectral: from eigenvalues plus frequency responses of the group
//!   indicators (any orthonormal basis accepted, so the shared-eigenbasis
//!   solver can reuse the code with the covariance eigenvectors);
//! - vectorized: as `||R s||_2^2` for the metric matrices acting on the
//!   half-vectorization, the form the solver and the theory consume.
//!
//! The spatial and vectorized forms are exact equalities; the spectral
//! form equals the spatial one whenever `V diag(lambda) V^T` reproduces
//! the GSO.

use crate::error::{Error, Result};
use crate::graph::Gso;
use crate::groups::GroupAssignment;
use crate::scalar::Scalar;
use crate::vectorize::{n_pairs, orthonormality_deviation, pair_list};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Which dyadic bias metric to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasMetric {
    Group,
    Node,
}

fn check_dims<T: Scalar>(gso: &Gso<T>, groups: &GroupAssignment) -> Result<()> {
    if gso.n() != groups.n() {
        return Err(Error::Dimension {
            expected: groups.n(),
            got: gso.n(),
        });
    }
    Ok(())
}

/// Group-pair weight totals `Z^T S+ Z`.
fn pair_totals<T: Scalar>(gso: &Gso<T>, groups: &GroupAssignment) -> DMatrix<T> {
    let z = groups.indicator_matrix::<T>();
    let sp = gso.off_diagonal();
    z.transpose() * sp * z
}

/// Group-wise dyadic bias `R_G(S)`: mean squared gap between within-group
/// and across-group average edge weights over all ordered group pairs.
pub fn bias_group<T: Scalar>(gso: &Gso<T>, groups: &GroupAssignment) -> Result<T> {
    check_dims(gso, groups)?;
    groups.require_min_size_two()?;
    let g = groups.n_groups();
    let totals = pair_totals(gso, groups);
    let sizes = groups.sizes();
    let mut acc = T::zero();
    for a in 0..g {
        let na = T::of(sizes[a] as f64);
        let within = totals[(a, a)] / (na * na - na);
        for b in 0..g {
            if a == b {
                continue;
            }
            let nb = T::of(sizes[b] as f64);
            let across = totals[(a, b)] / (na * nb);
            let diff = within - across;
            acc += diff * diff;
        }
    }
    Ok(acc / T::of((g * g - g) as f64))
}

/// The vector `sum_{h != g} (z_g / N_g - z_h / N_h)` used by both the
/// node-wise metric and its matrix form.
fn node_contrast<T: Scalar>(groups: &GroupAssignment, g: usize) -> DVector<T> {
    let n = groups.n();
    let sizes = groups.sizes();
    let n_groups = groups.n_groups();
    let own = T::of((n_groups - 1) as f64) / T::of(sizes[g] as f64);
    DVector::from_fn(n, |i, _| {
        let l = groups.label(i);
        if l == g {
            own
        } else {
            -T::one() / T::of(sizes[l] as f64)
        }
    })
}

/// Node-wise dyadic bias `R_N(S)`: per-node imbalance in average edge
/// weight toward each group.
pub fn bias_node<T: Scalar>(gso: &Gso<T>, groups: &GroupAssignment) -> Result<T> {
    check_dims(gso, groups)?;
    let g = groups.n_groups();
    let n = groups.n();
    let sp = gso.off_diagonal();
    let mut acc = T::zero();
    for a in 0..g {
        let u = &sp * node_contrast::<T>(groups, a);
        acc += u.norm_squared();
    }
    let scale = T::of((g * n * (g - 1) * (g - 1)) as f64);
    Ok(acc / scale)
}

fn check_spectral_inputs<T: Scalar>(
    lambda: &DVector<T>,
    v: &DMatrix<T>,
    groups: &GroupAssignment,
) -> Result<()> {
    let n = groups.n();
    if lambda.len() != n || v.nrows() != n || v.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: lambda.len(),
        });
    }
    let dev = orthonormality_deviation(v);
    if dev > 1e-8 {
        return Err(Error::NotOrthonormal(dev));
    }
    Ok(())
}

/// Spectral form of `R_G` from graph frequencies and an orthonormal basis.
///
/// Equals [`bias_group`] of `V diag(lambda) V^T` whenever that matrix is a
/// valid GSO; the `(V o V)^T z` term corrects for a nonzero implied
/// diagonal, so Laplacian spectra need no special casing.
pub fn bias_group_spectral<T: Scalar>(
    lambda: &DVector<T>,
    v: &DMatrix<T>,
    groups: &GroupAssignment,
) -> Result<T> {
    check_spectral_inputs(lambda, v, groups)?;
    groups.require_min_size_two()?;
    let g = groups.n_groups();
    let sizes = groups.sizes();
    let vv = v.component_mul(v);
    let responses: Vec<DVector<T>> = (0..g)
        .map(|k| v.transpose() * groups.indicator::<T>(k))
        .collect();
    let diag_resp: Vec<DVector<T>> = (0..g)
        .map(|k| vv.transpose() * groups.indicator::<T>(k))
        .collect();
    let mut acc = T::zero();
    for a in 0..g {
        let na = T::of(sizes[a] as f64);
        let denom_within = na * na - na;
        for b in 0..g {
            if a == b {
                continue;
            }
            let nb = T::of(sizes[b] as f64);
            let mut term = T::zero();
            for i in 0..groups.n() {
                let zi = responses[a][i];
                term += lambda[i]
                    * (zi * zi / denom_within - zi * responses[b][i] / (na * nb)
                        - diag_resp[a][i] / denom_within);
            }
            acc += term * term;
        }
    }
    Ok(acc / T::of((g * g - g) as f64))
}

/// Spectral form of `R_N`; same conventions as [`bias_group_spectral`].
pub fn bias_node_spectral<T: Scalar>(
    lambda: &DVector<T>,
    v: &DMatrix<T>,
    groups: &GroupAssignment,
) -> Result<T> {
    check_spectral_inputs(lambda, v, groups)?;
    let g = groups.n_groups();
    let n = groups.n();
    let vv = v.component_mul(v);
    // Implied diagonal of V diag(lambda) V^T.
    let diag = &vv * lambda;
    let mut acc = T::zero();
    for a in 0..g {
        let m = node_contrast::<T>(groups, a);
        let freq = v.transpose() * &m;
        let corrected = v.transpose() * m.component_mul(&diag);
        let w = lambda.component_mul(&freq) - corrected;
        acc += w.norm_squared();
    }
    let scale = T::of((g * n * (g - 1) * (g - 1)) as f64);
    Ok(acc / scale)
}

/// Metric matrices acting on the half-vectorization: `R_G(S) = ||r_group s||^2`
/// and `R_N(S) = ||r_node s||^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasMatrices<T: Scalar> {
    /// `(G^2 - G) x P`
    pub r_group: DMatrix<T>,
    /// `G N x P`
    pub r_node: DMatrix<T>,
}

/// Rows of the group metric matrix, one per ordered group pair.
pub fn group_bias_matrix<T: Scalar>(groups: &GroupAssignment, n: usize) -> Result<DMatrix<T>> {
    if n != groups.n() {
        return Err(Error::Dimension {
            expected: groups.n(),
            got: n,
        });
    }
    groups.require_min_size_two()?;
    let g = groups.n_groups();
    let sizes = groups.sizes();
    let pairs = pair_list(n);
    let norm = T::one() / T::of(((g * g - g) as f64).sqrt());
    let mut rows = DMatrix::<T>::zeros(g * g - g, n_pairs(n));
    let mut r = 0;
    for a in 0..g {
        let na = T::of(sizes[a] as f64);
        let denom_within = na * na - na;
        for b in 0..g {
            if a == b {
                continue;
            }
            let nb = T::of(sizes[b] as f64);
            let denom_across = na * nb;
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let li = groups.label(i);
                let lj = groups.label(j);
                let mut coeff = T::zero();
                if li == a && lj == a {
                    coeff += T::of(2.0) / denom_within;
                }
                if (li == a && lj == b) || (li == b && lj == a) {
                    coeff -= T::one() / denom_across;
                }
                rows[(r, k)] = coeff * norm;
            }
            r += 1;
        }
    }
    Ok(rows)
}

/// The stacked node metric matrix, `G` blocks of `N` rows.
pub fn node_bias_matrix<T: Scalar>(groups: &GroupAssignment, n: usize) -> Result<DMatrix<T>> {
    if n != groups.n() {
        return Err(Error::Dimension {
            expected: groups.n(),
            got: n,
        });
    }
    let g = groups.n_groups();
    let pairs = pair_list(n);
    let norm = T::one() / (T::of((g - 1) as f64) * T::of(((g * n) as f64).sqrt()));
    let mut rows = DMatrix::<T>::zeros(g * n, n_pairs(n));
    for a in 0..g {
        let m = node_contrast::<T>(groups, a);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            rows[(a * n + i, k)] = m[j] * norm;
            rows[(a * n + j, k)] = m[i] * norm;
        }
    }
    Ok(rows)
}

pub fn build_bias_matrices<T: Scalar>(groups: &GroupAssignment, n: usize) -> Result<BiasMatrices<T>> {
    Ok(BiasMatrices {
        r_group: group_bias_matrix(groups, n)?,
        r_node: node_bias_matrix(groups, n)?,
    })
}

/// Spectral metric matrix `Q` with `R_G(lambda) = ||Q lambda||^2` for a
/// fixed orthonormal basis; one row per ordered group pair.
pub fn spectral_group_matrix<T: Scalar>(
    v: &DMatrix<T>,
    groups: &GroupAssignment,
) -> Result<DMatrix<T>> {
    groups.require_min_size_two()?;
    let g = groups.n_groups();
    let n = groups.n();
    let sizes = groups.sizes();
    let vv = v.component_mul(v);
    let responses: Vec<DVector<T>> = (0..g)
        .map(|k| v.transpose() * groups.indicator::<T>(k))
        .collect();
    let diag_resp: Vec<DVector<T>> = (0..g)
        .map(|k| vv.transpose() * groups.indicator::<T>(k))
        .collect();
    let norm = T::one() / T::of(((g * g - g) as f64).sqrt());
    let mut rows = DMatrix::<T>::zeros(g * g - g, n);
    let mut r = 0;
    for a in 0..g {
        let na = T::of(sizes[a] as f64);
        let denom_within = na * na - na;
        for b in 0..g {
            if a == b {
                continue;
            }
            let nb = T::of(sizes[b] as f64);
            for i in 0..n {
                let zi = responses[a][i];
                rows[(r, i)] = norm
                    * (zi * zi / denom_within - zi * responses[b][i] / (na * nb)
                        - diag_resp[a][i] / denom_within);
            }
            r += 1;
        }
    }
    Ok(rows)
}

/// Spectral metric matrix with `R_N(lambda) = ||T lambda||^2`, `G` blocks
/// of `N` rows.
pub fn spectral_node_matrix<T: Scalar>(
    v: &DMatrix<T>,
    groups: &GroupAssignment,
) -> Result<DMatrix<T>> {
    let g = groups.n_groups();
    let n = groups.n();
    let vv = v.component_mul(v);
    let norm = T::one() / (T::of((g - 1) as f64) * T::of(((g * n) as f64).sqrt()));
    let mut rows = DMatrix::<T>::zeros(g * n, n);
    for a in 0..g {
        let m = node_contrast::<T>(groups, a);
        let freq = v.transpose() * &m;
        // lambda^T [diag(V^T m) - (V o V)^T diag(m) V] row per eigenindex.
        let corrector = vv.transpose() * DMatrix::from_diagonal(&m) * v;
        for row in 0..n {
            for col in 0..n {
                let main = if row == col { freq[row] } else { T::zero() };
                rows[(a * n + row, col)] = (main - corrector[(col, row)]) * norm;
            }
        }
    }
    Ok(rows)
}

/// Average-edge-weight-normalized bias used for reporting:
/// `(N^2 - N) sqrt(R) / (2 ||S||_1)`.
pub fn normalized_bias<T: Scalar>(
    gso: &Gso<T>,
    groups: &GroupAssignment,
    which: BiasMetric,
) -> Result<T> {
    let l1 = gso.mat().iter().fold(T::zero(), |a, x| a + x.abs());
    if l1 <= T::zero() {
        return Err(Error::InvalidParameter(
            "normalized bias needs a nonzero GSO".into(),
        ));
    }
    let r = match which {
        BiasMetric::Group => bias_group(gso, groups)?,
        BiasMetric::Node => bias_node(gso, groups)?,
    };
    let n = T::of(gso.n() as f64);
    Ok((n * n - n) * r.sqrt() / (T::of(2.0) * l1))
}

/// Normalized squared error `||est - target||_F^2 / ||target||_F^2`.
pub fn relative_error<T: Scalar>(est: &Gso<T>, target: &Gso<T>) -> Result<T> {
    if est.n() != target.n() {
        return Err(Error::Dimension {
            expected: target.n(),
            got: est.n(),
        });
    }
    let denom = target.mat().norm_squared();
    if denom <= T::zero() {
        return Err(Error::InvalidParameter(
            "relative error needs a nonzero target".into(),
        ));
    }
    Ok((est.mat() - target.mat()).norm_squared() / denom)
}

/// Cap on achievable bias imposed by the observed data: `||R Sigma^+||_2 eps`,
/// bounding `sqrt(R(S))` for any estimate with `||Sigma s||_2 <= eps`.
pub fn data_bias_capacity<T: Scalar>(
    bias_mat: &DMatrix<T>,
    sigma_dense: &DMatrix<T>,
    eps: T,
) -> Result<T> {
    let svd = sigma_dense.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= T::of(1e-10) * smax {
        return Err(Error::RankDeficient(format!(
            "stationarity operator has sigma_min/sigma_max = {:.3e}",
            (smin / smax).to_f64()
        )));
    }
    let pinv = svd
        .pseudo_inverse(T::of(1e-10) * smax)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    let prod = bias_mat * pinv;
    let spec_norm = prod.svd(false, false).singular_values.max();
    Ok(spec_norm * eps)
}
