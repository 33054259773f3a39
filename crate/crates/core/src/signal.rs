//! Stationary graph-signal synthesis and covariance estimation.
//!
//! Signals follow the diffusion model `x = H(S) w` with `w ~ N(0, I)` and
//! `H(S) = sum_k h_k S^k` a polynomial graph filter, so the signal
//! covariance `C = H(S)^2` shares eigenvectors with `S` and commutes with
//! it. Sampling uses a seeded ChaCha8 stream; parallel trials should
//! derive their seeds with [`derive_seed`] so runs stay reproducible
//! regardless of scheduling.

use crate::error::{Error, Result};
use crate::graph::Gso;
use crate::scalar::Scalar;
pub use crate::vectorize::eigendecompose_sym as eigendecompose;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Polynomial graph filter `H(S) = h_0 I + h_1 S + ... + h_K S^K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFilter<T: Scalar> {
    coeffs: Vec<T>,
}

impl<T: Scalar> GraphFilter<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().all(|c| *c == T::zero()) {
            return Err(Error::InvalidParameter(
                "filter needs at least one nonzero tap".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Apply `H(S)` to a bank of signals by Horner evaluation; no power of
    /// `S` is ever materialized.
    pub fn apply(&self, gso: &Gso<T>, input: &DMatrix<T>) -> Result<DMatrix<T>> {
        if input.nrows() != gso.n() {
            return Err(Error::Dimension {
                expected: gso.n(),
                got: input.nrows(),
            });
        }
        let k = self.coeffs.len() - 1;
        let mut out = input * self.coeffs[k];
        for tap in self.coeffs[..k].iter().rev() {
            out = gso.mat() * out + input * *tap;
        }
        Ok(out)
    }

    /// Dense `H(S)`.
    pub fn matrix(&self, gso: &Gso<T>) -> DMatrix<T> {
        let id = DMatrix::<T>::identity(gso.n(), gso.n());
        self.apply(gso, &id).expect("identity input always fits")
    }

    /// Rescale taps by a positive factor.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| *c * factor).collect(),
        }
    }
}

/// Two-tap low-pass filter `h = (1, 0.5)` rescaled so the model covariance
/// satisfies `||C||_F = N`. The taps themselves are an implementation
/// default, not a modeling claim; any filter can be passed explicitly.
pub fn default_filter<T: Scalar>(gso: &Gso<T>) -> Result<GraphFilter<T>> {
    let base = GraphFilter::new(vec![T::one(), T::of(0.5)])?;
    let c = true_covariance(gso, &base)?;
    let norm = c.norm();
    if norm <= T::zero() {
        return Err(Error::InvalidParameter("degenerate covariance".into()));
    }
    let factor = (T::of(gso.n() as f64) / norm).sqrt();
    Ok(base.scaled(factor))
}

/// A bank of stationary samples together with its provenance.
#[derive(Debug, Clone)]
pub struct SampleSet<T: Scalar> {
    x: DMatrix<T>,
    seed: u64,
}

impl<T: Scalar> SampleSet<T> {
    /// The `N x M` data matrix.
    pub fn data(&self) -> &DMatrix<T> {
        &self.x
    }

    pub fn n_samples(&self) -> usize {
        self.x.ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Draw `m` i.i.d. samples `x_i = H(S) w_i`, `w_i ~ N(0, I)`.
///
/// Deterministic in `seed`: the white-noise matrix is filled column by
/// column from a ChaCha8 stream.
pub fn sample_stationary<T: Scalar>(
    gso: &Gso<T>,
    filter: &GraphFilter<T>,
    m: usize,
    seed: u64,
) -> Result<SampleSet<T>> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = gso.n();
    let mut w = DMatrix::<T>::zeros(n, m);
    for c in 0..m {
        for r in 0..n {
            w[(r, c)] = T::standard_normal(&mut rng);
        }
    }
    let x = filter.apply(gso, &w)?;
    Ok(SampleSet { x, seed })
}

/// Sample covariance `C = (1/M) X X^T`.
pub fn sample_covariance<T: Scalar>(samples: &SampleSet<T>) -> DMatrix<T> {
    covariance_of(samples.data())
}

/// Sample covariance of an arbitrary `N x M` data matrix.
pub fn covariance_of<T: Scalar>(x: &DMatrix<T>) -> DMatrix<T> {
    let m = T::of(x.ncols() as f64);
    let mut c = x * x.transpose() / m;
    // enforce exact symmetry against accumulation-order noise
    for i in 0..c.nrows() {
        for j in (i + 1)..c.ncols() {
            let avg = (c[(i, j)] + c[(j, i)]) * T::of(0.5);
            c[(i, j)] = avg;
            c[(j, i)] = avg;
        }
    }
    c
}

/// Model covariance `C = H(S)^2`.
pub fn true_covariance<T: Scalar>(gso: &Gso<T>, filter: &GraphFilter<T>) -> Result<DMatrix<T>> {
    let h = filter.matrix(gso);
    Ok(&h * &h)
}

/// Split a base seed into a per-task seed (splitmix64 step on the pair),
/// so grids of trials can run in any order with stable streams.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(index.wrapping_mul(0xbf58476d1ce4e5b9))
        .wrapping_add(0x94d049bb133111eb);
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58476d1ce4e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
