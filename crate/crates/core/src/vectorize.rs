//! Half-vectorization machinery and the vectorized constraint operators.
//!
//! A symmetric GSO is fully described by its strict lower triangle
//! `s = vec(S)_L` of length `P = N(N-1)/2`. This module provides
//!
//! - the index sets `D`, `L`, `U` partitioning `[N^2]` into diagonal,
//!   lower- and upper-triangular positions of the column-major
//!   vectorization (0-based here);
//! - the lift operators: the duplication matrix `U` with `U s = vec(S+)`
//!   and the degree operator `E = (1^T (x) I) U` with `E s = S+ 1`;
//! - the stationarity operators built from a covariance `C`: the
//!   commutator map `Sigma` with `||Sigma s||_2 = ||C S - S C||_F`, the
//!   Khatri-Rao eigenvector map `J` whose columns are `v_i (x) v_i`, and
//!   the eigenbasis residual map `F = (I - J J^T) U`, together with their
//!   Laplacian counterparts `Sigma_L` and `F_L`.
//!
//! Every operator has a matrix-free application path (used by the solver,
//! avoiding the `N^2 x P` products) and a dense materialization (used by
//! the theorem checkers, which need singular values and ranks).
//!
//! Half-vector convention: entries are enumerated in column-major
//! lower-triangle order, i.e. pair `k <-> (i, j)` with `i < j` runs over
//! columns `i` first. For Laplacian GSOs the half-vector stores the edge
//! weights of the underlying adjacency (the negated off-diagonal), so the
//! same nonnegative vector parametrizes both kinds.

use crate::error::{Error, Result};
use crate::graph::{Gso, GsoKind};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Number of node pairs `N(N-1)/2`.
pub fn n_pairs(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Recover `N` from a half-vector length, if it is one.
pub fn n_from_pairs(p: usize) -> Option<usize> {
    let n = (1.0 + (1.0 + 8.0 * p as f64).sqrt()) / 2.0;
    let n = n.round() as usize;
    if n >= 2 && n_pairs(n) == p {
        Some(n)
    } else {
        None
    }
}

/// Node pairs `(i, j)`, `i < j`, in half-vector order.
pub fn pair_list(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n_pairs(n));
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Index sets of diagonal, lower- and upper-triangular entries of the
/// column-major vectorization of an `N x N` matrix, 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriIndexSets {
    pub d_set: Vec<usize>,
    /// Ascending; position of pair `k` is `n * i_k + j_k`.
    pub l_set: Vec<usize>,
    /// Same pair order as `l_set` (position `n * j_k + i_k`), so the two
    /// sets index matching entries of a symmetric matrix.
    pub u_set: Vec<usize>,
}

pub fn tri_index_sets(n: usize) -> Result<TriIndexSets> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    let d_set = (0..n).map(|i| n * i + i).collect();
    let pairs = pair_list(n);
    let l_set = pairs.iter().map(|&(i, j)| n * i + j).collect();
    let u_set = pairs.iter().map(|&(i, j)| n * j + i).collect();
    Ok(TriIndexSets { d_set, l_set, u_set })
}

/// Dense duplication and degree operators.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftOperators<T: Scalar> {
    /// `N^2 x P`; every column holds exactly two ones.
    pub dup: DMatrix<T>,
    /// `N x P`; `deg * s` are the row sums of the lifted hollow matrix.
    pub deg: DMatrix<T>,
}

pub fn build_lift_operators<T: Scalar>(n: usize) -> Result<LiftOperators<T>> {
    let idx = tri_index_sets(n)?;
    let p = n_pairs(n);
    let mut dup = DMatrix::<T>::zeros(n * n, p);
    for k in 0..p {
        dup[(idx.l_set[k], k)] = T::one();
        dup[(idx.u_set[k], k)] = T::one();
    }
    let mut deg = DMatrix::<T>::zeros(n, p);
    for (k, &(i, j)) in pair_list(n).iter().enumerate() {
        deg[(i, k)] = T::one();
        deg[(j, k)] = T::one();
    }
    Ok(LiftOperators { dup, deg })
}

/// Symmetric hollow matrix with strict lower triangle `s`.
pub fn hollow_from_half<T: Scalar>(s: &DVector<T>, n: usize) -> DMatrix<T> {
    debug_assert_eq!(s.len(), n_pairs(n));
    let mut m = DMatrix::<T>::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            m[(j, i)] = s[k];
            m[(i, j)] = s[k];
            k += 1;
        }
    }
    m
}

/// Strict lower triangle of a square matrix, in half-vector order.
pub fn half_from_lower<T: Scalar>(m: &DMatrix<T>) -> DVector<T> {
    let n = m.nrows();
    let mut s = DVector::<T>::zeros(n_pairs(n));
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            s[k] = m[(j, i)];
            k += 1;
        }
    }
    s
}

/// Adjoint of the duplication matrix: `(U^T vec(X))_k = X_ji + X_ij`.
pub fn fold_symmetric<T: Scalar>(m: &DMatrix<T>) -> DVector<T> {
    let n = m.nrows();
    let mut s = DVector::<T>::zeros(n_pairs(n));
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            s[k] = m[(j, i)] + m[(i, j)];
            k += 1;
        }
    }
    s
}

/// `E s`: row sums of the lifted hollow matrix.
pub fn degrees_from_half<T: Scalar>(s: &DVector<T>, n: usize) -> DVector<T> {
    let mut d = DVector::<T>::zeros(n);
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            d[i] += s[k];
            d[j] += s[k];
            k += 1;
        }
    }
    d
}

/// `E^T v`: `(E^T v)_k = v_i + v_j` for pair `k = (i, j)`.
pub fn degree_adjoint<T: Scalar>(v: &DVector<T>, n: usize) -> DVector<T> {
    let mut s = DVector::<T>::zeros(n_pairs(n));
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            s[k] = v[i] + v[j];
            k += 1;
        }
    }
    s
}

/// Edge-weight half-vector of a GSO. For Laplacians this is the negated
/// off-diagonal, i.e. the weights of the underlying adjacency, so the
/// result is nonnegative for any valid GSO.
pub fn half_vectorize<T: Scalar>(gso: &Gso<T>) -> DVector<T> {
    let lower = half_from_lower(gso.mat());
    match gso.kind() {
        GsoKind::Adjacency => lower,
        GsoKind::Laplacian => -lower,
    }
}

/// Rebuild a GSO from an edge-weight half-vector.
///
/// Adjacency: zero diagonal, off-diagonal `s`. Laplacian: off-diagonal
/// `-s` and diagonal `E s`, i.e. `vec(S)_D = -E vec(S)_L`.
pub fn lift<T: Scalar>(s: &DVector<T>, kind: GsoKind) -> Result<Gso<T>> {
    let n = n_from_pairs(s.len()).ok_or(Error::Dimension {
        expected: 0,
        got: s.len(),
    })?;
    let hollow = hollow_from_half(s, n);
    let mat = match kind {
        GsoKind::Adjacency => hollow,
        GsoKind::Laplacian => {
            let d = degrees_from_half(s, n);
            let mut l = -hollow;
            for i in 0..n {
                l[(i, i)] = d[i];
            }
            l
        }
    };
    Gso::new(kind, mat)
}

/// Eigendecomposition of a symmetric matrix with deterministic
/// conventions: eigenvalues ascending, and each eigenvector's
/// largest-magnitude entry made positive (first such entry on ties).
pub fn eigendecompose_sym<T: Scalar>(m: &DMatrix<T>) -> Result<(DMatrix<T>, DVector<T>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare(m.nrows(), m.ncols()));
    }
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs().to_f64());
        }
    }
    let scale = m.amax().to_f64().max(1.0);
    if worst > 1e-9 * scale {
        return Err(Error::NotSymmetric(worst));
    }
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let mut v = DMatrix::<T>::zeros(n, n);
    let mut gamma = DVector::<T>::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        gamma[dst] = eig.eigenvalues[src];
        let col = eig.eigenvectors.column(src);
        let mut lead = 0;
        for r in 1..n {
            if col[r].abs() > col[lead].abs() {
                lead = r;
            }
        }
        let flip = col[lead] < T::zero();
        for r in 0..n {
            v[(r, dst)] = if flip { -col[r] } else { col[r] };
        }
    }
    Ok((v, gamma))
}

/// Gram deviation `max |V^T V - I|`; used to gate spectral-domain inputs.
pub fn orthonormality_deviation<T: Scalar>(v: &DMatrix<T>) -> f64 {
    let gram = v.transpose() * v;
    let mut worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((gram[(i, j)] - target).abs().to_f64());
        }
    }
    worst
}

/// Vectorized stationarity constraint operators derived from a sample
/// covariance: the commutator map, the Khatri-Rao eigenvector map and the
/// eigenbasis residual map, plus their Laplacian counterparts.
///
/// The struct stores the covariance and its eigendecomposition; dense
/// operator matrices are materialized on demand while the `apply_*` /
/// `adjoint_*` methods evaluate products in `O(N^3)` without forming them.
#[derive(Debug, Clone)]
pub struct StationarityOperators<T: Scalar> {
    c_hat: DMatrix<T>,
    v_hat: DMatrix<T>,
    gamma: DVector<T>,
}

impl<T: Scalar> StationarityOperators<T> {
    /// Build from a symmetric covariance matrix.
    pub fn build(c_hat: &DMatrix<T>) -> Result<Self> {
        let (v_hat, gamma) = eigendecompose_sym(c_hat)?;
        Ok(Self {
            c_hat: c_hat.clone(),
            v_hat,
            gamma,
        })
    }

    pub fn n(&self) -> usize {
        self.c_hat.nrows()
    }

    pub fn n_pairs(&self) -> usize {
        n_pairs(self.n())
    }

    pub fn covariance(&self) -> &DMatrix<T> {
        &self.c_hat
    }

    /// Covariance eigenvectors, ascending eigenvalue order.
    pub fn eigenvectors(&self) -> &DMatrix<T> {
        &self.v_hat
    }

    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.gamma
    }

    fn commutator_vec(&self, x: &DMatrix<T>) -> DVector<T> {
        let g = x * &self.c_hat - &self.c_hat * x;
        DVector::from_column_slice(g.as_slice())
    }

    /// `Sigma s = vec(S C - C S)` for the hollow lift `S` of `s`.
    pub fn apply_sigma(&self, s: &DVector<T>) -> DVector<T> {
        self.commutator_vec(&hollow_from_half(s, self.n()))
    }

    /// `Sigma^T y` without forming the dense operator.
    pub fn adjoint_sigma(&self, y: &DVector<T>) -> DVector<T> {
        let n = self.n();
        let ymat = DMatrix::from_column_slice(n, n, y.as_slice());
        let g = &ymat * &self.c_hat - &self.c_hat * &ymat;
        fold_symmetric(&g)
    }

    /// Laplacian lift of a half-vector: `T = hollow(s) - diag(E s)`, so
    /// that `T` equals the Laplacian `S` when `s = vec(S)_L` (and `-S`
    /// when `s` holds edge weights).
    fn laplacian_lift(&self, s: &DVector<T>) -> DMatrix<T> {
        let n = self.n();
        let mut t = hollow_from_half(s, n);
        let d = degrees_from_half(s, n);
        for i in 0..n {
            t[(i, i)] = -d[i];
        }
        t
    }

    /// `Sigma_L s`, satisfying `||Sigma_L vec(S)_L||_2 = ||C S - S C||_F`
    /// for Laplacian `S`.
    pub fn apply_sigma_l(&self, s: &DVector<T>) -> DVector<T> {
        self.commutator_vec(&self.laplacian_lift(s))
    }

    pub fn adjoint_sigma_l(&self, y: &DVector<T>) -> DVector<T> {
        let n = self.n();
        let ymat = DMatrix::from_column_slice(n, n, y.as_slice());
        let g = &ymat * &self.c_hat - &self.c_hat * &ymat;
        let diag = DVector::from_fn(n, |i, _| g[(i, i)]);
        fold_symmetric(&g) - degree_adjoint(&diag, n)
    }

    /// `J mu = vec(V diag(mu) V^T)`.
    pub fn apply_j(&self, mu: &DVector<T>) -> DVector<T> {
        let scaled = {
            let mut m = self.v_hat.clone();
            for (c, &w) in mu.iter().enumerate() {
                m.column_mut(c).scale_mut(w);
            }
            m
        };
        let x = scaled * self.v_hat.transpose();
        DVector::from_column_slice(x.as_slice())
    }

    /// `J^T x = diag(V^T X V)`; also the pseudo-inverse of `J` since the
    /// Khatri-Rao columns of an orthonormal basis are orthonormal.
    pub fn adjoint_j(&self, x: &DVector<T>) -> DVector<T> {
        let n = self.n();
        let xmat = DMatrix::from_column_slice(n, n, x.as_slice());
        let w = self.v_hat.transpose() * xmat * &self.v_hat;
        DVector::from_fn(n, |i, _| w[(i, i)])
    }

    fn project_off_j(&self, x: DVector<T>) -> DVector<T> {
        let coeffs = self.adjoint_j(&x);
        x - self.apply_j(&coeffs)
    }

    /// `F s = (I - J J^T) U s`.
    pub fn apply_f(&self, s: &DVector<T>) -> DVector<T> {
        let hollow = hollow_from_half(s, self.n());
        self.project_off_j(DVector::from_column_slice(hollow.as_slice()))
    }

    /// `F_L s`, the Laplacian analogue of `F`.
    pub fn apply_f_l(&self, s: &DVector<T>) -> DVector<T> {
        let t = self.laplacian_lift(s);
        self.project_off_j(DVector::from_column_slice(t.as_slice()))
    }

    fn dense_from_apply(&self, apply: impl Fn(&DVector<T>) -> DVector<T>) -> DMatrix<T> {
        let p = self.n_pairs();
        let n2 = self.n() * self.n();
        let mut out = DMatrix::<T>::zeros(n2, p);
        let mut e = DVector::<T>::zeros(p);
        for k in 0..p {
            e[k] = T::one();
            out.set_column(k, &apply(&e));
            e[k] = T::zero();
        }
        out
    }

    /// Dense `N^2 x P` commutator operator.
    pub fn sigma_dense(&self) -> DMatrix<T> {
        self.dense_from_apply(|s| self.apply_sigma(s))
    }

    pub fn sigma_l_dense(&self) -> DMatrix<T> {
        self.dense_from_apply(|s| self.apply_sigma_l(s))
    }

    pub fn f_dense(&self) -> DMatrix<T> {
        self.dense_from_apply(|s| self.apply_f(s))
    }

    pub fn f_l_dense(&self) -> DMatrix<T> {
        self.dense_from_apply(|s| self.apply_f_l(s))
    }

    /// Dense `N^2 x N` Khatri-Rao matrix with columns `v_i (x) v_i`.
    pub fn j_dense(&self) -> DMatrix<T> {
        let n = self.n();
        let mut j = DMatrix::<T>::zeros(n * n, n);
        let mut e = DVector::<T>::zeros(n);
        for c in 0..n {
            e[c] = T::one();
            j.set_column(c, &self.apply_j(&e));
            e[c] = T::zero();
        }
        j
    }

    /// Pick the operator matching the GSO kind for commutator work.
    pub fn apply_stationarity(&self, s: &DVector<T>, kind: GsoKind) -> DVector<T> {
        match kind {
            GsoKind::Adjacency => self.apply_sigma(s),
            GsoKind::Laplacian => self.apply_sigma_l(s),
        }
    }

    pub fn adjoint_stationarity(&self, y: &DVector<T>, kind: GsoKind) -> DVector<T> {
        match kind {
            GsoKind::Adjacency => self.adjoint_sigma(y),
            GsoKind::Laplacian => self.adjoint_sigma_l(y),
        }
    }

    /// `W s = U s` (adjacency) or `(U - I_D E) s` (Laplacian): the full
    /// vectorization of the lifted GSO, up to sign for Laplacians.
    pub fn apply_lift(&self, s: &DVector<T>, kind: GsoKind) -> DVector<T> {
        let m = match kind {
            GsoKind::Adjacency => hollow_from_half(s, self.n()),
            GsoKind::Laplacian => self.laplacian_lift(s),
        };
        DVector::from_column_slice(m.as_slice())
    }

    pub fn adjoint_lift(&self, x: &DVector<T>, kind: GsoKind) -> DVector<T> {
        let n = self.n();
        let xmat = DMatrix::from_column_slice(n, n, x.as_slice());
        let folded = fold_symmetric(&xmat);
        match kind {
            GsoKind::Adjacency => folded,
            GsoKind::Laplacian => {
                let diag = DVector::from_fn(n, |i, _| xmat[(i, i)]);
                folded - degree_adjoint(&diag, n)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GsoKind;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frob(m: &DMatrix<f64>) -> f64 {
        m.norm()
    }

    #[test]
    fn index_sets_n3() {
        let idx = tri_index_sets(3).unwrap();
        // 1-based positions from the defining formulas are D={1,5,9},
        // L={2,3,6}, U={4,7,8}; shifted to 0-based indexing here.
        assert_eq!(idx.d_set, vec![0, 4, 8]);
        assert_eq!(idx.l_set, vec![1, 2, 5]);
        assert_eq!(idx.u_set, vec![3, 6, 7]);
    }

    #[test]
    fn index_sets_n2() {
        let idx = tri_index_sets(2).unwrap();
        assert_eq!(idx.d_set, vec![0, 3]);
        assert_eq!(idx.l_set, vec![1]);
        assert_eq!(idx.u_set, vec![2]);
    }

    #[test]
    fn index_sets_partition() {
        for n in 2..=8 {
            let idx = tri_index_sets(n).unwrap();
            let mut all: Vec<usize> = idx
                .d_set
                .iter()
                .chain(&idx.l_set)
                .chain(&idx.u_set)
                .copied()
                .collect();
            all.sort_unstable();
            assert_eq!(all, (0..n * n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn index_sets_reject_n1() {
        assert!(tri_index_sets(1).is_err());
    }

    #[test]
    fn half_vector_order_n3() {
        // S21 = a, S31 = b, S32 = c -> s = (a, b, c).
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 2.0, 3.0, 0.0]);
        let gso = Gso::new(GsoKind::Adjacency, m).unwrap();
        assert_eq!(half_vectorize(&gso), DVector::from_vec(vec![1.0, 2.0, 3.0]));
    }

    #[test]
    fn lift_unit_triangle() {
        let s = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let g = lift(&s, GsoKind::Adjacency).unwrap();
        let k3 = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 });
        assert_eq!(g.mat(), &k3);
    }

    #[test]
    fn lift_laplacian_degrees_from_half() {
        let s = DVector::from_vec(vec![1.0, 0.0, 1.0]);
        let g = lift(&s, GsoKind::Laplacian).unwrap();
        let expect =
            DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        assert_eq!(g.mat(), &expect);
    }

    #[test]
    fn lift_inverts_half_vectorize() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in [GsoKind::Adjacency, GsoKind::Laplacian] {
            let s = DVector::from_fn(n_pairs(5), |_, _| rng.random::<f64>());
            let g = lift(&s, kind).unwrap();
            assert_relative_eq!(half_vectorize(&g), s, epsilon = 1e-14);
        }
    }

    #[test]
    fn dup_degree_identities() {
        let ops = build_lift_operators::<f64>(3).unwrap();
        let s = DVector::from_vec(vec![2.0, 3.0, 5.0]);
        // deg * s = (a+b, a+c, b+c)
        assert_eq!(&ops.deg * &s, DVector::from_vec(vec![5.0, 7.0, 8.0]));
        let lifted = hollow_from_half(&s, 3);
        let vec_s = DVector::from_column_slice(lifted.as_slice());
        assert_eq!(&ops.dup * &s, vec_s);
    }

    #[test]
    fn dup_n2_shape() {
        let ops = build_lift_operators::<f64>(2).unwrap();
        assert_eq!(ops.dup.shape(), (4, 1));
        assert_eq!(ops.dup[(1, 0)], 1.0);
        assert_eq!(ops.dup[(2, 0)], 1.0);
        assert_eq!(ops.dup[(0, 0)], 0.0);
        assert_eq!(ops.dup[(3, 0)], 0.0);
    }

    #[test]
    fn dup_doubles_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ops = build_lift_operators::<f64>(5).unwrap();
        let s = DVector::from_fn(n_pairs(5), |k, _| {
            if k % 2 == 0 {
                rng.random::<f64>() + 0.1
            } else {
                0.0
            }
        });
        let lifted = &ops.dup * &s;
        let nnz_s = s.iter().filter(|x| **x != 0.0).count();
        let nnz_l = lifted.iter().filter(|x| **x != 0.0).count();
        assert_eq!(nnz_l, 2 * nnz_s);
    }

    #[test]
    fn matrix_free_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 6;
        let raw = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let c = &raw * raw.transpose();
        let ops = StationarityOperators::build(&c).unwrap();
        let lift_ops = build_lift_operators::<f64>(n).unwrap();

        let s = DVector::from_fn(n_pairs(n), |_, _| rng.random::<f64>());
        let sigma = ops.sigma_dense();
        assert_relative_eq!(&sigma * &s, ops.apply_sigma(&s), epsilon = 1e-10);
        let y = DVector::from_fn(n * n, |_, _| rng.random::<f64>() - 0.5);
        assert_relative_eq!(sigma.transpose() * &y, ops.adjoint_sigma(&y), epsilon = 1e-10);

        let sigma_l = ops.sigma_l_dense();
        assert_relative_eq!(&sigma_l * &s, ops.apply_sigma_l(&s), epsilon = 1e-10);
        assert_relative_eq!(
            sigma_l.transpose() * &y,
            ops.adjoint_sigma_l(&y),
            epsilon = 1e-10
        );

        let f = ops.f_dense();
        assert_relative_eq!(&f * &s, ops.apply_f(&s), epsilon = 1e-10);

        assert_relative_eq!(
            &lift_ops.deg * &s,
            degrees_from_half(&s, n),
            epsilon = 1e-12
        );
    }

    #[test]
    fn identity_covariance_gives_zero_sigma() {
        let ops = StationarityOperators::build(&DMatrix::<f64>::identity(4, 4)).unwrap();
        assert_eq!(frob(&ops.sigma_dense()), 0.0);
    }

    #[test]
    fn sigma_norm_hand_case_n2() {
        // C = diag(2, 1), s = 1 => ||C S - S C||_F = sqrt(2) for S = [[0,1],[1,0]].
        let c = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let ops = StationarityOperators::build(&c).unwrap();
        let s = DVector::from_vec(vec![1.0]);
        assert_relative_eq!(ops.apply_sigma(&s).norm(), 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn commutator_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = 4 + (rng.random::<u32>() % 4) as usize;
            let raw = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let c = &raw * raw.transpose();
            let ops = StationarityOperators::build(&c).unwrap();
            let s = DVector::from_fn(n_pairs(n), |_, _| rng.random::<f64>());
            let gso = lift(&s, GsoKind::Adjacency).unwrap();
            let comm = gso.mat() * &c - &c * gso.mat();
            assert_relative_eq!(ops.apply_sigma(&s).norm(), frob(&comm), epsilon = 1e-10);

            let lap = lift(&s, GsoKind::Laplacian).unwrap();
            let comm_l = lap.mat() * &c - &c * lap.mat();
            assert_relative_eq!(ops.apply_sigma_l(&s).norm(), frob(&comm_l), epsilon = 1e-10);
        }
    }

    #[test]
    fn khatri_rao_is_isometry_on_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let raw = DMatrix::from_fn(5, 5, |_, _| rng.random::<f64>() - 0.5);
        let c = &raw * raw.transpose();
        let ops = StationarityOperators::build(&c).unwrap();
        let j = ops.j_dense();
        let gram = j.transpose() * &j;
        assert_relative_eq!(gram, DMatrix::identity(5, 5), epsilon = 1e-10);
        // J J^T J = J, i.e. J^T acts as the pseudo-inverse.
        let jjj = &j * (j.transpose() * &j);
        assert!(frob(&(jjj - &j)) < 1e-8);
    }

    #[test]
    fn f_residual_matches_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 5;
        let raw = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let c = &raw * raw.transpose();
        let ops = StationarityOperators::build(&c).unwrap();
        let s = DVector::from_fn(n_pairs(n), |_, _| rng.random::<f64>());
        let us = ops.apply_lift(&s, GsoKind::Adjacency);
        // min over mu of ||U s - J mu|| is attained at mu = J^T U s.
        let mu = ops.adjoint_j(&us);
        let residual = (&us - ops.apply_j(&mu)).norm();
        assert_relative_eq!(ops.apply_f(&s).norm(), residual, epsilon = 1e-8);
    }

    #[test]
    fn eigendecompose_orders_and_reconstructs() {
        let c = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let (v, gamma) = eigendecompose_sym::<f64>(&c).unwrap();
        assert_eq!(gamma, DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let recon = &v * DMatrix::from_diagonal(&gamma) * v.transpose();
        assert_relative_eq!(recon, c, epsilon = 1e-10);
        for c in 0..3 {
            let col = v.column(c);
            let lead = (0..3)
                .max_by(|&a, &b| col[a].abs().partial_cmp(&col[b].abs()).unwrap())
                .unwrap();
            assert!(col[lead] > 0.0);
        }
    }
}
