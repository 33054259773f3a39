//! Graph-shift operators and their validity sets.
//!
//! A GSO is a symmetric `N x N` matrix representing an undirected weighted
//! graph, either as an adjacency matrix (zero diagonal, nonnegative
//! off-diagonal, row sums >= 1) or as a graph Laplacian (nonpositive
//! off-diagonal, zero row sums, diagonal >= 1).

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Which validity set a [`Gso`] lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GsoKind {
    Adjacency,
    Laplacian,
}

impl GsoKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GsoKind::Adjacency => "adjacency",
            GsoKind::Laplacian => "laplacian",
        }
    }
}

impl std::str::FromStr for GsoKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjacency" => Ok(GsoKind::Adjacency),
            "laplacian" => Ok(GsoKind::Laplacian),
            other => Err(Error::Parse(format!("unknown GSO kind `{other}`"))),
        }
    }
}

/// Relative symmetry tolerance used when accepting input matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Absolute tolerance on Laplacian row sums.
pub const ROW_SUM_TOL: f64 = 1e-10;

/// A graph-shift operator: a symmetric matrix plus its kind tag.
///
/// Immutable after construction; constructors reject inputs outside the
/// sign/diagonal pattern of the declared kind, except [`Gso::project_feasible`]
/// which clamps instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gso<T: Scalar> {
    kind: GsoKind,
    mat: DMatrix<T>,
}

/// Per-constraint outcome of [`Gso::validate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub symmetric: bool,
    pub sign_pattern: bool,
    pub diagonal_rule: bool,
    /// `S 1 >= 1` for adjacencies, `diag(S) >= 1` for Laplacians.
    pub degree_rule: bool,
    pub pass: bool,
}

impl<T: Scalar> Gso<T> {
    /// Wrap a matrix, checking the structural invariants of `kind`.
    ///
    /// The degree rule is deliberately not enforced here; it is reported by
    /// [`Gso::validate`] and handled by the solver as a penalty.
    pub fn new(kind: GsoKind, mat: DMatrix<T>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare(mat.nrows(), mat.ncols()));
        }
        let asym = max_asymmetry(&mat);
        let scale = mat.amax().to_f64().max(1.0);
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let gso = Self { kind, mat };
        let report = gso.validate();
        if !(report.sign_pattern && report.diagonal_rule) {
            return Err(Error::InvalidParameter(format!(
                "matrix violates the {} pattern (sign ok: {}, diagonal ok: {})",
                kind.as_str(),
                report.sign_pattern,
                report.diagonal_rule
            )));
        }
        Ok(gso)
    }

    /// Symmetrize, fix the diagonal and clamp off-diagonal signs so the
    /// result satisfies the sign and diagonal pattern of `kind`.
    ///
    /// For adjacencies: diagonal zeroed, negative off-diagonals clamped to 0.
    /// For Laplacians: positive off-diagonals clamped to 0, then the diagonal
    /// is rebuilt so that rows sum to zero. The degree rule is not enforced.
    pub fn project_feasible(mat: &DMatrix<T>, kind: GsoKind) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare(mat.nrows(), mat.ncols()));
        }
        let n = mat.nrows();
        let half = T::of(0.5);
        let mut m = DMatrix::<T>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = (mat[(i, j)] + mat[(j, i)]) * half;
            }
        }
        match kind {
            GsoKind::Adjacency => {
                for i in 0..n {
                    m[(i, i)] = T::zero();
                    for j in 0..n {
                        if i != j && m[(i, j)] < T::zero() {
                            m[(i, j)] = T::zero();
                        }
                    }
                }
            }
            GsoKind::Laplacian => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j && m[(i, j)] > T::zero() {
                            m[(i, j)] = T::zero();
                        }
                    }
                }
                for i in 0..n {
                    let mut off = T::zero();
                    for j in 0..n {
                        if i != j {
                            off += m[(i, j)];
                        }
                    }
                    m[(i, i)] = -off;
                }
            }
        }
        Ok(Self { kind, mat: m })
    }

    pub fn kind(&self) -> GsoKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<T> {
        &self.mat
    }

    pub fn into_mat(self) -> DMatrix<T> {
        self.mat
    }

    /// Off-diagonal part `S+` (diagonal entries zeroed).
    pub fn off_diagonal(&self) -> DMatrix<T> {
        let mut m = self.mat.clone();
        for i in 0..m.nrows() {
            m[(i, i)] = T::zero();
        }
        m
    }

    /// Degree vector `d = A 1` of the underlying adjacency.
    pub fn degrees(&self) -> DVector<T> {
        let n = self.n();
        let mut d = DVector::<T>::zeros(n);
        for i in 0..n {
            let mut acc = T::zero();
            for j in 0..n {
                if i != j {
                    acc += self.mat[(i, j)];
                }
            }
            d[i] = match self.kind {
                GsoKind::Adjacency => acc,
                GsoKind::Laplacian => -acc,
            };
        }
        d
    }

    /// Check every defining constraint of the kind's validity set.
    pub fn validate(&self) -> ValidationReport {
        let n = self.n();
        let m = &self.mat;
        let scale = m.amax().to_f64().max(1.0);
        let symmetric = max_asymmetry(m) <= SYMMETRY_TOL * scale;
        let (sign_pattern, diagonal_rule, degree_rule) = match self.kind {
            GsoKind::Adjacency => {
                let sign = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] >= T::zero()));
                let diag = (0..n).all(|i| m[(i, i)] == T::zero());
                let one = T::one();
                let deg = (0..n).all(|i| m.row(i).iter().fold(T::zero(), |a, &x| a + x) >= one);
                (sign, diag, deg)
            }
            GsoKind::Laplacian => {
                let sign = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] <= T::zero()));
                let tol = T::of(ROW_SUM_TOL);
                let diag = (0..n).all(|i| {
                    let row_sum = m.row(i).iter().fold(T::zero(), |a, &x| a + x);
                    row_sum.abs() <= tol
                });
                let deg = (0..n).all(|i| m[(i, i)] >= T::one());
                (sign, diag, deg)
            }
        };
        let pass = symmetric && sign_pattern && diagonal_rule && degree_rule;
        ValidationReport {
            symmetric,
            sign_pattern,
            diagonal_rule,
            degree_rule,
            pass,
        }
    }

    /// `L = diag(A 1) - A`. Errors unless `self` is an adjacency.
    pub fn to_laplacian(&self) -> Result<Gso<T>> {
        if self.kind != GsoKind::Adjacency {
            return Err(Error::Kind {
                expected: "adjacency",
                got: self.kind.as_str(),
            });
        }
        let n = self.n();
        let d = self.degrees();
        let mut l = -self.mat.clone();
        for i in 0..n {
            l[(i, i)] = d[i];
        }
        Ok(Gso {
            kind: GsoKind::Laplacian,
            mat: l,
        })
    }

    /// Recover `A = diag(L) - L`. Errors unless `self` is a Laplacian.
    pub fn to_adjacency(&self) -> Result<Gso<T>> {
        if self.kind != GsoKind::Laplacian {
            return Err(Error::Kind {
                expected: "laplacian",
                got: self.kind.as_str(),
            });
        }
        let n = self.n();
        let mut a = -self.mat.clone();
        for i in 0..n {
            a[(i, i)] = T::zero();
        }
        Ok(Gso {
            kind: GsoKind::Adjacency,
            mat: a,
        })
    }
}

fn max_asymmetry<T: Scalar>(m: &DMatrix<T>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)]).abs().to_f64();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adj2() -> Gso<f64> {
        Gso::new(
            GsoKind::Adjacency,
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        )
        .unwrap()
    }

    #[test]
    fn minimal_adjacency_passes() {
        assert!(adj2().validate().pass);
    }

    #[test]
    fn single_edge_laplacian_passes() {
        let l = Gso::new(
            GsoKind::Laplacian,
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]),
        )
        .unwrap();
        assert!(l.validate().pass);
    }

    #[test]
    fn sign_violation_fails() {
        let err = Gso::<f64>::new(
            GsoKind::Adjacency,
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]),
        );
        assert!(err.is_err());
    }

    #[test]
    fn non_square_is_rejected() {
        let err = Gso::<f64>::new(GsoKind::Adjacency, DMatrix::zeros(2, 3));
        assert!(matches!(err, Err(Error::NotSquare(2, 3))));
    }

    #[test]
    fn adjacency_to_laplacian_single_edge() {
        let l = adj2().to_laplacian().unwrap();
        assert_eq!(
            l.mat(),
            &DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
    }

    #[test]
    fn laplacian_round_trip_is_identity() {
        let path = Gso::new(
            GsoKind::Adjacency,
            DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]),
        )
        .unwrap();
        let l = path.to_laplacian().unwrap();
        assert_eq!(
            l.mat(),
            &DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0])
        );
        let back = l.to_adjacency().unwrap().to_laplacian().unwrap();
        assert_eq!(back.mat(), l.mat());
    }

    #[test]
    fn zero_adjacency_maps_to_zero_laplacian() {
        let z = Gso::<f64>::new(GsoKind::Adjacency, DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(z.to_laplacian().unwrap().mat(), &DMatrix::zeros(3, 3));
    }

    #[test]
    fn projection_clamps_and_zeroes() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, -0.2, -0.2, 0.5]);
        let p = Gso::<f64>::project_feasible(&m, GsoKind::Adjacency).unwrap();
        assert_eq!(p.mat(), &DMatrix::zeros(2, 2));
    }

    #[test]
    fn projection_is_idempotent_on_valid_input() {
        let a = adj2();
        let p = Gso::project_feasible(a.mat(), GsoKind::Adjacency).unwrap();
        assert_eq!(p.mat(), a.mat());
    }

    #[test]
    fn projection_symmetrizes() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.0, 0.0]);
        let p = Gso::<f64>::project_feasible(&m, GsoKind::Adjacency).unwrap();
        assert_eq!(
            p.mat(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.5, 1.5, 0.0])
        );
    }

    #[test]
    fn degree_rule_reported_not_enforced() {
        let weak = Gso::new(
            GsoKind::Adjacency,
            DMatrix::from_row_slice(2, 2, &[0.0, 0.25, 0.25, 0.0]),
        )
        .unwrap();
        let report = weak.validate();
        assert!(!report.degree_rule);
        assert!(!report.pass);
        assert!(report.sign_pattern && report.diagonal_rule);
    }
}
