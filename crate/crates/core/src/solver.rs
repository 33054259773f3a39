//! FairSpecTemp estimators and baselines.
//!
//! Both variants minimize `||S+||_1` over valid GSOs subject to a
//! stationarity constraint and an optional bias budget. The constraints
//! are handled as smooth quadratic penalties inside FISTA:
//!
//! ```text
//! f(m) = (alpha/2) ||Sigma m||^2                 (commutativity variant)
//!      + (beta/2)  max(0, ||R m|| - tau)^2
//!      + (gamma/2) ||max(0, 1 - E m)||^2
//! ```
//!
//! with the shared-eigenbasis variant replacing the first term by
//! `(alpha/2) ||W m - J mu||^2` over the joint variable `(m, mu)` and
//! optionally moving the bias term onto the spectrum `mu`. The proximal
//! step is an entrywise soft-threshold followed by a nonnegativity clamp;
//! `m` holds edge-weight magnitudes for either GSO kind.
//!
//! Constraint budgets `(epsilon, tau)` are enforced post hoc: the report
//! carries the true residuals plus per-constraint feasibility flags, and
//! an outer loop rescales the violated penalties by 10 (warm-started)
//! until the budgets are met or the scaling cap is reached. Failure to
//! converge is reported through the flags, never as an error.

use crate::error::{Error, Result};
use crate::graph::{Gso, GsoKind};
use crate::groups::GroupAssignment;
use crate::metrics::{
    group_bias_matrix, node_bias_matrix, spectral_group_matrix, spectral_node_matrix, BiasMetric,
};
use crate::scalar::Scalar;
use crate::vectorize::{
    degree_adjoint, degrees_from_half, lift, n_pairs, orthonormality_deviation,
    StationarityOperators,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Where the shared-eigenbasis variant places its bias penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasOn {
    /// Penalize `R(S)` through the half-vectorization.
    Gso,
    /// Penalize the spectral form `R(lambda)`; cheaper, but bounding
    /// `R(lambda)` does not bound `R(S)` once the basis is inexact, so
    /// the report always carries the spatial value as well.
    Spectrum,
}

/// Numeric knobs of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Stationarity budget on `||C S - S C||_F` (or the eigenbasis
    /// residual for the V variant).
    pub epsilon: f64,
    /// Bias budget: the constraint is `R(S) <= tau^2`. `None` disables
    /// the bound (`tau = infinity`).
    pub tau: Option<f64>,
    /// Bias metric; `None` recovers plain SpecTemp.
    pub metric: Option<BiasMetric>,
    /// Stationarity penalty weight.
    pub alpha: f64,
    /// Bias penalty weight.
    pub beta: f64,
    /// Degree-rule hinge weight.
    pub gamma: f64,
    pub max_iter: usize,
    /// Initial step size; estimated by power iteration when `None`.
    pub step: Option<f64>,
    /// Relative-change stopping tolerance.
    pub tol: f64,
    /// Adaptive restart on objective increase.
    pub restart: bool,
    /// Outer penalty-scaling rounds (1 = single solve, no rescaling).
    pub max_penalty_scalings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            tau: None,
            metric: None,
            alpha: 10.0,
            beta: 10.0,
            gamma: 10.0,
            max_iter: 2000,
            step: None,
            tol: 1e-7,
            restart: true,
            max_penalty_scalings: 6,
        }
    }
}

impl SolverConfig {
    fn check(&self) -> Result<()> {
        if self.epsilon < 0.0
            || self.tau.is_some_and(|t| t < 0.0)
            || self.alpha <= 0.0
            || self.beta <= 0.0
            || self.gamma <= 0.0
            || self.max_iter == 0
        {
            return Err(Error::InvalidParameter(
                "solver config: budgets must be >= 0, penalties > 0, max_iter >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Per-constraint feasibility of a finished solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityFlags {
    pub stationarity: bool,
    pub bias: bool,
    pub degree: bool,
}

impl FeasibilityFlags {
    pub fn all(&self) -> bool {
        self.stationarity && self.bias && self.degree
    }
}

/// Everything a solve produced, with true residuals so callers can accept
/// or reject the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport<T: Scalar> {
    pub gso: Gso<T>,
    /// GSO eigenvalue estimate, shared-eigenbasis variants only.
    pub lambda: Option<DVector<T>>,
    /// `||C S - S C||_F` for the commutativity variant, the eigenbasis
    /// residual `||S - V diag(lambda) V^T||_F` for the V variant.
    pub commutator_residual: T,
    /// `R(S)` under the configured metric.
    pub bias_value: Option<T>,
    /// Spectral-form bias `R(lambda)` when the penalty ran on the spectrum.
    pub spectral_bias_value: Option<T>,
    /// `||S+||_1`.
    pub l1_cost: T,
    pub feasible: FeasibilityFlags,
    /// Objective value per accepted FISTA iteration, across all penalty
    /// rounds.
    pub trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

const FLAG_SLACK: f64 = 1e-9;
const DEGREE_SLACK: f64 = 1e-6;

enum Variant<T: Scalar> {
    Commutativity,
    Eigenbasis {
        /// Bias matrix on the spectrum when penalizing `R(lambda)`.
        q_mat: Option<DMatrix<T>>,
    },
}

/// Smooth penalty model; the optimization variable is `[m]` for the C
/// variant and `[m; mu]` for the V variant.
struct Model<'a, T: Scalar> {
    ops: &'a StationarityOperators<T>,
    kind: GsoKind,
    variant: Variant<T>,
    r_mat: Option<DMatrix<T>>,
    alpha: T,
    beta: T,
    gamma: T,
    /// Norm-domain budget `tau`; `None` disables the bias hinge.
    tau: Option<T>,
    p: usize,
}

/// Squared hinge on the norm excess: `(beta/2) max(0, ||M x|| - tau)^2`.
/// Smooth wherever the hinge is active (`||M x|| > tau >= 0`), gradient
/// `beta (||M x|| - tau) M^T M x / ||M x||`.
fn bias_hinge_value<T: Scalar>(mat: &DMatrix<T>, x: &DVector<T>, tau: T, beta: T) -> T {
    let norm = (mat * x).norm();
    let excess = norm - tau;
    if excess <= T::zero() {
        T::zero()
    } else {
        beta * T::of(0.5) * excess * excess
    }
}

fn bias_hinge_grad<T: Scalar>(
    mat: &DMatrix<T>,
    x: &DVector<T>,
    tau: T,
    beta: T,
) -> Option<DVector<T>> {
    let v = mat * x;
    let norm = v.norm();
    let excess = norm - tau;
    if excess <= T::zero() || norm <= T::zero() {
        return None;
    }
    Some(mat.transpose() * v * (beta * excess / norm))
}

impl<T: Scalar> Model<'_, T> {
    fn split<'b>(&self, z: &'b DVector<T>) -> (DVector<T>, Option<DVector<T>>) {
        match self.variant {
            Variant::Commutativity => (z.clone(), None),
            Variant::Eigenbasis { .. } => {
                let m = DVector::from_fn(self.p, |i, _| z[i]);
                let mu = DVector::from_fn(z.len() - self.p, |i, _| z[self.p + i]);
                (m, Some(mu))
            }
        }
    }

    fn value(&self, z: &DVector<T>) -> T {
        let (m, mu) = self.split(z);
        let half = T::of(0.5);
        let mut total = T::zero();
        match &self.variant {
            Variant::Commutativity => {
                let r = self.ops.apply_stationarity(&m, self.kind);
                total += self.alpha * half * r.norm_squared();
            }
            Variant::Eigenbasis { .. } => {
                let mu = mu.as_ref().expect("eigenbasis variable present");
                let resid = self.ops.apply_lift(&m, self.kind) - self.ops.apply_j(mu);
                total += self.alpha * half * resid.norm_squared();
            }
        }
        if let (Some(r_mat), Some(tau)) = (&self.r_mat, self.tau) {
            total += bias_hinge_value(r_mat, &m, tau, self.beta);
        }
        if let Variant::Eigenbasis { q_mat: Some(q) } = &self.variant {
            if let Some(tau) = self.tau {
                let mu = self.split(z).1.expect("eigenbasis variable present");
                total += bias_hinge_value(q, &mu, tau, self.beta);
            }
        }
        let deg = degrees_from_half(&m, self.ops.n());
        let mut hinge = T::zero();
        for d in deg.iter() {
            let gap = T::one() - *d;
            if gap > T::zero() {
                hinge += gap * gap;
            }
        }
        total + self.gamma * half * hinge
    }

    fn gradient(&self, z: &DVector<T>) -> DVector<T> {
        let (m, mu) = self.split(z);
        let n = self.ops.n();
        let mut grad_m;
        let mut grad_mu: Option<DVector<T>> = None;
        match &self.variant {
            Variant::Commutativity => {
                let r = self.ops.apply_stationarity(&m, self.kind);
                grad_m = self.ops.adjoint_stationarity(&r, self.kind) * self.alpha;
            }
            Variant::Eigenbasis { q_mat } => {
                let mu = mu.as_ref().expect("eigenbasis variable present");
                let resid = self.ops.apply_lift(&m, self.kind) - self.ops.apply_j(mu);
                grad_m = self.ops.adjoint_lift(&resid, self.kind) * self.alpha;
                let mut gmu = self.ops.adjoint_j(&resid) * (-self.alpha);
                if let (Some(q), Some(tau)) = (q_mat, self.tau) {
                    if let Some(extra) = bias_hinge_grad(q, mu, tau, self.beta) {
                        gmu += extra;
                    }
                }
                grad_mu = Some(gmu);
            }
        }
        if let (Some(r_mat), Some(tau)) = (&self.r_mat, self.tau) {
            if let Some(extra) = bias_hinge_grad(r_mat, &m, tau, self.beta) {
                grad_m += extra;
            }
        }
        let deg = degrees_from_half(&m, n);
        let mut active = DVector::<T>::zeros(n);
        let mut any = false;
        for i in 0..n {
            let gap = T::one() - deg[i];
            if gap > T::zero() {
                active[i] = gap;
                any = true;
            }
        }
        if any {
            grad_m -= degree_adjoint(&active, n) * self.gamma;
        }
        match grad_mu {
            None => grad_m,
            Some(gmu) => {
                let mut out = DVector::<T>::zeros(self.p + gmu.len());
                for i in 0..self.p {
                    out[i] = grad_m[i];
                }
                for i in 0..gmu.len() {
                    out[self.p + i] = gmu[i];
                }
                out
            }
        }
    }

    /// Largest curvature of the quadratic part, by power iteration on the
    /// Gauss-Newton operator (bias hinges excluded; backtracking covers
    /// their local curvature).
    fn curvature_estimate(&self, dim: usize) -> T {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut v = DVector::<T>::from_fn(dim, |_, _| T::of(rng.random::<f64>() - 0.5));
        let mut lam = T::one();
        for _ in 0..30 {
            let norm = v.norm();
            if norm <= T::zero() {
                return T::one();
            }
            v /= norm;
            let (m, mu) = self.split(&v);
            let mut hm;
            let mut hmu = None;
            match &self.variant {
                Variant::Commutativity => {
                    let r = self.ops.apply_stationarity(&m, self.kind);
                    hm = self.ops.adjoint_stationarity(&r, self.kind) * self.alpha;
                }
                Variant::Eigenbasis { .. } => {
                    let mu = mu.expect("eigenbasis variable present");
                    let resid = self.ops.apply_lift(&m, self.kind) - self.ops.apply_j(&mu);
                    hm = self.ops.adjoint_lift(&resid, self.kind) * self.alpha;
                    hmu = Some(self.ops.adjoint_j(&resid) * (-self.alpha));
                }
            }
            let deg = degrees_from_half(&m, self.ops.n());
            hm += degree_adjoint(&deg, self.ops.n()) * self.gamma;
            if self.tau.is_some() {
                // active-hinge curvature upper bound
                if let Some(r) = &self.r_mat {
                    hm += r.transpose() * (r * &m) * self.beta;
                }
                if let Variant::Eigenbasis { q_mat: Some(q) } = &self.variant {
                    if let Some(gmu) = hmu.as_mut() {
                        let mu = self.split(&v).1.expect("eigenbasis variable present");
                        *gmu += q.transpose() * (q * mu) * self.beta;
                    }
                }
            }
            let hv = match hmu {
                None => hm,
                Some(gmu) => {
                    let mut out = DVector::<T>::zeros(dim);
                    for i in 0..self.p {
                        out[i] = hm[i];
                    }
                    for i in 0..gmu.len() {
                        out[self.p + i] = gmu[i];
                    }
                    out
                }
            };
            lam = hv.norm();
            v = hv;
        }
        if lam <= T::zero() {
            T::one()
        } else {
            lam
        }
    }
}

/// Soft-threshold the magnitude block and clamp it nonnegative; the
/// eigenvalue block passes through.
fn prox<T: Scalar>(z: &DVector<T>, threshold: T, p: usize) -> DVector<T> {
    DVector::from_fn(z.len(), |i, _| {
        if i < p {
            let v = z[i] - threshold;
            if v > T::zero() {
                v
            } else {
                T::zero()
            }
        } else {
            z[i]
        }
    })
}

fn l1_of_block<T: Scalar>(z: &DVector<T>, p: usize) -> T {
    (0..p).fold(T::zero(), |acc, i| acc + z[i].abs())
}

struct FistaOutcome<T: Scalar> {
    x: DVector<T>,
    trace: Vec<T>,
    iterations: usize,
    converged: bool,
}

fn fista<T: Scalar>(model: &Model<'_, T>, x0: DVector<T>, cfg: &SolverConfig) -> FistaOutcome<T> {
    let p = model.p;
    let dim = x0.len();
    let mut step = match cfg.step {
        Some(s) => T::of(s),
        None => T::one() / model.curvature_estimate(dim).max(T::of(1e-12)),
    };
    let mut x = x0.clone();
    let mut y = x0;
    let mut t_mom = T::one();
    let mut obj_prev = model.value(&x) + l1_of_block(&x, p);
    let mut trace = Vec::with_capacity(cfg.max_iter.min(4096));
    let mut converged = false;
    let mut iterations = 0;
    let half = T::of(0.5);

    for k in 0..cfg.max_iter {
        iterations = k + 1;
        let fy = model.value(&y);
        let gy = model.gradient(&y);
        let mut x_new;
        // backtracking on the smooth majorization, with mild regrowth so
        // one stiff stretch does not freeze the step for good
        step *= T::of(1.25);
        loop {
            x_new = prox(&(&y - &gy * step), step, p);
            let diff = &x_new - &y;
            let quad = fy + gy.dot(&diff) + diff.norm_squared() * half / step;
            if model.value(&x_new) <= quad + T::of(1e-12) * (T::one() + quad.abs()) {
                break;
            }
            step *= half;
            if step < T::of(1e-18) {
                break;
            }
        }
        let obj = model.value(&x_new) + l1_of_block(&x_new, p);
        trace.push(obj);

        let t_next = (T::one() + (T::one() + T::of(4.0) * t_mom * t_mom).sqrt()) * half;
        let momentum = (t_mom - T::one()) / t_next;
        let delta = &x_new - &x;
        let rel_change = delta.norm() / x.norm().max(T::one());
        if cfg.restart && obj > obj_prev {
            // restart momentum at the new point
            y = x_new.clone();
            t_mom = T::one();
        } else {
            y = &x_new + &delta * momentum;
            t_mom = t_next;
        }
        x = x_new;
        obj_prev = obj;
        if rel_change < T::of(cfg.tol) {
            converged = true;
            break;
        }
    }
    FistaOutcome {
        x,
        trace,
        iterations,
        converged,
    }
}

fn bias_matrix_for<T: Scalar>(
    metric: BiasMetric,
    groups: &GroupAssignment,
    n: usize,
) -> Result<DMatrix<T>> {
    match metric {
        BiasMetric::Group => group_bias_matrix(groups, n),
        BiasMetric::Node => node_bias_matrix(groups, n),
    }
}

fn spectral_matrix_for<T: Scalar>(
    metric: BiasMetric,
    v_hat: &DMatrix<T>,
    groups: &GroupAssignment,
) -> Result<DMatrix<T>> {
    match metric {
        BiasMetric::Group => spectral_group_matrix(v_hat, groups),
        BiasMetric::Node => spectral_node_matrix(v_hat, groups),
    }
}

struct SolveSetup<'a, T: Scalar> {
    ops: &'a StationarityOperators<T>,
    kind: GsoKind,
    groups: &'a GroupAssignment,
    cfg: &'a SolverConfig,
}

/// Smooth-penalty value and gradient at `z`, exactly as the solver sees
/// them; exists so the analytic gradients can be checked against finite
/// differences from the outside. For the commutativity variant `z` is the
/// magnitude half-vector; for the eigenbasis variant it is `[m; mu]`.
pub fn penalty_value_grad<T: Scalar>(
    ops: &StationarityOperators<T>,
    groups: &GroupAssignment,
    kind: GsoKind,
    cfg: &SolverConfig,
    eigenbasis: Option<BiasOn>,
    z: &DVector<T>,
) -> Result<(T, DVector<T>)> {
    cfg.check()?;
    let n = ops.n();
    let p = n_pairs(n);
    let tau: Option<T> = match (cfg.metric, cfg.tau) {
        (Some(_), Some(t)) if t.is_finite() => Some(T::of(t)),
        _ => None,
    };
    let r_mat = match (cfg.metric, eigenbasis) {
        (Some(metric), None) | (Some(metric), Some(BiasOn::Gso)) => {
            Some(bias_matrix_for::<T>(metric, groups, n)?)
        }
        _ => None,
    };
    let q_mat = match (cfg.metric, eigenbasis) {
        (Some(metric), Some(BiasOn::Spectrum)) => {
            Some(spectral_matrix_for::<T>(metric, ops.eigenvectors(), groups)?)
        }
        _ => None,
    };
    let model = Model {
        ops,
        kind,
        variant: match eigenbasis {
            None => Variant::Commutativity,
            Some(BiasOn::Gso) => Variant::Eigenbasis { q_mat: None },
            Some(BiasOn::Spectrum) => Variant::Eigenbasis { q_mat },
        },
        r_mat,
        alpha: T::of(cfg.alpha),
        beta: T::of(cfg.beta),
        gamma: T::of(cfg.gamma),
        tau,
        p,
    };
    let expected = if eigenbasis.is_some() { p + n } else { p };
    if z.len() != expected {
        return Err(Error::Dimension {
            expected,
            got: z.len(),
        });
    }
    Ok((model.value(z), model.gradient(z)))
}

/// Shared outer loop: run FISTA, check budgets, rescale violated
/// penalties by 10 with a warm start.
fn penalized_solve<T: Scalar>(
    setup: &SolveSetup<'_, T>,
    eigenbasis: Option<BiasOn>,
) -> Result<EstimateReport<T>> {
    let cfg = setup.cfg;
    cfg.check()?;
    let ops = setup.ops;
    let n = ops.n();
    if setup.groups.n() != n {
        return Err(Error::Dimension {
            expected: n,
            got: setup.groups.n(),
        });
    }
    let p = n_pairs(n);
    // an absent or infinite budget disables the hinge entirely, so
    // metric = Some with tau = None matches metric = None bit for bit
    let tau: Option<T> = match (cfg.metric, cfg.tau) {
        (Some(_), Some(t)) if t.is_finite() => Some(T::of(t)),
        _ => None,
    };
    let tau_sq = tau.map(|t| t * t);
    let r_mat = match (cfg.metric, eigenbasis) {
        (Some(metric), None) | (Some(metric), Some(BiasOn::Gso)) => {
            Some(bias_matrix_for::<T>(metric, setup.groups, n)?)
        }
        _ => None,
    };
    let q_mat = match (cfg.metric, eigenbasis) {
        (Some(metric), Some(BiasOn::Spectrum)) => Some(spectral_matrix_for::<T>(
            metric,
            ops.eigenvectors(),
            setup.groups,
        )?),
        _ => None,
    };
    // report matrix: the spatial metric is always reported when a metric
    // is configured, regardless of where the penalty sits
    let report_r = match cfg.metric {
        Some(metric) => Some(bias_matrix_for::<T>(metric, setup.groups, n)?),
        None => None,
    };

    let dim = if eigenbasis.is_some() { p + n } else { p };
    let mut x = DVector::<T>::zeros(dim);
    let mut model = Model {
        ops,
        kind: setup.kind,
        variant: match eigenbasis {
            None => Variant::Commutativity,
            Some(BiasOn::Gso) => Variant::Eigenbasis { q_mat: None },
            Some(BiasOn::Spectrum) => Variant::Eigenbasis { q_mat },
        },
        r_mat: if eigenbasis == Some(BiasOn::Spectrum) {
            None
        } else {
            r_mat
        },
        alpha: T::of(cfg.alpha),
        beta: T::of(cfg.beta),
        gamma: T::of(cfg.gamma),
        tau,
        p,
    };

    let eps = T::of(cfg.epsilon);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let out = fista(&model, x, cfg);
        x = out.x;
        trace.extend_from_slice(&out.trace);
        iterations += out.iterations;
        converged = out.converged;

        let (m, mu) = model.split(&x);
        let resid = match &model.variant {
            Variant::Commutativity => ops.apply_stationarity(&m, setup.kind).norm(),
            Variant::Eigenbasis { .. } => {
                let mu = mu.as_ref().expect("eigenbasis variable present");
                (ops.apply_lift(&m, setup.kind) - ops.apply_j(mu)).norm()
            }
        };
        let stationarity_ok = resid <= eps + T::of(FLAG_SLACK) * (T::one() + eps);
        let bias_ok = match (&model.variant, &model.r_mat, tau_sq) {
            (Variant::Eigenbasis { q_mat: Some(q) }, _, Some(t)) => {
                let mu = mu.as_ref().expect("eigenbasis variable present");
                (q * mu).norm_squared() <= t + T::of(FLAG_SLACK) * (T::one() + t)
            }
            (_, Some(r), Some(t)) => {
                (r * &m).norm_squared() <= t + T::of(FLAG_SLACK) * (T::one() + t)
            }
            _ => true,
        };
        let degree_ok = degrees_from_half(&m, n).min() >= T::one() - T::of(DEGREE_SLACK);

        if (stationarity_ok && bias_ok && degree_ok) || rounds >= cfg.max_penalty_scalings.max(1) {
            break;
        }
        let ten = T::of(10.0);
        if !stationarity_ok {
            model.alpha *= ten;
        }
        if !bias_ok {
            model.beta *= ten;
        }
        if !degree_ok {
            model.gamma *= ten;
        }
    }

    let (m, mu) = model.split(&x);
    let gso = lift(&m, setup.kind)?;
    let lambda = mu.as_ref().map(|mu| match setup.kind {
        GsoKind::Adjacency => mu.clone(),
        GsoKind::Laplacian => -mu.clone(),
    });
    let commutator_residual = match &model.variant {
        Variant::Commutativity => ops.apply_stationarity(&m, setup.kind).norm(),
        Variant::Eigenbasis { .. } => {
            let mu = mu.as_ref().expect("eigenbasis variable present");
            (ops.apply_lift(&m, setup.kind) - ops.apply_j(mu)).norm()
        }
    };
    let bias_value = report_r.as_ref().map(|r| (r * &m).norm_squared());
    let spectral_bias_value = match (&model.variant, &mu) {
        (Variant::Eigenbasis { q_mat: Some(q) }, Some(mu)) => Some((q * mu).norm_squared()),
        _ => None,
    };
    let constrained_bias = match &model.variant {
        Variant::Eigenbasis { q_mat: Some(_) } => spectral_bias_value,
        _ => bias_value,
    };
    let feasible = FeasibilityFlags {
        stationarity: commutator_residual <= eps + T::of(FLAG_SLACK) * (T::one() + eps),
        bias: match (constrained_bias, tau_sq) {
            (Some(b), Some(t)) => b <= t + T::of(FLAG_SLACK) * (T::one() + t),
            _ => tau_sq.is_none(),
        },
        degree: degrees_from_half(&m, n).min() >= T::one() - T::of(DEGREE_SLACK),
    };
    let l1_cost = T::of(2.0) * l1_of_block(&x, p);
    Ok(EstimateReport {
        gso,
        lambda,
        commutator_residual,
        bias_value,
        spectral_bias_value,
        l1_cost,
        feasible,
        trace,
        iterations,
        converged,
    })
}

/// FairSpecTemp with the commutativity constraint (convex relaxation of
/// the sparsest-commuting-GSO problem with a bias budget).
pub fn fair_spec_temp_c<T: Scalar>(
    c_hat: &DMatrix<T>,
    groups: &GroupAssignment,
    kind: GsoKind,
    cfg: &SolverConfig,
) -> Result<EstimateReport<T>> {
    let ops = StationarityOperators::build(c_hat)?;
    fair_spec_temp_c_with(&ops, groups, kind, cfg)
}

/// Same as [`fair_spec_temp_c`] with a prebuilt operator bundle (reuses
/// the eigendecomposition across solves on the same covariance).
pub fn fair_spec_temp_c_with<T: Scalar>(
    ops: &StationarityOperators<T>,
    groups: &GroupAssignment,
    kind: GsoKind,
    cfg: &SolverConfig,
) -> Result<EstimateReport<T>> {
    penalized_solve(
        &SolveSetup {
            ops,
            kind,
            groups,
            cfg,
        },
        None,
    )
}

/// FairSpecTemp with the shared-eigenbasis constraint: jointly estimates
/// the GSO and its eigenvalues in the basis `v_hat`.
pub fn fair_spec_temp_v<T: Scalar>(
    v_hat: &DMatrix<T>,
    groups: &GroupAssignment,
    kind: GsoKind,
    cfg: &SolverConfig,
    bias_on: BiasOn,
) -> Result<EstimateReport<T>> {
    let dev = orthonormality_deviation(v_hat);
    if dev > 1e-8 {
        return Err(Error::NotOrthonormal(dev));
    }
    // carry the basis through a stationarity bundle whose covariance is
    // V V^T-free; only the eigenvectors matter for the lift and J maps
    let c_proxy = {
        let n = v_hat.nrows();
        let gamma = DVector::<T>::from_fn(n, |i, _| T::of(1.0 + i as f64));
        let mut scaled = v_hat.clone();
        for (c, g) in gamma.iter().enumerate() {
            scaled.column_mut(c).scale_mut(*g);
        }
        scaled * v_hat.transpose()
    };
    let ops = StationarityOperators::build(&c_proxy)?;
    penalized_solve(
        &SolveSetup {
            ops: &ops,
            kind,
            groups,
            cfg,
        },
        Some(bias_on),
    )
}

/// Shared-eigenbasis solve reusing an existing operator bundle (the basis
/// is the bundle's covariance eigenvectors).
pub fn fair_spec_temp_v_with<T: Scalar>(
    ops: &StationarityOperators<T>,
    groups: &GroupAssignment,
    kind: GsoKind,
    cfg: &SolverConfig,
    bias_on: BiasOn,
) -> Result<EstimateReport<T>> {
    penalized_solve(
        &SolveSetup {
            ops,
            kind,
            groups,
            cfg,
        },
        Some(bias_on),
    )
}

/// SpecTemp without fairness: the commutativity variant with no bias
/// constraint.
pub fn spec_temp<T: Scalar>(
    c_hat: &DMatrix<T>,
    groups: &GroupAssignment,
    kind: GsoKind,
    cfg: &SolverConfig,
) -> Result<EstimateReport<T>> {
    let mut cfg = cfg.clone();
    cfg.metric = None;
    cfg.tau = None;
    fair_spec_temp_c(c_hat, groups, kind, &cfg)
}

/// Baseline: relocate `n_rewires` random edges to random empty slots;
/// edge count and weight multiset are preserved exactly.
pub fn rewire_baseline<T: Scalar>(est: &Gso<T>, n_rewires: usize, seed: u64) -> Result<Gso<T>> {
    let mut w: Vec<T> = crate::vectorize::half_vectorize(est).iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_rewires {
        let edges: Vec<usize> = (0..w.len()).filter(|&k| w[k] > T::zero()).collect();
        let empty: Vec<usize> = (0..w.len()).filter(|&k| w[k] == T::zero()).collect();
        if edges.is_empty() || empty.is_empty() {
            break;
        }
        let src = edges[rng.random_range(0..edges.len())];
        let dst = empty[rng.random_range(0..empty.len())];
        w[dst] = w[src];
        w[src] = T::zero();
    }
    lift(&DVector::from_vec(w), est.kind())
}

/// Baseline: rescale every group-pair block of the off-diagonal part so
/// all block averages (within blocks normalized by `N_g^2 - N_g`, across
/// blocks by `N_g N_h`) equal the global average edge weight. Support and
/// symmetry are preserved; all-zero blocks stay zero.
pub fn balance_baseline<T: Scalar>(est: &Gso<T>, groups: &GroupAssignment) -> Result<Gso<T>> {
    if est.n() != groups.n() {
        return Err(Error::Dimension {
            expected: groups.n(),
            got: est.n(),
        });
    }
    let n = est.n();
    let g = groups.n_groups();
    let sp = est.off_diagonal();
    let z = groups.indicator_matrix::<T>();
    let totals = z.transpose() * &sp * &z;
    let total_all: T = sp.iter().fold(T::zero(), |a, &x| a + x);
    let nf = T::of(n as f64);
    let global_avg = total_all / (nf * nf - nf);
    let mut scale = DMatrix::<T>::from_element(g, g, T::one());
    for a in 0..g {
        for b in 0..g {
            let na = T::of(groups.sizes()[a] as f64);
            let nb = T::of(groups.sizes()[b] as f64);
            let denom = if a == b { na * na - na } else { na * nb };
            let avg = totals[(a, b)] / denom;
            if avg > T::zero() {
                scale[(a, b)] = global_avg / avg;
            }
        }
    }
    let mut out = est.mat().clone();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[(i, j)] *= scale[(groups.label(i), groups.label(j))];
            }
        }
    }
    // blocks scale symmetrically, but enforce exactness anyway
    Gso::project_feasible(&out, est.kind())
}
