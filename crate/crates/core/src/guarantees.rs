//! Numerical evaluation of the theoretical guarantees: the
//! convexity-equivalence conditions, the fairness-accuracy error bounds
//! with their phi constants, the target-feasibility and l1 tradeoff
//! inequalities, and the sparsity-versus-fairness condition.
//!
//! Everything here is a calculator over concrete instances; nothing is
//! estimated. Quantities that are not observable from data (the true
//! covariance, the target support) must be supplied by the caller, which
//! is why several helpers refuse to guess.

use crate::error::{Error, Result};
use crate::graph::{Gso, GsoKind};
use crate::groups::GroupAssignment;
use crate::metrics::{bias_group, bias_node, BiasMetric};
use crate::scalar::Scalar;
use crate::vectorize::{build_lift_operators, half_vectorize, StationarityOperators};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Inputs the bound formulas consume.
///
/// `k` must dominate the root of the target support size, `sigma_min` is
/// the smallest singular value of the stationarity operator for the
/// matching GSO kind, and `omega` (the max diagonal magnitude of `C` and
/// `S* C S*`) is only computable on planted instances where the true
/// covariance is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub k: f64,
    pub sigma_min: f64,
    pub eps: f64,
    pub tau: f64,
    pub omega: Option<f64>,
}

/// Tightest admissible sparsity proxy: the root of the half-vector
/// support size.
pub fn sparsity_proxy<T: Scalar>(target: &Gso<T>) -> f64 {
    let s = half_vectorize(target);
    (s.iter().filter(|x| **x != T::zero()).count() as f64).sqrt()
}

/// `omega = max(||C^-||_inf, ||(S* C S*)^-||_inf)` from the true
/// covariance; the diagonal mask makes both norms the largest diagonal
/// magnitude.
pub fn omega_from_true_covariance<T: Scalar>(target: &Gso<T>, c_true: &DMatrix<T>) -> f64 {
    let scs = target.mat() * c_true * target.mat();
    let diag_max = |m: &DMatrix<T>| {
        (0..m.nrows())
            .map(|i| m[(i, i)].abs().to_f64())
            .fold(0.0f64, f64::max)
    };
    diag_max(c_true).max(diag_max(&scs))
}

/// Budget recommendation `eps = c1 N omega sqrt(log N / M)`. The
/// probabilistic constant is not computable; `c1 = 1` is a documented
/// placeholder, so treat the output as a scale, not a certificate.
pub fn recommended_eps(n: usize, omega: f64, m_samples: usize, c1: f64) -> f64 {
    c1 * n as f64 * omega * ((n as f64).ln() / m_samples as f64).sqrt()
}

/// Smallest singular value of the dense stationarity operator of the
/// given kind.
pub fn stationarity_sigma_min<T: Scalar>(ops: &StationarityOperators<T>, kind: GsoKind) -> f64 {
    let dense = match kind {
        GsoKind::Adjacency => ops.sigma_dense(),
        GsoKind::Laplacian => ops.sigma_l_dense(),
    };
    dense.svd(false, false).singular_values.min().to_f64()
}

/// Largest singular value of the degree operator; `E E^T = (N-2) I + J`
/// gives the closed form `sqrt(2N - 2)`.
pub fn degree_operator_sigma_max(n: usize) -> f64 {
    ((2 * n - 2) as f64).sqrt()
}

/// Outcome of a convexity-equivalence check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    /// Condition (i): the stationarity operator restricted to the support
    /// has full column rank.
    pub rank_ok: bool,
    /// Condition (ii) value; the condition asks for `< 1`.
    pub inf_norm_value: f64,
    pub psi: f64,
    pub support: Vec<usize>,
    /// Diagnostic when the inner system was singular.
    pub note: Option<String>,
}

impl ConditionReport {
    pub fn verdict(&self) -> bool {
        self.rank_ok && self.inf_norm_value < 1.0
    }
}

const RANK_TOL: f64 = 1e-10;

fn rank_of<T: Scalar>(m: &DMatrix<T>) -> usize {
    if m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax <= T::zero() {
        return 0;
    }
    sv.iter().filter(|s| **s > T::of(RANK_TOL) * smax).count()
}

fn select_columns<T: Scalar>(m: &DMatrix<T>, cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

fn stack_rows<T: Scalar>(blocks: &[&DMatrix<T>]) -> DMatrix<T> {
    let cols = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::<T>::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(*b);
        at += b.nrows();
    }
    out
}

fn condition_check<T: Scalar>(
    stationarity_dense: DMatrix<T>,
    r_mat: &DMatrix<T>,
    support: &[usize],
    psi: f64,
) -> Result<ConditionReport> {
    let p = stationarity_dense.ncols();
    if psi <= 0.0 {
        return Err(Error::InvalidParameter(format!("psi = {psi} must be > 0")));
    }
    if support.iter().any(|&k| k >= p) {
        return Err(Error::InvalidParameter("support index out of range".into()));
    }
    let n = (stationarity_dense.nrows() as f64).sqrt() as usize;
    let lift = build_lift_operators::<T>(n)?;
    let rank_ok = if support.is_empty() {
        true
    } else {
        rank_of(&select_columns(&stationarity_dense, support)) == support.len()
    };

    if support.is_empty() {
        return Ok(ConditionReport {
            rank_ok,
            inf_norm_value: 0.0,
            psi,
            support: Vec::new(),
            note: None,
        });
    }

    let phi = stack_rows(&[&stationarity_dense, r_mat, &lift.deg]);
    let in_support = {
        let mut mask = vec![false; p];
        for &k in support {
            mask[k] = true;
        }
        mask
    };
    let inv_psi_sq = T::of(1.0 / (psi * psi));
    let mut inner = phi.transpose() * &phi * inv_psi_sq;
    for (k, &inside) in in_support.iter().enumerate() {
        if !inside {
            inner[(k, k)] += T::one();
        }
    }
    let Some(inv) = inner.lu().try_inverse() else {
        return Ok(ConditionReport {
            rank_ok,
            inf_norm_value: f64::INFINITY,
            psi,
            support: support.to_vec(),
            note: Some("inner matrix psi^-2 Phi^T Phi + I_comp is singular".into()),
        });
    };
    // infinity norm of the complement-rows / support-columns block
    let mut worst = 0.0f64;
    for (row, &inside) in in_support.iter().enumerate() {
        if inside {
            continue;
        }
        let mut acc = 0.0f64;
        for &col in support {
            acc += inv[(row, col)].abs().to_f64();
        }
        worst = worst.max(acc);
    }
    Ok(ConditionReport {
        rank_ok,
        inf_norm_value: worst,
        psi,
        support: support.to_vec(),
        note: None,
    })
}

/// Equivalence conditions for the commutativity variant: condition (i)
/// ranks the stationarity operator on the support, condition (ii)
/// evaluates the dual-certificate bound with `Phi` stacking the
/// stationarity, bias and degree operators.
pub fn check_convexity_c<T: Scalar>(
    ops: &StationarityOperators<T>,
    r_mat: &DMatrix<T>,
    support: &[usize],
    psi: f64,
    kind: GsoKind,
) -> Result<ConditionReport> {
    let dense = match kind {
        GsoKind::Adjacency => ops.sigma_dense(),
        GsoKind::Laplacian => ops.sigma_l_dense(),
    };
    condition_check(dense, r_mat, support, psi)
}

/// Equivalence conditions for the shared-eigenbasis variant, with the
/// eigenbasis residual operator in place of the commutator map.
pub fn check_convexity_v<T: Scalar>(
    ops: &StationarityOperators<T>,
    r_mat: &DMatrix<T>,
    support: &[usize],
    psi: f64,
    kind: GsoKind,
) -> Result<ConditionReport> {
    let dense = match kind {
        GsoKind::Adjacency => ops.f_dense(),
        GsoKind::Laplacian => ops.f_l_dense(),
    };
    condition_check(dense, r_mat, support, psi)
}

/// Log-spaced psi grid over `[1e-3, 1e3]` used when no psi is supplied;
/// the condition only asks for existence of some psi.
pub fn psi_grid(points: usize) -> Vec<f64> {
    let points = points.max(2);
    (0..points)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (points - 1) as f64))
        .collect()
}

/// Grid-search psi and keep the report with the smallest condition (ii)
/// value.
pub fn check_convexity_c_best<T: Scalar>(
    ops: &StationarityOperators<T>,
    r_mat: &DMatrix<T>,
    support: &[usize],
    kind: GsoKind,
) -> Result<ConditionReport> {
    let mut best: Option<ConditionReport> = None;
    for psi in psi_grid(25) {
        let rep = check_convexity_c(ops, r_mat, support, psi, kind)?;
        if best
            .as_ref()
            .is_none_or(|b| rep.inf_norm_value < b.inf_norm_value)
        {
            best = Some(rep);
        }
    }
    Ok(best.expect("grid is nonempty"))
}

pub fn check_convexity_v_best<T: Scalar>(
    ops: &StationarityOperators<T>,
    r_mat: &DMatrix<T>,
    support: &[usize],
    kind: GsoKind,
) -> Result<ConditionReport> {
    let mut best: Option<ConditionReport> = None;
    for psi in psi_grid(25) {
        let rep = check_convexity_v(ops, r_mat, support, psi, kind)?;
        if best
            .as_ref()
            .is_none_or(|b| rep.inf_norm_value < b.inf_norm_value)
        {
            best = Some(rep);
        }
    }
    Ok(best.expect("grid is nonempty"))
}

/// The phi constants entering the error bounds; fields not used by the
/// chosen metric stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiConstants {
    pub phi1: f64,
    pub phi2: Option<f64>,
    pub phi3: Option<f64>,
    pub phi4: Option<f64>,
    pub phi5: Option<f64>,
}

/// Evaluated error bounds for one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBounds {
    /// Deterministic lower bound on `||est - target||_1`.
    pub lower: f64,
    /// High-probability upper bound.
    pub upper: f64,
    /// Bias of the target under the chosen metric.
    pub target_bias: f64,
    /// Whether the target itself satisfies the bias budget.
    pub target_feasible: bool,
    pub phis: PhiConstants,
}

/// Evaluate the lower and upper error bounds for the chosen metric,
/// with the Laplacian upper-bound scaling `(2 + sigma_max(E)) / 2`.
pub fn error_bounds<T: Scalar>(
    target: &Gso<T>,
    groups: &GroupAssignment,
    inputs: &BoundInputs,
    metric: BiasMetric,
) -> Result<ErrorBounds> {
    if inputs.sigma_min <= 0.0 {
        return Err(Error::RankDeficient(
            "bounds need sigma_min > 0 (full column rank stationarity operator)".into(),
        ));
    }
    if inputs.k < sparsity_proxy(target) - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "k = {} below the admissible sparsity proxy {}",
            inputs.k,
            sparsity_proxy(target)
        )));
    }
    let n = target.n() as f64;
    let g = groups.n_groups() as f64;
    let n_min = groups.n_min() as f64;
    let n_max = groups.n_max() as f64;
    let z_norm_sq = groups.sizes_sq_sum();
    let (k, eps, tau) = (inputs.k, inputs.eps, inputs.tau);
    let sigma_min = inputs.sigma_min;

    let phi1 = 4.0 * k * (2.0 + k) / sigma_min;
    let (target_bias, lower, upper_unfair, phis) = match metric {
        BiasMetric::Group => {
            groups.require_min_size_two()?;
            let r = bias_group(target, groups)?.to_f64();
            let phi2 = 4.0 * (1.0 + k) * z_norm_sq / (sigma_min * n_min);
            let phi3 = 2.0 * (1.0 + k) * g * z_norm_sq;
            let lower = 0.5 * n_min * g.sqrt() * (r.sqrt() - tau);
            let upper = (phi1 + phi2) * eps + phi3 * r.sqrt();
            (
                r,
                lower,
                upper,
                PhiConstants {
                    phi1,
                    phi2: Some(phi2),
                    phi3: Some(phi3),
                    phi4: None,
                    phi5: None,
                },
            )
        }
        BiasMetric::Node => {
            let r = bias_node(target, groups)?.to_f64();
            let phi4 = 2.0 * (1.0 + k) * n_max * n_max * g.sqrt() / (sigma_min * n_min);
            let phi5 = (1.0 + k) * n_max * n_max * (g * g * g).sqrt();
            let lower = 0.5 * n_min * (g * n).sqrt() * (r.sqrt() - tau);
            let upper = (phi1 + phi4) * eps + phi5 * r.sqrt();
            (
                r,
                lower,
                upper,
                PhiConstants {
                    phi1,
                    phi2: None,
                    phi3: None,
                    phi4: Some(phi4),
                    phi5: Some(phi5),
                },
            )
        }
    };

    let target_feasible = target_bias <= tau * tau;
    let (mut lower, mut upper) = if target_feasible {
        (0.0, phi1 * eps)
    } else {
        (lower.max(0.0), upper_unfair)
    };
    if target.kind() == GsoKind::Laplacian {
        upper *= (2.0 + degree_operator_sigma_max(target.n())) / 2.0;
    }
    let _ = &mut lower;
    Ok(ErrorBounds {
        lower,
        upper,
        target_bias,
        target_feasible,
        phis,
    })
}

/// Target feasibility of the stationarity constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCheck {
    pub residual: f64,
    pub holds: bool,
}

/// `||C_hat S* - S* C_hat||_F <= eps`, with the observed residual.
pub fn lemma_feasibility<T: Scalar>(
    target: &Gso<T>,
    c_hat: &DMatrix<T>,
    eps: f64,
) -> Result<FeasibilityCheck> {
    if c_hat.nrows() != target.n() || c_hat.ncols() != target.n() {
        return Err(Error::Dimension {
            expected: target.n(),
            got: c_hat.nrows(),
        });
    }
    let residual = (c_hat * target.mat() - target.mat() * c_hat).norm().to_f64();
    Ok(FeasibilityCheck {
        residual,
        holds: residual <= eps,
    })
}

/// Outcome of the l1 tradeoff inequality on one feasible point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Preconditions actually satisfied by the supplied point:
    /// nonnegativity, the stationarity budget, and bias dominance
    /// `||R s|| < ||R s*||`.
    pub nonnegative: bool,
    pub stationarity_ok: bool,
    pub bias_dominated: bool,
}

impl TradeoffCheck {
    pub fn applicable(&self) -> bool {
        self.nonnegative && self.stationarity_ok && self.bias_dominated
    }
}

/// The l1 tradeoff bound: any nonnegative `s` within the stationarity
/// budget whose bias sits below the target's obeys an l1 cap driven by
/// the target bias and `eps / (sigma_min N_min)`.
pub fn lemma_l1_bounds<T: Scalar>(
    s: &DVector<T>,
    target_s: &DVector<T>,
    ops: &StationarityOperators<T>,
    groups: &GroupAssignment,
    r_mat: &DMatrix<T>,
    sigma_min: f64,
    eps: f64,
    metric: BiasMetric,
) -> Result<TradeoffCheck> {
    if s.len() != ops.n_pairs() || target_s.len() != s.len() {
        return Err(Error::Dimension {
            expected: ops.n_pairs(),
            got: s.len(),
        });
    }
    if sigma_min <= 0.0 {
        return Err(Error::RankDeficient("sigma_min must be > 0".into()));
    }
    let nonnegative = s.iter().all(|x| *x >= T::zero());
    let stationarity_ok = ops.apply_sigma(s).norm().to_f64() <= eps;
    let bias_s = (r_mat * s).norm().to_f64();
    let bias_target = (r_mat * target_s).norm().to_f64();
    let bias_dominated = bias_s < bias_target;

    let g = groups.n_groups() as f64;
    let n_min = groups.n_min() as f64;
    let n_max = groups.n_max() as f64;
    let slack = 2.0 * eps / (sigma_min * n_min);
    let rhs = match metric {
        BiasMetric::Group => groups.sizes_sq_sum() * (g * bias_target + slack),
        BiasMetric::Node => n_max * n_max * g.sqrt() / 2.0 * (g * bias_target + slack),
    };
    let lhs = s.iter().fold(0.0, |acc, x| acc + x.abs().to_f64());
    Ok(TradeoffCheck {
        lhs,
        rhs,
        holds: lhs <= rhs,
        nonnegative,
        stationarity_ok,
        bias_dominated,
    })
}

/// The sparsity-versus-fairness condition: when the target's l1 mass
/// dominates the tradeoff cap, the clean `phi1 eps` upper bound applies
/// even though the target violates the bias budget.
pub fn remark2_condition<T: Scalar>(
    target: &Gso<T>,
    groups: &GroupAssignment,
    sigma_min: f64,
    eps: f64,
    metric: BiasMetric,
) -> Result<TradeoffCheck> {
    if sigma_min <= 0.0 {
        return Err(Error::RankDeficient("sigma_min must be > 0".into()));
    }
    let g = groups.n_groups() as f64;
    let n_min = groups.n_min() as f64;
    let n_max = groups.n_max() as f64;
    let slack = 2.0 * eps / (sigma_min * n_min);
    let (bias_root, rhs) = match metric {
        BiasMetric::Group => {
            let r = bias_group(target, groups)?.to_f64().sqrt();
            (r, 2.0 * groups.sizes_sq_sum() * (g * r + slack))
        }
        BiasMetric::Node => {
            let r = bias_node(target, groups)?.to_f64().sqrt();
            (r, n_max * n_max * g.sqrt() * (g * r + slack))
        }
    };
    let _ = bias_root;
    let lhs = target.mat().iter().fold(0.0, |acc, x| acc + x.abs().to_f64());
    Ok(TradeoffCheck {
        lhs,
        rhs,
        holds: lhs >= rhs,
        nonnegative: true,
        stationarity_ok: true,
        bias_dominated: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::group_bias_matrix;
    use crate::signal::{default_filter, true_covariance};
    use crate::synth::{er_graph, DEFAULT_WEIGHTS};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn planted(n: usize, seed: u64) -> (Gso<f64>, DMatrix<f64>) {
        let g = er_graph::<f64>(n, 0.4, seed, DEFAULT_WEIGHTS).unwrap();
        let f = default_filter(&g).unwrap();
        let c = true_covariance(&g, &f).unwrap();
        (g, c)
    }

    /// Sample covariance at finite M: the exact model covariance has a
    /// nontrivial commuting null space (sigma_min = 0), so rank and
    /// sigma_min work needs the noisy operator of assumption (A3).
    fn planted_sampled(n: usize, m: usize, seed: u64) -> (Gso<f64>, DMatrix<f64>) {
        let g = er_graph::<f64>(n, 0.4, seed, DEFAULT_WEIGHTS).unwrap();
        let f = default_filter(&g).unwrap();
        let x = crate::signal::sample_stationary(&g, &f, m, seed ^ 0xabc).unwrap();
        (g, crate::signal::sample_covariance(&x))
    }

    #[test]
    fn identity_covariance_fails_rank() {
        let ops = StationarityOperators::build(&DMatrix::<f64>::identity(6, 6)).unwrap();
        let groups = GroupAssignment::balanced_halves(6).unwrap();
        let r = group_bias_matrix::<f64>(&groups, 6).unwrap();
        let rep = check_convexity_c(&ops, &r, &[0, 2, 5], 1.0, GsoKind::Adjacency).unwrap();
        assert!(!rep.rank_ok);
        assert!(!rep.verdict());
    }

    #[test]
    fn empty_support_is_vacuous() {
        let (_, c) = planted(6, 1);
        let ops = StationarityOperators::build(&c).unwrap();
        let groups = GroupAssignment::balanced_halves(6).unwrap();
        let r = group_bias_matrix::<f64>(&groups, 6).unwrap();
        let rep = check_convexity_c(&ops, &r, &[], 1.0, GsoKind::Adjacency).unwrap();
        assert!(rep.rank_ok);
        assert_eq!(rep.inf_norm_value, 0.0);
        assert!(rep.verdict());
    }

    #[test]
    fn condition_value_is_finite_on_planted_instance() {
        let (target, c) = planted_sampled(8, 400, 5);
        let ops = StationarityOperators::build(&c).unwrap();
        let groups = GroupAssignment::balanced_halves(8).unwrap();
        let r = group_bias_matrix::<f64>(&groups, 8).unwrap();
        let s = half_vectorize(&target);
        let support: Vec<usize> = (0..s.len()).filter(|&k| s[k] != 0.0).collect();
        let rep = check_convexity_c_best(&ops, &r, &support, GsoKind::Adjacency).unwrap();
        assert!(rep.inf_norm_value.is_finite());
        assert!(rep.rank_ok);
        let rep_v = check_convexity_v_best(&ops, &r, &support, GsoKind::Adjacency).unwrap();
        assert!(rep_v.inf_norm_value.is_finite());
    }

    #[test]
    fn psi_grid_spans_decades() {
        let grid = psi_grid(25);
        assert_relative_eq!(grid[0], 1e-3);
        assert_relative_eq!(*grid.last().unwrap(), 1e3, epsilon = 1e-9);
    }

    #[test]
    fn phi_formula_hand_values() {
        // k = 1, sigma_min = 2 -> phi1 = 6
        let (target, _) = planted(6, 2);
        let groups = GroupAssignment::balanced_halves(6).unwrap();
        let inputs = BoundInputs {
            k: 20.0,
            sigma_min: 2.0,
            eps: 0.0,
            tau: 1e9,
            omega: None,
        };
        let b = error_bounds(&target, &groups, &inputs, BiasMetric::Group).unwrap();
        assert!(b.target_feasible);
        assert_eq!(b.lower, 0.0);
        let k = 20.0;
        assert_relative_eq!(b.phis.phi1, 4.0 * k * (2.0 + k) / 2.0);
        let small = BoundInputs {
            k: 1.0,
            sigma_min: 2.0,
            ..inputs
        };
        // k = 1 admits a single-edge target
        let tiny = Gso::new(
            GsoKind::Adjacency,
            DMatrix::from_row_slice(4, 4, &[
                0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            ]),
        )
        .unwrap();
        let g4 = GroupAssignment::balanced_halves(4).unwrap();
        let b2 = error_bounds(&tiny, &g4, &small, BiasMetric::Group).unwrap();
        assert_relative_eq!(b2.phis.phi1, 6.0);
    }

    #[test]
    fn lower_bound_hand_value() {
        // N_min = 2, G = 2, sqrt(R_G) = 0.5, tau = 0.1
        // lower = 0.5 * 2 * sqrt(2) * 0.4 = sqrt(2) * 0.4
        let within_only = Gso::new(
            GsoKind::Adjacency,
            DMatrix::from_row_slice(4, 4, &[
                0.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5, 0.0,
            ]),
        )
        .unwrap();
        let groups = GroupAssignment::balanced_halves(4).unwrap();
        // R_G of this graph is 0.25, sqrt = 0.5
        assert_relative_eq!(bias_group(&within_only, &groups).unwrap(), 0.25);
        let inputs = BoundInputs {
            k: 2.0,
            sigma_min: 1.0,
            eps: 0.1,
            tau: 0.1,
            omega: None,
        };
        let b = error_bounds(&within_only, &groups, &inputs, BiasMetric::Group).unwrap();
        assert_relative_eq!(b.lower, 2f64.sqrt() * 0.4, epsilon = 1e-12);
        assert!(!b.target_feasible);
        assert!(b.upper >= b.lower);
    }

    #[test]
    fn upper_bound_is_homogeneous_in_eps() {
        let (target, _) = planted(8, 3);
        let groups = GroupAssignment::balanced_halves(8).unwrap();
        let base = BoundInputs {
            k: sparsity_proxy(&target),
            sigma_min: 0.7,
            eps: 0.3,
            tau: 1e9,
            omega: None,
        };
        let b1 = error_bounds(&target, &groups, &base, BiasMetric::Group).unwrap();
        let doubled = BoundInputs {
            eps: 0.6,
            ..base
        };
        let b2 = error_bounds(&target, &groups, &doubled, BiasMetric::Group).unwrap();
        assert_relative_eq!(b2.upper, 2.0 * b1.upper, epsilon = 1e-12);
    }

    #[test]
    fn laplacian_upper_bound_scaling() {
        let (target, _) = planted(8, 4);
        let lap = target.to_laplacian().unwrap();
        let groups = GroupAssignment::balanced_halves(8).unwrap();
        let inputs = BoundInputs {
            k: sparsity_proxy(&target) + 1.0,
            sigma_min: 1.0,
            eps: 0.2,
            tau: 0.0,
            omega: None,
        };
        let ba = error_bounds(&target, &groups, &inputs, BiasMetric::Node).unwrap();
        let bl = error_bounds(&lap, &groups, &inputs, BiasMetric::Node).unwrap();
        let scale = (2.0 + degree_operator_sigma_max(8)) / 2.0;
        assert_relative_eq!(bl.upper / ba.upper, scale, max_relative = 0.2);
    }

    #[test]
    fn degree_operator_closed_form_matches_svd() {
        for n in [4usize, 7, 11] {
            let e = build_lift_operators::<f64>(n).unwrap().deg;
            let sv = e.svd(false, false).singular_values.max();
            assert_relative_eq!(sv, degree_operator_sigma_max(n), epsilon = 1e-9);
        }
    }

    #[test]
    fn k_guard_rejects_undersized_proxy() {
        let (target, _) = planted(8, 6);
        let groups = GroupAssignment::balanced_halves(8).unwrap();
        let inputs = BoundInputs {
            k: 0.5,
            sigma_min: 1.0,
            eps: 0.1,
            tau: 0.1,
            omega: None,
        };
        assert!(error_bounds(&target, &groups, &inputs, BiasMetric::Group).is_err());
    }

    #[test]
    fn feasibility_lemma_examples() {
        let (target, c) = planted(8, 7);
        let check = lemma_feasibility(&target, &c, 1e-6).unwrap();
        assert!(check.residual < 1e-8);
        assert!(check.holds);
        // noisy covariance at eps = 0 fails
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noise = DMatrix::from_fn(8, 8, |_, _| rng.random::<f64>() * 0.01);
        let noisy = &c + &noise * noise.transpose();
        let check = lemma_feasibility(&target, &noisy, 0.0).unwrap();
        assert!(!check.holds);
    }

    #[test]
    fn tradeoff_zero_vector_holds() {
        let (target, c) = planted(8, 8);
        let ops = StationarityOperators::build(&c).unwrap();
        let groups = GroupAssignment::new(vec![0, 0, 0, 0, 0, 1, 1, 1]).unwrap();
        let r = group_bias_matrix::<f64>(&groups, 8).unwrap();
        let s_star = half_vectorize(&target);
        let zero = DVector::zeros(s_star.len());
        let check = lemma_l1_bounds(
            &zero,
            &s_star,
            &ops,
            &groups,
            &r,
            0.5,
            0.1,
            BiasMetric::Group,
        )
        .unwrap();
        assert_eq!(check.lhs, 0.0);
        assert!(check.holds);
        assert!(check.nonnegative && check.stationarity_ok);
    }

    #[test]
    fn tradeoff_flags_inapplicable_points() {
        let (target, c) = planted(8, 9);
        let ops = StationarityOperators::build(&c).unwrap();
        let groups = GroupAssignment::balanced_halves(8).unwrap();
        let r = group_bias_matrix::<f64>(&groups, 8).unwrap();
        let s_star = half_vectorize(&target);
        // the target itself is not bias-dominated by itself
        let check = lemma_l1_bounds(
            &s_star,
            &s_star,
            &ops,
            &groups,
            &r,
            0.5,
            1e9,
            BiasMetric::Group,
        )
        .unwrap();
        assert!(!check.bias_dominated);
        assert!(!check.applicable());
    }

    #[test]
    fn remark2_dense_fair_vs_sparse_biased() {
        let groups = GroupAssignment::balanced_halves(8).unwrap();
        // complete balanced graph: dense and exactly fair
        let k8 = Gso::new(
            GsoKind::Adjacency,
            DMatrix::from_fn(8, 8, |i, j| if i == j { 0.0 } else { 1.0 }),
        )
        .unwrap();
        let check = remark2_condition(&k8, &groups, 1.0, 0.01, BiasMetric::Group).unwrap();
        assert!(check.holds);
        // minimal within-only matching: sparse and biased
        let mut m = DMatrix::<f64>::zeros(8, 8);
        for (i, j) in [(0, 1), (2, 3), (4, 5), (6, 7)] {
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
        }
        let matching = Gso::new(GsoKind::Adjacency, m).unwrap();
        let check = remark2_condition(&matching, &groups, 1.0, 0.01, BiasMetric::Group).unwrap();
        assert!(!check.holds);
        // enormous eps blows up the right-hand side
        let check = remark2_condition(&k8, &groups, 1.0, 1e9, BiasMetric::Group).unwrap();
        assert!(!check.holds);
    }

    #[test]
    fn omega_and_recommended_eps() {
        let (target, c) = planted(8, 10);
        let omega = omega_from_true_covariance(&target, &c);
        assert!(omega > 0.0);
        let e1 = recommended_eps(8, omega, 100, 1.0);
        let e2 = recommended_eps(8, omega, 10_000, 1.0);
        assert!(e1 > e2);
    }

    #[test]
    fn sigma_min_positive_on_generic_instance() {
        let (_, c) = planted_sampled(6, 300, 11);
        let ops = StationarityOperators::build(&c).unwrap();
        let s = stationarity_sigma_min(&ops, GsoKind::Adjacency);
        assert!(s > 0.0);
    }
}
