//! Config-driven experiment harness: scenario sweeps across grid points,
//! sample counts and seeds, with per-seed rows and per-point medians
//! emitted as CSV.
//!
//! Determinism: every task derives its RNG streams from the task's
//! (grid point, sample count, seed) coordinates, tasks run in a rayon
//! pool, and aggregation sorts by task index, so repeated runs produce
//! byte-identical `results.csv` / `medians.csv`. Wall-clock timings are
//! reported separately in the manifest, which is not byte-stable.

use crate::error::{Error, Result};
use crate::graph::{Gso, GsoKind};
use crate::groups::GroupAssignment;
use crate::metrics::{normalized_bias, relative_error, BiasMetric};
use crate::scalar::Scalar;
use crate::signal::{
    default_filter, derive_seed, sample_covariance, sample_stationary, true_covariance,
};
use crate::solver::{
    balance_baseline, fair_spec_temp_c_with, fair_spec_temp_v_with, rewire_baseline, BiasOn,
    SolverConfig,
};
use crate::synth::{generate, ScenarioKind, ScenarioSpec};
use crate::vectorize::StationarityOperators;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Estimation methods of the sweep roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// SpecTemp without fairness.
    St,
    /// Commutativity variant, group metric.
    FstCg,
    /// Commutativity variant, node metric.
    FstCn,
    /// Shared-eigenbasis variant (spectral bias penalty), group metric.
    FstVg,
    /// Shared-eigenbasis variant (spectral bias penalty), node metric.
    FstVn,
    /// SpecTemp with randomly rewired edges.
    StRw,
    /// SpecTemp with group-pair-balanced edge weights.
    StBa,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::St => "st",
            Method::FstCg => "fst_cg",
            Method::FstCn => "fst_cn",
            Method::FstVg => "fst_vg",
            Method::FstVn => "fst_vn",
            Method::StRw => "st_rw",
            Method::StBa => "st_ba",
        }
    }

    fn needs_st(self) -> bool {
        matches!(self, Method::StRw | Method::StBa)
    }
}

/// Scenario family swept over `params`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGrid {
    pub n: usize,
    pub g: usize,
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    pub kind: ScenarioKind,
    pub params: Vec<f64>,
    pub p: f64,
}

/// Versioned sweep configuration; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub scenario: ScenarioGrid,
    pub methods: Vec<Method>,
    pub m_samples: Vec<usize>,
    pub seeds: Vec<u64>,
    pub solver: SolverConfig,
    /// Derive the stationarity budget per task from the planted instance
    /// (`eps = N omega sqrt(log N / M)`); when false `solver.epsilon`
    /// applies unchanged.
    #[serde(default = "default_true")]
    pub auto_epsilon: bool,
    /// Bias budget stated on the normalized scale: per task,
    /// `tau = b 2||S*||_1 / (N^2 - N)` so the constraint targets a
    /// normalized bias of roughly `b`. Overrides `solver.tau` when set.
    #[serde(default)]
    pub tau_normalized: Option<f64>,
}

fn default_true() -> bool {
    true
}

pub const SCHEMA_VERSION: u32 = 1;

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.scenario.params.is_empty()
            || self.methods.is_empty()
            || self.m_samples.is_empty()
            || self.seeds.is_empty()
        {
            return Err(Error::InvalidParameter(
                "scenario params, methods, m_samples and seeds must be nonempty".into(),
            ));
        }
        Ok(())
    }
}

/// One (grid point, seed, method) measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: f64,
    pub m: usize,
    pub seed: u64,
    pub method: Method,
    pub err: f64,
    pub bias_g: f64,
    pub bias_n: f64,
    pub residual: f64,
    pub feasible: bool,
    pub wall_ms: f64,
}

/// Per-(grid point, method) medians over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianRow {
    pub param: f64,
    pub m: usize,
    pub method: Method,
    pub err_med: f64,
    pub biasg_med: f64,
    pub biasn_med: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResults {
    pub rows: Vec<SweepRow>,
    pub medians: Vec<MedianRow>,
}

/// Lower median: for even counts the smaller of the two central values.
pub fn lower_median(values: &mut Vec<f64>) -> f64 {
    values.retain(|v| v.is_finite());
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[(values.len() - 1) / 2]
}

struct TaskOutput {
    index: usize,
    rows: Vec<SweepRow>,
}

/// Rescale so the smallest weighted row sum is exactly 1, keeping the
/// l1-minimal commuting GSO on the target's scale.
fn unit_min_row_sum<T: Scalar>(gso: &Gso<T>) -> Result<Gso<T>> {
    let min_deg = gso.degrees().min();
    if min_deg <= T::zero() {
        return Err(Error::InvalidParameter("graph has an isolated node".into()));
    }
    Gso::new(gso.kind(), gso.mat() / min_deg)
}

fn measure<T: Scalar>(
    gso: &Gso<T>,
    target: &Gso<T>,
    groups: &GroupAssignment,
    c_hat: &nalgebra::DMatrix<T>,
) -> (f64, f64, f64, f64) {
    let err = relative_error(gso, target).map_or(f64::NAN, |v| v.to_f64());
    let bias_g = normalized_bias(gso, groups, BiasMetric::Group).map_or(f64::NAN, |v| v.to_f64());
    let bias_n = normalized_bias(gso, groups, BiasMetric::Node).map_or(f64::NAN, |v| v.to_f64());
    let resid = (c_hat * gso.mat() - gso.mat() * c_hat).norm().to_f64();
    (err, bias_g, bias_n, resid)
}

fn run_task<T: Scalar>(cfg: &ExperimentConfig, index: usize, param: f64, m: usize, seed: u64) -> Result<Vec<SweepRow>> {
    let scen_seed = derive_seed(seed, index as u64);
    let spec = ScenarioSpec {
        n: cfg.scenario.n,
        g: cfg.scenario.g,
        sizes: cfg.scenario.sizes.clone(),
        kind: cfg.scenario.kind,
        param,
        p: cfg.scenario.p,
        seed: scen_seed,
    };
    // In the weight-bias scenario the error target is the unperturbed
    // fair graph while the data comes from the weight-biased copy; in
    // every other scenario the two coincide.
    let (target, data_gso, groups) = if cfg.scenario.kind == ScenarioKind::WeightBias {
        let base_spec = ScenarioSpec {
            kind: ScenarioKind::PlainEr,
            param: 0.0,
            ..spec.clone()
        };
        let (raw_base, groups) = generate::<T>(&base_spec)?;
        let target = unit_min_row_sum(&raw_base)?;
        let biased = crate::synth::bias_weights(&target, &groups, param)?;
        (target, unit_min_row_sum(&biased)?, groups)
    } else {
        let (raw_target, groups) = generate::<T>(&spec)?;
        let target = unit_min_row_sum(&raw_target)?;
        (target.clone(), target, groups)
    };

    let filter = default_filter(&data_gso)?;
    let samples = sample_stationary(&data_gso, &filter, m, derive_seed(scen_seed, 1))?;
    let c_hat = sample_covariance(&samples);
    let ops = StationarityOperators::build(&c_hat)?;

    let mut solver = cfg.solver.clone();
    if cfg.auto_epsilon {
        let c_true = true_covariance(&data_gso, &filter)?;
        let omega = crate::guarantees::omega_from_true_covariance(&data_gso, &c_true);
        solver.epsilon = crate::guarantees::recommended_eps(data_gso.n(), omega, m, 1.0);
    }
    if let Some(b) = cfg.tau_normalized {
        let n = target.n() as f64;
        let l1: f64 = target.mat().iter().map(|x| x.abs().to_f64()).sum();
        solver.tau = Some(b * 2.0 * l1 / (n * n - n));
    }

    let st_needed = cfg
        .methods
        .iter()
        .any(|meth| meth.needs_st() || *meth == Method::St);
    let st_report = if st_needed {
        let mut st_cfg = solver.clone();
        st_cfg.metric = None;
        st_cfg.tau = None;
        Some(fair_spec_temp_c_with(&ops, &groups, GsoKind::Adjacency, &st_cfg)?)
    } else {
        None
    };

    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let start = std::time::Instant::now();
        let (gso, residual, feasible) = match method {
            Method::St => {
                let rep = st_report.as_ref().expect("st precomputed");
                (
                    rep.gso.clone(),
                    rep.commutator_residual.to_f64(),
                    rep.feasible.all(),
                )
            }
            Method::FstCg | Method::FstCn => {
                let mut c = solver.clone();
                c.metric = Some(if method == Method::FstCg {
                    BiasMetric::Group
                } else {
                    BiasMetric::Node
                });
                let rep = fair_spec_temp_c_with(&ops, &groups, GsoKind::Adjacency, &c)?;
                (
                    rep.gso,
                    rep.commutator_residual.to_f64(),
                    rep.feasible.all(),
                )
            }
            Method::FstVg | Method::FstVn => {
                let mut c = solver.clone();
                c.metric = Some(if method == Method::FstVg {
                    BiasMetric::Group
                } else {
                    BiasMetric::Node
                });
                let rep = fair_spec_temp_v_with(
                    &ops,
                    &groups,
                    GsoKind::Adjacency,
                    &c,
                    BiasOn::Spectrum,
                )?;
                (
                    rep.gso,
                    rep.commutator_residual.to_f64(),
                    rep.feasible.all(),
                )
            }
            Method::StRw => {
                let rep = st_report.as_ref().expect("st precomputed");
                let edges = rep
                    .gso
                    .mat()
                    .iter()
                    .filter(|w| **w > T::zero())
                    .count()
                    / 2;
                let g = rewire_baseline(&rep.gso, edges, derive_seed(scen_seed, 2))?;
                (g, f64::NAN, rep.feasible.all())
            }
            Method::StBa => {
                let rep = st_report.as_ref().expect("st precomputed");
                let g = balance_baseline(&rep.gso, &groups)?;
                (g, f64::NAN, rep.feasible.all())
            }
        };
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let (err, bias_g, bias_n, resid_true) = measure(&gso, &target, &groups, &c_hat);
        rows.push(SweepRow {
            param,
            m,
            seed,
            method,
            err,
            bias_g,
            bias_n,
            residual: if residual.is_nan() { resid_true } else { residual },
            feasible,
            wall_ms,
        });
    }
    Ok(rows)
}

/// Run the full sweep: grid points x sample counts x seeds, methods per
/// task. Solver trouble surfaces in the per-row feasibility flag; only
/// malformed configs error.
pub fn run_sweep<T: Scalar>(cfg: &ExperimentConfig) -> Result<SweepResults> {
    cfg.validate()?;
    let mut tasks = Vec::new();
    for (pi, &param) in cfg.scenario.params.iter().enumerate() {
        for (mi, &m) in cfg.m_samples.iter().enumerate() {
            for (si, &seed) in cfg.seeds.iter().enumerate() {
                let index = (pi * cfg.m_samples.len() + mi) * cfg.seeds.len() + si;
                tasks.push((index, param, m, seed));
            }
        }
    }
    let mut outputs: Vec<TaskOutput> = tasks
        .par_iter()
        .map(|&(index, param, m, seed)| {
            run_task::<T>(cfg, index, param, m, seed).map(|rows| TaskOutput { index, rows })
        })
        .collect::<Result<Vec<_>>>()?;
    outputs.sort_by_key(|t| t.index);
    let rows: Vec<SweepRow> = outputs.into_iter().flat_map(|t| t.rows).collect();

    let mut medians = Vec::new();
    for &param in &cfg.scenario.params {
        for &m in &cfg.m_samples {
            for &method in &cfg.methods {
                let select =
                    |f: fn(&SweepRow) -> f64| -> Vec<f64> {
                        rows.iter()
                            .filter(|r| r.param == param && r.m == m && r.method == method)
                            .map(f)
                            .collect()
                    };
                medians.push(MedianRow {
                    param,
                    m,
                    method,
                    err_med: lower_median(&mut select(|r| r.err)),
                    biasg_med: lower_median(&mut select(|r| r.bias_g)),
                    biasn_med: lower_median(&mut select(|r| r.bias_n)),
                });
            }
        }
    }
    Ok(SweepResults { rows, medians })
}

/// Byte-stable CSV of per-seed rows (timings excluded; see module docs).
pub fn results_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("param,m,seed,method,err,bias_g,bias_n,residual,feasible\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.param, r.m, r.seed, r.method.name(), r.err, r.bias_g, r.bias_n, r.residual,
            r.feasible
        );
    }
    out
}

pub fn medians_csv(medians: &[MedianRow]) -> String {
    let mut out = String::from("param,m,method,err_med,biasg_med,biasn_med\n");
    for r in medians {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.param, r.m, r.method.name(), r.err_med, r.biasg_med, r.biasn_med
        );
    }
    out
}

/// Config echo plus provenance for a finished sweep.
pub fn manifest_json(cfg: &ExperimentConfig, total_wall_ms: f64) -> serde_json::Value {
    serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": cfg.schema_version,
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "seeds": cfg.seeds,
        "total_wall_ms": total_wall_ms,
    })
}
