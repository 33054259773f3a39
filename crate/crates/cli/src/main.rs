//! Command-line front end: metrics, signal export, scenario synthesis,
//! estimation, theory diagnostics, experiment sweeps and the investment
//! backtest.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fairspectemp::experiment::{manifest_json, medians_csv, results_csv, run_sweep, ExperimentConfig};
use fairspectemp::finance::{
    ingest_returns, rolling_estimate, run_strategy, FinanceMethod, Threshold,
};
use fairspectemp::graph::GsoKind;
use fairspectemp::guarantees::{
    check_convexity_c_best, check_convexity_v_best, error_bounds, lemma_feasibility,
    remark2_condition, sparsity_proxy, stationarity_sigma_min, BoundInputs,
};
use fairspectemp::io;
use fairspectemp::metrics::{
    bias_group, bias_node, build_bias_matrices, data_bias_capacity, normalized_bias,
    relative_error, BiasMetric,
};
use fairspectemp::signal::sample_stationary;
use fairspectemp::solver::{
    fair_spec_temp_c, fair_spec_temp_v, BiasOn, EstimateReport, SolverConfig,
};
use fairspectemp::synth::{generate, ScenarioKind, ScenarioSpec};
use fairspectemp::vectorize::{eigendecompose_sym, half_vectorize, StationarityOperators};
use fairspectemp::signal::GraphFilter;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "fairspectemp", version, about = "Fair graph estimation from stationary signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bias metrics of a graph (optionally against a reference graph).
    Metrics(MetricsArgs),
    /// Stationary signal synthesis and export.
    Signals(SignalsArgs),
    /// Generate a synthetic scenario graph and group file.
    Synth(SynthArgs),
    /// Estimate a GSO from a covariance or signal file.
    Estimate(EstimateArgs),
    /// Theory diagnostics for an estimate against a known target.
    Diagnose(DiagnoseArgs),
    /// Run a configured experiment sweep.
    Bench(BenchArgs),
    /// Bias-thresholded investment backtest.
    Finance(FinanceArgs),
}

#[derive(Args)]
struct MetricsArgs {
    /// Edge-list graph file.
    #[arg(long)]
    graph: PathBuf,
    /// Group file (one 1-based id per node).
    #[arg(long)]
    groups: PathBuf,
    /// Optional reference graph for the relative error.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Args)]
struct SignalsArgs {
    #[command(subcommand)]
    action: SignalsAction,
}

#[derive(Subcommand)]
enum SignalsAction {
    /// Sample stationary signals and write them as matrix CSV.
    Export {
        #[arg(long)]
        graph: PathBuf,
        /// Filter taps `h0,h1,...`; defaults to the normalized two-tap
        /// low-pass filter.
        #[arg(long, value_delimiter = ',')]
        taps: Option<Vec<f64>>,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario family.
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    g: usize,
    /// Explicit group sizes `a,b,...`.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Scenario knob (ratio / fraction / factor).
    #[arg(long, default_value_t = 0.5)]
    param: f64,
    /// ER edge probability.
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_graph: PathBuf,
    #[arg(long)]
    out_groups: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    PlainEr,
    AcrossRatio,
    Subgroup,
    WeightBias,
}

impl From<ScenarioArg> for ScenarioKind {
    fn from(a: ScenarioArg) -> Self {
        match a {
            ScenarioArg::PlainEr => ScenarioKind::PlainEr,
            ScenarioArg::AcrossRatio => ScenarioKind::AcrossRatio,
            ScenarioArg::Subgroup => ScenarioKind::Subgroup,
            ScenarioArg::WeightBias => ScenarioKind::WeightBias,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    C,
    V,
}

#[derive(Clone, Copy, ValueEnum)]
enum BiasOnArg {
    Gso,
    Spectrum,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Group,
    Node,
    None,
}

impl MetricArg {
    fn to_metric(self) -> Option<BiasMetric> {
        match self {
            MetricArg::Group => Some(BiasMetric::Group),
            MetricArg::Node => Some(BiasMetric::Node),
            MetricArg::None => None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Adjacency,
    Laplacian,
}

impl From<KindArg> for GsoKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Adjacency => GsoKind::Adjacency,
            KindArg::Laplacian => GsoKind::Laplacian,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Covariance matrix CSV.
    #[arg(long, conflicts_with = "signals")]
    cov: Option<PathBuf>,
    /// Signal matrix CSV (N rows, M columns); the sample covariance is
    /// computed internally.
    #[arg(long)]
    signals: Option<PathBuf>,
    #[arg(long)]
    groups: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::C)]
    variant: VariantArg,
    #[arg(long, value_enum, default_value_t = BiasOnArg::Spectrum)]
    bias_on: BiasOnArg,
    #[arg(long, value_enum, default_value_t = MetricArg::None)]
    metric: MetricArg,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Bias budget; `inf` disables the constraint.
    #[arg(long, default_value = "inf")]
    tau: String,
    #[arg(long, value_enum, default_value_t = KindArg::Adjacency)]
    kind: KindArg,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 6)]
    penalty_scalings: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Estimate JSON produced by `estimate`.
    #[arg(long)]
    estimate: PathBuf,
    /// Target graph edge list.
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    groups: PathBuf,
    /// Covariance CSV the estimate was computed from.
    #[arg(long)]
    cov: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::Group)]
    metric: MetricArg,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for results.csv, medians.csv and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FinanceArgs {
    #[arg(long)]
    returns: PathBuf,
    #[arg(long)]
    sectors: PathBuf,
    /// st | fst_cg | fst_cn | corr
    #[arg(long, default_value = "fst_cg")]
    method: String,
    #[arg(long, default_value_t = 60)]
    window: usize,
    #[arg(long, default_value_t = 2)]
    step: usize,
    /// Holding period in panel days; defaults to the step.
    #[arg(long)]
    holding: Option<usize>,
    /// `auto` or a fixed bias threshold.
    #[arg(long, default_value = "auto")]
    threshold: String,
    /// Interpret the input values as prices and convert to log-returns.
    #[arg(long, default_value_t = false)]
    from_prices: bool,
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_tau(text: &str) -> Result<Option<f64>> {
    match text {
        "inf" | "none" => Ok(None),
        other => Ok(Some(
            other
                .parse::<f64>()
                .with_context(|| format!("bad tau `{other}`"))?,
        )),
    }
}

fn cmd_metrics(args: &MetricsArgs) -> Result<serde_json::Value> {
    let gso = io::read_edge_list::<f64>(&args.graph)?;
    let groups = io::read_groups(&args.groups)?;
    let mut out = serde_json::json!({
        "n": gso.n(),
        "kind": gso.kind().as_str(),
        "r_group": bias_group(&gso, &groups)?,
        "r_node": bias_node(&gso, &groups)?,
        "b_group": normalized_bias(&gso, &groups, BiasMetric::Group)?,
        "b_node": normalized_bias(&gso, &groups, BiasMetric::Node)?,
    });
    if let Some(reference) = &args.reference {
        let target = io::read_edge_list::<f64>(reference)?;
        out["rel_err"] = serde_json::json!(relative_error(&gso, &target)?);
    }
    Ok(out)
}

fn cmd_signals(args: &SignalsArgs) -> Result<serde_json::Value> {
    match &args.action {
        SignalsAction::Export {
            graph,
            taps,
            samples,
            seed,
            out,
        } => {
            let gso = io::read_edge_list::<f64>(graph)?;
            let filter = match taps {
                Some(t) => GraphFilter::new(t.clone())?,
                None => fairspectemp::signal::default_filter(&gso)?,
            };
            let bank = sample_stationary(&gso, &filter, *samples, *seed)?;
            io::write_matrix_csv(out, bank.data())?;
            Ok(serde_json::json!({
                "written": out,
                "n": gso.n(),
                "samples": samples,
                "seed": seed,
            }))
        }
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<serde_json::Value> {
    let spec = ScenarioSpec {
        n: args.n,
        g: args.g,
        sizes: args.sizes.clone(),
        kind: args.scenario.into(),
        param: args.param,
        p: args.p,
        seed: args.seed,
    };
    let (gso, groups) = generate::<f64>(&spec)?;
    io::write_edge_list(&args.out_graph, &gso)?;
    io::write_groups(&args.out_groups, &groups)?;
    Ok(serde_json::json!({
        "graph": args.out_graph,
        "groups": args.out_groups,
        "edges": gso.mat().iter().filter(|w| **w != 0.0).count() / 2,
        "b_group": normalized_bias(&gso, &groups, BiasMetric::Group)?,
        "b_node": normalized_bias(&gso, &groups, BiasMetric::Node)?,
    }))
}

fn cmd_estimate(args: &EstimateArgs) -> Result<serde_json::Value> {
    let groups = io::read_groups(&args.groups)?;
    let c_hat = match (&args.cov, &args.signals) {
        (Some(cov), None) => io::read_matrix_csv::<f64>(cov)?,
        (None, Some(signals)) => {
            let x = io::read_matrix_csv::<f64>(signals)?;
            fairspectemp::signal::covariance_of(&x)
        }
        _ => bail!("pass exactly one of --cov or --signals"),
    };
    let cfg = SolverConfig {
        epsilon: args.eps,
        tau: parse_tau(&args.tau)?,
        metric: args.metric.to_metric(),
        max_iter: args.max_iter,
        max_penalty_scalings: args.penalty_scalings,
        ..Default::default()
    };
    let kind: GsoKind = args.kind.into();
    let report = match args.variant {
        VariantArg::C => fair_spec_temp_c(&c_hat, &groups, kind, &cfg)?,
        VariantArg::V => {
            let (v, _) = eigendecompose_sym(&c_hat)?;
            let bias_on = match args.bias_on {
                BiasOnArg::Gso => BiasOn::Gso,
                BiasOnArg::Spectrum => BiasOn::Spectrum,
            };
            fair_spec_temp_v(&v, &groups, kind, &cfg, bias_on)?
        }
    };
    std::fs::write(&args.out, serde_json::to_string_pretty(&report)?)?;
    Ok(serde_json::json!({
        "out": args.out,
        "commutator_residual": report.commutator_residual,
        "bias_value": report.bias_value,
        "l1_cost": report.l1_cost,
        "feasible": report.feasible,
        "iterations": report.iterations,
    }))
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<serde_json::Value> {
    let report: EstimateReport<f64> =
        serde_json::from_str(&std::fs::read_to_string(&args.estimate)?)?;
    let target = io::read_edge_list::<f64>(&args.target)?;
    let groups = io::read_groups(&args.groups)?;
    let c_hat = io::read_matrix_csv::<f64>(&args.cov)?;
    let Some(metric) = args.metric.to_metric() else {
        bail!("diagnose needs --metric group or node");
    };
    let ops = StationarityOperators::build(&c_hat)?;
    let kind = target.kind();
    let sigma_min = stationarity_sigma_min(&ops, kind);

    let inputs = BoundInputs {
        k: sparsity_proxy(&target),
        sigma_min,
        eps: args.eps,
        tau: args.tau,
        omega: None,
    };
    let bounds = error_bounds(&target, &groups, &inputs, metric)?;
    let feas = lemma_feasibility(&target, &c_hat, args.eps)?;
    let remark2 = remark2_condition(&target, &groups, sigma_min, args.eps, metric)?;

    let mats = build_bias_matrices::<f64>(&groups, target.n())?;
    let r_mat = match metric {
        BiasMetric::Group => &mats.r_group,
        BiasMetric::Node => &mats.r_node,
    };
    let s = half_vectorize(&target);
    let support: Vec<usize> = (0..s.len()).filter(|&k| s[k] != 0.0).collect();
    let cond_c = check_convexity_c_best(&ops, r_mat, &support, kind)?;
    let cond_v = check_convexity_v_best(&ops, r_mat, &support, kind)?;
    let sigma_dense = match kind {
        GsoKind::Adjacency => ops.sigma_dense(),
        GsoKind::Laplacian => ops.sigma_l_dense(),
    };
    let capacity = data_bias_capacity(r_mat, &sigma_dense, args.eps).ok();

    let err = relative_error(&report.gso, &target)?;
    let actual_l1: f64 = report
        .gso
        .mat()
        .iter()
        .zip(target.mat().iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    let out = serde_json::json!({
        "relative_error": err,
        "l1_error": actual_l1,
        "error_bounds": bounds,
        "lower_bound_holds": actual_l1 + 1e-9 >= bounds.lower,
        "target_feasibility": feas,
        "remark2": remark2,
        "condition_commutativity": cond_c,
        "condition_eigenbasis": cond_v,
        "sigma_min": sigma_min,
        "bias_capacity": capacity,
    });
    std::fs::write(&args.out, serde_json::to_string_pretty(&out)?)?;
    Ok(out)
}

fn cmd_bench(args: &BenchArgs) -> Result<serde_json::Value> {
    let cfg: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(&args.config)?)?;
    std::fs::create_dir_all(&args.out)?;
    let start = std::time::Instant::now();
    let results = run_sweep::<f64>(&cfg)?;
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    std::fs::write(args.out.join("results.csv"), results_csv(&results.rows))?;
    std::fs::write(args.out.join("medians.csv"), medians_csv(&results.medians))?;
    std::fs::write(
        args.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest_json(&cfg, total_ms))?,
    )?;
    Ok(serde_json::json!({
        "out": args.out,
        "rows": results.rows.len(),
        "total_wall_ms": total_ms,
    }))
}

fn cmd_finance(args: &FinanceArgs) -> Result<serde_json::Value> {
    let panel = ingest_returns::<f64>(&args.returns, &args.sectors, args.from_prices)?;
    let method: FinanceMethod = args.method.parse()?;
    let cfg = SolverConfig {
        tau: Some(args.tau),
        max_iter: 800,
        max_penalty_scalings: 3,
        ..Default::default()
    };
    let estimates = rolling_estimate(&panel, args.window, args.step, method, &cfg)?;
    let threshold = match args.threshold.as_str() {
        "auto" => Threshold::Auto,
        other => Threshold::Fixed(
            other
                .parse::<f64>()
                .with_context(|| format!("bad threshold `{other}`"))?,
        ),
    };
    let holding = args.holding.unwrap_or(args.step);
    let result = run_strategy(&estimates, &panel, holding, threshold)?;
    let out = serde_json::json!({
        "method": args.method,
        "window": args.window,
        "step": args.step,
        "holding": holding,
        "n_windows": estimates.len(),
        "dropped_rows": panel.dropped_rows,
        "threshold": result.threshold,
        "bias_series": result.bias_series,
        "decisions": result.decisions,
        "value_series": result.value_series,
        "final_value": result.final_value(),
    });
    std::fs::write(&args.out, serde_json::to_string_pretty(&out)?)?;
    Ok(out)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let summary = match &cli.command {
        Command::Metrics(args) => cmd_metrics(args)?,
        Command::Signals(args) => cmd_signals(args)?,
        Command::Synth(args) => cmd_synth(args)?,
        Command::Estimate(args) => cmd_estimate(args)?,
        Command::Diagnose(args) => cmd_diagnose(args)?,
        Command::Bench(args) => cmd_bench(args)?,
        Command::Finance(args) => cmd_finance(args)?,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
