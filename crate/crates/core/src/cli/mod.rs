//! The `momentopt` command line: estimation runs, diagnostic grids,
//! replication recipes and Sobol dumps, written as CSV and JSON.
//!
//! Settings come from an optional TOML file (`--config`); flags override it.
//! Exit status is 0 on success, 1 when a replication check fails, 2 for
//! usage and configuration errors and 3 for other failures.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{BuiltModel, ExperimentConfig, GridConfig, ModelConfig, SobolStarts, StartConfig, MODEL_KINDS};

use crate::diagnostics::{convexity_map, rank_grid_just_identified, rank_grid_over_identified};
use crate::error::{Error, Result};
use crate::io::{create_file, write_json_file, write_point_set_csv, write_series_csv};
use crate::model::{HessianConvention, WeightingKind};
use crate::models::Ma1Weighting;
use crate::numerics::Vector;
use crate::optimizers::{run, GlobalStepConfig, IterationTrace, Method, OptimizerConfig, Termination};
use crate::quasirandom::{map_to_box, random_shift, sobol};
use crate::replicate::{replicate, Recipe};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "MOMENTOPT_OUT";
pub const DEFAULT_OUT: &str = "momentopt-out";

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECKS_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_FAILURE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "momentopt", version, about = "Iterative GMM estimation and convergence diagnostics")]
pub struct Cli {
    /// TOML experiment file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = OUT_ENV)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one optimizer from each start; writes one trace per start and a summary.
    Estimate(EstimateArgs),
    /// Run several optimizers from the same starts.
    Compare(CompareArgs),
    /// Rank-condition grid of the model's Jacobian.
    RankGrid(GridCommandArgs),
    /// Smallest Hessian eigenvalue over a grid.
    ConvexityMap(ConvexityArgs),
    /// Run a replication recipe (or `all`) and compare with reference values.
    Replicate(ReplicateArgs),
    /// Write Sobol points, optionally shifted and mapped to a box.
    SobolDump(SobolArgs),
}

/// A comma-separated vector such as `-0.6` or `0,0.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<std::result::Result<Vec<f64>, String>>()
            .map(Point)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// One of ma1-calibrated, ma1, gaussian, cube-root.
    #[arg(long)]
    pub model: Option<String>,
    /// Root of the calibrated MA(1) model.
    #[arg(long, allow_hyphen_values = true)]
    pub theta_hat: Option<f64>,
    /// True MA(1) coefficient of the simulated sample.
    #[arg(long, allow_hyphen_values = true)]
    pub theta_true: Option<f64>,
    #[arg(long)]
    pub sample_size: Option<usize>,
    #[arg(long)]
    pub ar_order: Option<usize>,
    #[arg(long)]
    pub sample_seed: Option<u64>,
    /// identity or optimal (MA(1) samples only).
    #[arg(long)]
    pub weighting: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub ybar: Option<f64>,
}

impl ModelArgs {
    pub fn apply(&self, m: &mut ModelConfig) -> Result<()> {
        if let Some(kind) = &self.model {
            if kind != m.kind() {
                *m = ModelConfig::of_kind(kind)?;
            }
        }
        let given: Vec<&str> = [
            ("--theta-hat", self.theta_hat.is_some()),
            ("--theta-true", self.theta_true.is_some()),
            ("--sample-size", self.sample_size.is_some()),
            ("--ar-order", self.ar_order.is_some()),
            ("--sample-seed", self.sample_seed.is_some()),
            ("--weighting", self.weighting.is_some()),
            ("--mu", self.mu.is_some()),
            ("--sigma2", self.sigma2.is_some()),
            ("--ybar", self.ybar.is_some()),
        ]
        .into_iter()
        .filter_map(|(name, set)| set.then_some(name))
        .collect();
        let allowed: &[&str] = match m {
            ModelConfig::Ma1Calibrated { theta_hat } => {
                set(theta_hat, self.theta_hat);
                &["--theta-hat"]
            }
            ModelConfig::Ma1 {
                theta_true,
                n,
                p,
                seed,
                weighting,
            } => {
                set(theta_true, self.theta_true);
                set(n, self.sample_size);
                set(p, self.ar_order);
                set(seed, self.sample_seed);
                if let Some(w) = &self.weighting {
                    *weighting = match w.as_str() {
                        "identity" => Ma1Weighting::Identity,
                        "optimal" => Ma1Weighting::Optimal,
                        other => {
                            return Err(Error::Config(format!(
                                "unknown weighting {other:?}; available: identity, optimal"
                            )))
                        }
                    };
                }
                &["--theta-true", "--sample-size", "--ar-order", "--sample-seed", "--weighting"]
            }
            ModelConfig::Gaussian { mu, sigma2 } => {
                set(mu, self.mu);
                set(sigma2, self.sigma2);
                &["--mu", "--sigma2"]
            }
            ModelConfig::CubeRoot { ybar } => {
                set(ybar, self.ybar);
                &["--ybar"]
            }
        };
        match given.iter().find(|g| !allowed.contains(g)) {
            Some(flag) => Err(Error::Config(format!("{flag} does not apply to model {}", m.kind()))),
            None => Ok(()),
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct OptimizerArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Maximum number of iterations.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub lm_lambda: Option<f64>,
    #[arg(long)]
    pub step_tol: Option<f64>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    /// Enable the global step with this many Sobol candidates.
    #[arg(long)]
    pub global_step: Option<usize>,
    #[arg(long)]
    pub global_seed: Option<u64>,
}

impl OptimizerArgs {
    pub fn apply(&self, cfg: &mut OptimizerConfig) -> Result<()> {
        set(&mut cfg.gamma, self.gamma);
        set(&mut cfg.max_iter, self.iters);
        set(&mut cfg.lm_lambda, self.lm_lambda);
        set(&mut cfg.step_tol, self.step_tol);
        set(&mut cfg.grad_tol, self.grad_tol);
        if let Some(length) = self.global_step {
            cfg.global_step = Some(GlobalStepConfig {
                length,
                seed: self.global_seed.unwrap_or(0),
                lower: None,
                upper: None,
            });
        } else if let Some(seed) = self.global_seed {
            match &mut cfg.global_step {
                Some(g) => g.seed = seed,
                None => return Err(Error::Config("--global-seed needs --global-step".into())),
            }
        }
        cfg.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct StartArgs {
    /// Starting point; repeat for several starts.
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Vec<Point>,
    /// Use this many shifted Sobol starts instead.
    #[arg(long)]
    pub sobol_starts: Option<usize>,
    #[arg(long)]
    pub start_seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub start_lower: Option<Point>,
    #[arg(long, allow_hyphen_values = true)]
    pub start_upper: Option<Point>,
}

impl StartArgs {
    pub fn apply(&self, cfg: &mut StartConfig) -> Result<()> {
        if !self.theta0.is_empty() && self.sobol_starts.is_some() {
            return Err(Error::Config("give either --theta0 or --sobol-starts".into()));
        }
        if !self.theta0.is_empty() {
            cfg.points = Some(self.theta0.iter().map(|p| p.0.clone()).collect());
            cfg.sobol = None;
        }
        if let Some(count) = self.sobol_starts {
            cfg.points = None;
            cfg.sobol = Some(SobolStarts {
                count,
                seed: 0,
                lower: None,
                upper: None,
            });
        }
        let tweaks = self.start_seed.is_some() || self.start_lower.is_some() || self.start_upper.is_some();
        match &mut cfg.sobol {
            Some(s) => {
                set(&mut s.seed, self.start_seed);
                if let Some(p) = &self.start_lower {
                    s.lower = Some(p.0.clone());
                }
                if let Some(p) = &self.start_upper {
                    s.upper = Some(p.0.clone());
                }
            }
            None if tweaks => {
                return Err(Error::Config("--start-seed/--start-lower/--start-upper need sobol starts".into()))
            }
            None => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub per_axis: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub lower: Option<Point>,
    #[arg(long, allow_hyphen_values = true)]
    pub upper: Option<Point>,
    /// Explicit grid node; repeat for several.
    #[arg(long, allow_hyphen_values = true)]
    pub node: Vec<Point>,
    /// Use the pair grid even for just-identified models.
    #[arg(long)]
    pub pairs: bool,
}

impl GridArgs {
    pub fn apply(&self, cfg: &mut GridConfig) {
        set(&mut cfg.per_axis, self.per_axis.map(Some));
        if let Some(p) = &self.lower {
            cfg.lower = Some(p.0.clone());
        }
        if let Some(p) = &self.upper {
            cfg.upper = Some(p.0.clone());
        }
        if !self.node.is_empty() {
            cfg.nodes = Some(self.node.iter().map(|p| p.0.clone()).collect());
        }
        cfg.pairs |= self.pairs;
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// gd, gn, nr, lm or bfgs.
    #[arg(long)]
    pub method: Option<Method>,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[command(flatten)]
    pub starts: StartArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated methods; all five by default.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[command(flatten)]
    pub starts: StartArgs,
}

#[derive(Debug, Args)]
pub struct GridCommandArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct ConvexityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Curvature of g'Wg (double) or of Q = g'Wg/2 (half).
    #[arg(long)]
    pub convention: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReplicateArgs {
    /// table1, gaussian-hessian, rank-grids, gamma-sweep or all.
    pub recipe: Option<String>,
}

#[derive(Debug, Args)]
pub struct SobolArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub n: usize,
    /// Random-shift seed; unshifted when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lower: Option<Point>,
    #[arg(long, allow_hyphen_values = true)]
    pub upper: Option<Point>,
}

/// Parses the process arguments, runs the command and reports errors on stderr.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

/// Runs a parsed command and returns its exit status.
pub fn execute(cli: Cli) -> Result<u8> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let out = cli
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    match cli.command {
        Command::Estimate(a) => {
            a.model.apply(&mut cfg.model)?;
            set(&mut cfg.optimizer.method, a.method);
            a.optimizer.apply(&mut cfg.optimizer)?;
            a.starts.apply(&mut cfg.starts)?;
            let methods = [cfg.optimizer.method];
            sweep(&cfg, &methods, &out, "estimate")
        }
        Command::Compare(a) => {
            a.model.apply(&mut cfg.model)?;
            a.optimizer.apply(&mut cfg.optimizer)?;
            a.starts.apply(&mut cfg.starts)?;
            let methods = if !a.methods.is_empty() {
                a.methods
            } else if !cfg.methods.is_empty() {
                cfg.methods.clone()
            } else {
                Method::ALL.to_vec()
            };
            sweep(&cfg, &methods, &out, "compare")
        }
        Command::RankGrid(a) => {
            a.model.apply(&mut cfg.model)?;
            a.grid.apply(&mut cfg.grid);
            rank_grid(&cfg, &out)
        }
        Command::ConvexityMap(a) => {
            a.model.apply(&mut cfg.model)?;
            a.grid.apply(&mut cfg.grid);
            if let Some(c) = &a.convention {
                cfg.convention = match c.as_str() {
                    "half" => HessianConvention::Half,
                    "double" => HessianConvention::Double,
                    other => {
                        return Err(Error::Config(format!("unknown convention {other:?}; available: half, double")))
                    }
                };
            }
            convexity(&cfg, &out)
        }
        Command::Replicate(a) => {
            let name = a
                .recipe
                .or_else(|| cfg.recipe.clone())
                .ok_or_else(|| Error::Config("no recipe given".into()))?;
            replicate_cmd(&name, &out)
        }
        Command::SobolDump(a) => sobol_dump(&a, &out),
    }
}

#[derive(Debug, Serialize)]
struct RunSummary {
    method: Method,
    start: usize,
    theta0: Vec<f64>,
    final_theta: Option<Vec<f64>>,
    q: Option<f64>,
    iterations: usize,
    termination: String,
    converged: bool,
    crashed: bool,
    left_bounds: bool,
    trace_file: String,
}

#[derive(Debug, Serialize)]
struct MethodSummary {
    method: Method,
    runs: usize,
    successes: usize,
    /// Runs ending in an evaluation error or a singular step.
    crashes: usize,
    mean: Option<Vec<f64>>,
    /// Sample standard deviation over successful runs.
    std: Option<Vec<f64>>,
    best_theta: Option<Vec<f64>>,
    best_q: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SweepSummary<'a> {
    command: &'a str,
    model: &'a ModelConfig,
    weighting: WeightingKind,
    optimizer: &'a OptimizerConfig,
    methods: Vec<MethodSummary>,
    runs: Vec<RunSummary>,
}

fn crashed(t: &IterationTrace) -> bool {
    matches!(
        t.termination(),
        Termination::EvaluationError { .. } | Termination::StepFailure { .. }
    )
}

fn mean_std(points: &[&Vector]) -> Option<(Vec<f64>, Vec<f64>)> {
    let first = points.first()?;
    let n = points.len() as f64;
    let mean: Vector = points.iter().fold(Vector::zeros(first.len()), |acc, p| acc + *p) / n;
    let std = if points.len() < 2 {
        Vector::zeros(first.len())
    } else {
        let ss = points
            .iter()
            .fold(Vector::zeros(first.len()), |acc, p| acc + (*p - &mean).map(|x| x * x));
        (ss / (n - 1.0)).map(f64::sqrt)
    };
    Some((mean.iter().copied().collect(), std.iter().copied().collect()))
}

fn sweep(cfg: &ExperimentConfig, methods: &[Method], out: &Path, command: &str) -> Result<u8> {
    let built = cfg.model.build()?;
    let starts = cfg.starts.resolve(built.model.bounds())?;
    let jobs: Vec<(Method, usize)> = methods
        .iter()
        .flat_map(|&m| (0..starts.len()).map(move |i| (m, i)))
        .collect();
    let traces: Vec<IterationTrace> = jobs
        .par_iter()
        .map(|&(method, i)| {
            let opt = OptimizerConfig {
                method,
                ..cfg.optimizer.clone()
            };
            run(&built.model, &built.weighting, &starts[i], &opt)
        })
        .collect::<Result<_>>()?;

    std::fs::create_dir_all(out)?;
    if let Some(series) = &built.series {
        write_series_csv(series, create_file(&out.join("series.csv"))?)?;
    }
    let mut runs = Vec::with_capacity(jobs.len());
    for (&(method, i), trace) in jobs.iter().zip(&traces) {
        let name = format!("trace_{method}_{i:03}.csv");
        trace.write_csv(create_file(&out.join(&name))?)?;
        let last = trace.last();
        let summary = RunSummary {
            method,
            start: i,
            theta0: starts[i].iter().copied().collect(),
            final_theta: last.map(|r| r.theta.iter().copied().collect()),
            q: last.map(|r| r.q),
            iterations: trace.iterations(),
            termination: trace.termination().to_string(),
            converged: trace.termination().is_converged(),
            crashed: crashed(trace),
            left_bounds: trace.left_bounds(),
            trace_file: name,
        };
        println!(
            "{method:>4} start {i:>3}: theta = {:?}, Q = {:.6e}, {} ({} iterations)",
            summary.final_theta.as_deref().unwrap_or(&[]),
            summary.q.unwrap_or(f64::NAN),
            summary.termination,
            summary.iterations
        );
        runs.push(summary);
    }

    let per_method: Vec<MethodSummary> = methods
        .iter()
        .map(|&method| {
            let ok: Vec<(&Vector, f64)> = jobs
                .iter()
                .zip(&traces)
                .filter(|((m, _), t)| *m == method && !crashed(t))
                .filter_map(|(_, t)| t.last().map(|r| (&r.theta, r.q)))
                .collect();
            let thetas: Vec<&Vector> = ok.iter().map(|(t, _)| *t).collect();
            let stats = mean_std(&thetas);
            let best = ok.iter().min_by(|a, b| a.1.total_cmp(&b.1));
            MethodSummary {
                method,
                runs: starts.len(),
                successes: ok.len(),
                crashes: starts.len() - ok.len(),
                mean: stats.as_ref().map(|s| s.0.clone()),
                std: stats.map(|s| s.1),
                best_theta: best.map(|b| b.0.iter().copied().collect()),
                best_q: best.map(|b| b.1),
            }
        })
        .collect();
    for m in &per_method {
        println!(
            "{:>4}: {}/{} successes, {} crashes, mean {:?}, std {:?}",
            m.method.name(),
            m.successes,
            m.runs,
            m.crashes,
            m.mean.as_deref().unwrap_or(&[]),
            m.std.as_deref().unwrap_or(&[])
        );
    }
    let summary = SweepSummary {
        command,
        model: &cfg.model,
        weighting: built.weighting.kind(),
        optimizer: &cfg.optimizer,
        methods: per_method,
        runs,
    };
    write_json_file(&summary, &out.join("summary.json"))?;
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct GridSummary<'a, R: Serialize> {
    model: &'a ModelConfig,
    weighting: WeightingKind,
    nodes: usize,
    report: &'a R,
    verdict: &'a str,
    argmin: Vec<Vec<f64>>,
}

fn rank_grid(cfg: &ExperimentConfig, out: &Path) -> Result<u8> {
    let built = cfg.model.build()?;
    let grid = cfg.grid.resolve(built.model.bounds())?;
    let just = built.model.moment_dim() == built.model.param_dim()
        && built.weighting.kind() == WeightingKind::Identity
        && !cfg.grid.pairs;
    let report = if just {
        rank_grid_just_identified(&built.model, &grid)?
    } else {
        rank_grid_over_identified(&built.model, &built.weighting, &grid)?
    };
    report.write_csv(create_file(&out.join("rank_grid.csv"))?)?;
    let (a, b) = report.argmin_nodes();
    let argmin = vec![a.iter().copied().collect(), b.iter().copied().collect()];
    let summary = GridSummary {
        model: &cfg.model,
        weighting: built.weighting.kind(),
        nodes: grid.len(),
        report: &report,
        verdict: report.verdict(),
        argmin,
    };
    write_json_file(&summary, &out.join("rank_grid.json"))?;
    println!(
        "rank condition {}: min sigma_min = {:e} at {:?} ({} failed nodes, sign change: {})",
        report.verdict(),
        report.min_value,
        summary.argmin,
        report.failed_nodes.len(),
        report.sign_change
    );
    Ok(EXIT_OK)
}

fn convexity(cfg: &ExperimentConfig, out: &Path) -> Result<u8> {
    let built = cfg.model.build()?;
    let grid = cfg.grid.resolve(built.model.bounds())?;
    let map = convexity_map(&built.model, &built.weighting, &grid, cfg.convention)?;
    map.write_csv(create_file(&out.join("convexity_map.csv"))?)?;
    let verdict = if map.is_non_convex() { "non-convex" } else { "no sign change" };
    let argmin = map
        .lambda_min
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| vec![map.nodes[i].iter().copied().collect()])
        .unwrap_or_default();
    let summary = GridSummary {
        model: &cfg.model,
        weighting: built.weighting.kind(),
        nodes: grid.len(),
        report: &map,
        verdict,
        argmin,
    };
    write_json_file(&summary, &out.join("convexity_map.json"))?;
    println!(
        "lambda_min ranges over [{:e}, {:e}]: {verdict} ({} failed nodes)",
        map.min,
        map.max,
        map.failed_nodes.len()
    );
    Ok(EXIT_OK)
}

fn replicate_cmd(name: &str, out: &Path) -> Result<u8> {
    let recipes: Vec<Recipe> = if name == "all" {
        Recipe::ALL.to_vec()
    } else {
        vec![name.parse().map_err(|e| match e {
            Error::InvalidInput(msg) => Error::Config(msg),
            other => other,
        })?]
    };
    let mut all_pass = true;
    for recipe in recipes {
        let report = replicate(recipe)?;
        report.write_csv(create_file(&out.join(format!("replicate_{recipe}.csv")))?)?;
        write_json_file(&report, &out.join(format!("replicate_{recipe}.json")))?;
        for c in &report.checks {
            println!(
                "{} {recipe}: {}: actual {} vs expected {} (tol {})",
                if c.pass { "PASS" } else { "FAIL" },
                c.label,
                c.actual,
                c.expected,
                c.tol
            );
        }
        all_pass &= report.passed;
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_CHECKS_FAILED })
}

fn sobol_dump(a: &SobolArgs, out: &Path) -> Result<u8> {
    let mut ps = sobol(a.dim, a.n)?;
    if let Some(seed) = a.seed {
        ps = random_shift(&ps, seed);
    }
    let path = out.join("sobol.csv");
    match (&a.lower, &a.upper) {
        (None, None) => write_point_set_csv(&ps, create_file(&path)?)?,
        (Some(lo), Some(hi)) => {
            let pts = map_to_box(&ps, &Vector::from_column_slice(&lo.0), &Vector::from_column_slice(&hi.0))?;
            let mut w = csv::Writer::from_writer(create_file(&path)?);
            let mut header = vec!["index".to_string()];
            header.extend((1..=a.dim).map(|j| format!("theta_{j}")));
            w.write_record(&header)?;
            for (i, p) in pts.iter().enumerate() {
                let mut row = vec![i.to_string()];
                row.extend(p.iter().map(|x| x.to_string()));
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        _ => return Err(Error::Config("give both --lower and --upper".into())),
    }
    println!("wrote {} points to {}", ps.len(), path.display());
    Ok(EXIT_OK)
}
