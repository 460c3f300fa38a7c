//! `kepler-ls`: command-line front end for the regularization library.
//!
//! Exit codes: 0 success, 1 failed `verify` suite, 2 library error
//! (collision, north pole, parabolic energy, ...), 64 usage error.

mod config;
mod output;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use kepler_ls::curvature::{closed_form_ck, closed_form_crt, Kepler, Restricted, RotatingKepler};
use kepler_ls::hamiltonians::{eval_hk, eval_hr, pull_back};
use kepler_ls::linalg::norm;
use kepler_ls::ls_map::{forward_fused, inverse_fused};
use kepler_ls::scan::{grid_samples, worst_samples, ScanSamples};
use kepler_ls::{
    constrained_minimize, elements, forward, inverse, kepler_function_grid, locate_l1, period, propagate,
    solve_elliptic, solve_hyperbolic, tangential_curvature, threshold_estimate, CartesianState64, ComplexPair64,
    Constraints, CurvatureSample64, DerivativeMode, GridSpec, MassRatio, MinimizeResult, RestrictedProblem,
    ScanReport64, SphereState64,
};

use config::RunConfig;
use output::{emit_json, write_csv};

#[derive(Debug, Parser)]
#[command(name = "kepler-ls", version, about = "Ligon-Schaaf regularization, Delaunay propagation and CR3BP curvature scans")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Increase log verbosity (stderr).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generalized Kepler equation.
    #[command(subcommand, name = "kepler-fn")]
    KeplerFn(KeplerFn),
    /// Forward or inverse Ligon-Schaaf map on a JSON state.
    Map(MapArgs),
    /// Propagate a bound orbit and tabulate Delaunay variables.
    Orbit(OrbitArgs),
    /// Tangential curvature at one point of (w, z)-space.
    Curvature(CurvatureArgs),
    /// Grid scan of the curvature over the feasible region.
    Scan(ScanArgs),
    /// Constrained curvature minimization from the worst scan samples.
    Minimize(MinimizeArgs),
    /// First Lagrange point of the restricted problem.
    L1(L1Args),
    /// Run the randomized invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
enum KeplerFn {
    /// Solve for phi at (x, y).
    Solve {
        #[arg(allow_negative_numbers = true)]
        x: f64,
        #[arg(allow_negative_numbers = true)]
        y: f64,
        /// Solve phi = x sinh(phi) + y cosh(phi) instead.
        #[arg(long)]
        hyperbolic: bool,
    },
    /// Tabulate the Kepler function on [lo, hi]².
    Grid {
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// CSV with columns x,y,phi.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Direction {
    Fwd,
    Inv,
}

#[derive(Debug, Args)]
struct MapArgs {
    #[arg(value_enum)]
    direction: Direction,
    /// Input JSON state (default: stdin).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the single-step formulas instead of the factored map.
    #[arg(long)]
    fused: bool,
}

#[derive(Debug, Args)]
struct OrbitArgs {
    #[arg(long, num_args = 3, allow_negative_numbers = true, required = true)]
    q: Vec<f64>,
    #[arg(long, num_args = 3, allow_negative_numbers = true, required = true)]
    p: Vec<f64>,
    /// Final time (default: one period).
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, default_value_t = 101)]
    samples: usize,
    /// CSV with columns t,q1,q2,q3,p1,p2,p3,ell,g,h,Lc,Gc,Hc.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum System {
    Kepler,
    Rotating,
    Cr3bp,
}

#[derive(Debug, Args)]
struct DerivativeFlags {
    /// Richardson-extrapolated finite differences.
    #[arg(long, conflicts_with = "analytic")]
    richardson: bool,
    /// Closed-form derivatives where the Hamiltonian provides them.
    #[arg(long)]
    analytic: bool,
}

impl DerivativeFlags {
    fn mode(&self) -> DerivativeMode {
        if self.richardson {
            DerivativeMode::Richardson
        } else if self.analytic {
            DerivativeMode::Analytic
        } else {
            DerivativeMode::Numeric
        }
    }
}

#[derive(Debug, Args)]
struct CurvatureArgs {
    #[arg(long, value_enum, default_value = "cr3bp")]
    system: System,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    /// w1 w2 z1 z2
    #[arg(long, num_args = 4, allow_negative_numbers = true, required = true)]
    point: Vec<f64>,
    #[command(flatten)]
    derivatives: DerivativeFlags,
}

#[derive(Debug, Args)]
struct GridFlags {
    #[arg(long)]
    mu: f64,
    /// Energy cap (default: the L1 energy).
    #[arg(long, allow_negative_numbers = true)]
    c_cap: Option<f64>,
    #[arg(long)]
    extent: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    derivatives: DerivativeFlags,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    grid: GridFlags,
    /// CSV of retained samples: w1,w2,z1,z2,q1,q2,energy,rdHP,curvature.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MinimizeArgs {
    #[command(flatten)]
    grid: GridFlags,
    /// Scan CSV to draw starts from (default: run a scan).
    #[arg(long)]
    starts_from: Option<PathBuf>,
    /// Number of multi-starts.
    #[arg(long)]
    top: Option<usize>,
    /// Starts must have rdHP above this (default: the scan threshold).
    #[arg(long)]
    rdhp_min: Option<f64>,
    /// Do not constrain runs to stay above the start rdHP bound.
    #[arg(long)]
    no_floor: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct L1Args {
    #[arg(long)]
    mu: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Random samples per suite.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Error carrying an explicit exit code.
#[derive(Debug)]
struct Exit(u8);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "exit {}", self.0)
    }
}

impl std::error::Error for Exit {}

const EXIT_FAILED: u8 = 1;
const EXIT_LIBRARY: u8 = 2;
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(Exit(code)) = e.downcast_ref::<Exit>() {
                return ExitCode::from(*code);
            }
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<kepler_ls::Error>() {
                Some(kepler_ls::Error::InvalidArgument(_) | kepler_ls::Error::InvalidMassRatio) => EXIT_USAGE,
                Some(_) => EXIT_LIBRARY,
                None => EXIT_USAGE,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.validate()?;
    let workers = cfg.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .context("starting worker pool")?;
    log::info!("using {workers} workers");

    match cli.command {
        Command::KeplerFn(cmd) => kepler_fn(cmd, &cfg),
        Command::Map(args) => map(args, &cfg),
        Command::Orbit(args) => orbit(args, &cfg),
        Command::Curvature(args) => curvature(args),
        Command::Scan(args) => scan(args, &cfg),
        Command::Minimize(args) => minimize(args, &cfg),
        Command::L1(args) => emit_json(&locate_l1(MassRatio::new(args.mu)?), None),
        Command::Verify(args) => {
            let mut defaults = cfg.verify;
            defaults.samples = args.samples.unwrap_or(defaults.samples);
            defaults.seed = args.seed.unwrap_or(defaults.seed);
            if defaults.samples == 0 {
                bail!("--samples must be at least 1");
            }
            let report = verify::run(&cfg.tolerances, &defaults);
            emit_json(&report, None)?;
            if report.passed {
                Ok(())
            } else {
                for s in report.suites.iter().filter(|s| !s.passed) {
                    eprintln!("suite failed: {} ({} of {} samples)", s.name, s.failures, s.samples);
                }
                Err(Exit(EXIT_FAILED).into())
            }
        }
    }
}

fn kepler_fn(cmd: KeplerFn, cfg: &RunConfig) -> Result<()> {
    match cmd {
        KeplerFn::Solve { x, y, hyperbolic } => {
            let root = if hyperbolic { solve_hyperbolic(x, y)? } else { solve_elliptic(x, y)? };
            #[derive(Serialize)]
            struct Out {
                x: f64,
                y: f64,
                phi: f64,
                residual: f64,
                iterations: usize,
            }
            emit_json(&Out { x, y, phi: root.phi, residual: root.residual, iterations: root.iterations }, None)
        }
        KeplerFn::Grid { lo, hi, step, out } => {
            let report = kepler_function_grid(lo, hi, step)?;
            if let Some(path) = out.as_deref().or(cfg.outputs.kepler_grid.as_deref()) {
                let ny = report.ys.len();
                let rows = report
                    .phi
                    .iter()
                    .enumerate()
                    .map(|(k, &phi)| vec![report.xs[k / ny], report.ys[k % ny], phi]);
                write_csv(path, &["x", "y", "phi"], rows)?;
            }
            #[derive(Serialize)]
            struct Summary<'a> {
                points: usize,
                min_phi: &'a kepler_ls::kepler_eq::GridExtremum<f64>,
                max_phi: &'a kepler_ls::kepler_eq::GridExtremum<f64>,
                max_gradient_norm: &'a kepler_ls::kepler_eq::GridExtremum<f64>,
            }
            emit_json(
                &Summary {
                    points: report.phi.len(),
                    min_phi: &report.min_phi,
                    max_phi: &report.max_phi,
                    max_gradient_norm: &report.max_gradient_norm,
                },
                None,
            )
        }
    }
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => std::io::read_to_string(std::io::stdin()).context("reading stdin"),
    }
}

fn map(args: MapArgs, cfg: &RunConfig) -> Result<()> {
    let text = read_input(args.input.as_deref())?;
    let out = args.out.as_deref().or(cfg.outputs.map.as_deref());
    match args.direction {
        Direction::Fwd => {
            let raw: RawCartesian = serde_json::from_str(&text).context("parsing Cartesian state")?;
            let state = CartesianState64::new(raw.q, raw.p)?;
            let sp = if args.fused { forward_fused(&state)? } else { forward(&state)? };
            emit_json(&sp, out)
        }
        Direction::Inv => {
            let sp: SphereState64 = serde_json::from_str(&text).context("parsing sphere state")?;
            let state = if args.fused { inverse_fused(&sp)? } else { inverse(&sp)? };
            emit_json(&state, out)
        }
    }
}

/// Unvalidated `{"q": [..], "p": [..]}`; validation happens in the library
/// so collisions surface as library errors.
#[derive(serde::Deserialize)]
struct RawCartesian {
    q: [f64; 3],
    p: [f64; 3],
}

fn vec3(v: &[f64]) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

fn orbit(args: OrbitArgs, cfg: &RunConfig) -> Result<()> {
    let state = CartesianState64::new(vec3(&args.q), vec3(&args.p))?;
    let t_end = match args.t_end {
        Some(t) => t,
        None => period(state.energy())?,
    };
    if args.samples == 0 {
        bail!("--samples must be at least 1");
    }
    let times: Vec<f64> = (0..args.samples)
        .map(|k| if args.samples == 1 { 0.0 } else { t_end * k as f64 / (args.samples - 1) as f64 })
        .collect();
    let rows = times
        .par_iter()
        .map(|&t| {
            let s = propagate(&state, t)?;
            Ok((t, s, elements(&s)?))
        })
        .collect::<kepler_ls::Result<Vec<_>>>()?;

    if let Some(path) = args.out.as_deref().or(cfg.outputs.orbit.as_deref()) {
        let header = ["t", "q1", "q2", "q3", "p1", "p2", "p3", "ell", "g", "h", "Lc", "Gc", "Hc"];
        write_csv(
            path,
            &header,
            rows.iter().map(|(t, s, el)| {
                let d = el.delaunay;
                vec![*t, s.q[0], s.q[1], s.q[2], s.p[0], s.p[1], s.p[2], d.ell, d.g, d.h, d.lc, d.gc, d.hc]
            }),
        )
    } else {
        #[derive(Serialize)]
        struct Sample<'a> {
            t: f64,
            state: &'a CartesianState64,
            elements: &'a kepler_ls::ElementSet64,
        }
        #[derive(Serialize)]
        struct Out<'a> {
            period: f64,
            samples: Vec<Sample<'a>>,
        }
        let samples = rows.iter().map(|(t, state, elements)| Sample { t: *t, state, elements }).collect();
        emit_json(&Out { period: period(state.energy())?, samples }, None)
    }
}

fn curvature(args: CurvatureArgs) -> Result<()> {
    let point = [args.point[0], args.point[1], args.point[2], args.point[3]];
    let cp = ComplexPair64::from_array(point);
    let mode = args.derivatives.mode();
    let problem = RestrictedProblem::new(args.mu)?;
    let (eval, energy, closed_form) = match args.system {
        System::Kepler => (tangential_curvature(&Kepler, &point, mode)?, eval_hk(&cp)?, Some(closed_form_ck(&cp)?)),
        System::Rotating => {
            (tangential_curvature(&RotatingKepler, &point, mode)?, eval_hr(&cp)?, Some(closed_form_crt(&cp)?))
        }
        System::Cr3bp => {
            let energy = problem.eval_hx(&cp)?.energy;
            let closed = if args.mu == 0.0 { Some(closed_form_crt(&cp)?) } else { None };
            (tangential_curvature(&Restricted(problem), &point, mode)?, energy, closed)
        }
    };
    let (q_reg, _) = pull_back(&cp)?;
    #[derive(Serialize)]
    struct Out {
        point: [f64; 4],
        curvature: f64,
        energy: f64,
        #[serde(rename = "rdHP")]
        rdhp: f64,
        closed_form: Option<f64>,
        gradient: [f64; 4],
    }
    emit_json(
        &Out {
            point,
            curvature: eval.curvature,
            energy,
            rdhp: norm(&q_reg) / problem.l1.dist_heavy,
            closed_form,
            gradient: eval.gradient,
        },
        None,
    )
}

struct ResolvedGrid {
    problem: RestrictedProblem<f64>,
    c_cap: f64,
    grid: GridSpec<f64>,
    mode: DerivativeMode,
}

fn resolve_grid(flags: &GridFlags, cfg: &RunConfig) -> Result<ResolvedGrid> {
    let problem = RestrictedProblem::new(flags.mu)?;
    Ok(ResolvedGrid {
        problem,
        c_cap: flags.c_cap.unwrap_or(problem.l1.energy),
        grid: GridSpec {
            extent: flags.extent.unwrap_or(cfg.grid.extent),
            n_per_axis: flags.n.unwrap_or(cfg.grid.n),
        },
        mode: flags.derivatives.mode(),
    })
}

fn run_scan(g: &ResolvedGrid) -> Result<ScanSamples<f64>> {
    log::info!(
        "scanning mu={} c_cap={} extent={} n={}",
        g.problem.mu.value(),
        g.c_cap,
        g.grid.extent,
        g.grid.n_per_axis
    );
    Ok(grid_samples(&g.problem, g.c_cap, &g.grid, g.mode)?)
}

/// Scan summary: populated bins and the threshold.
#[derive(Serialize)]
struct ScanSummary<'a> {
    mu: f64,
    c_cap: f64,
    evaluated: usize,
    chain_errors: usize,
    retained: usize,
    non_positive: usize,
    /// `null` when every populated bin down to the top one is non-positive.
    threshold: Option<f64>,
    bins: Vec<&'a kepler_ls::scan::ScanBin<f64>>,
}

fn summarize(report: &ScanReport64) -> ScanSummary<'_> {
    ScanSummary {
        mu: report.mu,
        c_cap: report.c_cap,
        evaluated: report.evaluated,
        chain_errors: report.chain_errors,
        retained: report.retained,
        non_positive: report.negatives.len(),
        threshold: threshold_estimate(report).ok(),
        bins: report.bins.iter().filter(|b| b.count > 0).collect(),
    }
}

const SCAN_HEADER: [&str; 9] = ["w1", "w2", "z1", "z2", "q1", "q2", "energy", "rdHP", "curvature"];

fn scan(args: ScanArgs, cfg: &RunConfig) -> Result<()> {
    let g = resolve_grid(&args.grid, cfg)?;
    let samples = run_scan(&g)?;
    if let Some(path) = args.out.as_deref().or(cfg.outputs.scan.as_deref()) {
        let rows = samples.samples.iter().map(|s| {
            let [w1, w2, z1, z2] = s.point;
            vec![w1, w2, z1, z2, s.q[0], s.q[1], s.energy, s.rdhp, s.curvature]
        });
        write_csv(path, &SCAN_HEADER, rows)?;
    }
    let report = ScanReport64::from_samples(g.problem.mu.value(), g.c_cap, &samples);
    emit_json(&summarize(&report), None)
}

fn read_scan_csv(path: &Path) -> Result<Vec<CurvatureSample64>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != SCAN_HEADER {
        bail!("{}: expected columns {}", path.display(), SCAN_HEADER.join(","));
    }
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            let v: Vec<f64> = rec.iter().map(str::parse).collect::<Result<_, _>>()?;
            Ok(CurvatureSample64 {
                point: [v[0], v[1], v[2], v[3]],
                q: [v[4], v[5]],
                energy: v[6],
                rdhp: v[7],
                curvature: v[8],
            })
        })
        .collect()
}

fn minimize(args: MinimizeArgs, cfg: &RunConfig) -> Result<()> {
    let g = resolve_grid(&args.grid, cfg)?;
    let samples = match &args.starts_from {
        Some(path) => {
            let samples = read_scan_csv(path)?;
            let evaluated = samples.len();
            ScanSamples { samples, evaluated, chain_errors: 0 }
        }
        None => run_scan(&g)?,
    };
    let rdhp_min = match args.rdhp_min {
        Some(v) => v,
        None => threshold_estimate(&ScanReport64::from_samples(g.problem.mu.value(), g.c_cap, &samples))?,
    };
    let top = args.top.unwrap_or(cfg.grid.top);
    let feasible: Vec<CurvatureSample64> =
        samples.samples.iter().filter(|s| s.energy <= g.c_cap && s.rdhp <= 1.0).copied().collect();
    let starts = worst_samples(&feasible, rdhp_min, top);
    log::info!("{} starts above rdHP {rdhp_min}", starts.len());
    let cons = Constraints { c_cap: g.c_cap, rdhp_floor: if args.no_floor { None } else { Some(rdhp_min) } };
    let results = starts
        .par_iter()
        .map(|s| constrained_minimize(&g.problem, &cons, &s.point, g.mode))
        .collect::<kepler_ls::Result<Vec<MinimizeResult<f64>>>>()?;

    #[derive(Serialize)]
    struct Out {
        mu: f64,
        c_cap: f64,
        rdhp_min: f64,
        rdhp_floor: Option<f64>,
        /// Every converged run ended at positive curvature.
        converged_positive: bool,
        runs: Vec<MinimizeResult<f64>>,
    }
    let converged_positive = results.iter().filter(|r| r.converged).all(|r| r.curvature > 0.0);
    emit_json(
        &Out {
            mu: g.problem.mu.value(),
            c_cap: g.c_cap,
            rdhp_min,
            rdhp_floor: cons.rdhp_floor,
            converged_positive,
            runs: results,
        },
        args.out.as_deref().or(cfg.outputs.minimize.as_deref()),
    )
}
