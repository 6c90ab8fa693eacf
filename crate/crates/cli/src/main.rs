//! `taseplk` command-line front end.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use taseplk::continuum::{n_cells_for, pde_evolve, steady_solve, steady_solve_with_telemetry, Flux, PdeConfig, Scheme, SteadyConfig};
use taseplk::lattice::{kmc_run_detailed, meanfield_steady, KmcConfig};
use taseplk::model::neighborhood_margin;
use taseplk::phase::phase_sweep;
use taseplk::{checks, io, DensityProfile, ModelParams, Tolerance};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "taseplk", version, about = "TASEP with Langmuir kinetics: phases, steady states, dynamics and checks")]
struct Cli {
    /// Scenario JSON (or a previous manifest.json). Flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory; manifest.json is written at its root.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, global = true, env = "TASEPLK_JOBS")]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Rates {
    /// Ω_A = Ω_D.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    omega_a: Option<f64>,
    #[arg(long)]
    omega_d: Option<f64>,
    /// Ω_A/Ω_D, used with --omega-d.
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct Params {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[command(flatten)]
    rates: Rates,
}

#[derive(Args, Clone, Default)]
struct Grid {
    #[arg(long)]
    n_cells: Option<usize>,
    /// central | llf
    #[arg(long, value_parser = parse_enum::<Flux>)]
    flux: Option<Flux>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify (α, β, Ω_A, Ω_D) and print the phase features.
    Phase {
        #[command(flatten)]
        p: Params,
        /// Also write the limit profile (limit.json, limit.csv).
        #[arg(long)]
        limit: bool,
    },
    /// Steady continuum solution with continuation telemetry.
    Steady {
        #[command(flatten)]
        p: Params,
        #[command(flatten)]
        g: Grid,
    },
    /// Time-dependent continuum solution.
    Evolve {
        #[command(flatten)]
        p: Params,
        #[command(flatten)]
        g: Grid,
        #[arg(long)]
        t_end: Option<f64>,
        /// Number of equally spaced snapshots.
        #[arg(long)]
        snapshots: Option<usize>,
        /// linear | half | path to an x,rho CSV
        #[arg(long)]
        initial: Option<String>,
        /// imex | explicit
        #[arg(long, value_parser = parse_enum::<Scheme>)]
        scheme: Option<Scheme>,
    },
    /// Stochastic lattice simulation.
    Kmc {
        #[command(flatten)]
        p: Params,
        #[arg(long)]
        t_burn: Option<f64>,
        #[arg(long)]
        t_sample: Option<f64>,
        #[arg(long)]
        replicas: Option<usize>,
    },
    /// Mean-field lattice steady state.
    Meanfield {
        #[command(flatten)]
        p: Params,
    },
    /// Phase diagram over (α, β) and optionally a grid of steady solves.
    Sweep {
        #[command(flatten)]
        r: Rates,
        #[arg(long)]
        res: Option<usize>,
        /// Resolution of an additional steady-solve grid.
        #[arg(long)]
        steady_res: Option<usize>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Verification suites; exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        p: Params,
        /// bounds | attractivity | symmetry | uniqueness | all
        #[arg(long, value_parser = ["bounds", "attractivity", "symmetry", "uniqueness", "all"])]
        suite: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn parse_enum<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(s.to_ascii_lowercase())).map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Core(taseplk::Error),
}

impl From<taseplk::Error> for Failure {
    fn from(e: taseplk::Error) -> Self {
        Failure::Core(e)
    }
}

type CmdResult<T> = Result<T, Failure>;

/// What a command produced.
struct Outcome {
    params: Option<ModelParams>,
    outputs: Vec<String>,
    details: Value,
    passed: bool,
}

impl Outcome {
    fn new(params: Option<ModelParams>) -> Self {
        Outcome { params, outputs: Vec::new(), details: json!({}), passed: true }
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    params: Option<ModelParams>,
    /// Effective config with unset keys dropped; `--config manifest.json` re-runs it.
    config: Value,
    config_sha256: String,
    seed: Option<u64>,
    versions: BTreeMap<&'static str, &'static str>,
    jobs: usize,
    wall_time_s: f64,
    outputs: Vec<String>,
    details: Value,
    passed: bool,
}

struct Ctx {
    out: PathBuf,
    cfg: RunConfig,
}

impl Ctx {
    fn write(&self, o: &mut Outcome, name: &str, f: impl FnOnce(&mut std::io::BufWriter<std::fs::File>) -> taseplk::Result<()>) -> CmdResult<()> {
        io::to_file(&self.out.join(name), f)?;
        o.outputs.push(name.to_string());
        Ok(())
    }

    fn params(&self) -> CmdResult<ModelParams> {
        self.cfg.params().map_err(Failure::Usage)
    }

    fn steady_config(&self) -> SteadyConfig {
        SteadyConfig { n_cells: self.cfg.n_cells, flux: self.cfg.flux.unwrap_or_default(), ..SteadyConfig::default() }
    }
}

fn params_overlay(p: &Params) -> RunConfig {
    let mut c = rates_overlay(&p.rates);
    c.alpha = p.alpha;
    c.beta = p.beta;
    c
}

fn rates_overlay(r: &Rates) -> RunConfig {
    RunConfig { omega: r.omega, omega_a: r.omega_a, omega_d: r.omega_d, k: r.k, epsilon: r.epsilon, ..Default::default() }
}

fn grid_overlay(c: &mut RunConfig, g: &Grid) {
    c.n_cells = g.n_cells;
    c.flux = g.flux;
}

fn command_overlay(cmd: &Cmd) -> (&'static str, RunConfig) {
    match cmd {
        Cmd::Phase { p, limit } => {
            let mut c = params_overlay(p);
            c.limit = limit.then_some(true);
            ("phase", c)
        }
        Cmd::Steady { p, g } => {
            let mut c = params_overlay(p);
            grid_overlay(&mut c, g);
            ("steady", c)
        }
        Cmd::Evolve { p, g, t_end, snapshots, initial, scheme } => {
            let mut c = params_overlay(p);
            grid_overlay(&mut c, g);
            c.t_end = *t_end;
            c.snapshots = *snapshots;
            c.initial = initial.clone();
            c.scheme = *scheme;
            ("evolve", c)
        }
        Cmd::Kmc { p, t_burn, t_sample, replicas } => {
            let mut c = params_overlay(p);
            c.t_burn = *t_burn;
            c.t_sample = *t_sample;
            c.replicas = *replicas;
            ("kmc", c)
        }
        Cmd::Meanfield { p } => ("meanfield", params_overlay(p)),
        Cmd::Sweep { r, res, steady_res, delta } => {
            let mut c = rates_overlay(r);
            c.res = *res;
            c.steady_res = *steady_res;
            c.delta = *delta;
            ("sweep", c)
        }
        Cmd::Verify { p, suite, delta, pairs, tol } => {
            let mut c = params_overlay(p);
            c.suite = suite.clone();
            c.delta = *delta;
            c.pairs = *pairs;
            c.tol = *tol;
            ("verify", c)
        }
    }
}

fn cmd_phase(ctx: &Ctx) -> CmdResult<Outcome> {
    let p = ctx.params()?;
    let mut o = Outcome::new(Some(p));
    let (label, features) = taseplk::classify(&p)?;
    let mut v = serde_json::to_value(&features).map_err(taseplk::Error::from)?;
    let m = v.as_object_mut().unwrap();
    m.insert("regime".into(), serde_json::to_value(label.regime).unwrap());
    m.insert("phase".into(), json!(label.index));
    m.insert("name".into(), json!(label.name()));
    m.insert("applied_symmetry".into(), json!(label.applied_symmetry));
    m.insert("boundary_flag".into(), json!(label.boundary_flag));
    println!("{}", serde_json::to_string(&v).unwrap());
    ctx.write(&mut o, "phase.json", |w| io::write_json(w, &v))?;
    if ctx.cfg.limit.unwrap_or(false) {
        let lim = taseplk::limit_profile(&p)?;
        ctx.write(&mut o, "limit.json", |w| io::write_json(w, &lim))?;
        let prof = DensityProfile::from_values(lim.sample(1000))?;
        ctx.write(&mut o, "limit.csv", |w| io::write_profile(w, &prof))?;
    }
    o.details = v;
    Ok(o)
}

fn cmd_steady(ctx: &Ctx) -> CmdResult<Outcome> {
    let p = ctx.params()?;
    let mut o = Outcome::new(Some(p));
    let (rho, tel) = steady_solve_with_telemetry(&p, &ctx.steady_config())?;
    ctx.write(&mut o, "steady.csv", |w| io::write_profile(w, &rho))?;
    ctx.write(&mut o, "telemetry.json", |w| io::write_json(w, &tel))?;
    o.details = json!({ "n_cells": tel.n_cells, "final_residual": tel.final_residual });
    Ok(o)
}

fn initial_profile(ctx: &Ctx, p: &ModelParams, n: usize) -> CmdResult<DensityProfile> {
    let (a, b) = (p.alpha, p.beta_bar());
    let pin = |f: &dyn Fn(f64) -> f64| {
        DensityProfile::from_fn(n, |x| if x == 0.0 { a } else if x == 1.0 { b } else { f(x) })
    };
    let prof = match ctx.cfg.initial.as_deref().unwrap_or("linear") {
        "linear" => DensityProfile::from_fn(n, |x| a + (b - a) * x)?,
        "half" => pin(&|_| 0.5)?,
        path => {
            let src = io::read_profile(std::fs::File::open(path).map_err(taseplk::Error::from)?)?;
            pin(&|x| src.interpolate(x))?
        }
    };
    Ok(prof)
}

fn cmd_evolve(ctx: &Ctx) -> CmdResult<Outcome> {
    let p = ctx.params()?;
    let mut o = Outcome::new(Some(p));
    let t_end = ctx.cfg.t_end.unwrap_or(50.0 / p.epsilon);
    let k = ctx.cfg.snapshots.unwrap_or(10).max(1);
    let cfg = PdeConfig {
        n_cells: ctx.cfg.n_cells.unwrap_or_else(|| n_cells_for(p.epsilon)),
        dt: None,
        t_end,
        scheme: ctx.cfg.scheme.unwrap_or_default(),
        flux: ctx.cfg.flux.unwrap_or_default(),
        snapshot_times: (1..k).map(|i| t_end * i as f64 / k as f64).collect(),
    };
    let sigma = initial_profile(ctx, &p, cfg.n_cells)?;
    let snaps = pde_evolve(&p, &sigma, &cfg)?;
    ctx.write(&mut o, "snapshots.csv", |w| io::write_snapshots(w, &snaps))?;
    o.details = json!({ "n_cells": cfg.n_cells, "t_end": t_end, "snapshots": snaps.len() });
    Ok(o)
}

fn cmd_kmc(ctx: &Ctx) -> CmdResult<Outcome> {
    let p = ctx.params()?;
    let mut o = Outcome::new(Some(p));
    let l = (p.n_sites() + 1) as f64;
    let cfg = KmcConfig::new(
        ctx.cfg.seed.unwrap_or(0),
        ctx.cfg.t_burn.unwrap_or(20.0 * l),
        ctx.cfg.t_sample.unwrap_or(20.0 * l),
        ctx.cfg.replicas.unwrap_or(8),
    );
    let out = kmc_run_detailed(&p, &cfg)?;
    ctx.write(&mut o, "kmc.csv", |w| io::write_kmc(w, &out))?;
    o.details = json!({ "n_sites": p.n_sites(), "kmc": cfg, "events": out.events });
    Ok(o)
}

fn cmd_meanfield(ctx: &Ctx) -> CmdResult<Outcome> {
    let p = ctx.params()?;
    let mut o = Outcome::new(Some(p));
    let rho = meanfield_steady(&p, &Tolerance::default())?;
    ctx.write(&mut o, "meanfield.csv", |w| io::write_profile(w, &rho))?;
    o.details = json!({ "n_sites": p.n_sites() });
    Ok(o)
}

#[derive(Serialize)]
struct SteadyGridRow {
    alpha: f64,
    beta: f64,
    phase_index: u8,
    converged: bool,
    mean_density: f64,
    neighborhood_margin: f64,
}

fn cmd_sweep(ctx: &Ctx) -> CmdResult<Outcome> {
    let (oa, od) = ctx.cfg.rates().map_err(Failure::Usage)?;
    let mut o = Outcome::new(None);
    let res = ctx.cfg.res.unwrap_or(200);
    let map = phase_sweep(oa, od, res)?;
    ctx.write(&mut o, "phase_map.csv", |w| io::write_phase_map(w, &map))?;
    ctx.write(&mut o, "boundaries.csv", |w| io::write_polylines(w, &map))?;
    let labels: Vec<u8> = map.labels_present().into_iter().collect();
    let mut details = json!({ "regime": map.regime, "labels": labels, "resolution": res });
    if let Some(m) = ctx.cfg.steady_res {
        let eps = ctx.cfg.epsilon();
        let delta = ctx.cfg.delta.unwrap_or(Tolerance::default().delta);
        let scfg = ctx.steady_config();
        let centre = |i: usize| (i as f64 + 0.5) / m as f64;
        let rows: Vec<SteadyGridRow> = (0..m * m)
            .into_par_iter()
            .map(|idx| {
                let (alpha, beta) = (centre(idx % m), centre(idx / m));
                let mut row = SteadyGridRow {
                    alpha,
                    beta,
                    phase_index: 0,
                    converged: false,
                    mean_density: f64::NAN,
                    neighborhood_margin: f64::NAN,
                };
                let Ok(p) = ModelParams::new(alpha, beta, oa, od, eps) else { return row };
                if let Ok((label, _)) = taseplk::classify(&p) {
                    row.phase_index = label.index;
                }
                if let Ok(rho) = steady_solve(&p, &scfg) {
                    row.converged = true;
                    let v = rho.values();
                    row.mean_density = v.iter().sum::<f64>() / v.len() as f64;
                    if let Ok(lim) = taseplk::limit_profile(&p) {
                        row.neighborhood_margin = neighborhood_margin(&rho, &lim, delta).unwrap_or(f64::NAN);
                    }
                }
                row
            })
            .collect();
        ctx.write(&mut o, "steady_grid.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            for r in &rows {
                c.serialize(r)?;
            }
            c.flush()?;
            Ok(())
        })?;
        details["steady_grid"] = json!({ "resolution": m, "epsilon": eps, "failed": rows.iter().filter(|r| !r.converged).count() });
    }
    println!("{}", serde_json::to_string(&details).unwrap());
    o.details = details;
    Ok(o)
}

/// Parameter sets used when `verify` is run without explicit parameters.
mod pinned {
    use taseplk::{ModelParams, Result};

    pub fn bracket() -> Result<Vec<ModelParams>> {
        let s = |a, b| ModelParams::special(a, b, 0.25, 0.05);
        let g = |a, b, od, k| ModelParams::general(a, b, od, k, 0.05);
        Ok(vec![
            s(0.25, 0.125)?,
            s(0.4583, 1.0 / 3.0)?,
            s(0.75, 1.0 / 3.0)?,
            s(0.4375, 0.125)?,
            s(0.8125, 0.125)?,
            s(0.75, 2.0 / 3.0)?,
            g(0.03, 0.4502, 0.1, 2.0)?,
            g(0.06, 0.8074, 0.1, 2.0)?,
            g(0.42, 0.1, 0.1, 2.0)?,
            g(0.9323, 0.15, 0.2, 2.0)?,
            g(0.4074, 0.2, 0.02, 20.0)?,
            g(0.9762, 0.3, 0.013, 20.0)?,
            g(0.1764, 0.2740, 0.1, 2.0)?,
            g(0.2503, 0.4167, 0.1, 2.0)?,
        ])
    }

    /// One set per phase class with a wall, a plateau, or layers at both ends.
    pub fn representative(eps: f64) -> Result<Vec<ModelParams>> {
        let s = |a, b| ModelParams::special(a, b, 0.25, eps);
        let g = |a, b| ModelParams::general(a, b, 0.1, 2.0, eps);
        Ok(vec![s(0.25, 0.125)?, s(0.4375, 0.125)?, s(0.75, 2.0 / 3.0)?, g(0.0242, 0.274)?, g(0.1124, 0.274)?, g(0.8478, 0.274)?])
    }
}

fn cmd_verify(ctx: &Ctx) -> CmdResult<Outcome> {
    let suite = ctx.cfg.suite.clone().unwrap_or_else(|| "all".into());
    let seed = ctx.cfg.seed.unwrap_or(0);
    let given = if ctx.cfg.has_params() { Some(ctx.params()?) } else { None };
    let mut o = Outcome::new(given);
    let run = |name: &str| suite == "all" || suite == name;
    let mut summary = serde_json::Map::new();

    if run("symmetry") {
        let sets = match given {
            Some(p) => vec![p],
            None => checks::random_params(10, seed, ctx.cfg.epsilon.unwrap_or(0.02))?,
        };
        let r = checks::symmetry_check(&sets, &ctx.steady_config(), ctx.cfg.tol.unwrap_or(1e-6))?;
        ctx.write(&mut o, "verify_symmetry.json", |w| io::write_json(w, &r))?;
        summary.insert("symmetry".into(), json!(r.passed));
        o.passed &= r.passed;
    }
    if run("bounds") {
        let sets = match given {
            Some(p) => vec![p],
            None => pinned::bracket()?,
        };
        let delta = ctx.cfg.delta.unwrap_or(0.05);
        let reports: Vec<_> = sets.iter().map(|p| checks::bracket_check(p, delta, 400, 1e-8)).collect::<taseplk::Result<_>>()?;
        let passed = reports.iter().all(|r| r.passed);
        ctx.write(&mut o, "verify_bounds.json", |w| io::write_json(w, &reports))?;
        summary.insert("bounds".into(), json!(passed));
        o.passed &= passed;
    }
    if run("attractivity") {
        let p = match given {
            Some(p) => p,
            None => ModelParams::special(0.25, 0.125, 0.25, ctx.cfg.epsilon.unwrap_or(0.02))?,
        };
        let r = checks::attractivity_check(&p, ctx.cfg.pairs.unwrap_or(20), seed, ctx.cfg.tol.unwrap_or(1e-3))?;
        ctx.write(&mut o, "verify_attractivity.json", |w| io::write_json(w, &r))?;
        summary.insert("attractivity".into(), json!(r.passed));
        o.passed &= r.passed;
    }
    if run("uniqueness") {
        let sets = match given {
            Some(p) => vec![p],
            None => pinned::representative(ctx.cfg.epsilon())?,
        };
        let tol = ctx.cfg.tol.unwrap_or(1e-3);
        let reports: Vec<_> = sets.par_iter().map(|p| checks::uniqueness_check(p, 50.0, tol)).collect::<taseplk::Result<_>>()?;
        let passed = reports.iter().all(|r| r.passed);
        ctx.write(&mut o, "verify_uniqueness.json", |w| io::write_json(w, &reports))?;
        summary.insert("uniqueness".into(), json!(passed));
        o.passed &= passed;
    }
    let v = json!({ "suite": suite, "passed": o.passed, "results": summary });
    println!("{}", serde_json::to_string(&v).unwrap());
    o.details = v;
    Ok(o)
}

fn error_kind(e: &taseplk::Error) -> &'static str {
    use taseplk::Error::*;
    match e {
        Parameter(_) => "parameter",
        Structure(_) => "structure",
        Range { .. } => "range",
        Solver { .. } => "solver",
        Classification(_) => "classification",
        Logic(_) => "logic",
        Consistency(_) => "consistency",
        Unsupported(_) => "unsupported",
        Undefined { .. } => "undefined",
        Io(_) => "io",
        Csv(_) => "csv",
        Json(_) => "json",
    }
}

fn usage_exit(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn compact(cfg: &RunConfig) -> Value {
    let mut v = serde_json::to_value(cfg).unwrap();
    v.as_object_mut().unwrap().retain(|_, x| !x.is_null());
    v
}

fn hash(cfg: &Value) -> String {
    let bytes = serde_json::to_vec(cfg).unwrap();
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_manifest(out: &Path, m: &RunManifest) -> taseplk::Result<()> {
    io::to_file(&out.join("manifest.json"), |w| io::write_json(w, m))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags) = command_overlay(&cli.cmd);
    let mut cfg = match &cli.config {
        Some(path) => config::load(path).unwrap_or_else(|e| usage_exit(ErrorKind::ValueValidation, e)),
        None => RunConfig::default(),
    };
    cfg.overlay(&flags);
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }

    let jobs = cli.jobs.unwrap_or(0);
    if jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            usage_exit(ErrorKind::ValueValidation, format!("--jobs: {e}"));
        }
    }

    let ctx = Ctx { out: cli.out.clone(), cfg };
    let start = Instant::now();
    let result = match name {
        "phase" => cmd_phase(&ctx),
        "steady" => cmd_steady(&ctx),
        "evolve" => cmd_evolve(&ctx),
        "kmc" => cmd_kmc(&ctx),
        "meanfield" => cmd_meanfield(&ctx),
        "sweep" => cmd_sweep(&ctx),
        _ => cmd_verify(&ctx),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(Failure::Usage(msg)) => usage_exit(ErrorKind::MissingRequiredArgument, msg),
        Err(Failure::Core(e)) => {
            eprintln!("{}", json!({ "command": name, "error": error_kind(&e), "message": e.to_string() }));
            return ExitCode::from(1);
        }
    };

    let manifest = RunManifest {
        command: name,
        params: outcome.params,
        config_sha256: hash(&compact(&ctx.cfg)),
        config: compact(&ctx.cfg),
        seed: ctx.cfg.seed,
        versions: BTreeMap::from([("taseplk-cli", env!("CARGO_PKG_VERSION")), ("taseplk-core", taseplk::VERSION)]),
        jobs: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: outcome.outputs,
        details: outcome.details,
        passed: outcome.passed,
    };
    if let Err(e) = write_manifest(&ctx.out, &manifest) {
        eprintln!("{}", json!({ "command": name, "error": error_kind(&e), "message": e.to_string() }));
        return ExitCode::from(1);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
