//! Command-line surface for the half-wave laboratory.
//!
//! Four commands: `solve` marches initial data and records snapshots
//! plus a monitor table; `norms` prints norm tables for a stored field;
//! `exponents` maps the regularity landscape of one problem; `exp
//! <name>` runs a scripted experiment and emits `report.json` +
//! `series.csv` (the report's bytes depend only on config and seed).
//!
//! Exit codes: 0 success / pass verdict, 1 operational error, 2 fail
//! verdict, 3 inconclusive verdict.

use clap::{Args, Parser, Subcommand};
use halfwave::evolution::{evolve, mass, Ceiling, EquationParams, MonitorSpec};
use halfwave::experiments::decoherence::decoherence_run;
use halfwave::experiments::dependence::{continuous_dependence_probe, DependenceConfig};
use halfwave::experiments::inflation::norm_inflation_run;
use halfwave::experiments::negative_gamma::negative_gamma_run;
use halfwave::experiments::norm_scaling::initial_norm_scaling;
use halfwave::experiments::scattering::{scattering_probe, ScatteringConfig};
use halfwave::experiments::small_dispersion::{
    small_dispersion_sweep, weighted_small_dispersion_check,
};
use halfwave::experiments::strichartz::{strichartz_probe, StrichartzConfig};
use halfwave::experiments::{ExperimentReport, SweepConfig, Verdict};
use halfwave::exponents::{
    critical_exponent, gamma_pq, illposed_range_check, is_admissible, is_odd_integer,
    smalldisp_parameters, subcritical_check, Exponent, ProblemSetup,
};
use halfwave::io::{
    emit_report, parse_config, read_field, write_field, ConfigSchema, Kind, RunConfig,
};
use halfwave::norms::{besov_norm, sobolev_norm, weighted_norm_hkk};
use halfwave::spectral::{synthesize, to_physical, Recipe};
use halfwave::{Error, GridSpec, Result, Space};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "halfwave",
    version,
    about = "Pseudospectral laboratory for the nonlinear half-wave equation",
    propagate_version = true
)]
struct Cli {
    /// `key = value` file overriding the command's built-in defaults
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory for reports and field files
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Base seed for the randomized probes
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// March initial data; write field snapshots and a monitor table
    Solve(SolveArgs),
    /// Print norm tables for a stored field
    Norms(NormsArgs),
    /// Print the exponent landscape for one problem setup
    Exponents(ExponentsArgs),
    /// Run a named experiment; emit report.json and series.csv
    Exp(ExpArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Space dimension (1..=3)
    #[arg(long)]
    d: Option<usize>,
    /// Grid points per axis (power of two, at least 8)
    #[arg(long)]
    n: Option<usize>,
    /// Box side length
    #[arg(long)]
    length: Option<f64>,
    /// Nonlinearity power
    #[arg(long)]
    nu: Option<f64>,
    /// Nonlinearity sign (+1 or -1)
    #[arg(long)]
    mu: Option<f64>,
    /// Dispersion coefficient
    #[arg(long)]
    delta: Option<f64>,
    /// Final time
    #[arg(long)]
    t_final: Option<f64>,
    /// Time step (must divide the final time)
    #[arg(long)]
    dt: Option<f64>,
    /// Comma-separated regularity exponents to monitor
    #[arg(long, value_name = "LIST")]
    monitor: Option<String>,
    /// Record every this many steps (default: about 100 rows total)
    #[arg(long)]
    stride: Option<usize>,
    /// Number of field snapshots to keep (first and last included)
    #[arg(long)]
    snapshots: Option<usize>,
    /// Width of the synthesized Gaussian data
    #[arg(long)]
    sigma: Option<f64>,
    /// Amplitude of the synthesized Gaussian data
    #[arg(long)]
    amplitude: Option<f64>,
    /// Start from a stored field instead of synthesized data
    #[arg(long, value_name = "PATH")]
    initial: Option<PathBuf>,
    /// Halt when the first monitored norm grows by this factor
    #[arg(long, value_name = "FACTOR")]
    ceiling: Option<f64>,
}

#[derive(Args)]
struct NormsArgs {
    /// Stored field (HWF1)
    field: PathBuf,
    /// Comma-separated regularity exponents
    #[arg(long, default_value = "0,0.5,1")]
    gamma: String,
    /// Use the homogeneous weight |k|^gamma instead of <k>^gamma
    #[arg(long)]
    homogeneous: bool,
    /// Integrability exponent (a number, or "inf")
    #[arg(long, default_value = "2")]
    lq: String,
    /// Also print the dyadic-block norm column
    #[arg(long)]
    besov: bool,
    /// Also print the weighted space-decay norm of this order
    #[arg(long, value_name = "K")]
    weighted: Option<usize>,
}

#[derive(Args)]
struct ExponentsArgs {
    /// Space dimension
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Nonlinearity power
    #[arg(long, default_value_t = 5.0)]
    nu: f64,
    /// Regularity to classify
    #[arg(long)]
    gamma: Option<f64>,
    /// Time exponent of a space-time pair to test (number or "inf")
    #[arg(long)]
    p: Option<String>,
    /// Space exponent of a space-time pair to test (number or "inf")
    #[arg(long)]
    q: Option<String>,
    /// Dispersion size for the scaling parameters
    #[arg(long, default_value_t = 1e-2)]
    delta: f64,
}

#[derive(Args)]
struct ExpArgs {
    /// One of: small-dispersion, norm-scaling, inflation, decoherence,
    /// negative-gamma, scattering, strichartz, dependence
    name: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Solve(args) => run_solve(args, cli),
        Command::Norms(args) => run_norms(args, cli),
        Command::Exponents(args) => run_exponents(args, cli),
        Command::Exp(args) => run_exp(args, cli),
    }
}

// ---------------------------------------------------------------- config

fn load_config(cli: &Cli, schema: &ConfigSchema) -> Result<Option<RunConfig>> {
    match &cli.config {
        None => Ok(None),
        Some(path) => {
            let text = fs::read_to_string(path)?;
            Ok(Some(parse_config(&text, schema)?))
        }
    }
}

fn reject_config(cli: &Cli) -> Result<()> {
    if cli.config.is_some() {
        return Err(Error::Domain(
            "this command reads no config file; pass parameters as flags".into(),
        ));
    }
    Ok(())
}

fn cfg_f(rc: &Option<RunConfig>, key: &str) -> Option<f64> {
    rc.as_ref().and_then(|c| c.float(key))
}

fn cfg_i(rc: &Option<RunConfig>, key: &str) -> Option<i64> {
    rc.as_ref().and_then(|c| c.int(key))
}

fn cfg_b(rc: &Option<RunConfig>, key: &str) -> Option<bool> {
    rc.as_ref().and_then(|c| c.bool(key))
}

fn cfg_list(rc: &Option<RunConfig>, key: &str) -> Option<Vec<f64>> {
    rc.as_ref().and_then(|c| c.float_list(key))
}

fn cfg_text(rc: &Option<RunConfig>, key: &str) -> Option<String> {
    rc.as_ref().and_then(|c| c.text(key)).map(str::to_string)
}

fn parse_float_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().map_err(|_| Error::Domain(format!("not a number: {s:?}")))
        })
        .collect()
}

fn parse_exponent(text: &str) -> Result<Exponent> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(Exponent::Infinity);
    }
    let v = t.parse::<f64>().map_err(|_| Error::Domain(format!("not an exponent: {t:?}")))?;
    Exponent::finite(v)
}

fn exponent_from(v: f64) -> Result<Exponent> {
    if v.is_infinite() && v > 0.0 {
        Ok(Exponent::Infinity)
    } else {
        Exponent::finite(v)
    }
}

fn rel_drift(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

// ----------------------------------------------------------------- solve

const SOLVE_KEYS: &[(&str, Kind)] = &[
    ("d", Kind::Int),
    ("n", Kind::Int),
    ("length", Kind::Float),
    ("nu", Kind::Float),
    ("mu", Kind::Float),
    ("delta", Kind::Float),
    ("t_final", Kind::Float),
    ("dt", Kind::Float),
    ("monitor_gammas", Kind::FloatList),
    ("stride", Kind::Int),
    ("snapshots", Kind::Int),
    ("sigma", Kind::Float),
    ("amplitude", Kind::Float),
    ("initial", Kind::Text),
    ("ceiling_factor", Kind::Float),
];

fn run_solve(args: &SolveArgs, cli: &Cli) -> Result<ExitCode> {
    let rc = load_config(cli, &ConfigSchema::new(SOLVE_KEYS))?;
    let d = args.d.or(cfg_i(&rc, "d").map(|v| v as usize)).unwrap_or(1);
    let n = args.n.or(cfg_i(&rc, "n").map(|v| v as usize)).unwrap_or(1024);
    let length = args.length.or(cfg_f(&rc, "length")).unwrap_or(60.0);
    let nu = args.nu.or(cfg_f(&rc, "nu")).unwrap_or(3.0);
    let mu = args.mu.or(cfg_f(&rc, "mu")).unwrap_or(1.0);
    let delta = args.delta.or(cfg_f(&rc, "delta")).unwrap_or(1.0);
    let t_final = args.t_final.or(cfg_f(&rc, "t_final")).unwrap_or(1.0);
    let dt = args.dt.or(cfg_f(&rc, "dt")).unwrap_or(1e-3);
    let gammas = match &args.monitor {
        Some(text) => parse_float_list(text)?,
        None => cfg_list(&rc, "monitor_gammas").unwrap_or_else(|| vec![0.5]),
    };
    let steps = (t_final / dt).round().max(1.0) as usize;
    let stride = args
        .stride
        .or(cfg_i(&rc, "stride").map(|v| v as usize))
        .unwrap_or_else(|| (steps / 100).max(1));
    let snapshots =
        args.snapshots.or(cfg_i(&rc, "snapshots").map(|v| v as usize)).unwrap_or(5).max(2);
    let initial = args.initial.clone().or_else(|| cfg_text(&rc, "initial").map(PathBuf::from));
    let ceiling_factor = args.ceiling.or(cfg_f(&rc, "ceiling_factor"));

    let params = EquationParams::new(nu, mu, delta)?;
    let u0 = match &initial {
        Some(path) => {
            let f = read_field(path)?;
            if f.space() == Space::Spectral {
                to_physical(&f)?
            } else {
                f
            }
        }
        None => {
            let grid = GridSpec::new(d, n, length)?;
            let sigma = args.sigma.or(cfg_f(&rc, "sigma")).unwrap_or(1.0);
            let amplitude = args.amplitude.or(cfg_f(&rc, "amplitude")).unwrap_or(1.0);
            synthesize(grid, Recipe::Gaussian { sigma, amplitude, center: [0.0; 3] })?
        }
    };
    let grid = u0.grid();
    let ceiling = ceiling_factor
        .map(|factor| Ceiling { gamma: gammas.first().copied().unwrap_or(0.5), factor });
    let monitor = MonitorSpec { stride, gammas: gammas.clone(), ceiling };
    let traj = evolve(&u0, t_final, dt, &params, &monitor)?;

    fs::create_dir_all(&cli.out)?;
    let mut csv = String::from("t,mass,energy");
    for g in &gammas {
        csv.push_str(&format!(",h{g}"));
    }
    csv.push('\n');
    for (i, t) in traj.times.iter().enumerate() {
        let row = &traj.monitors[i];
        csv.push_str(&format!("{t},{},{}", row.mass, row.energy));
        for v in &row.norms {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    let csv_path = cli.out.join("monitors.csv");
    fs::write(&csv_path, csv)?;

    let want = snapshots.min(traj.len());
    let mut kept = Vec::new();
    for j in 0..want {
        let idx = if want == 1 {
            0
        } else {
            ((j as f64 / (want - 1) as f64) * (traj.len() - 1) as f64).round() as usize
        };
        let path = cli.out.join(format!("snapshot_{j:03}.hwf1"));
        write_field(&path, &traj.states[idx])?;
        kept.push((traj.times[idx], path));
    }

    let first = &traj.monitors[0];
    let last = traj.monitors.last().expect("trajectory holds the initial state");
    println!(
        "marched {steps} steps of dt = {dt} to t = {t_final} on d = {}, n = {}, L = {}",
        grid.dim(),
        grid.points_per_axis(),
        grid.length()
    );
    println!(
        "mass drift {:.3e}, energy drift {:.3e}",
        rel_drift(first.mass, last.mass),
        rel_drift(first.energy, last.energy)
    );
    println!("monitors: {} ({} rows)", csv_path.display(), traj.len());
    for (t, path) in &kept {
        println!("  t = {t:<10}: {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

// ----------------------------------------------------------------- norms

fn run_norms(args: &NormsArgs, cli: &Cli) -> Result<ExitCode> {
    reject_config(cli)?;
    let f = read_field(&args.field)?;
    let gammas = parse_float_list(&args.gamma)?;
    let q = parse_exponent(&args.lq)?;
    let grid = f.grid();
    println!(
        "field {}: d = {}, n = {}, L = {}, {} space",
        args.field.display(),
        grid.dim(),
        grid.points_per_axis(),
        grid.length(),
        match f.space() {
            Space::Physical => "physical",
            Space::Spectral => "spectral",
        }
    );
    println!("mass {:.12e}", mass(&f));
    let weight = if args.homogeneous { "|k|^g" } else { "<k>^g" };
    if args.besov {
        println!("{:>8}  {:>24}  {:>24}", "gamma", format!("sobolev ({weight}, q={q})"), "besov");
    } else {
        println!("{:>8}  {:>24}", "gamma", format!("sobolev ({weight}, q={q})"));
    }
    for &gamma in &gammas {
        let s = sobolev_norm(&f, gamma, args.homogeneous, q)?;
        if args.besov {
            let b = besov_norm(&f, gamma, args.homogeneous, q)?;
            println!("{gamma:>8}  {s:>24.12e}  {b:>24.12e}");
        } else {
            println!("{gamma:>8}  {s:>24.12e}");
        }
    }
    if let Some(k) = args.weighted {
        println!("weighted order-{k} norm {:.12e}", weighted_norm_hkk(&f, k)?);
    }
    Ok(ExitCode::SUCCESS)
}

// ------------------------------------------------------------- exponents

fn run_exponents(args: &ExponentsArgs, cli: &Cli) -> Result<ExitCode> {
    reject_config(cli)?;
    let d = args.d;
    let nu = args.nu;
    let gc = critical_exponent(d, nu)?;
    let oddity = if is_odd_integer(nu) { " (odd integer: smooth nonlinearity)" } else { "" };
    println!("problem: d = {d}, nu = {nu}{oddity}");
    println!("critical exponent gamma_c = d/2 - 1/(nu - 1) = {gc:.6}");
    if d >= 2 {
        let threshold = if d == 2 {
            1.0 - 1.0 / (nu - 1.0).max(4.0)
        } else {
            d as f64 / 2.0 - 1.0 / (nu - 1.0).max(2.0)
        };
        println!("local theory needs gamma > {threshold:.6}");
    } else {
        println!("the local-theory threshold applies in dimension >= 2 only");
    }
    if gc > 0.0 {
        println!(
            "ill-posed regularities: gamma <= -d/2 = {}, or 0 <= gamma < gamma_c \
             (gamma = 0 through phase decoherence)",
            -(d as f64) / 2.0
        );
    } else {
        println!(
            "ill-posed regularities: gamma <= -d/2 = {} (all below gamma_c = {gc:.6})",
            -(d as f64) / 2.0
        );
    }
    if d >= 2 {
        println!("admissible pairs (2/p + (d-1)/q <= (d-1)/2), samples:");
        let ps = [Exponent::Infinity, Exponent::Finite(8.0), Exponent::Finite(6.0)];
        let qs = [2.0, 4.0, 6.0, 8.0];
        for p in ps {
            for qv in qs {
                let q = Exponent::Finite(qv);
                if is_admissible(d, p, q)?.holds {
                    println!("  (p, q) = ({p}, {q}), gamma_pq = {:.6}", gamma_pq(d, p, q)?);
                }
            }
        }
    } else {
        println!("no admissible pairs exist in dimension 1");
    }
    if let Some(gamma) = args.gamma {
        let setup = ProblemSetup::new(d, nu, 1.0, gamma)?;
        if d >= 2 {
            let v = subcritical_check(&setup)?;
            println!(
                "subcritical at gamma = {gamma}: {} ({})",
                if v.holds { "yes" } else { "no" },
                v.reason
            );
        }
        let v = illposed_range_check(&setup)?;
        println!(
            "ill-posed range membership at gamma = {gamma}: {} ({})",
            if v.holds { "yes" } else { "no" },
            v.reason
        );
        if gamma < gc {
            let sd = smalldisp_parameters(&setup, args.delta)?;
            println!(
                "dispersion scaling at delta = {}: theta = {:.6}, lambda = {:.6e}, \
                 predicted data size {:.6e}",
                args.delta, sd.theta, sd.lambda, sd.epsilon_pred
            );
        }
    }
    if let (Some(p), Some(q)) = (&args.p, &args.q) {
        let p = parse_exponent(p)?;
        let q = parse_exponent(q)?;
        let v = is_admissible(d, p, q)?;
        print!(
            "pair ({p}, {q}): {} ({})",
            if v.holds { "admissible" } else { "inadmissible" },
            v.reason
        );
        println!("; gamma_pq = {:.6}", gamma_pq(d, p, q)?);
    } else if args.p.is_some() != args.q.is_some() {
        return Err(Error::Domain("p and q come as a pair".into()));
    }
    Ok(ExitCode::SUCCESS)
}

// ------------------------------------------------------------------- exp

const EXPERIMENTS: &str = "small-dispersion, norm-scaling, inflation, decoherence, \
                           negative-gamma, scattering, strichartz, dependence";

fn run_exp(args: &ExpArgs, cli: &Cli) -> Result<ExitCode> {
    let report = build_and_run(&args.name, cli)?;
    let (report_path, csv_path) = emit_report(&report, &cli.out)?;
    print_report(&report);
    println!("report: {}", report_path.display());
    println!("series: {}", csv_path.display());
    Ok(match report.verdict {
        Verdict::Pass => ExitCode::SUCCESS,
        Verdict::Fail => ExitCode::from(2),
        Verdict::Inconclusive => ExitCode::from(3),
    })
}

fn print_report(report: &ExperimentReport) {
    println!("experiment {}: {}", report.name, report.verdict);
    for c in &report.checks {
        println!("  [{:^12}] {}: {}", c.verdict.to_string(), c.name, c.detail);
    }
    for (name, fit) in &report.fits {
        println!(
            "  fit {name}: slope {:.6} +/- {:.2e}, intercept {:.6}",
            fit.slope, fit.stderr, fit.intercept
        );
    }
    println!("  solver margin {:.3e}; {} series rows", report.solver_margin, report.series.len());
}

/// Shared keys of the sweep-driven experiments plus per-experiment extras.
fn sweep_schema(extra: &[(&str, Kind)]) -> ConfigSchema {
    let mut entries: Vec<(&str, Kind)> = vec![
        ("d", Kind::Int),
        ("nu", Kind::Float),
        ("mu", Kind::Float),
        ("gamma", Kind::Float),
        ("delta_list", Kind::FloatList),
        ("n", Kind::Int),
        ("length", Kind::Float),
        ("dt", Kind::Float),
        ("fit_lo", Kind::Float),
        ("fit_hi", Kind::Float),
    ];
    entries.extend_from_slice(extra);
    ConfigSchema::new(&entries)
}

struct SweepDefaults {
    d: usize,
    nu: f64,
    mu: f64,
    gamma: f64,
    deltas: Vec<f64>,
    n: usize,
    length: f64,
    dt: f64,
    fit_window: Option<(f64, f64)>,
}

fn sweep_from(rc: &Option<RunConfig>, def: SweepDefaults) -> Result<(SweepConfig, f64)> {
    let d = cfg_i(rc, "d").map(|v| v as usize).unwrap_or(def.d);
    let nu = cfg_f(rc, "nu").unwrap_or(def.nu);
    let mu = cfg_f(rc, "mu").unwrap_or(def.mu);
    let gamma = cfg_f(rc, "gamma").unwrap_or(def.gamma);
    let deltas = cfg_list(rc, "delta_list").unwrap_or(def.deltas);
    let n = cfg_i(rc, "n").map(|v| v as usize).unwrap_or(def.n);
    let length = cfg_f(rc, "length").unwrap_or(def.length);
    let dt = cfg_f(rc, "dt").unwrap_or(def.dt);
    let fit_window = match (cfg_f(rc, "fit_lo"), cfg_f(rc, "fit_hi")) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        (None, None) => def.fit_window,
        _ => return Err(Error::Domain("fit_lo and fit_hi come as a pair".into())),
    };
    let setup = ProblemSetup::new(d, nu, mu, gamma)?;
    Ok((SweepConfig { setup, deltas, n, length, dt, fit_window }, gamma))
}

fn build_and_run(name: &str, cli: &Cli) -> Result<ExperimentReport> {
    match name {
        "small-dispersion" => {
            let schema = sweep_schema(&[
                ("t_eval", Kind::Float),
                ("k", Kind::Int),
                ("weighted", Kind::Bool),
            ]);
            let rc = load_config(cli, &schema)?;
            let (cfg, _) = sweep_from(
                &rc,
                SweepDefaults {
                    d: 1,
                    nu: 5.0,
                    mu: 1.0,
                    gamma: 0.0,
                    deltas: vec![1e-1, 10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5), 1e-3, 0.0],
                    n: 512,
                    length: 30.0,
                    dt: 2e-3,
                    fit_window: None,
                },
            )?;
            let t_eval = cfg_f(&rc, "t_eval").unwrap_or(1.0);
            let k = cfg_i(&rc, "k").unwrap_or(1).max(1) as usize;
            if cfg_b(&rc, "weighted").unwrap_or(false) {
                weighted_small_dispersion_check(&cfg, t_eval, k)
            } else {
                small_dispersion_sweep(&cfg, t_eval, k)
            }
        }
        "norm-scaling" => {
            let rc = load_config(cli, &sweep_schema(&[]))?;
            let (cfg, gamma) = sweep_from(
                &rc,
                SweepDefaults {
                    d: 1,
                    nu: 5.0,
                    mu: 1.0,
                    gamma: 0.1,
                    deltas: (4..=8).map(|k| 2.0f64.powi(-k)).collect(),
                    n: 256,
                    length: 30.0,
                    dt: 1e-2,
                    fit_window: None,
                },
            )?;
            initial_norm_scaling(&cfg, gamma)
        }
        "inflation" => {
            let rc = load_config(cli, &sweep_schema(&[]))?;
            let (cfg, gamma) = sweep_from(
                &rc,
                SweepDefaults {
                    d: 1,
                    nu: 5.0,
                    mu: 1.0,
                    gamma: 0.1,
                    deltas: vec![1e-3],
                    n: 1024,
                    length: 40.0,
                    dt: 5e-3,
                    fit_window: Some((5.0, 50.0)),
                },
            )?;
            norm_inflation_run(&cfg, gamma)
        }
        "decoherence" => {
            let schema = sweep_schema(&[("a", Kind::Float), ("a_prime", Kind::Float)]);
            let rc = load_config(cli, &schema)?;
            let (cfg, _) = sweep_from(
                &rc,
                SweepDefaults {
                    d: 1,
                    nu: 5.0,
                    mu: 1.0,
                    gamma: 0.0,
                    deltas: vec![2e-3],
                    n: 512,
                    length: 40.0,
                    dt: 5e-3,
                    fit_window: Some((2.0, 10.0)),
                },
            )?;
            let a = cfg_f(&rc, "a").unwrap_or(1.0);
            let a_prime = cfg_f(&rc, "a_prime").unwrap_or(1.05);
            decoherence_run(&cfg, a, a_prime)
        }
        "negative-gamma" => {
            let rc = load_config(cli, &sweep_schema(&[]))?;
            let (cfg, gamma) = sweep_from(
                &rc,
                SweepDefaults {
                    d: 1,
                    nu: 5.0,
                    mu: 1.0,
                    gamma: -1.0,
                    deltas: vec![1e-2],
                    n: 8192,
                    length: 2048.0,
                    dt: 1e-2,
                    fit_window: None,
                },
            )?;
            negative_gamma_run(&cfg, gamma)
        }
        "scattering" => {
            let schema = ConfigSchema::new(&[
                ("nu", Kind::Float),
                ("mu", Kind::Float),
                ("n", Kind::Int),
                ("length", Kind::Float),
                ("eps0", Kind::Float),
                ("t_max", Kind::Float),
                ("dt", Kind::Float),
            ]);
            let rc = load_config(cli, &schema)?;
            let def = ScatteringConfig::default();
            let cfg = ScatteringConfig {
                nu: cfg_f(&rc, "nu").unwrap_or(def.nu),
                mu: cfg_f(&rc, "mu").unwrap_or(def.mu),
                n: cfg_i(&rc, "n").map(|v| v as usize).unwrap_or(def.n),
                length: cfg_f(&rc, "length").unwrap_or(def.length),
                // Large enough that the nonlinear ladder signal clears
                // the round-off floor at the stock data size.
                eps0: cfg_f(&rc, "eps0").unwrap_or(0.3),
                t_max: cfg_f(&rc, "t_max").unwrap_or(def.t_max),
                dt: cfg_f(&rc, "dt").unwrap_or(def.dt),
            };
            scattering_probe(&cfg)
        }
        "strichartz" => {
            let schema = ConfigSchema::new(&[
                ("d", Kind::Int),
                ("n", Kind::Int),
                ("length", Kind::Float),
                ("t_probe", Kind::Float),
                ("seeds", Kind::Int),
                ("time_nodes", Kind::Int),
                ("p", Kind::Float),
                ("q", Kind::Float),
                ("gamma", Kind::Float),
            ]);
            let rc = load_config(cli, &schema)?;
            let def = StrichartzConfig::default();
            let cfg = StrichartzConfig {
                d: cfg_i(&rc, "d").map(|v| v as usize).unwrap_or(def.d),
                n: cfg_i(&rc, "n").map(|v| v as usize).unwrap_or(def.n),
                length: cfg_f(&rc, "length").unwrap_or(def.length),
                t_probe: cfg_f(&rc, "t_probe").unwrap_or(def.t_probe),
                seeds: cfg_i(&rc, "seeds").map(|v| v as usize).unwrap_or(def.seeds),
                time_nodes: cfg_i(&rc, "time_nodes").map(|v| v as usize).unwrap_or(def.time_nodes),
                seed0: cli.seed,
            };
            let p = exponent_from(cfg_f(&rc, "p").unwrap_or(6.0))?;
            let q = exponent_from(cfg_f(&rc, "q").unwrap_or(6.0))?;
            let gamma = cfg_f(&rc, "gamma").unwrap_or(1.0);
            strichartz_probe(&cfg, (p, q), gamma)
        }
        "dependence" => {
            let schema = ConfigSchema::new(&[
                ("d", Kind::Int),
                ("nu", Kind::Float),
                ("mu", Kind::Float),
                ("gamma", Kind::Float),
                ("n", Kind::Int),
                ("length", Kind::Float),
                ("t_final", Kind::Float),
                ("dt", Kind::Float),
                ("eta_list", Kind::FloatList),
            ]);
            let rc = load_config(cli, &schema)?;
            let def = DependenceConfig::default();
            let cfg = DependenceConfig {
                d: cfg_i(&rc, "d").map(|v| v as usize).unwrap_or(def.d),
                nu: cfg_f(&rc, "nu").unwrap_or(def.nu),
                mu: cfg_f(&rc, "mu").unwrap_or(def.mu),
                gamma: cfg_f(&rc, "gamma").unwrap_or(def.gamma),
                n: cfg_i(&rc, "n").map(|v| v as usize).unwrap_or(def.n),
                length: cfg_f(&rc, "length").unwrap_or(def.length),
                t_final: cfg_f(&rc, "t_final").unwrap_or(def.t_final),
                dt: cfg_f(&rc, "dt").unwrap_or(def.dt),
                etas: cfg_list(&rc, "eta_list").unwrap_or(def.etas),
            };
            continuous_dependence_probe(&cfg)
        }
        other => Err(Error::Domain(format!(
            "unknown experiment {other:?}; expected one of: {EXPERIMENTS}"
        ))),
    }
}
