//! Scenario runner: executes a named setup against its reference solutions
//! and writes curves, traces, and a machine-readable report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use canon_core::{
    error_series_with_tol, run_scenario_with, CheckKind, CompareOptions, Scenario, ScenarioParams,
    ScenarioReport,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

const SCHEMA_VERSION: u32 = 1;

const OUTPUT_DOC: &str = "\
Output files (all plain text, one CSV per curve):
  report.json              versioned run report: resolved parameters, per-
                           epsilon sup-error tables, fitted orders, feature
                           checks, and the overall pass flag
  curve-<name>.csv         columns: epsilon, sup_error, t_end
                           one row per sweep strength; sup_error is the
                           supremum over sampled times of the l2 coefficient
                           distance between the method and the reference
  error-vs-t-<method>.csv  columns: t, error
                           l2 coefficient distance to the oracle trajectory
                           at each sampled time
  trajectory.csv           columns: t, re_c0, im_c0, ..., norm
                           oracle coefficient traces along the run

Config file: one `key = value` per line, `#` starts a comment. Keys:
  scenario      one of the names from `list-scenarios` (dashes or
                underscores both accepted)
  epsilon       a single number sets the featured strength the feature
                checks run at; a strictly decreasing comma list sets the
                sweep for the order fits instead
  epsilon1      drive amplitude of the slow pulse (adiabatic scenario)
  nu            drive frequency (harmonic scenarios)
  g             coupling strength (two-level scenario)
  delta0        detuning in units of epsilon (two-level scenario)
  N             mode count of the truncated basis
  horizon_mult  validity-horizon constant C_h; the run spans C_h / epsilon
  tol           oracle integration tolerance for the exported error series
  seed          recorded in the report; reruns with the same config and
                seed produce byte-identical reports
  output_dir    where outputs are written (overridden by --out)
  compare       comma list of opt-in baselines: std-pt, born-fock

Exit status: 0 if every curve fit and feature check passes, 1 otherwise.";

#[derive(Parser)]
#[command(name = "canon-avg", version, about = "Canonical-averaging scenario runner")]
#[command(after_long_help = OUTPUT_DOC)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a config file and write report + curves.
    #[command(after_long_help = OUTPUT_DOC)]
    Run(RunArgs),
    /// List the built-in scenarios.
    ListScenarios,
}

#[derive(Args)]
struct RunArgs {
    /// Path to a flat key=value config file.
    config: PathBuf,
    /// Override the config's scenario.
    #[arg(long)]
    scenario: Option<String>,
    /// Override the featured perturbation strength.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Output directory (default: config `output_dir`, then `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Opt-in comparison baselines, comma separated: std-pt, born-fock.
    #[arg(long)]
    compare: Option<String>,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<22} {}", s.name(), s.description());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => run_command(args),
    }
}

/// Config-file contents plus command-line overrides, before scenario
/// defaults are applied.
#[derive(Default)]
struct RawConfig {
    scenario: Option<String>,
    epsilon: Option<Vec<f64>>,
    epsilon1: Option<f64>,
    nu: Option<f64>,
    g: Option<f64>,
    delta0: Option<f64>,
    n_modes: Option<usize>,
    horizon_mult: Option<f64>,
    tol: Option<f64>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    compare: Option<String>,
}

fn parse_config(path: &Path) -> Result<RawConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let mut cfg = RawConfig::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{line}`", idx + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let fail = |what: &str| anyhow!("line {}: {what} for key `{key}`: `{value}`", idx + 1);
        match key {
            "scenario" => cfg.scenario = Some(value.to_string()),
            "epsilon" => {
                let list: Vec<f64> = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| fail("expected a number or comma list"))?;
                cfg.epsilon = Some(list);
            }
            "epsilon1" => cfg.epsilon1 = Some(value.parse().map_err(|_| fail("expected a number"))?),
            "nu" => cfg.nu = Some(value.parse().map_err(|_| fail("expected a number"))?),
            "g" => cfg.g = Some(value.parse().map_err(|_| fail("expected a number"))?),
            "delta0" => cfg.delta0 = Some(value.parse().map_err(|_| fail("expected a number"))?),
            "N" => cfg.n_modes = Some(value.parse().map_err(|_| fail("expected an integer"))?),
            "horizon_mult" => {
                cfg.horizon_mult = Some(value.parse().map_err(|_| fail("expected a number"))?)
            }
            "tol" => cfg.tol = Some(value.parse().map_err(|_| fail("expected a number"))?),
            "seed" => cfg.seed = Some(value.parse().map_err(|_| fail("expected an integer"))?),
            "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
            "compare" => cfg.compare = Some(value.to_string()),
            other => bail!("line {}: unknown config key `{other}`", idx + 1),
        }
    }
    Ok(cfg)
}

fn parse_scenario(name: &str) -> Result<Scenario> {
    let canonical = name.replace('_', "-");
    canonical
        .parse::<Scenario>()
        .map_err(|_| anyhow!("unknown scenario `{name}`; see `canon-avg list-scenarios`"))
}

fn parse_compare(list: &str) -> Result<CompareOptions> {
    let mut compare = CompareOptions::default();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "std-pt" => compare.standard_pt = true,
            "born-fock" => compare.born_fock = true,
            other => bail!("unknown compare baseline `{other}` (expected std-pt, born-fock)"),
        }
    }
    Ok(compare)
}

/// Resolved inputs of a run, echoed verbatim into the report.
struct Resolved {
    scenario: Scenario,
    params: ScenarioParams,
    compare: CompareOptions,
    tol: f64,
    seed: u64,
    out_dir: PathBuf,
}

fn resolve(args: &RunArgs) -> Result<Resolved> {
    let cfg = parse_config(&args.config)?;

    let scenario_name = args
        .scenario
        .as_deref()
        .or(cfg.scenario.as_deref())
        .ok_or_else(|| anyhow!("no scenario: set `scenario = ...` in the config or pass --scenario"))?;
    let scenario = parse_scenario(scenario_name)?;

    let mut params = scenario.default_params();
    if let Some(list) = &cfg.epsilon {
        match list.as_slice() {
            [] => bail!("epsilon list is empty"),
            [single] => params.epsilon = *single,
            sweep => {
                if !sweep.windows(2).all(|w| w[0] > w[1]) {
                    bail!("epsilon sweep must be strictly decreasing, got {sweep:?}");
                }
                params.epsilon_sweep = sweep.to_vec();
            }
        }
    }
    if let Some(v) = cfg.epsilon1 {
        params.pulse_amp = v;
    }
    if let Some(v) = cfg.nu {
        params.nu = v;
    }
    if let Some(v) = cfg.g {
        params.coupling_g = v;
    }
    if let Some(v) = cfg.delta0 {
        params.delta0 = v;
    }
    if let Some(v) = cfg.n_modes {
        params.n_modes = v;
    }
    if let Some(v) = cfg.horizon_mult {
        params.horizon_constant = v;
    }
    if let Some(eps) = args.epsilon {
        params.epsilon = eps;
    }

    let compare = match args.compare.as_deref().or(cfg.compare.as_deref()) {
        Some(list) => parse_compare(list)?,
        None => CompareOptions::default(),
    };
    let tol = cfg.tol.unwrap_or(match scenario {
        Scenario::HarmonicResonant => 5e-12,
        _ => 1e-10,
    });
    let out_dir = args
        .out
        .clone()
        .or(cfg.output_dir)
        .unwrap_or_else(|| PathBuf::from("out"));

    Ok(Resolved {
        scenario,
        params,
        compare,
        tol,
        seed: cfg.seed.unwrap_or(0),
        out_dir,
    })
}

#[derive(Serialize)]
struct JsonReport {
    schema_version: u32,
    scenario: String,
    description: String,
    passed: bool,
    params: JsonParams,
    curves: Vec<JsonCurve>,
    features: Vec<JsonFeature>,
}

#[derive(Serialize)]
struct JsonParams {
    n_modes: usize,
    epsilon: f64,
    epsilon_sweep: Vec<f64>,
    nu: f64,
    coupling_g: f64,
    delta0: f64,
    tau0: f64,
    width: f64,
    epsilon1: f64,
    horizon_mult: f64,
    t_end: f64,
    oracle_tol: f64,
    seed: u64,
    compare: Vec<String>,
}

#[derive(Serialize)]
struct JsonCurve {
    name: String,
    fitted_order: Option<f64>,
    order_window: Option<(f64, f64)>,
    pass: bool,
    points: Vec<JsonPoint>,
}

#[derive(Serialize)]
struct JsonPoint {
    epsilon: f64,
    sup_error: f64,
    t_end: f64,
}

#[derive(Serialize)]
struct JsonFeature {
    name: String,
    value: f64,
    expected: f64,
    tolerance: f64,
    kind: String,
    pass: bool,
}

fn json_report(res: &Resolved, report: &ScenarioReport, t_end: f64) -> JsonReport {
    let mut compare = Vec::new();
    if res.compare.standard_pt {
        compare.push("std-pt".to_string());
    }
    if res.compare.born_fock {
        compare.push("born-fock".to_string());
    }
    JsonReport {
        schema_version: SCHEMA_VERSION,
        scenario: res.scenario.name().to_string(),
        description: res.scenario.description().to_string(),
        passed: report.passed(),
        params: JsonParams {
            n_modes: res.params.n_modes,
            epsilon: res.params.epsilon,
            epsilon_sweep: res.params.epsilon_sweep.clone(),
            nu: res.params.nu,
            coupling_g: res.params.coupling_g,
            delta0: res.params.delta0,
            tau0: res.params.tau0,
            width: res.params.width,
            epsilon1: res.params.pulse_amp,
            horizon_mult: res.params.horizon_constant,
            t_end,
            oracle_tol: res.tol,
            seed: res.seed,
            compare,
        },
        curves: report
            .curves
            .iter()
            .map(|c| JsonCurve {
                name: c.name.clone(),
                fitted_order: c.fitted_order,
                order_window: c.order_window,
                pass: c.pass,
                points: c
                    .points
                    .iter()
                    .map(|p| JsonPoint {
                        epsilon: p.epsilon,
                        sup_error: p.sup_error,
                        t_end: p.t_end,
                    })
                    .collect(),
            })
            .collect(),
        features: report
            .features
            .iter()
            .map(|f| JsonFeature {
                name: f.name.clone(),
                value: f.value,
                expected: f.expected,
                tolerance: f.tolerance,
                kind: match f.kind {
                    CheckKind::Within => "within".to_string(),
                    CheckKind::AtLeast => "at-least".to_string(),
                },
                pass: f.pass,
            })
            .collect(),
    }
}

/// Write-temp-then-rename, so readers never observe a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot rename into {}", path.display()))?;
    Ok(())
}

fn print_report(report: &ScenarioReport) {
    for curve in &report.curves {
        let verdict = if curve.pass { "PASS" } else { "FAIL" };
        match (curve.fitted_order, curve.order_window) {
            (Some(order), Some((lo, hi))) => println!(
                "{verdict} {}/{}: fitted order {order:.3} (window {lo:.2}..{hi:.2})",
                report.scenario, curve.name
            ),
            (Some(order), None) => println!(
                "{verdict} {}/{}: fitted order {order:.3} (informational)",
                report.scenario, curve.name
            ),
            _ => println!("{verdict} {}/{}: informational", report.scenario, curve.name),
        }
        for p in &curve.points {
            println!(
                "       eps {:<9} sup error {:.3e} over t <= {:.1}",
                p.epsilon, p.sup_error, p.t_end
            );
        }
    }
    for f in &report.features {
        let verdict = if f.pass { "PASS" } else { "FAIL" };
        match f.kind {
            CheckKind::Within => println!(
                "{verdict} {}/{}: {:.6e} vs {:.6e} (tol {:.1e})",
                report.scenario, f.name, f.value, f.expected, f.tolerance
            ),
            CheckKind::AtLeast => println!(
                "{verdict} {}/{}: {:.3} needs >= {:.3}",
                report.scenario, f.name, f.value, f.expected
            ),
        }
    }
}

fn run_command(args: RunArgs) -> Result<ExitCode> {
    let res = resolve(&args)?;
    let report = run_scenario_with(res.scenario, &res.params, res.compare)
        .with_context(|| format!("running scenario {}", res.scenario))?;
    let errors = error_series_with_tol(res.scenario, &res.params, res.compare, res.tol)
        .with_context(|| format!("exporting error series for {}", res.scenario))?;
    let t_end = *errors.trajectory.times.last().expect("nonempty trajectory");

    fs::create_dir_all(&res.out_dir)
        .with_context(|| format!("cannot create {}", res.out_dir.display()))?;

    let json = json_report(&res, &report, t_end);
    let mut report_bytes = serde_json::to_vec_pretty(&json)?;
    report_bytes.push(b'\n');
    write_atomic(&res.out_dir.join("report.json"), &report_bytes)?;

    for curve in &report.curves {
        let mut csv = String::from("epsilon,sup_error,t_end\n");
        for p in &curve.points {
            writeln!(csv, "{:.12e},{:.12e},{:.12e}", p.epsilon, p.sup_error, p.t_end)?;
        }
        write_atomic(&res.out_dir.join(format!("curve-{}.csv", curve.name)), csv.as_bytes())?;
    }

    for series in &errors.series {
        let mut csv = String::from("t,error\n");
        for (t, err) in errors.trajectory.times.iter().zip(&series.errors) {
            writeln!(csv, "{t:.12e},{err:.12e}")?;
        }
        write_atomic(
            &res.out_dir.join(format!("error-vs-t-{}.csv", series.method)),
            csv.as_bytes(),
        )?;
    }

    let mut traj_bytes = Vec::new();
    errors.trajectory.write_csv(&mut traj_bytes)?;
    write_atomic(&res.out_dir.join("trajectory.csv"), &traj_bytes)?;

    print_report(&report);
    println!("report: {}", res.out_dir.join("report.json").display());
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
