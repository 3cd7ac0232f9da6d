//! `mfgauss`: run one verification over a scenario and write its artifacts.
//!
//! Exit codes: 0 when every criterion passes, 1 when any fails, 2 for
//! configuration and input errors, 3 for numerical failures (quadrature,
//! factorization, regression).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mfgauss::analysis::{self, PathSource};
use mfgauss::config::{Resolved, SampleSource, ScenarioConfig, PRESET_NAMES};
use mfgauss::{Error, Report, Result};

mod output;

/// Overrides the configured output directory.
const OUTPUT_DIR_ENV: &str = "MFGAUSS_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "mfgauss", version, about = "Covariance-level checks for multifractional Gaussian processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario config (JSON).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset: fwn-constant, fwn-sine, farima-sine, farima-asymmetry.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Dot-path override, e.g. `--set quadrature.rel_tol=1e-6`. Repeatable.
    #[arg(long = "set", global = true, value_name = "PATH=VALUE")]
    overrides: Vec<String>,
    /// Validate the config and print the work plan without computing.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (wins over the environment and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Closed-form constants and the FWN spectral check.
    Kernels,
    /// Exact partial-sum covariances against the limit covariance.
    VerifyInvariance,
    /// Sample paths of the limit or partial-sum process.
    Sample,
    /// Local self-similarity against the tangent covariance.
    TangentCheck,
    /// Pointwise Hölder exponent from sampled paths.
    Holder,
    /// Covariance of the representation formula against the limit.
    RepresentationCheck,
    /// Fixed point of the renormalization semigroup.
    RenormCheck,
    /// Quadrature against the Riemann-sum oracle.
    OracleCompare,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Kernels => "kernels",
            Command::VerifyInvariance => "verify-invariance",
            Command::Sample => "sample",
            Command::TangentCheck => "tangent-check",
            Command::Holder => "holder",
            Command::RepresentationCheck => "representation-check",
            Command::RenormCheck => "renorm-check",
            Command::OracleCompare => "oracle-compare",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let detail = match &e {
                Error::Config { path, message } => format!("path={path:?} message={message:?}"),
                other => format!("message={:?}", other.to_string()),
            };
            eprintln!("mfgauss: error tag={} {detail}", e.tag());
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn load(common: &Common) -> Result<ScenarioConfig> {
    match (&common.config, &common.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_error("config", format!("cannot read {}: {e}", path.display())))?;
            ScenarioConfig::parse(&text, &common.overrides)
        }
        (None, Some(name)) => ScenarioConfig::preset(name, &common.overrides),
        _ => Err(config_error(
            "",
            format!("give --config FILE or --preset NAME ({})", PRESET_NAMES.join(", ")),
        )),
    }
}

fn config_error(path: &str, message: String) -> Error {
    Error::Config {
        path: path.into(),
        message,
    }
}

fn output_dir(common: &Common, config: &ScenarioConfig) -> PathBuf {
    if let Some(p) = &common.out {
        return p.clone();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from(&config.output_dir),
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let common = &cli.common;
    let config = load(common)?;
    let resolved = config.resolve()?;
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(config_error("--threads", "must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config_error("--threads", e.to_string()))?;
    }
    let out = output_dir(common, &config);
    if common.dry_run {
        for line in plan(cli.command, &resolved, &out) {
            println!("{line}");
        }
        return Ok(true);
    }
    let (mut report, extra) = execute(cli.command, &resolved)?;
    report.param("config", &resolved.config);
    let files = output::write_report(&out, cli.command.name(), &report, &extra)?;
    for line in report.summary_lines() {
        println!("{line}");
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(report.passed())
}

/// A report plus any extra artifacts `(file name, contents)`.
type Outcome = (Report, Vec<(String, String)>);

fn execute(command: Command, r: &Resolved) -> Result<Outcome> {
    let c = &r.config;
    let tol = &c.tolerances;
    let scenario = r.scenario();
    let report = match command {
        Command::Kernels => {
            let report = analysis::kernels_report(
                scenario,
                &r.asympt,
                &r.kernel_pairs(),
                c.kernels.max_lag,
                tol.spectral,
                tol.diagonal_constant,
            )?;
            if let Some(rows) = report.parameters.get("constants").and_then(|v| v.as_array()) {
                for row in rows {
                    let f = |k: &str| row[k].as_f64().unwrap_or(f64::NAN);
                    println!(
                        "H1={} H2={} R={:.15} ({}) r_fwn={:.15} r_fwn_unhalved={:.15} r_farima={:.15} D={:.15}",
                        f("h1"),
                        f("h2"),
                        f("r_selected"),
                        r.asympt.name(),
                        f("r_fwn"),
                        f("r_fwn_unhalved"),
                        f("r_farima"),
                        f("d_coef"),
                    );
                }
            }
            report
        }
        Command::VerifyInvariance => analysis::invariance_report(
            scenario,
            &r.model,
            &r.kernel,
            &c.n_ladder,
            &c.time_grid,
            tol.invariance,
        )?,
        Command::Sample => {
            let s = c.sample;
            let times: Vec<f64> = (1..=s.points).map(|k| s.t_max * k as f64 / s.points as f64).collect();
            let source = match s.source {
                SampleSource::Limit => PathSource::Limit(&r.kernel),
                SampleSource::PartialSum => PathSource::PartialSum {
                    model: &r.model,
                    profile: &r.profile,
                    n: s.n,
                },
            };
            let run = analysis::sample_run(scenario, source, &times, c.replicates, c.seed, tol.factorization)?;
            let csv = run.to_csv()?;
            return Ok((run.report, vec![("sample-paths.csv".into(), csv)]));
        }
        Command::TangentCheck => analysis::tangent_report(
            scenario,
            &r.kernel,
            c.tangent,
            &c.eps_ladder,
            tol.tangent_distinct,
            tol.tangent_inversions,
        )?,
        Command::Holder => {
            analysis::holder_report(scenario, &r.kernel, &c.holder.t0, &r.holder_params(), r.holder_tolerance())?
        }
        Command::RepresentationCheck => {
            let p = c.representation;
            analysis::representation_report(scenario, &r.kernel, p.t, p.s, p.dh, p.step, tol.representation)?
        }
        Command::RenormCheck => analysis::renorm_report(
            scenario,
            &r.model,
            &r.asympt,
            &c.renorm.fixed_ladder,
            &c.renorm.field_ladder,
            &r.renorm_pairs(),
            tol.renorm,
        )?,
        Command::OracleCompare => analysis::oracle_report(
            scenario,
            &r.kernel,
            &c.time_grid,
            c.oracle.n,
            c.oracle.band,
            tol.oracle,
        )?,
    };
    Ok((report, Vec::new()))
}

fn plan(command: Command, r: &Resolved, out: &std::path::Path) -> Vec<String> {
    let c = &r.config;
    let m = c.time_grid.len();
    let mut lines = vec![
        format!("command: {}", command.name()),
        format!("scenario: {}", r.name()),
        format!(
            "model: {} on [{}, {}], asymptotic covariance {}",
            r.model.kind().name(),
            r.model.a(),
            r.model.b(),
            r.asympt.name()
        ),
        format!("profile: {}", r.profile.to_json()),
    ];
    let work = match command {
        Command::Kernels => format!(
            "constants at {} (H1, H2) pairs, spectral check on lags 0..={}",
            r.kernel_pairs().len(),
            c.kernels.max_lag
        ),
        Command::VerifyInvariance => format!(
            "exact partial-sum covariances for N in {:?} on {m} times, {} limit-covariance entries",
            c.n_ladder,
            m * (m + 1) / 2
        ),
        Command::Sample => format!(
            "{} paths at {} times up to {} from the {:?} source",
            c.replicates, c.sample.points, c.sample.t_max, c.sample.source
        ),
        Command::TangentCheck => format!(
            "{} epsilons, base points {} and {}",
            c.eps_ladder.len(),
            c.tangent.base,
            c.tangent.other_base
        ),
        Command::Holder => format!(
            "{} replicates on {} points per t0 in {:?}, lags {:?}",
            c.replicates, c.holder.points, c.holder.t0, c.holder.lags
        ),
        Command::RepresentationCheck => format!(
            "representation covariance at ({}, {}) with dh = {}, step = {} and halved",
            c.representation.t, c.representation.s, c.representation.dh, c.representation.step
        ),
        Command::RenormCheck => format!(
            "fixed point at N in {:?}, field at N in {:?}, {} Hurst pairs",
            c.renorm.fixed_ladder,
            c.renorm.field_ladder,
            r.renorm_pairs().len()
        ),
        Command::OracleCompare => format!(
            "Riemann oracle at N = {}, band {} on a {m}x{m} grid",
            c.oracle.n, c.oracle.band
        ),
    };
    lines.push(format!("work: {work}"));
    lines.push(format!("output: {}", out.display()));
    lines
}
