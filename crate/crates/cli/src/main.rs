use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nonlocal::integrate::Termination;
use nonlocal::verify::suites::{Suite, SuiteOptions};
use nonlocal_cli::config::{config_error, ConfigError, Settings};
use nonlocal_cli::levelset::LevelSetRequest;
use nonlocal_cli::scenario::{integrator_config, parse_system};
use nonlocal_cli::{simulate, verify, write_csv, Scenario};

/// Nonlocal constants of motion: simulate, verify and plot level sets.
///
/// Log level comes from NONLOCAL_LOG (quiet, info or debug).
#[derive(Parser)]
#[command(name = "nonlocal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write its trajectory as CSV.
    Simulate(SimulateArgs),
    /// Run a verification suite (dissipative, lane-emden, maxwell-bloch,
    /// all) or the checks for a scenario file.
    Verify(VerifyArgs),
    /// Write the level set ψ_{E,B} = K in the (qdot_3, qddot_3) plane as CSV.
    Levelset(LevelSetArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` setting; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    rtol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    atol: Option<f64>,
    /// Seed for randomized checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// dissipative, lane-emden or maxwell-bloch.
    #[arg(long)]
    system: Option<String>,
    /// exp:A, power:C:P, scaling:ALPHA[:BETA], nonuniform:A, null, or a
    /// Lane-Emden constant (first, second, third, dyn_sym).
    #[arg(long, allow_hyphen_values = true)]
    family: Option<String>,
    /// Initial q then qdot, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long = "t-end", allow_hyphen_values = true)]
    t_end: Option<f64>,
    /// Number of uniform sample times added to the accepted steps.
    #[arg(long)]
    samples: Option<usize>,
    /// Lane-Emden start near t = 0 from the series: `q0` or `q0,epsilon`.
    #[arg(long = "series-start")]
    series_start: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name or scenario file.
    target: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct LevelSetArgs {
    #[command(flatten)]
    common: Common,
    /// Level-set parameters `E,B,K`.
    #[arg(long, allow_hyphen_values = true)]
    ebk: Option<String>,
    /// Maxwell-Bloch initial data (6 or 5 values) instead of E,B,K.
    #[arg(long, allow_hyphen_values = true)]
    init: Option<String>,
    /// `umin,umax,vmin,vmax`.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// `N` or `NxM` grid vertices.
    #[arg(long)]
    grid: Option<String>,
    /// Newton-polish every vertex onto the level set.
    #[arg(long)]
    polish: bool,
}

fn init_logging() {
    let level = match std::env::var("NONLOCAL_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new().filter_level(level).init();
}

impl Common {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        self.apply(&mut s)?;
        Ok(s)
    }

    fn apply(&self, s: &mut Settings) -> Result<()> {
        s.set_opt("integrator.rtol", self.rtol)?;
        s.set_opt("integrator.atol", self.atol)?;
        s.set_opt("seed", self.seed)?;
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| config_error(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let mut s = args.common.settings()?;
    if let Some(sys) = &args.system {
        s.set("system", parse_system(sys)?)?;
    }
    s.set_opt("family", args.family.as_ref())?;
    s.set_opt("init", args.init.as_ref())?;
    s.set_opt("t0", args.t0)?;
    s.set_opt("t_end", args.t_end)?;
    s.set_opt("samples", args.samples)?;
    s.set_opt("lane_emden.series_start", args.series_start.as_ref())?;
    let sc = Scenario::from_settings(&s)?;
    log::info!(
        "simulating {} from {} to t = {}",
        sc.system.id(),
        sc.init,
        sc.t_end
    );
    let table = simulate(&sc)?;
    let mut out = args.common.output()?;
    write_csv(&table, &mut out)?;
    out.flush()?;
    Ok(match table.termination {
        Termination::ReachedEnd => ExitCode::SUCCESS,
        Termination::ApproachedDomainBoundary => {
            eprintln!(
                "note: stopped at t = {} near the domain boundary",
                table.span.0
            );
            ExitCode::SUCCESS
        }
        other => {
            let t = if sc.t_end < sc.init.t {
                table.span.0
            } else {
                table.span.1
            };
            eprintln!("note: integration terminated ({other}) at t = {t}; CSV is partial");
            ExitCode::from(1)
        }
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let mut out = args.common.output()?;
    let failed = if let Ok(suite) = Suite::from_str(&args.target) {
        let s = args.common.settings()?;
        let options = SuiteOptions {
            seed: s.parsed("seed")?.unwrap_or(0),
            config: integrator_config(&s)?,
        };
        let outcomes = verify::run_suite_parallel(suite, &options);
        for o in &outcomes {
            writeln!(out, "{o}")?;
            for d in &o.details {
                writeln!(out, "    {d}")?;
            }
        }
        let passed = outcomes.iter().filter(|o| o.passed).count();
        writeln!(
            out,
            "{}: {passed}/{} criteria passed",
            suite.id(),
            outcomes.len()
        )?;
        passed < outcomes.len()
    } else if Path::new(&args.target).is_file() {
        let mut s = Settings::load(Path::new(&args.target))?;
        args.common.apply(&mut s)?;
        let sc = Scenario::from_settings(&s)?;
        let checks = verify::verify_scenario(&sc)?;
        for c in &checks {
            writeln!(out, "{c}")?;
        }
        let failures = checks.iter().filter(|c| c.failed()).count();
        writeln!(
            out,
            "{}: {failures} of {} checks failed",
            args.target,
            checks.len()
        )?;
        failures > 0
    } else {
        return Err(config_error(format!(
            "`{}` is neither a suite (dissipative, lane-emden, maxwell-bloch, all) nor a file",
            args.target
        )));
    };
    out.flush()?;
    Ok(if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_levelset(args: &LevelSetArgs) -> Result<ExitCode> {
    let mut s = args.common.settings()?;
    s.set_opt("levelset.ebk", args.ebk.as_ref())?;
    s.set_opt("init", args.init.as_ref())?;
    s.set_opt("levelset.window", args.window.as_ref())?;
    s.set_opt("levelset.grid", args.grid.as_ref())?;
    if args.polish {
        s.set("levelset.polish", "true")?;
    }
    let req = LevelSetRequest::from_settings(&s)?;
    let lines = req.run()?;
    log::info!(
        "{} components, {} accessible",
        lines.len(),
        lines.iter().filter(|l| l.accessible).count()
    );
    let mut out = args.common.output()?;
    req.write_csv(&lines, &mut out)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// Configuration problems exit with 2, everything else with 1.
fn is_config_error(err: &anyhow::Error) -> bool {
    if err.downcast_ref::<ConfigError>().is_some() {
        return true;
    }
    matches!(
        err.downcast_ref::<nonlocal::Error>(),
        Some(
            nonlocal::Error::Config(_)
                | nonlocal::Error::Dimension { .. }
                | nonlocal::Error::OutsideDomain { .. }
                | nonlocal::Error::Unsupported(_)
        )
    )
}

/// `nonlocal simulate ... | head` closing the pipe early is not an error.
fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .filter_map(|e| e.downcast_ref::<io::Error>())
        .any(|e| e.kind() == io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Levelset(a) => cmd_levelset(a),
    };
    match result {
        Ok(code) => code,
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_config_error(&err) { 2 } else { 1 })
        }
    }
}
