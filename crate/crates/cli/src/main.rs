//! `ivsim`: validated simulation and STL monitoring from the command line.
//!
//! Exit status: 0 on success (including unknown verdicts), 1 on a model
//! parse error, 2 on any other failure. Every failure prints exactly one
//! `error: <kind>: <message>` line on stderr.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, ValueEnum};
use ivsim::io::{robustness_csv, trajectory_csv, trajectory_json, ExportOptions};
use ivsim::monitor::{evaluate, robustness, Verdict};
use ivsim::simulate::{simulate, verification_certificate, Limits, Mode, SimOptions, Trajectory};
use ivsim::{parse_model, Model, StlFormula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Ptope,
    Box,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MonitorArg {
    Bool,
    Rob,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Validated simulation of hybrid automata with STL monitoring.
#[derive(Debug, Parser)]
#[command(name = "ivsim", version)]
struct Cli {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
    /// Seed for the model's `R k` samples; batch run i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of jumps.
    #[arg(long, default_value_t = 100_000)]
    jumps: usize,
    /// Simulated time; defaults to the property's horizon, else 1e6.
    #[arg(long, value_parser = positive)]
    time: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Ptope)]
    mode: ModeArg,
    /// Taylor order.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u16).range(1..=40))]
    order: u16,
    /// Target width of crossing-time enclosures.
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    tol_event: f64,
    /// Local truncation target of the integrator.
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    tol_step: f64,
    /// Monitoring of the model's `prop`: boolean verdict, robustness, or none.
    #[arg(long, value_enum, default_value_t = MonitorArg::Bool)]
    monitor: MonitorArg,
    /// Number of runs.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    batch: u64,
    /// Directory for per-run artifacts; nothing is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Significant digits per written bound.
    #[arg(long, default_value_t = 17, value_parser = clap::value_parser!(u16).range(1..=40))]
    digits: u16,
    /// Rows per flow segment in CSV plot data.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u16).range(1..))]
    nplot: u16,
    /// Run both modes on the first seed and report them side by side.
    #[arg(long)]
    compare: bool,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

#[derive(Debug)]
enum Failure {
    Parse(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // one line whatever the message holds
        let flat = |m: &str| m.split_whitespace().collect::<Vec<_>>().join(" ");
        match self {
            Failure::Parse(m) => write!(f, "error: parse: {}", flat(m)),
            Failure::Runtime(m) => write!(f, "error: runtime: {}", flat(m)),
        }
    }
}

fn runtime(e: impl fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Everything one run produced.
struct Outcome {
    seed: u64,
    traj: Trajectory,
    verdict: Option<Verdict>,
    cpu: Duration,
}

impl Cli {
    fn options(&self, mode: Mode) -> SimOptions {
        let mut opts = SimOptions {
            mode,
            tol_event: self.tol_event,
            ..SimOptions::default()
        };
        opts.integrator.order = self.order as usize;
        opts.integrator.tol_step = self.tol_step;
        opts
    }

    fn mode(&self) -> Mode {
        match self.mode {
            ModeArg::Ptope => Mode::Parallelotope,
            ModeArg::Box => Mode::Box,
        }
    }

    fn export(&self) -> ExportOptions {
        ExportOptions {
            digits: self.digits as usize,
            nplot: self.nplot as usize,
        }
    }

    /// The property to monitor, if monitoring is on.
    fn property<'m>(&self, m: &'m Model) -> Result<Option<&'m StlFormula>, Failure> {
        match (self.monitor, &m.property) {
            (MonitorArg::Off, _) => Ok(None),
            (MonitorArg::Bool, p) => Ok(p.as_ref()),
            (MonitorArg::Rob, None) => Err(runtime("robustness requested but the model has no `prop`")),
            (MonitorArg::Rob, Some(p)) if !p.is_untimed() => {
                Err(runtime("robustness is only supported for untimed properties"))
            }
            (MonitorArg::Rob, Some(p)) => Ok(Some(p)),
        }
    }

    fn limits(&self, m: &Model) -> Result<Limits, Failure> {
        let horizon = self.property(m)?.and_then(StlFormula::horizon);
        Ok(Limits {
            max_jumps: self.jumps,
            max_time: self.time.or(horizon).unwrap_or(Limits::default().max_time),
        })
    }
}

fn load(cli: &Cli, seed: u64) -> Result<Model, Failure> {
    let path = &cli.model;
    let src = fs::read_to_string(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    parse_model(&src, seed).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn run_one(cli: &Cli, seed: u64, mode: Mode) -> Result<Outcome, Failure> {
    let m = load(cli, seed)?;
    let limits = cli.limits(&m)?;
    let start = Instant::now();
    let traj = simulate(&m, &limits, &cli.options(mode));
    let verdict = cli.property(&m)?.map(|p| evaluate(&traj, p));
    let cpu = start.elapsed();
    if let Some(dir) = &cli.out {
        write_artifacts(cli, dir, &m, seed, mode, &traj, verdict)?;
    }
    Ok(Outcome {
        seed,
        traj,
        verdict,
        cpu,
    })
}

fn stem(cli: &Cli) -> String {
    cli.model.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned())
}

fn write_artifacts(
    cli: &Cli,
    dir: &Path,
    m: &Model,
    seed: u64,
    mode: Mode,
    traj: &Trajectory,
    verdict: Option<Verdict>,
) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    let base = format!("{}-{}-{}", stem(cli), seed, mode_name(mode));
    let opts = cli.export();
    let write = |name: String, body: String| {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| runtime(format!("{}: {e}", path.display())))
    };
    match cli.format {
        Format::Json => write(format!("{base}.json"), trajectory_json(traj, verdict, &opts))?,
        Format::Csv => write(format!("{base}.csv"), trajectory_csv(traj, &opts))?,
    }
    write(format!("{base}.cert.txt"), verification_certificate(traj).to_string())?;
    if let Some(v) = verdict {
        write(format!("{base}.verdict"), format!("{v}\n"))?;
    }
    if cli.monitor == MonitorArg::Rob {
        if let Some(p) = &m.property {
            let r = robustness(traj, p).map_err(runtime)?;
            write(format!("{base}.rob.csv"), robustness_csv(&r, &opts))?;
        }
    }
    Ok(())
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Parallelotope => "ptope",
        Mode::Box => "box",
    }
}

fn verdict_text(v: Option<Verdict>) -> String {
    v.map_or("none".into(), |v| v.to_string())
}

fn run_line(o: &Outcome) -> String {
    format!(
        "seed={} verdict={} jumps={} horizon={} status={} cpu={:.6}",
        o.seed,
        verdict_text(o.verdict),
        o.traj.jumps(),
        o.traj.horizon,
        o.traj.status,
        o.cpu.as_secs_f64()
    )
}

/// Verdict counts and mean CPU time over a batch.
fn table(outcomes: &[Outcome]) -> String {
    let count = |f: fn(&Verdict) -> bool| outcomes.iter().filter(|o| o.verdict.as_ref().is_some_and(f)).count();
    let valid = count(|v| *v == Verdict::Valid);
    let unsat = count(|v| *v == Verdict::Unsat);
    let unknown = count(|v| !v.is_conclusive());
    let mean = outcomes.iter().map(|o| o.cpu.as_secs_f64()).sum::<f64>() / outcomes.len() as f64;
    format!(
        "{:>6} {:>6} {:>6} {:>8} {:>12}\n{:>6} {:>6} {:>6} {:>8} {:>12.6}\n",
        "runs",
        "valid",
        "unsat",
        "unknown",
        "mean_cpu_s",
        outcomes.len(),
        valid,
        unsat,
        unknown,
        mean
    )
}

/// Both modes on one seed, with mean CPU time per phase (a flow between
/// jumps, or a jump).
fn compare(cli: &Cli) -> Result<String, Failure> {
    let mut out = format!(
        "{:>6} {:>8} {:>14} {:>14} {}\n",
        "mode", "jumps", "horizon", "cpu_per_phase", "status"
    );
    for mode in [Mode::Parallelotope, Mode::Box] {
        let o = run_one(cli, cli.seed, mode)?;
        let phases = o.traj.runs.len() + o.traj.events.len();
        let per_phase = o.cpu.as_secs_f64() / phases.max(1) as f64;
        out.push_str(&format!(
            "{:>6} {:>8} {:>14.6} {:>14.3e} {}\n",
            mode_name(mode),
            o.traj.jumps(),
            o.traj.horizon,
            per_phase,
            o.traj.status
        ));
    }
    Ok(out)
}

fn main_inner(cli: &Cli) -> Result<(), Failure> {
    if cli.compare {
        print!("{}", compare(cli)?);
        return Ok(());
    }
    let mut outcomes = Vec::with_capacity(cli.batch as usize);
    for i in 0..cli.batch {
        let o = run_one(cli, cli.seed.wrapping_add(i), cli.mode())?;
        println!("{}", run_line(&o));
        outcomes.push(o);
    }
    if cli.batch > 1 {
        let t = table(&outcomes);
        print!("{t}");
        if let Some(dir) = &cli.out {
            let path = dir.join(format!("{}-summary.txt", stem(cli)));
            fs::write(&path, t).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("bad arguments");
            eprintln!("{}", Failure::Runtime(first.trim_start_matches("error: ").to_string()));
            return ExitCode::from(2);
        }
    };
    match main_inner(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
