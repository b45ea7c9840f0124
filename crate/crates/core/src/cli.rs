//! Command-line driver: `validate`, `schedule`, `simulate`, `solve-case` and
//! `version`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 no convergence within FIN years
//! (the report is still written), 4 runtime failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::card_io::{read_deck, validate_deck, Deck, LossSharing, Severity};
use crate::dispatch::{classify_causes, parse_case_csv, solve_min_shed, write_case_solution_csv, SolveOptions, SolveStatus};
use crate::maintenance::{schedule_maintenance, MaintenanceOptions};
use crate::smc::{run_simulation_with, Hooks, SimOptions};
use crate::stats::{bin_distributions, render_report, render_schedule, ReportFile, ReportFormat, ReportInput, Setting, TracePoint, DEFAULT_BINS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

const FROM_DECK: &str = "deck (ZZMC)";
const FROM_ARGS: &str = "command line";
const FROM_DEFAULT: &str = "built-in default";

#[derive(Debug, Parser)]
#[command(name = "narp", about = "Multi-area reliability assessment", disable_version_flag = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and check a deck.
    Validate { deck: PathBuf },
    /// Compute the maintenance plan of a deck.
    Schedule {
        deck: PathBuf,
        /// Directory for schedule.txt; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Schedule maintenance, simulate and write the report.
    Simulate(RunOptions),
    /// Solve one minimum-shedding case file.
    SolveCase {
        case: PathBuf,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// 0 = loss sharing, 1 = no loss sharing; overrides the MODE row.
        #[arg(long, value_parser = parse_loss_sharing)]
        loss_sharing: Option<LossSharing>,
    },
    /// Print the program version.
    Version,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Txt,
    Csv,
    Both,
}

#[derive(Debug, Args)]
pub struct RunOptions {
    pub deck: PathBuf,
    #[arg(short, long, default_value = "out")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Txt)]
    pub format: OutputFormat,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub cvt: Option<f64>,
    #[arg(long)]
    pub fin: Option<u32>,
    /// 0 = loss sharing, 1 = no loss sharing.
    #[arg(long, value_parser = parse_loss_sharing)]
    pub loss_sharing: Option<LossSharing>,
    /// Years simulated concurrently.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=256))]
    pub parallel: u32,
    /// Mean unit down time in hours where the deck gives none.
    #[arg(long)]
    pub mean_down_time: Option<f64>,
    /// Mean dwell of tie-line states in hours.
    #[arg(long)]
    pub line_dwell: Option<f64>,
    /// No progress lines on stderr.
    #[arg(short, long)]
    pub quiet: bool,
}

fn parse_loss_sharing(s: &str) -> Result<LossSharing, String> {
    s.parse::<u32>().ok().and_then(LossSharing::from_code).ok_or_else(|| format!("expected 0 or 1, got '{s}'"))
}

/// Failure carrying its exit code.
struct Failure(i32, String);

type Outcome = Result<i32, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(EXIT_INVALID, msg.into())
}

fn runtime(msg: impl Into<String>) -> Failure {
    Failure(EXIT_RUNTIME, msg.into())
}

/// Run the program on `argv` (including the program name).
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let outcome = match cli.command {
        Command::Validate { deck } => cmd_validate(&deck, &mut out),
        Command::Schedule { deck, output } => cmd_schedule(&deck, output.as_deref(), &mut out),
        Command::Simulate(opts) => cmd_simulate(&opts, &mut out),
        Command::SolveCase { case, output, loss_sharing } => cmd_solve_case(&case, output.as_deref(), loss_sharing, &mut out),
        Command::Version => {
            let _ = writeln!(out, "narp {}", env!("CARGO_PKG_VERSION"));
            Ok(EXIT_OK)
        }
    };
    match outcome {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

/// Read a deck and print its diagnostics; errors make the deck unusable.
fn load_checked(path: &Path) -> Result<Deck, Failure> {
    let deck = read_deck(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    check(&deck)?;
    Ok(deck)
}

fn check(deck: &Deck) -> Result<(), Failure> {
    let diags = validate_deck(&deck.model, &deck.config);
    for d in &diags {
        eprintln!("{d}");
    }
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    if errors > 0 {
        return Err(invalid(format!("{errors} validation error(s)")));
    }
    Ok(())
}

fn cmd_validate(path: &Path, out: &mut dyn Write) -> Outcome {
    let deck = load_checked(path)?;
    let m = &deck.model;
    let _ = writeln!(
        out,
        "{}: ok ({} areas, {} units, {} tie-lines, {} contracts, {} ownership records)",
        path.display(),
        m.areas.len(),
        m.units.len(),
        m.lines.len(),
        m.contracts.len(),
        m.ownerships.len()
    );
    Ok(EXIT_OK)
}

fn cmd_schedule(path: &Path, output: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let deck = load_checked(path)?;
    let plan = schedule_maintenance(&deck.model, &deck.config, &MaintenanceOptions::default())
        .map_err(|e| runtime(format!("maintenance scheduling: {e}")))?;
    let text = render_schedule(&deck.model, &plan);
    match output {
        Some(dir) => write_files(dir, &[("schedule.txt".to_string(), text)])?,
        None => {
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

fn setting(name: &str, value: impl ToString, source: &str) -> Setting {
    Setting { name: name.to_string(), value: value.to_string(), source: source.to_string() }
}

/// Apply command-line overrides and record where each effective value came from.
fn apply_overrides(deck: &mut Deck, opts: &RunOptions) -> (SimOptions, Vec<Setting>) {
    let c = &mut deck.config;
    let src = |overridden: bool| if overridden { FROM_ARGS } else { FROM_DECK };
    if let Some(s) = opts.seed {
        c.seed = s;
    }
    if let Some(v) = opts.cvt {
        c.cvt = v;
    }
    if let Some(v) = opts.fin {
        c.fin = v;
    }
    if let Some(v) = opts.loss_sharing {
        c.loss_sharing = v;
    }
    let defaults = SimOptions::default();
    let sim = SimOptions {
        mean_down_time_h: opts.mean_down_time.unwrap_or(defaults.mean_down_time_h),
        line_dwell_h: opts.line_dwell.unwrap_or(defaults.line_dwell_h),
        parallel: opts.parallel as usize,
        ..defaults
    };
    let dflt = |overridden: bool| if overridden { FROM_ARGS } else { FROM_DEFAULT };
    let settings = vec![
        setting("SEED", c.seed, src(opts.seed.is_some())),
        setting("LOSS SHARING", c.loss_sharing.code(), src(opts.loss_sharing.is_some())),
        setting("SEASON END WEEKS", format!("{:?}", c.season_end_weeks), FROM_DECK),
        setting("CONVERGENCE SCOPE", c.convergence_scope.code(), FROM_DECK),
        setting("CONVERGENCE AREA", c.convergence_area, FROM_DECK),
        setting("CONVERGENCE INDEX", c.convergence_index.label(), FROM_DECK),
        setting("CVT", c.cvt, src(opts.cvt.is_some())),
        setting("FIN", c.fin, src(opts.fin.is_some())),
        setting("FREQ", c.collection_frequency.code(), FROM_DECK),
        setting("DEFAULT UNIT DOWN TIME (H)", sim.mean_down_time_h, dflt(opts.mean_down_time.is_some())),
        setting("LINE STATE DWELL (H)", sim.line_dwell_h, dflt(opts.line_dwell.is_some())),
    ];
    (sim, settings)
}

fn cmd_simulate(opts: &RunOptions, out: &mut dyn Write) -> Outcome {
    let mut deck = read_deck(&opts.deck).map_err(|e| invalid(format!("{}: {e}", opts.deck.display())))?;
    let (sim, settings) = apply_overrides(&mut deck, opts);
    for (name, v) in [("--mean-down-time", sim.mean_down_time_h), ("--line-dwell", sim.line_dwell_h)] {
        if !(v.is_finite() && v >= 1.0) {
            return Err(invalid(format!("{name} must be a finite number of hours ≥ 1, got {v}")));
        }
    }
    check(&deck)?;
    let plan = schedule_maintenance(&deck.model, &deck.config, &MaintenanceOptions::default())
        .map_err(|e| runtime(format!("maintenance scheduling: {e}")))?;

    let quiet = opts.quiet;
    let mut progress = |p: &TracePoint| {
        if !quiet && p.year.is_multiple_of(100) {
            let beta = p.beta.map_or("undefined".to_string(), |b| format!("{b:.5}"));
            eprintln!("year {:>6}  mean {:.5}  beta {beta}", p.year, p.mean);
        }
    };
    let hooks = Hooks { observer: None, progress: Some(&mut progress) };
    let result = run_simulation_with(&deck.model, &deck.config, &plan, sim, hooks)
        .map_err(|e| runtime(format!("simulation: {e}")))?;

    let dist = bin_distributions(&result.acc, DEFAULT_BINS);
    let input = ReportInput {
        model: &deck.model,
        config: &deck.config,
        plan: &plan,
        acc: &result.acc,
        dist: &dist,
        trace: &result.trace,
        converged: result.converged,
        settings: &settings,
    };
    let mut files = Vec::new();
    if matches!(opts.format, OutputFormat::Txt | OutputFormat::Both) {
        files.extend(render_report(&input, ReportFormat::Txt));
    }
    if matches!(opts.format, OutputFormat::Csv | OutputFormat::Both) {
        files.extend(render_report(&input, ReportFormat::Csv));
    }
    write_files(&opts.output, &files)?;

    let beta = result.final_beta().map_or("undefined".to_string(), |b| format!("{b:.5}"));
    let _ = writeln!(
        out,
        "{} after {} years (beta {beta}, threshold {}); report in {}",
        if result.converged { "converged" } else { "not converged" },
        result.years(),
        deck.config.cvt,
        opts.output.display()
    );
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn write_files(dir: &Path, files: &[ReportFile]) -> Result<(), Failure> {
    for (rel, text) in files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| runtime(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, text).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_solve_case(path: &Path, output: Option<&Path>, mode: Option<LossSharing>, out: &mut dyn Write) -> Outcome {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let mut file = parse_case_csv(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if let Some(m) = mode {
        file.mode = m;
    }
    let sol = solve_min_shed(&file.case, file.mode, SolveOptions::default()).map_err(|e| runtime(e.to_string()))?;
    if sol.status != SolveStatus::Optimal {
        return Err(runtime("case is infeasible: minimum generation cannot be absorbed"));
    }
    let split = classify_causes(&file.case, &sol, file.mode).map_err(|e| runtime(e.to_string()))?;
    let csv = write_case_solution_csv(&file, &sol, &split);
    match output {
        Some(p) => fs::write(p, csv).map_err(|e| runtime(format!("{}: {e}", p.display())))?,
        None => {
            let _ = out.write_all(csv.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&'static str]) -> Cli {
        Cli::try_parse_from(std::iter::once("narp").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn simulate_flags() {
        let cli = parse(&["simulate", "d.txt", "-o", "x", "--format", "both", "--seed", "7", "--fin", "3", "--parallel", "4", "--loss-sharing", "1"]);
        let Command::Simulate(o) = cli.command else { panic!() };
        assert_eq!((o.seed, o.fin, o.parallel, o.format), (Some(7), Some(3), 4, OutputFormat::Both));
        assert_eq!(o.loss_sharing, Some(LossSharing::NonLossSharing));
        assert_eq!(o.output, PathBuf::from("x"));
    }

    #[test]
    fn bad_values_are_rejected() {
        let argv = |a: &[&'static str]| std::iter::once("narp").chain(a.iter().copied()).collect::<Vec<_>>();
        assert!(Cli::try_parse_from(argv(&["simulate", "d", "--loss-sharing", "2"])).is_err());
        assert!(Cli::try_parse_from(argv(&["simulate", "d", "--parallel", "0"])).is_err());
        assert!(Cli::try_parse_from(argv(&["simulate", "d", "--cvt", "abc"])).is_err());
    }

    #[test]
    fn overrides_are_tagged() {
        let mut deck = read_deck(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/five_area.txt")).unwrap();
        let Command::Simulate(o) = parse(&["simulate", "d", "--cvt", "0.1", "--line-dwell", "6"]).command else { panic!() };
        let (sim, settings) = apply_overrides(&mut deck, &o);
        assert_eq!(deck.config.cvt, 0.1);
        assert_eq!(sim.line_dwell_h, 6.0);
        let find = |n: &str| settings.iter().find(|s| s.name == n).unwrap().source.clone();
        assert_eq!(find("CVT"), FROM_ARGS);
        assert_eq!(find("FIN"), FROM_DECK);
        assert_eq!(find("LINE STATE DWELL (H)"), FROM_ARGS);
        assert_eq!(find("DEFAULT UNIT DOWN TIME (H)"), FROM_DEFAULT);
    }
}
