//! Command-line interface.
//!
//! Subcommands: `repair <prog.mini> <suite>` runs the pipeline and
//! writes a report; `run <prog.mini> <suite>` only executes the suite;
//! `corpus` replays the bundled case studies against their expected
//! outcomes. Exit codes: 0 = patch found / all green, 1 = no patch (or
//! red tests / corpus mismatch), 2 = usage or input error.
//!
//! The `MINIPOL_SEED` environment variable is reserved for future
//! stochastic extensions; the pipeline is deterministic and the
//! variable is currently a documented no-op.

use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::driver::{render_report, repair, RepairError, RepairOutcome};
use crate::interp::{run_suite, TestStatus};
use crate::lang::load_program;
use crate::suite::{parse_suite, validate_suite};
use crate::trace::ConstantStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RepairMode {
    Condition,
    Precondition,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Internal,
    #[value(name = "smtlib-export")]
    SmtlibExport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstantsChoice {
    Default,
    Mined,
}

/// Everything the pipeline needs to know about one repair run.
#[derive(Debug, Clone)]
pub struct RepairConfig {
    pub mode: RepairMode,
    pub solver: SolverChoice,
    pub max_level: u8,
    pub constants: ConstantStrategy,
    /// Cap on localization candidates per phase.
    pub budget: usize,
    pub global_budget: Duration,
    pub synth_budget: Duration,
    pub trivial_guard: bool,
    pub smt_out: Option<PathBuf>,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            mode: RepairMode::Both,
            solver: SolverChoice::Internal,
            max_level: 3,
            constants: ConstantStrategy::Default,
            budget: usize::MAX,
            global_budget: Duration::from_secs(60),
            synth_budget: Duration::from_secs(10),
            trivial_guard: true,
            smt_out: None,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "minipol",
    about = "Test-suite driven repair of buggy if conditions and missing preconditions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repair a program against its test suite.
    Repair {
        /// Mini-lang source file.
        program: PathBuf,
        /// Suite file (test records with mini-lang literals).
        suite: PathBuf,
        #[command(flatten)]
        options: RepairOptions,
    },
    /// Run the suite and print per-test statuses.
    Run {
        program: PathBuf,
        suite: PathBuf,
        /// Print the Ochiai ranking as tab-separated text.
        #[arg(long)]
        dump_spectrum: bool,
    },
    /// Replay the bundled case studies and check their expected outcomes.
    Corpus,
}

#[derive(Args)]
struct RepairOptions {
    #[arg(long, value_enum, default_value = "both")]
    mode: RepairMode,
    #[arg(long, value_enum, default_value = "internal")]
    solver: SolverChoice,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(0..=5))]
    max_level: u8,
    #[arg(long, value_enum, default_value = "default")]
    constants: ConstantsChoice,
    /// Global wall-clock budget in milliseconds.
    #[arg(long, default_value_t = 60_000)]
    budget_ms: u64,
    /// Per-synthesis-system budget in milliseconds.
    #[arg(long, default_value_t = 10_000)]
    synth_budget_ms: u64,
    /// Cap on localization candidates examined per phase (default: all).
    #[arg(long)]
    candidates: Option<usize>,
    /// Disable the trivial-patch guard.
    #[arg(long)]
    no_trivial_guard: bool,
    /// Print the Ochiai ranking as tab-separated text.
    #[arg(long)]
    dump_spectrum: bool,
    /// Write the collected trace rows as tab-separated text.
    #[arg(long)]
    dump_trace: Option<PathBuf>,
    /// Directory for exported .smt2 systems (with --solver smtlib-export).
    #[arg(long)]
    smt_out: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Run {
            program,
            suite,
            dump_spectrum,
        } => cmd_run(&program, &suite, dump_spectrum),
        Command::Repair {
            program,
            suite,
            options,
        } => cmd_repair(&program, &suite, options),
        Command::Corpus => Ok(crate::corpus::run_corpus(&mut std::io::stdout())),
    }
}

fn load(
    program: &PathBuf,
    suite_path: &PathBuf,
) -> Result<(crate::lang::TypedProgram, Vec<crate::interp::TestCase>), String> {
    let source =
        std::fs::read_to_string(program).map_err(|e| format!("{}: {e}", program.display()))?;
    let file_name = program
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| program.display().to_string());
    let typed = load_program(&source, &file_name).map_err(|e| e.to_string())?;
    let suite_text = std::fs::read_to_string(suite_path)
        .map_err(|e| format!("{}: {e}", suite_path.display()))?;
    let suite = parse_suite(&suite_text).map_err(|e| e.to_string())?;
    validate_suite(&typed, &suite).map_err(|e| e.to_string())?;
    Ok((typed, suite))
}

fn cmd_run(program: &PathBuf, suite_path: &PathBuf, dump_spectrum: bool) -> Result<i32, String> {
    let (typed, suite) = load(program, suite_path)?;
    let records = run_suite(&typed, &suite).map_err(|e| e.to_string())?;
    let mut passed = 0;
    let mut failed = 0;
    for (test, record) in suite.iter().zip(&records) {
        match &record.status {
            TestStatus::Pass => {
                passed += 1;
                println!("{}: pass", test.name);
            }
            TestStatus::Fail { actual } => {
                failed += 1;
                println!(
                    "{}: fail (expected {}, got {})",
                    test.name, test.expected, actual
                );
            }
            TestStatus::RuntimeError { kind, loc } => {
                failed += 1;
                println!("{}: error ({kind} at {loc})", test.name);
            }
        }
    }
    println!("{passed} pass / {failed} fail");
    if dump_spectrum {
        print_spectrum(&typed, &suite)?;
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

fn print_spectrum(
    typed: &crate::lang::TypedProgram,
    suite: &[crate::interp::TestCase],
) -> Result<(), String> {
    let records = run_suite(typed, suite).map_err(|e| e.to_string())?;
    let spectrum = crate::spectrum::build_spectrum(&records, suite).map_err(|e| e.to_string())?;
    let ranked = crate::spectrum::ochiai_rank(&spectrum).map_err(|e| e.to_string())?;
    println!("node\tline\tcol\tfailed\tpassed\tsusp");
    for (id, susp) in ranked {
        if let Some(stmt) = typed.program().statement(id) {
            println!(
                "{id}\t{}\t{}\t{}\t{}\t{susp:.6}",
                stmt.loc.line,
                stmt.loc.col,
                spectrum.failed(id),
                spectrum.passed(id)
            );
        }
    }
    Ok(())
}

fn cmd_repair(
    program: &PathBuf,
    suite_path: &PathBuf,
    options: RepairOptions,
) -> Result<i32, String> {
    let (typed, suite) = load(program, suite_path)?;
    if options.dump_spectrum {
        print_spectrum(&typed, &suite)?;
    }

    let config = RepairConfig {
        mode: options.mode,
        solver: options.solver,
        max_level: options.max_level,
        constants: match options.constants {
            ConstantsChoice::Default => ConstantStrategy::Default,
            ConstantsChoice::Mined => ConstantStrategy::Mined,
        },
        budget: options.candidates.unwrap_or(usize::MAX),
        global_budget: Duration::from_millis(options.budget_ms),
        synth_budget: Duration::from_millis(options.synth_budget_ms),
        trivial_guard: !options.no_trivial_guard,
        smt_out: options.smt_out.clone(),
    };

    if let Some(dir) = &config.smt_out {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }

    if let Some(dump_path) = &options.dump_trace {
        dump_first_trace(&typed, &suite, &config, dump_path)?;
    }

    let outcome = match repair(&typed, &suite, &config) {
        Ok(outcome) => outcome,
        Err(RepairError::NothingToRepair) => return Err("nothing to repair".into()),
        Err(e) => return Err(e.to_string()),
    };

    let report = render_report(&outcome, typed.file());
    match &options.report {
        Some(path) => {
            std::fs::write(path, &report).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => print!("{report}"),
    }

    Ok(match outcome {
        RepairOutcome::Patched(..) | RepairOutcome::Exported(..) => 0,
        RepairOutcome::NoPatch(..) => 1,
    })
}

/// `--dump-trace`: write the rows of the top-ranked angelic pair.
fn dump_first_trace(
    typed: &crate::lang::TypedProgram,
    suite: &[crate::interp::TestCase],
    config: &RepairConfig,
    path: &PathBuf,
) -> Result<(), String> {
    use crate::angelic::{locate_condition_fixes, locate_precondition_fixes};

    let records = run_suite(typed, suite).map_err(|e| e.to_string())?;
    let failing: Vec<crate::interp::TestCase> = suite
        .iter()
        .zip(&records)
        .filter(|(_, r)| !r.status.is_pass())
        .map(|(t, _)| t.clone())
        .collect();
    if failing.is_empty() {
        return Err("nothing to repair".into());
    }
    let spectrum = crate::spectrum::build_spectrum(&records, suite).map_err(|e| e.to_string())?;
    let ranked = crate::spectrum::ochiai_rank(&spectrum).map_err(|e| e.to_string())?;
    let ifs = typed.program().if_conditions();
    let ranked_conditions: Vec<(crate::lang::NodeId, f64)> = ranked
        .iter()
        .filter(|(_, s)| *s > 0.0)
        .filter_map(|(id, s)| {
            ifs.iter()
                .find(|(stmt, _)| stmt.loc.node_id == *id)
                .map(|(_, cond)| (*cond, *s))
        })
        .collect();
    let ranked_statements: Vec<(crate::lang::NodeId, f64)> = ranked
        .iter()
        .filter(|(_, s)| *s > 0.0)
        .filter(|(id, _)| {
            typed
                .program()
                .statement(*id)
                .map(|s| s.is_skippable())
                .unwrap_or(false)
        })
        .map(|&(id, s)| (id, s))
        .collect();

    let mut localization = locate_condition_fixes(typed, &failing, &ranked_conditions, usize::MAX)
        .map_err(|e| e.to_string())?;
    if localization.pairs.is_empty() {
        localization = locate_precondition_fixes(typed, &failing, &ranked_statements, usize::MAX)
            .map_err(|e| e.to_string())?;
    }
    let Some(pair) = localization.pairs.first() else {
        return Err("no angelic pair to trace".into());
    };
    let constants = crate::trace::gather_constants(typed, config.constants);
    let input = crate::trace::collect(typed, suite, pair, &constants).map_err(|e| e.to_string())?;
    std::fs::write(path, input.dump_tsv()).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(())
}
