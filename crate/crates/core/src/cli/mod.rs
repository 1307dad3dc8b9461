//! Scenario-driven command line: `verify`, `solve` and `report`.

mod report;
mod scenario;
mod solve;
mod verify;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use report::{write_report, COLUMNS};
pub use scenario::{EnergyMode, GridConfig, InitialMap, Scenario, TargetConfig, TorsionConfig, SCHEMA_VERSION};
pub use solve::{read_result, solve, write_trajectory, ResultFile, SolveOutcome, RESULT_FILE, TRAJECTORY_FILE};
pub use verify::{verify, Check, VerifyReport};

use crate::solver::Backend;
use crate::Error;

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

pub const VERIFY_FILE: &str = "verify.json";
pub const REPORT_FILE: &str = "report.csv";

#[derive(Debug, Parser)]
#[command(name = "dirac-torsion", version, about = "Dirac-harmonic maps into targets with torsion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant checks for a scenario and write verify.json.
    Verify(RunArgs),
    /// Flow to a harmonic map, solve for a kernel spinor, write results.
    Solve(RunArgs),
    /// Summarize result.json files (or run directories) as CSV.
    Report {
        files: Vec<PathBuf>,
        /// Directory for report.csv; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Replace grid.nodes_per_side.
    #[arg(long)]
    pub grid_override: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Dense,
    Iterative,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Dense => Backend::Dense,
            BackendArg::Iterative => Backend::Iterative,
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergence { .. } | Error::AmbiguousKernel { .. } | Error::KernelResidual { .. } => {
            EXIT_NON_CONVERGENCE
        }
        _ => EXIT_CONFIG,
    }
}

fn load(args: &RunArgs) -> crate::Result<Scenario> {
    let mut scenario = Scenario::load(&args.scenario)?;
    if let Some(n) = args.grid_override {
        scenario = scenario.with_grid_override(n)?;
    }
    if let Some(b) = args.backend {
        scenario.solver.backend = b.into();
    }
    Ok(scenario)
}

fn execute(command: Command) -> crate::Result<i32> {
    match command {
        Command::Verify(args) => {
            let scenario = load(&args)?;
            let report = verify(&scenario)?;
            fs::create_dir_all(&args.out)?;
            fs::write(args.out.join(VERIFY_FILE), serde_json::to_string_pretty(&report)?)?;
            for c in &report.checks {
                println!(
                    "{} {} value={:e} tolerance={:e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
            }
            Ok(if report.passed { EXIT_SUCCESS } else { EXIT_CHECK_FAILURE })
        }
        Command::Solve(args) => {
            let scenario = load(&args)?;
            match solve(&scenario, &args.out)? {
                SolveOutcome::Converged(r) => {
                    let s = &r.summary;
                    println!(
                        "converged after {} flow iterations: energy {:e}, kernel dimension {}",
                        s.flow_iterations, s.energy.total, s.kernel.dimension
                    );
                    Ok(EXIT_SUCCESS)
                }
                SolveOutcome::NotConverged { iterations, tension } => {
                    eprintln!("error: {}", Error::NonConvergence { iterations, residual: tension });
                    Ok(EXIT_NON_CONVERGENCE)
                }
            }
        }
        Command::Report { files, out } => {
            let results = files.iter().map(|f| read_result(f)).collect::<crate::Result<Vec<_>>>()?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    write_report(&results, fs::File::create(dir.join(REPORT_FILE))?)?;
                }
                None => write_report(&results, std::io::stdout().lock())?,
            }
            Ok(EXIT_SUCCESS)
        }
    }
}
