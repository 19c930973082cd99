use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ncsohs::cli::{
    parse_matrix_csv, parse_problem, run_export_sdpa, run_min_command, run_psd_rank,
    run_sohs_check, CliError, Outcome, ProblemFile, RunOptions,
};
use ncsohs::hierarchy::HierarchyOptions;
use ncsohs::Mode;

/// Noncommutative polynomial optimization: eigenvalue and trace bounds
/// via sums of Hermitian squares and moment relaxations.
#[derive(Parser)]
#[command(name = "ncsohs", version, about)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolveFlags {
    /// Relaxation order d (defaults to the smallest well-posed order, or
    /// the problem file's `order` line)
    #[arg(short = 'd', long)]
    order: Option<usize>,
    /// Primal feasibility tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol_feas: f64,
    /// Relative duality-gap tolerance
    #[arg(long, default_value_t = 1e-8)]
    tol_gap: f64,
    /// Interior-point iteration limit
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Seed for the sampling oracle
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials for the sampling upper-bound oracle (0 disables it)
    #[arg(long, default_value_t = 0)]
    sample_trials: usize,
    /// Matrix sizes the sampling oracle draws from
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    sample_sizes: Vec<usize>,
    /// Also write the assembled relaxation in SDPA sparse format
    #[arg(long)]
    export_sdpa: Option<PathBuf>,
    /// Write the JSON record here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SolveFlags {
    fn to_options(&self) -> RunOptions {
        let mut hierarchy = HierarchyOptions::default();
        hierarchy.sdp.feas_tol = self.tol_feas;
        hierarchy.sdp.gap_tol = self.tol_gap;
        hierarchy.sdp.max_iter = self.max_iter;
        RunOptions {
            order: self.order,
            hierarchy,
            seed: self.seed,
            sample_trials: self.sample_trials,
            sample_sizes: self.sample_sizes.clone(),
            export_sdpa_path: self
                .export_sdpa
                .as_ref()
                .map(|p| p.to_string_lossy().into_owned()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue minimization over nc semialgebraic sets
    EigMin {
        /// Problem file
        problem: Option<PathBuf>,
        /// Built-in problem preset (chsh)
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Trace minimization over nc semialgebraic sets
    TraceMin {
        problem: Option<PathBuf>,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Lower bound on the psd rank of a nonnegative matrix
    PsdRank {
        /// CSV file of nonnegative entries
        matrix: Option<PathBuf>,
        /// Built-in matrix preset (psdrank-example)
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Membership check in the sums-of-Hermitian-squares cone
    SohsCheck {
        problem: PathBuf,
        /// Cone: eigenvalue (plain squares) or trace (cyclic closure)
        #[arg(long, default_value = "eigenvalue")]
        kind: String,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Assemble a relaxation and write it in SDPA sparse format
    ExportSdpa {
        problem: PathBuf,
        /// Output path for the .dat-s file
        #[arg(long)]
        out: PathBuf,
        /// Program kind when the file does not state one
        #[arg(long, default_value = "eigenvalue")]
        kind: String,
        #[arg(short = 'd', long)]
        order: Option<usize>,
    },
}

fn parse_kind(s: &str) -> Result<Mode, CliError> {
    match s {
        "eigenvalue" | "eig" => Ok(Mode::Eigenvalue),
        "trace" => Ok(Mode::Trace),
        other => Err(CliError::Usage(format!(
            "unknown kind '{other}' (expected eigenvalue or trace)"
        ))),
    }
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_string_lossy().into_owned(),
        source,
    })
}

fn load_problem(path: &PathBuf) -> Result<ProblemFile, CliError> {
    parse_problem(&read_file(path)?)
}

fn execute(command: Command) -> Result<(Outcome, Option<PathBuf>), CliError> {
    match command {
        Command::EigMin {
            problem,
            preset,
            flags,
        } => {
            let file = problem.as_ref().map(load_problem).transpose()?;
            let outcome = run_min_command(
                Mode::Eigenvalue,
                file.as_ref(),
                preset.as_deref(),
                &flags.to_options(),
            )?;
            Ok((outcome, flags.out))
        }
        Command::TraceMin { problem, flags } => {
            let file = problem.as_ref().map(load_problem).transpose()?;
            let outcome = run_min_command(Mode::Trace, file.as_ref(), None, &flags.to_options())?;
            Ok((outcome, flags.out))
        }
        Command::PsdRank {
            matrix,
            preset,
            flags,
        } => {
            let m = matrix
                .as_ref()
                .map(|p| read_file(p).and_then(|t| parse_matrix_csv(&t)))
                .transpose()?;
            let outcome = run_psd_rank(m, preset.as_deref(), &flags.to_options())?;
            Ok((outcome, flags.out))
        }
        Command::SohsCheck {
            problem,
            kind,
            flags,
        } => {
            let file = load_problem(&problem)?;
            let outcome = run_sohs_check(&file, parse_kind(&kind)?, &flags.to_options())?;
            Ok((outcome, flags.out))
        }
        Command::ExportSdpa {
            problem,
            out,
            kind,
            order,
        } => {
            let file = load_problem(&problem)?;
            let opts = RunOptions {
                order,
                ..RunOptions::default()
            };
            let outcome =
                run_export_sdpa(&file, parse_kind(&kind)?, &opts, &out.to_string_lossy())?;
            Ok((outcome, None))
        }
    }
}

fn main() -> ExitCode {
    let args = CliArgs::parse();
    match execute(args.command) {
        Ok((outcome, out_path)) => {
            match out_path {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, format!("{}\n", outcome.json)) {
                        eprintln!("error: cannot write {}: {}", path.display(), e);
                        return ExitCode::from(1);
                    }
                }
                None => println!("{}", outcome.json),
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
