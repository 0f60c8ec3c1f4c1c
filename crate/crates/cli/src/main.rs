use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sis_atoms_cli::commands::{self, SimulateArgs};
use sis_atoms_cli::{CliResult, Report};

/// Structure, equilibria and dynamics of heterogeneous SIS models.
#[derive(Debug, Parser)]
#[command(name = "sis-atoms", version)]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Override a tolerance, e.g. `--tol matching=1e-5` (repeatable).
    #[arg(long = "tol", value_name = "KEY=VALUE", global = true)]
    tol: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Atoms, their classes and R0 values, the order between atoms and
    /// the number of supercritical antichains.
    Analyze { model: PathBuf },
    /// The full equilibrium catalog.
    Equilibria {
        model: PathBuf,
        /// Use the reservoir fields of the model file.
        #[arg(long)]
        reservoir: bool,
        /// Write one CSV row per equilibrium.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Integrate from an initial state and compare with the predicted limit.
    Simulate {
        model: PathBuf,
        /// ones, zeros, mask:<labels>, file:<path> or random:<seed>.
        #[arg(long)]
        init: String,
        #[arg(long = "tmax", default_value_t = 1e4)]
        t_max: f64,
        /// Trajectory CSV output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Keep every k-th accepted step in the CSV.
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// Effective reproduction number under a vaccination profile.
    Vaccinate {
        model: PathBuf,
        /// Vector file, an init spec, or `from-equilibrium`.
        #[arg(long)]
        eta: String,
    },
}

fn run(cli: &Cli) -> CliResult<Report> {
    let tol = commands::tolerances_from(&cli.tol)?;
    match &cli.command {
        Command::Analyze { model } => commands::analyze(model, &tol),
        Command::Equilibria { model, reservoir, csv } => commands::equilibria(model, *reservoir, csv.as_deref(), &tol),
        Command::Simulate { model, init, t_max, out, stride } => {
            let args = SimulateArgs { init, t_max: *t_max, out: out.as_deref(), stride: *stride };
            commands::simulate(model, &args, &tol)
        }
        Command::Vaccinate { model, eta } => commands::vaccinate(model, eta, &tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.json).expect("report serializes"));
            } else {
                print!("{}", report.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
