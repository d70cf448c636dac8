use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use zne_core::noise::NoisePlacement;
use zne_lab::formats::{load_pauli_channel, write_csv};
use zne_lab::pipeline::{audit_rows, AUDIT_HEADER};
use zne_lab::sweep::{sweep, Axis};
use zne_lab::{run, ExperimentConfig, LabError};

/// Worker threads for grid points, instances and shot chunks.
const WORKERS_ENV: &str = "ZNE_LAB_WORKERS";

#[derive(Parser)]
#[command(name = "zne-lab", version, about = "Zero-noise extrapolation simulation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Placement {
    Before,
    After,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run { config: PathBuf },
    /// Run a config template at each value of one axis.
    Sweep {
        template: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Effective noise of identity-inserted CNOTs under a Pauli channel.
    AuditInsertion {
        channel: PathBuf,
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, value_enum, default_value = "before")]
        placement: Placement,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn init_workers() -> Result<(), LabError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        LabError::config(
            std::path::Path::new(WORKERS_ENV),
            format!("`{v}` is not a positive integer"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| LabError::config(std::path::Path::new(WORKERS_ENV), e.to_string()))
}

fn execute(cli: Cli) -> Result<(), LabError> {
    init_workers()?;
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run(&cfg)?;
            println!("{}", report.output_dir.display());
        }
        Command::Sweep { template, axis, values } => {
            let cfg = ExperimentConfig::load(&template)?;
            let report = sweep(&cfg, axis, &values)?;
            println!("{}", report.grid_csv.display());
            let mut first = None;
            for (v, e) in report.failures() {
                eprintln!("{}={v}: {e}", axis.name());
                first.get_or_insert_with(|| {
                    LabError::stage("sweep", &template, format!("grid point {}={v} failed", axis.name()))
                });
            }
            if let Some(e) = first {
                return Err(e);
            }
        }
        Command::AuditInsertion {
            channel,
            k,
            placement,
            output,
        } => {
            let ch = load_pauli_channel(&channel)?;
            let placement = match placement {
                Placement::Before => NoisePlacement::Before,
                Placement::After => NoisePlacement::After,
            };
            let rows = audit_rows(&ch, &k, placement).map_err(|e| LabError::config(&channel, e.to_string()))?;
            match output {
                Some(path) => {
                    write_csv(&path, &AUDIT_HEADER, &rows).map_err(|e| LabError::stage("audit", &channel, e))?
                }
                None => {
                    println!("{}", AUDIT_HEADER.join(","));
                    for r in rows {
                        println!("{}", r.join(","));
                    }
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
