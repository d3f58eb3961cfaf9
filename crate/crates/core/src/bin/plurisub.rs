use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use plurisub::harness::{self, Overrides, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "plurisub", version, about = "Construct and certify plurisubharmonic exhaustions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct and certify the exhaustion described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed_override: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Truncations of the dimension sweep, e.g. `1,2,3`.
        #[arg(long, value_delimiter = ',')]
        dim_sweep: Option<Vec<usize>>,
        /// Multiplies every certification tolerance.
        #[arg(long)]
        tolerance_scale: Option<f64>,
    },
    /// List the catalog domains and pipelines.
    ListCatalog,
    /// Summarize a records file, grouped by anchor.
    Describe { report: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            seed_override,
            out_dir,
            dim_sweep,
            tolerance_scale,
        } => {
            let overrides = Overrides {
                seed: seed_override,
                out_dir,
                dim_sweep,
                tolerance_scale,
            };
            let out = harness::run_path(&config, &overrides);
            if out.code == 0 {
                println!("{}", out.message);
            } else {
                eprintln!("{}", out.message);
            }
            if out.code != EXIT_CONFIG {
                println!("artifacts in {}", out.out_dir.display());
            }
            ExitCode::from(out.code as u8)
        }
        Command::ListCatalog => {
            print!("{}", harness::list_catalog());
            ExitCode::SUCCESS
        }
        Command::Describe { report } => match harness::describe(&report) {
            Ok(s) => {
                print!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(1)
            }
        },
    }
}
