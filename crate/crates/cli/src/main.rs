use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tecsim::commands::{self, build_mesh, smallness_error};
use tecsim::convergence::{self, Sweep};
use tecsim::output::{num, render_constants};
use tecsim::{load_config, CliError, Result};

#[derive(Parser)]
#[command(
    name = "tecsim",
    version,
    about = "Rothe/P1 solver for coupled thermoelectrochemical cells"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print coercivity constants, smallness verdicts and the energy bound.
    Check {
        config: PathBuf,
        /// Directory for check.txt.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Step the scenario and write steps.csv, snapshots and report.txt.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Run even when a smallness condition fails.
        #[arg(long)]
        force: bool,
    },
    /// Refinement study against the scenario's exact solution.
    Convergence {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value = "space")]
        sweep: Sweep,
    },
    /// Time-translate diagnostic of the temperature.
    Translate {
        config: PathBuf,
        /// Translation; repeat for several. Defaults to 1, 2, 4 and 8 steps.
        #[arg(long)]
        z: Vec<f64>,
        #[arg(long)]
        force: bool,
    },
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Check { config, out } => {
            let cfg = load_config(&config)?;
            let mesh = build_mesh(&cfg)?;
            let report = commands::check(&cfg, &mesh)?;
            let text = format!("scenario: {}\n{}", cfg.name, render_constants(&report));
            print!("{text}");
            ensure_dir(&out)?;
            let path = out.join("check.txt");
            std::fs::write(&path, &text).map_err(|e| CliError::Io { path, source: e })?;
            smallness_error(&report).map_or(Ok(()), Err)
        }
        Command::Run { config, out, force } => {
            let cfg = load_config(&config)?;
            ensure_dir(&out)?;
            let outcome = commands::run(&cfg, &out, force)?;
            let last = outcome.rows.last();
            println!(
                "{} steps written to {}",
                outcome.rows.len(),
                out.join(&cfg.output.csv).display()
            );
            match (&outcome.verdict, &outcome.bound) {
                (Some(v), Some(b)) => match v.first_violation {
                    None => println!("energy bound holds at every step (bound {})", num(b.rhs)),
                    Some(m) => println!("energy bound violated first at step {m}"),
                },
                _ => println!("energy bound not evaluated: a smallness condition fails"),
            }
            if let Some(r) = last {
                println!("final energy terms: {}", num(r.lhs()));
            }
            Ok(())
        }
        Command::Convergence { config, levels, sweep } => {
            let cfg = load_config(&config)?;
            let table = convergence::study_config(&cfg, levels, sweep)?;
            print!("{}", convergence::render(&table));
            Ok(())
        }
        Command::Translate { config, z, force } => {
            let cfg = load_config(&config)?;
            let shifts = if z.is_empty() {
                commands::default_shifts(&cfg)
            } else {
                z
            };
            println!("z,value,ratio");
            for (z, v) in commands::translate(&cfg, &shifts, force)? {
                println!("{},{},{}", num(z), num(v), num(v / z));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("TECSIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
