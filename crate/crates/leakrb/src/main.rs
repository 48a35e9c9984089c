use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use leakrb::commands::{cmd_fit, cmd_gen_group, cmd_irb, cmd_run, cmd_variance, FitOptions};
use leakrb::config::Overrides;
use leakrb::parallel::with_threads;
use leakrb::Result;

/// Leakage-aware randomized benchmarking simulator.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Maximum number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Replaces `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces `shots`.
    #[arg(long)]
    shots: Option<u64>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            shots: self.shots,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the Clifford group and write the cache file.
    GenGroup {
        #[arg(long)]
        qubits: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate the protocol and write sequence and summary tables.
    Run(RunArgs),
    /// Fit a summary table and write the fit report and plot data.
    Fit {
        /// Summary CSV written by `run`, `irb` or `variance`.
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Sequence CSV for the bootstrap (default: sibling of the summary).
        #[arg(long)]
        sequences: Option<PathBuf>,
        #[arg(long)]
        max_order: Option<usize>,
        /// Bootstrap replicates (0 disables the bootstrap).
        #[arg(long)]
        bootstrap: Option<usize>,
        /// Bootstrap seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Register size used by the conservative bound.
        #[arg(long)]
        qubits: Option<usize>,
    },
    /// Reference and interleaved runs with the interleaved estimate.
    Irb(RunArgs),
    /// Simulate and compare the sequence variance with its prediction.
    Variance(RunArgs),
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenGroup { qubits, out } => {
            let (path, n) = cmd_gen_group(qubits, &out)?;
            println!("{n}");
            eprintln!("wrote {}", path.display());
        }
        Command::Run(a) => {
            let out = cmd_run(&a.config, &a.overrides(), &a.out)?;
            println!(
                "{} sequences, config hash {}",
                out.results.len(),
                out.config_hash
            );
        }
        Command::Fit {
            results,
            out,
            sequences,
            max_order,
            bootstrap,
            seed,
            qubits,
        } => {
            let fit = cmd_fit(&FitOptions {
                results,
                out_dir: out,
                sequences,
                max_order,
                replicates: bootstrap,
                seed,
                n_qubits: qubits,
            })?;
            println!(
                "order {}, error per gate {:.6e}",
                fit.report.model_order, fit.report.error_per_gate
            );
        }
        Command::Irb(a) => {
            let r = cmd_irb(&a.config, &a.overrides(), &a.out)?.report;
            println!(
                "eps_V {:.6e} in [{:.6e}, {:.6e}]",
                r.eps_v_point, r.eps_v_lower, r.eps_v_upper
            );
            if let Some(d) = r.diagnostic {
                eprintln!("{d}");
            }
        }
        Command::Variance(a) => {
            let r = cmd_variance(&a.config, &a.overrides(), &a.out)?.report;
            match r.empirical {
                Some(s) => println!(
                    "c {:.6e}, kappa {:.6e}, R^2 {:.4}",
                    s.c, s.kappa, s.r_squared
                ),
                None => println!("too few lengths for a shape fit"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    match with_threads(threads, || execute(cli)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn global_and_override_flags_parse() {
        let cli = Cli::try_parse_from([
            "leakrb",
            "run",
            "--config",
            "c.json",
            "--out",
            "o",
            "--seed",
            "5",
            "--threads",
            "2",
            "--shots",
            "9",
        ])
        .unwrap();
        assert_eq!(cli.threads, Some(2));
        let Command::Run(a) = cli.command else {
            panic!("not a run")
        };
        assert_eq!(
            a.overrides(),
            Overrides {
                seed: Some(5),
                shots: Some(9)
            }
        );
        assert!(Cli::try_parse_from(["leakrb", "run", "--out", "o"]).is_err());
    }
}
