//! `asnaq` command-line interface.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use asnaq_cli::commands::{cost_table, grad_check_grid, oracle_check};
use asnaq_cli::config::parse_config_with_overrides;
use asnaq_cli::experiment::{run_experiment, Termination};

#[derive(Parser)]
#[command(
    name = "asnaq",
    about = "Train a small recurrent network with an accelerated stochastic quasi-Newton optimizer (plus adaQN, Adam, Adagrad, NAQ, and BFGS baselines) and verify its numerical kernels",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a training experiment described by a config file
    Run {
        /// Path to a `key = value` config file
        config: PathBuf,
        /// Master seed (overrides the config)
        #[arg(long)]
        seed: Option<u64>,
        /// Metrics CSV path (overrides the config)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Extra `key=value` settings applied after the file, in order
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Check the backpropagation-through-time gradient against central
    /// finite differences over a grid of sequence lengths
    GradCheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Testing aid: corrupt the analytic gradient by this amount to
        /// prove the check fails when it should
        #[arg(long, default_value_t = 0.0, hide = true)]
        corrupt: f64,
    },
    /// Cross-validate the two-loop direction and the gradient-FIFO implied
    /// y-product against dense linear-algebra oracles
    OracleCheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print per-iteration compute and storage costs for all optimizers
    Cost {
        /// Full training-set size (full-batch rows)
        #[arg(long, default_value_t = 60_000)]
        n: u64,
        /// Mini-batch size (stochastic rows)
        #[arg(long, default_value_t = 128)]
        b: u64,
        /// Parameter count
        #[arg(long, default_value_t = 1_000)]
        d: u64,
        /// Curvature-pair buffer capacity
        #[arg(long, default_value_t = 10)]
        m_l: u64,
        /// Stored-gradient buffer capacity
        #[arg(long, default_value_t = 100)]
        m_f: u64,
        /// Aggregation period
        #[arg(long, default_value_t = 5)]
        l: u64,
        /// Line-search evaluations per iteration (full-batch rows)
        #[arg(long, default_value_t = 1)]
        zeta: u64,
    },
}

fn cmd_run(
    config_path: &PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
    overrides: &[String],
) -> ExitCode {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config_path.display());
            return ExitCode::from(1);
        }
    };
    let mut pairs: Vec<(String, String)> = Vec::new();
    for item in overrides {
        match item.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
            None => {
                eprintln!("error: --override expects KEY=VALUE, got '{item}'");
                return ExitCode::from(1);
            }
        }
    }
    if let Some(s) = seed {
        pairs.push(("seed".into(), s.to_string()));
    }
    if let Some(o) = out {
        pairs.push(("out".into(), o.display().to_string()));
    }

    let config = match parse_config_with_overrides(&text, &pairs) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    println!(
        "run: task={} optimizer={} seed={} epochs={} b={} -> {}",
        config.task,
        config.optimizer,
        config.seed,
        config.epochs,
        config.batch_size,
        config.out.display()
    );
    match run_experiment(&config) {
        Ok(summary) => {
            println!(
                "done: {} after {} steps, final loss {:.6}, final metric {:.6}, {} ms, {} rows",
                summary.termination.label(),
                summary.steps,
                summary.final_loss,
                summary.final_metric,
                summary.wall_ms,
                summary.rows_written
            );
            match summary.termination {
                Termination::NumericError(ref detail) => {
                    eprintln!("terminated early: {detail}");
                    ExitCode::from(2)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_grad_check(seed: u64, corrupt: f64) -> ExitCode {
    let report = match grad_check_grid(seed, corrupt) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    println!("gradient check (central differences, step 1e-5):");
    for row in &report.rows {
        println!(
            "  T = {:>3}: max relative error {:.3e} (threshold {:.0e}) {}",
            row.seq_len,
            row.max_rel_error,
            row.threshold,
            if row.max_rel_error < row.threshold {
                "ok"
            } else {
                "FAIL"
            }
        );
    }
    if report.all_pass() {
        println!("all gradient checks passed");
        ExitCode::SUCCESS
    } else {
        eprintln!("gradient check FAILED");
        ExitCode::from(1)
    }
}

fn cmd_oracle_check(seed: u64) -> ExitCode {
    let report = match oracle_check(seed, 100) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    println!("oracle equivalence (100 random trials each):");
    println!(
        "  two-loop vs dense rank-two updates: max deviation {:.3e}",
        report.two_loop_max_dev
    );
    println!(
        "  gradient-FIFO y vs explicit outer-product matrix: max deviation {:.3e}",
        report.fim_max_dev
    );
    println!(
        "  empty-buffer direction exact: {}",
        report.empty_buffer_exact
    );
    println!("  worked single-pair example: {}", report.worked_example_ok);
    if report.all_pass() {
        println!("all oracle checks passed (gate 1e-9)");
        ExitCode::SUCCESS
    } else {
        eprintln!("oracle check FAILED");
        ExitCode::from(1)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_cost(n: u64, b: u64, d: u64, m_l: u64, m_f: u64, l: u64, zeta: u64) -> ExitCode {
    println!("per-iteration cost for n={n} b={b} d={d} m_L={m_l} m_F={m_f} L={l} zeta={zeta}:");
    println!("  {:<8} {:>16} {:>16}", "method", "compute", "storage");
    for (algorithm, report) in cost_table(n, b, d, m_l, m_f, l, zeta) {
        println!(
            "  {:<8} {:>16} {:>16}",
            algorithm.name(),
            report.compute,
            report.storage
        );
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            overrides,
        } => cmd_run(&config, seed, out, &overrides),
        Command::GradCheck { seed, corrupt } => cmd_grad_check(seed, corrupt),
        Command::OracleCheck { seed } => cmd_oracle_check(seed),
        Command::Cost {
            n,
            b,
            d,
            m_l,
            m_f,
            l,
            zeta,
        } => cmd_cost(n, b, d, m_l, m_f, l, zeta),
    }
}
