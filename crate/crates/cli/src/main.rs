use std::process::ExitCode;

use clap::Parser;

use sdre_cli::args::{Cli, Command};
use sdre_cli::{commands, selftest, CliError};

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let s = commands::simulate(&args.resolve()?)?;
            println!(
                "{} / {}: total_cost {:.6e}, wall {:.3}s, diverged {}, {} steps",
                s.model, s.strategy, s.total_cost, s.wall_time_total, s.diverged, s.steps
            );
            if let Some(b) = s.bound {
                println!("residual bound integral {:.6e} on [0, {}]", b.integral_along_trajectory, b.horizon);
            }
        }
        Command::Bench(args) => {
            let r = commands::bench(&args.resolve()?)?;
            println!("{:<16} {:>8} {:>12} {:>14} {:>9}", "strategy", "mu", "wall_s", "total_cost", "diverged");
            for row in &r.rows {
                let mu = row.mu.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
                match (row.wall_time, row.total_cost, row.diverged) {
                    (Some(w), Some(c), Some(d)) => {
                        println!("{:<16} {mu:>8} {w:>12.4} {c:>14.6e} {d:>9}", row.strategy.to_string())
                    }
                    _ => println!(
                        "{:<16} {mu:>8} failed: {}",
                        row.strategy.to_string(),
                        row.error.as_deref().unwrap_or("")
                    ),
                }
            }
        }
        Command::SdcRoot(args) => {
            let r = commands::sdc_root(&args.resolve()?)?;
            match r.alpha_star {
                Some(a) => println!("alpha* = {a:.12} (E = {:.3e})", r.e_at_root.unwrap_or(f64::NAN)),
                None => println!("no sign change on the scanned grid"),
            }
        }
        Command::Spectrum(args) => {
            let r = commands::spectrum(&args.run.resolve()?, args.rank_tol)?;
            println!(
                "sigma_1 = {:.6e}, numerical rank {} of {} at {:e}",
                r.sigma_max, r.numerical_rank, r.dim, r.rank_tol
            );
        }
        Command::Selftest(args) => selftest::report(&selftest::run(args.seed))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
