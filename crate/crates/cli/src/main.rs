//! Command-line interface: estimate markets from return histories,
//! solve risk-risk portfolio problems on Gaussian or scenario inputs,
//! emit the minimum-variance frontier, and verify solver output
//! against brute-force oracles.

mod commands;
mod config;
mod csvio;
mod report;

use std::path::PathBuf;

use commands::{cmd_estimate, cmd_frontier, cmd_solve, cmd_verify, Flags};

const USAGE: &str = "\
usage: birisk <command> --config PATH [options]

commands:
  estimate   estimate mean/covariance from a returns CSV into a market file
  solve      solve the risk-risk problem (gaussian or scenario mode)
  frontier   write the minimum-variance frontier as CSV
  verify     re-check solver output against brute-force oracles

options:
  --config PATH    problem configuration (key = value lines)
  --out PATH       output file (also echoed to stdout)
  --seed N         sampling seed for bridge verification
  --grid N         grid/frontier point count override
  --epsilon X      emit a feasible portfolio within X of an unattained infimum

exit codes: 0 optimal/ok, 1 error, 2 infeasible, 3 unbounded,
4 infimum not attained\
";

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags::default();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut take = |name: &str| -> Result<String, String> {
            it.next().cloned().ok_or_else(|| format!("{} needs a value", name))
        };
        match arg.as_str() {
            "--config" | "-c" => flags.config = Some(PathBuf::from(take("--config")?)),
            "--out" | "-o" => flags.out = Some(PathBuf::from(take("--out")?)),
            "--seed" => {
                flags.seed = Some(
                    take("--seed")?
                        .parse()
                        .map_err(|_| "--seed needs an unsigned integer".to_string())?,
                )
            }
            "--grid" => {
                flags.grid = Some(
                    take("--grid")?
                        .parse()
                        .map_err(|_| "--grid needs a positive integer".to_string())?,
                )
            }
            "--epsilon" => {
                let v: f64 = take("--epsilon")?
                    .parse()
                    .map_err(|_| "--epsilon needs a positive number".to_string())?;
                if !(v > 0.0) {
                    return Err("--epsilon must be positive".into());
                }
                flags.epsilon = Some(v);
            }
            other => return Err(format!("unknown option `{}`", other)),
        }
    }
    Ok(flags)
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprintln!("{}", USAGE);
        std::process::exit(1);
    };
    if command == "--help" || command == "-h" || command == "help" {
        println!("{}", USAGE);
        std::process::exit(0);
    }
    let flags = match parse_flags(&args[1..]) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {}", e);
            eprintln!("{}", USAGE);
            std::process::exit(1);
        }
    };
    let result = match command.as_str() {
        "estimate" => cmd_estimate(&flags),
        "solve" => cmd_solve(&flags),
        "frontier" => cmd_frontier(&flags),
        "verify" => cmd_verify(&flags),
        other => {
            eprintln!("error: unknown command `{}`", other);
            eprintln!("{}", USAGE);
            std::process::exit(1);
        }
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {}", e);
            std::process::exit(1);
        }
    }
}
