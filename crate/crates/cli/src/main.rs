use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mcurve_dimers::moebius::ExtPoint;
use mcurve_dimers_cli::{
    cmd_abel_eval, cmd_degenerate, cmd_series, cmd_theta_eval, cmd_verify, cmd_weights,
    exit_code_for, with_threads, Artifact, CliError, RunConfig, Suite,
};
use num_complex::Complex64;

/// Fock-weight dimer models on M-curves: weight tables, verification suites and
/// degeneration scans.
///
/// Exit codes: 0 pass, 1 residual failure, 2 configuration error, 3 numerical
/// non-convergence.
#[derive(Parser, Debug)]
#[command(name = "mcdimers", version)]
struct Cli {
    /// Run configuration (TOML, schema `fock-dimer-config/1`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the `output` key of the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Tolerance for `verify`; each suite has its own default.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for random test points; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the weight table `weights.csv`.
    Weights,
    /// Run a verification suite and write `verify_<suite>.json`.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Scan multipliers to zero and write `degenerate.csv`.
    Degenerate {
        /// 1-based generator indices; defaults to `experiment.degenerate`.
        #[arg(long, value_delimiter = ',')]
        indices: Option<Vec<usize>>,
        /// Number of halvings of s; defaults to `experiment.steps`.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Write first-order weight expansions to `series.json`.
    Series,
    /// Evaluate theta; components as `re` or `re:im`.
    ThetaEval {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z: Vec<String>,
    },
    /// Abel–Jacobi image of a divisor given as `point:multiplicity` terms.
    AbelEval {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        divisor: Vec<String>,
    },
}

fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::Config(format!("cannot read `{s}` as re or re:im"));
    let mut parts = s.split(':');
    let re: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im: f64 = match parts.next() {
        Some(x) => x.trim().parse().map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn parse_term(s: &str) -> Result<(ExtPoint, i32), CliError> {
    let bad = || CliError::Config(format!("cannot read `{s}` as point:multiplicity"));
    let (p, m) = s.rsplit_once(':').ok_or_else(bad)?;
    let x: f64 = p.trim().parse().map_err(|_| bad())?;
    let m: i32 = m.trim().parse().map_err(|_| bad())?;
    let point = if x.is_infinite() { ExtPoint::Infinity } else { ExtPoint::real(x) };
    Ok((point, m))
}

fn run(cli: &Cli) -> Result<Artifact, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match &cli.command {
        Command::Weights => cmd_weights(&cfg),
        Command::Verify { suite } => cmd_verify(&cfg, *suite, cli.tol),
        Command::Degenerate { indices, steps } => {
            let idx = indices.clone().unwrap_or_else(|| cfg.experiment.degenerate.clone());
            cmd_degenerate(&cfg, &idx, steps.unwrap_or(cfg.experiment.steps))
        }
        Command::Series => cmd_series(&cfg),
        Command::ThetaEval { z } => {
            let z = z.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>, _>>()?;
            cmd_theta_eval(&cfg, &z)
        }
        Command::AbelEval { divisor } => {
            let d = divisor.iter().map(|s| parse_term(s)).collect::<Result<Vec<_>, _>>()?;
            cmd_abel_eval(&cfg, &d)
        }
    }
    .and_then(|a| {
        a.write_to(&cfg.output_dir(cli.out.as_deref()))?;
        Ok(a)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.unwrap_or(0);
    let outcome = with_threads(threads, || run(&cli)).and_then(|r| r);
    let code = match outcome {
        Ok(a) => {
            if a.file_name.ends_with(".json") && !a.file_name.starts_with("verify_") {
                print!("{}", a.contents);
            } else {
                println!("{}: {}", a.file_name, if a.pass { "pass" } else { "FAIL" });
            }
            exit_code_for(a.pass)
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_parsers() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("-1:2").unwrap(), Complex64::new(-1.0, 2.0));
        assert!(parse_complex("1:2:3").is_err());
        assert_eq!(parse_term("inf:-1").unwrap(), (ExtPoint::Infinity, -1));
        assert_eq!(parse_term("-0.5:2").unwrap(), (ExtPoint::real(-0.5), 2));
        assert!(parse_term("x").is_err());
    }
}
