use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

use report::Format;

/// Evaluate and cross-check the alternating zeta function.
#[derive(Debug, Parser)]
#[command(name = "altzeta", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Args)]
pub struct Opts {
    /// Evaluation point, `RE` or `RE+IMi`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub s: Option<String>,
    /// Truncation order
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Truncation orders, `4,8,16` or `4..16`
    #[arg(long = "N-range", global = true)]
    pub n_range: Option<String>,
    #[arg(long, value_enum, global = true)]
    pub method: Option<MethodArg>,
    /// Monte Carlo sample count; accepts `1e5`
    #[arg(long, global = true)]
    pub samples: Option<String>,
    /// Seed; falls back to ALTZETA_SEED, then 42
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long = "burn-in", global = true)]
    pub burn_in: Option<usize>,
    #[arg(long, global = true)]
    pub thinning: Option<usize>,
    #[arg(long, value_enum, global = true, default_value = "text")]
    pub format: Format,
    /// Agreement tolerance for `eta --method all` and `selberg-check`
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, value_enum, global = true)]
    pub ensemble: Option<EnsembleArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate η_N(s) by one or all representations
    Eta,
    /// Tabulate η_N(s) against the reference value over several N
    Convergence,
    /// Monte Carlo estimate of η_N(s) from the Dixon-Anderson density
    Mc,
    /// ψ_N(x; s) in closed form and by Monte Carlo
    Psi {
        /// Comma-separated nonnegative integers
        #[arg(long, default_value = "0,1,2")]
        x: String,
    },
    /// Generalized Vandermonde ratio on a grid
    Ratio {
        /// Comma-separated increasing positive nodes
        #[arg(long)]
        u: String,
    },
    /// Ensemble-averaged ratio: closed form, quadrature and Monte Carlo
    Ensemble,
    /// Selberg or Laguerre normalization against quadrature
    SelbergCheck,
    /// Run the identity suite
    Suite {
        #[arg(long, default_value = "all")]
        scope: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Series,
    Det,
    Tridiag,
    Contfrac,
    Mc,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    Jacobi,
    Laguerre,
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("altzeta: {}", one_line(first.trim_start_matches("error: ")));
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli) {
        Ok((report, passed)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(report.render(cli.opts.format).as_bytes()).is_err() {
                return ExitCode::from(2);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("altzeta: {}", one_line(&msg));
            ExitCode::from(2)
        }
    }
}
