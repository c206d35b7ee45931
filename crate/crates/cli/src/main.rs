use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lyocert::commands::{self, Outcome};
use lyocert::config::RunConfig;
use lyocert::report;
use lyocert::verification::boundary::GapProxy;
use lyocert::verification::VerifyOptions;
use lyocert::Error;

#[derive(Parser)]
#[command(name = "lyocert", version, about = "Analyticity certificates for Lyapunov exponents of random matrix products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    /// Overrides mc.seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides grid.m
    #[arg(long)]
    grid_m: Option<usize>,
    /// Report destination; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV table destination (scan-boundary)
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Use K* instead of K*_sp
    #[arg(long)]
    rigorous: bool,
    /// Boundary gap proxy from the discretized operator's second eigenvalue
    #[arg(long)]
    measured_gap: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo Lyapunov exponents and gaps
    Estimate(Common),
    /// Gap ladder, resolvent bound, r*, M* and Cauchy bounds
    Certify(Common),
    /// Extended top exponent at complex weights
    Extend {
        #[command(flatten)]
        common: Common,
        /// Comma-separated complex weights, e.g. 0.5+0.01i,0.5-0.01i; repeatable
        #[arg(long)]
        z: Vec<String>,
    },
    /// Taylor coefficients along a zero-sum direction and a sharp-radius estimate
    Taylor(Common),
    /// Sweep toward a face of the simplex
    ScanBoundary(Common),
    /// Markov-driven certificate and estimates
    Chain(Common),
    /// Level-k Grassmannian certificates
    Grassmann(Common),
    /// Full verification suite
    Verify(Common),
    /// Reproduce the two-matrix worked example
    Example(Common),
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let path = c.config.as_deref().ok_or_else(|| Error::Validation("--config: required for this command".into()))?;
    let mut cfg = RunConfig::from_path(path)?;
    if let Some(t) = c.theta {
        cfg.theta = t;
    }
    if let Some(s) = c.seed {
        cfg.mc.seed = s;
    }
    if let Some(m) = c.grid_m {
        cfg.grid.m = m;
    }
    if c.rigorous {
        cfg.flags.rigorous_k = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn proxy(c: &Common) -> GapProxy {
    if c.measured_gap {
        GapProxy::Measured
    } else {
        GapProxy::MonteCarlo
    }
}

fn verify_options(c: &Common) -> Result<VerifyOptions, Error> {
    let mut opts = VerifyOptions::with_seed(c.seed.unwrap_or(2024));
    if let Some(m) = c.grid_m {
        if m < 8 {
            return Err(Error::Validation("--grid-m: must be >= 8".into()));
        }
        opts.grid_m = m;
    }
    opts.proxy = proxy(c);
    Ok(opts)
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Validation(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(Outcome, Common), Error> {
    match cli.command {
        Command::Estimate(c) => Ok((commands::estimate(&load(&c)?)?, c)),
        Command::Certify(c) => Ok((commands::certify(&load(&c)?)?, c)),
        Command::Extend { common, z } => {
            let cfg = load(&common)?;
            let zs = z.iter().map(|s| commands::parse_complex_list(s)).collect::<Result<Vec<_>, _>>()?;
            Ok((commands::extend(&cfg, &zs)?, common))
        }
        Command::Taylor(c) => Ok((commands::taylor(&load(&c)?)?, c)),
        Command::ScanBoundary(c) => {
            let p = proxy(&c);
            Ok((commands::scan_boundary(&load(&c)?, p)?, c))
        }
        Command::Chain(c) => Ok((commands::chain(&load(&c)?)?, c)),
        Command::Grassmann(c) => Ok((commands::grassmann(&load(&c)?)?, c)),
        Command::Verify(c) => Ok((commands::verify(&verify_options(&c)?), c)),
        Command::Example(c) => {
            let m = c.grid_m.unwrap_or(2000);
            if m < 8 {
                return Err(Error::Validation("--grid-m: must be >= 8".into()));
            }
            Ok((commands::example(m)?, c))
        }
    }
}

fn init_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("LYOCERT_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Validation(format!("LYOCERT_THREADS: expected a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation(format!("LYOCERT_THREADS: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| run(cli)).and_then(|(out, c)| {
        write(c.out.as_deref(), &report::render(&out.report))?;
        if let (Some(p), Some(csv)) = (c.csv.as_deref(), out.csv.as_deref()) {
            write(Some(p), csv)?;
        }
        eprint!("{}", out.table);
        Ok(out.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
