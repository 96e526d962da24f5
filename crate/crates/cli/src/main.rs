//! `k3cert`: run a certification suite and print its JSON report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use k3cert_core::par::Exec;
use k3cert_core::suite::{run, Command, ErrorReport, PolySource, RunConfig, Tolerances, DEFAULT_SEED};
use k3cert_core::Error;

#[derive(Parser)]
#[command(name = "k3cert", version, about = "Certify the constructive steps of quartic K3 geometry")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "K3CERT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Leave elapsed times out of the report.
    #[arg(long, global = true)]
    omit_timing: bool,
    /// Run sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Suppress the summary on standard error.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Override the atlas consistency tolerance.
    #[arg(long, global = true)]
    tol_omega: Option<f64>,
    /// Override the quaternion-relation tolerance.
    #[arg(long, global = true)]
    tol_quaternion: Option<f64>,
    /// Override the intersection-point residual tolerance.
    #[arg(long, global = true)]
    tol_point: Option<f64>,
}

#[derive(Args)]
struct PolyArg {
    /// Quartic in x0..x3, or a registry name such as `fermat`.
    #[arg(long, default_value = "fermat", conflicts_with = "poly_file")]
    poly: String,
    /// Read the quartic from a file.
    #[arg(long)]
    poly_file: Option<PathBuf>,
}

impl PolyArg {
    fn source(&self) -> PolySource {
        match &self.poly_file {
            Some(p) => PolySource::File(p.clone()),
            None => PolySource::Inline(self.poly.clone()),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Certify nonsingularity and the chart transition identity.
    CheckSurface(PolyArg),
    /// Check the holomorphic symplectic form over sampled points.
    CheckOmega {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Randomized checks of the hyperkähler structure and angle identities.
    CheckHk {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Exact check of the example map h.
    VerifyH,
    /// Intersect two plane curves in x, y, z.
    Bezout {
        #[arg(long)]
        curve1: String,
        #[arg(long)]
        curve2: String,
    },
    /// Finiteness of C∩D∩E on the slice x1 = σ x0.
    Cde {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, allow_hyphen_values = true)]
        sigma: String,
        /// Treat sigma as a floating-point value (decimals, `exp(i*pi/4)`).
        #[arg(long)]
        numeric: bool,
    },
    /// Every suite in sequence.
    All {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

fn config(cli: &Cli) -> RunConfig {
    let c = &cli.common;
    let mut cfg = match &cli.command {
        Cmd::CheckSurface(p) => RunConfig { poly: Some(p.source()), ..RunConfig::new(Command::CheckSurface) },
        Cmd::CheckOmega { poly, samples } => {
            RunConfig { poly: Some(poly.source()), samples: *samples, ..RunConfig::new(Command::CheckOmega) }
        }
        Cmd::CheckHk { trials } => RunConfig { trials: *trials, ..RunConfig::new(Command::CheckHk) },
        Cmd::VerifyH => RunConfig::new(Command::VerifyH),
        Cmd::Bezout { curve1, curve2 } => RunConfig {
            curve1: Some(curve1.clone()),
            curve2: Some(curve2.clone()),
            ..RunConfig::new(Command::Bezout)
        },
        Cmd::Cde { poly, sigma, numeric } => RunConfig {
            poly: Some(poly.source()),
            sigma: Some(sigma.clone()),
            numeric: *numeric,
            ..RunConfig::new(Command::Cde)
        },
        Cmd::All { poly, samples, trials } => RunConfig {
            poly: Some(poly.source()),
            samples: *samples,
            trials: *trials,
            ..RunConfig::new(Command::All)
        },
    };
    let d = Tolerances::default();
    cfg.tolerances = Tolerances {
        omega: c.tol_omega.unwrap_or(d.omega),
        quaternion: c.tol_quaternion.unwrap_or(d.quaternion),
        point_residual: c.tol_point.unwrap_or(d.point_residual),
        ..d
    };
    cfg.seed = c.seed;
    cfg.omit_timing = c.omit_timing;
    cfg.exec = if c.sequential { Exec::Sequential } else { Exec::default() };
    cfg
}

fn emit(text: &str, output: &Option<PathBuf>) -> Result<(), Error> {
    match output {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = config(&cli);
    let result = run(&cfg).and_then(|report| {
        emit(&report.to_json(), &cli.common.output)?;
        Ok(report)
    });
    match result {
        Ok(report) => {
            if !cli.common.quiet {
                eprint!("{}", report.summary());
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let body = serde_json::to_string_pretty(&ErrorReport::from(&e)).expect("serializable");
            println!("{body}");
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
