use std::path::PathBuf;
use std::process::ExitCode;

use chifield::cli::{run, Failure};
use chifield::config::{ConfigError, ExperimentConfig, RawConfig};
use clap::error::ErrorKind;
use clap::Parser;

/// Expected counts of critical points and maxima of chi random fields:
/// closed forms, random-matrix Monte Carlo and direct field simulation.
///
/// Settings come from an optional flat `key = value` file (`--config`) and
/// are overridden by flags of the same names.
#[derive(Debug, Parser)]
#[command(name = "chifield", version, allow_negative_numbers = true)]
struct Args {
    /// closed-form, estimate-ek, estimate-dk, a1a2, expected-maxima,
    /// simulate-count, oracle-hessian or validate
    command: Option<String>,
    /// Flat `key = value` config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Degrees of freedom of the chi field
    #[arg(long)]
    k: Option<String>,
    /// Manifold dimension (the built-in Hessian models are 2-dimensional)
    #[arg(long)]
    m: Option<String>,
    /// Thresholds: `2,3,4` or `start:stop:step`
    #[arg(long)]
    t: Option<String>,
    /// Sphere radius for closed forms when no spectrum is given
    #[arg(long)]
    r: Option<String>,
    /// Angular power spectrum file, one `l C_l` pair per line
    #[arg(long)]
    spectrum: Option<String>,
    /// berry, bf, custom (with --sigma2 and --c) or sphere (with --spectrum)
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    sigma2: Option<String>,
    #[arg(long)]
    c: Option<String>,
    /// Monte Carlo samples, or realizations for simulate-count and oracle-hessian
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads (0 = one per core); results do not depend on it
    #[arg(long)]
    threads: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<String>,
    /// corrected or paper_text
    #[arg(long)]
    sign_variant: Option<String>,
    /// Icosphere subdivision depth for simulate-count
    #[arg(long)]
    depth: Option<String>,
    /// Pixel-grid Euler characteristic check for simulate-count, e.g. 1024x2048
    #[arg(long)]
    pixel: Option<String>,
    /// Manifold volume for expected-maxima (default 4 pi r^2)
    #[arg(long)]
    volume: Option<String>,
    /// Comma-separated criteria for validate (default: all, or A1-A3,A5 with --quick)
    #[arg(long)]
    criteria: Option<String>,
    /// Desk-scale validate run
    #[arg(long)]
    quick: bool,
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", f.record());
    ExitCode::from(f.exit_code() as u8)
}

fn configure(args: Args) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = match &args.config {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    let flags = [
        ("command", args.command),
        ("k", args.k),
        ("m", args.m),
        ("t", args.t),
        ("r", args.r),
        ("spectrum", args.spectrum),
        ("model", args.model),
        ("sigma2", args.sigma2),
        ("c", args.c),
        ("n", args.n),
        ("seed", args.seed),
        ("threads", args.threads),
        ("out", args.out),
        ("sign_variant", args.sign_variant),
        ("depth", args.depth),
        ("pixel", args.pixel),
        ("volume", args.volume),
        ("criteria", args.criteria),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            raw.set_flag(k, v)?;
        }
    }
    ExperimentConfig::resolve(&raw, args.quick)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(Failure::Config(ConfigError::new(e.to_string().trim().to_string()))),
    };
    let cfg = match configure(args) {
        Ok(c) => c,
        Err(e) => return fail(Failure::Config(e)),
    };
    if cfg.threads > 0 {
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    match run(&cfg) {
        Ok(out) => {
            print!("{}", out.report);
            if out.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => fail(f),
    }
}
