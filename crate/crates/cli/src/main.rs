use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cotangent::catalog::{ManifoldSpec, Scaling, DEFAULT_P_RADIUS};
use cotangent::jets::DiffScheme;
use cotangent::suite::{run_suite, Check, SuiteConfig};

#[derive(Parser)]
#[command(name = "cgverify", version, about = "Verify cotangent bundle geometry against first-principles oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification cells and print a report
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Diff {
    Jets,
    Fd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Base manifold, `name` or `name:dim` (repeatable; default: whole catalog)
    #[arg(long = "manifold", value_name = "NAME")]
    manifolds: Vec<ManifoldSpec>,
    /// Scaling function f (repeatable; default: all)
    #[arg(long = "scaling", value_name = "NAME")]
    scalings: Vec<Scaling>,
    /// Check to run (repeatable; default: all)
    #[arg(long = "check", value_name = "NAME")]
    checks: Vec<Check>,
    /// Random samples per cell, before the two forced points
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Diff::Jets)]
    diff: Diff,
    /// Finite-difference step
    #[arg(long, value_name = "H")]
    step: Option<f64>,
    /// Multiplies every non-exact tolerance
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    /// Radius of the covector ball sampled in each fiber
    #[arg(long, default_value_t = DEFAULT_P_RADIUS)]
    p_radius: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Verify(args) = cli.command;

    let mut scheme = match args.diff {
        Diff::Jets => DiffScheme::jets(),
        Diff::Fd => DiffScheme::finite_difference(),
    };
    if let Some(h) = args.step {
        scheme = scheme.with_step(h);
    }
    if let Err(e) = scheme.validate() {
        return usage_error(&e.to_string());
    }
    if !(args.tol_scale.is_finite() && args.tol_scale > 0.0) {
        return usage_error("--tol-scale must be positive");
    }
    if !(args.p_radius.is_finite() && args.p_radius > 0.0) {
        return usage_error("--p-radius must be positive");
    }

    let defaults = SuiteConfig::default();
    let cfg = SuiteConfig {
        checks: if args.checks.is_empty() { defaults.checks } else { args.checks },
        manifolds: if args.manifolds.is_empty() { defaults.manifolds } else { args.manifolds },
        scalings: if args.scalings.is_empty() { defaults.scalings } else { args.scalings },
        scheme,
        samples: args.samples as usize,
        seed: args.seed,
        tol_scale: args.tol_scale,
        p_radius: args.p_radius,
    };
    let report = run_suite(&cfg);
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    ExitCode::from(report.exit_code() as u8)
}
