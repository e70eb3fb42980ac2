use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use paracone::paraconvex::Form;
use paracone_cli::checks::{run_check, Outcome, Overrides};
use paracone_cli::config::{Check, CheckConfig, ConfigError, Experiment};
use paracone_cli::manifest::{run_config, to_json, write_manifest, EXIT_INPUT, EXIT_PASS, EXIT_VIOLATION};

#[derive(Parser)]
#[command(name = "paracone", version, about = "Checks for strongly cone-paraconvex vector mappings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for JSON reports, the manifest and CSV traces.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed of every selected check.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the sample budget.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Inequality form: `min` or `lambda`.
    #[arg(long)]
    form: Option<Form>,
}

#[derive(Subcommand)]
enum Command {
    /// Inequality on uniform triples.
    CheckParaconvex(Common),
    /// Dyadic, random and refined search for a violating triple.
    Falsify(Common),
    /// Inequality through dual functionals.
    Scalarize(Common),
    /// Scalar inequality of y* o f with constant C1 y*(k).
    Fact2(Common),
    /// Approximate convexity of y* o f near x0.
    ApproxConvex(Common),
    /// Local order boundedness near x0.
    Bounded(Common),
    /// Vector Lipschitz estimate on a region.
    Lipschitz(Common),
    /// Quotient trace and its monotonicity check.
    Trace(Common),
    /// Directional derivative estimate (CSV trace on stdout).
    Derivative(Common),
    /// Gateaux battery at x0.
    Gateaux(Common),
    /// Gateaux battery over many points (CSV on stdout).
    GateauxScan(Common),
    /// Uniform Frechet test through the cone base.
    Frechet(Common),
    /// Every check of the configuration, with a manifest.
    Run(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::CheckParaconvex(c) => ("check-paraconvex", c),
            Command::Falsify(c) => ("falsify", c),
            Command::Scalarize(c) => ("scalarize", c),
            Command::Fact2(c) => ("fact2", c),
            Command::ApproxConvex(c) => ("approx-convex", c),
            Command::Bounded(c) => ("bounded", c),
            Command::Lipschitz(c) => ("lipschitz", c),
            Command::Trace(c) => ("trace", c),
            Command::Derivative(c) => ("derivative", c),
            Command::Gateaux(c) => ("gateaux", c),
            Command::GateauxScan(c) => ("gateaux-scan", c),
            Command::Frechet(c) => ("frechet", c),
            Command::Run(c) => ("run", c),
        }
    }
}

fn fail(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_INPUT as u8)
}

fn code(pass: bool) -> ExitCode {
    ExitCode::from(if pass { EXIT_PASS } else { EXIT_VIOLATION } as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = cli.command.parts();
    let exp = match Experiment::load(&common.config) {
        Ok(e) => e,
        Err(e) => return fail(format!("{}: {e}", common.config.display())),
    };
    let overrides = Overrides { seed: common.seed, budget: common.budget, tol: common.tol, form: common.form };
    if kind == "run" {
        let manifest = match run_config(&exp, &overrides) {
            Ok(m) => m,
            Err(e) => return fail(format!("{}: {e}", common.config.display())),
        };
        match common.out.clone().or(exp.output_dir.clone()) {
            Some(dir) => {
                if let Err(e) = write_manifest(&manifest, &dir) {
                    return fail(format!("cannot write {}: {e}", dir.display()));
                }
            }
            None => print!("{}", to_json(&manifest)),
        }
        for c in &manifest.checks {
            eprintln!("{} {}: {}", c.kind, c.name, if c.pass { "pass" } else { "VIOLATION" });
        }
        return ExitCode::from(manifest.exit_status as u8);
    }
    match single(&exp, kind, &overrides) {
        Ok(outcome) => match emit(&outcome, common.out.as_deref()) {
            Ok(()) => code(outcome.pass),
            Err(e) => fail(e),
        },
        Err(e) => fail(format!("{}: {e}", common.config.display())),
    }
}

/// The first configured check of this kind, or a bare one built from flags.
fn single(exp: &Experiment, kind: &str, overrides: &Overrides) -> Result<Outcome, ConfigError> {
    let check = exp.checks.iter().find(|c| c.config.kind == kind).cloned().unwrap_or_else(|| Check {
        name: kind.to_string(),
        config: CheckConfig { kind: kind.to_string(), ..CheckConfig::default() },
        line: None,
    });
    run_check(exp, &check, overrides)
}

fn emit(outcome: &Outcome, out: Option<&Path>) -> std::io::Result<()> {
    let json = to_json(&outcome.report);
    match (outcome.kind.as_str(), &outcome.csv) {
        ("derivative", Some(csv)) => {
            print!("{csv}");
            let r = &outcome.report;
            eprintln!(
                "estimate {} error_bound {} converged {}",
                r["value"], r["error_bound"], r["converged"]
            );
        }
        ("gateaux-scan", Some(csv)) => print!("{csv}"),
        _ => print!("{json}"),
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.json", outcome.name)), &json)?;
        if let Some(csv) = &outcome.csv {
            std::fs::write(dir.join(format!("{}.csv", outcome.name)), csv)?;
        }
    }
    Ok(())
}
