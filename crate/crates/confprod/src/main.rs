use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use confprod::commands::{
    cmd_ode, cmd_search, cmd_split, cmd_verify, parse_basepoint, OdeOptions, SplitOptions,
    VerifyOptions,
};
use confprod::io::{read, write_atomic};
use confprod::search_config::SearchFile;
use confprod::tolerances::parse_override;
use confprod::{CliError, CliResult, Report, Scene};

/// Curvature, Einstein and splitting checks for conformal product metrics.
///
/// Exit codes: 0 all checks pass, 1 invalid input, 2 a check or theorem
/// precondition failed, 3 numerical abort.
#[derive(Debug, Parser)]
#[command(name = "confprod", version)]
struct Cli {
    /// Override a tolerance, `name=value`; repeatable.
    #[arg(long = "tol", global = true, value_parser = parse_override)]
    tol: Vec<(String, f64)>,
    /// Write the report here (atomically) instead of standard output.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form curvature and connection identities against the oracle.
    Verify {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 32)]
        points: usize,
        /// Defaults to the scene seed, then 0.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Hypothesis check and explicit splitting into a conformal product.
    Split {
        #[arg(long)]
        scene: PathBuf,
        /// Samples per factor.
        #[arg(long, default_value_t = 33)]
        grid: usize,
        /// `x1,...;y1,...`; defaults to the domain midpoint.
        #[arg(long)]
        basepoint: Option<String>,
    },
    /// Residuals of the one-dimensional-base reduction.
    Ode {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 32)]
        points: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Einstein-residual minimization over Fourier conformal factors.
    Search {
        #[arg(long)]
        config: PathBuf,
        /// JSON-lines trace output.
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_scene(path: &Path, tol: &[(String, f64)]) -> CliResult<Scene> {
    let mut scene = Scene::from_json(&read(path)?)?;
    scene.tolerances.apply(tol, "--tol")?;
    Ok(scene)
}

fn run(cli: &Cli) -> CliResult<Report> {
    match &cli.command {
        Command::Verify {
            scene,
            points,
            seed,
        } => {
            let scene = load_scene(scene, &cli.tol)?;
            let seed = seed.or(scene.seed()).unwrap_or(0);
            cmd_verify(
                &scene,
                VerifyOptions {
                    points: *points,
                    seed,
                },
            )
        }
        Command::Split {
            scene,
            grid,
            basepoint,
        } => {
            let scene = load_scene(scene, &cli.tol)?;
            let basepoint = basepoint
                .as_deref()
                .map(|b| parse_basepoint(b, scene.split()))
                .transpose()?;
            cmd_split(
                &scene,
                &SplitOptions {
                    grid: *grid,
                    basepoint,
                },
            )
        }
        Command::Ode {
            scene,
            points,
            seed,
        } => {
            let scene = load_scene(scene, &cli.tol)?;
            let seed = seed.or(scene.seed()).unwrap_or(0);
            cmd_ode(
                &scene,
                OdeOptions {
                    points: *points,
                    seed,
                },
            )
        }
        Command::Search { config, out } => {
            let setup = SearchFile::from_json(&read(config)?)?.setup(&cli.tol)?;
            let outcome = cmd_search(&setup)?;
            write_atomic(out, outcome.trace.as_bytes())?;
            Ok(outcome.report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let emitted = run(&cli).and_then(|report| {
        let text = report.to_json();
        match &cli.report {
            Some(path) => write_atomic(path, text.as_bytes())?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|source| CliError::Io {
                        context: "writing report".into(),
                        source,
                    })?
            }
        }
        Ok(report.exit_code)
    });
    match emitted {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
