use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use decolab_cli::builtins::{self, BUILTINS};
use decolab_cli::error::{CliError, CliResult};
use decolab_cli::runner::{run_case, write_outputs, VERSION};
use decolab_cli::scenario::{expand, load_file, parse_override};

#[derive(Parser)]
#[command(name = "decolab", version = VERSION, about = "Decoherence of oscillator cat states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in preset.
    Run {
        /// Path to a TOML/JSON scenario, or the name of a built-in.
        scenario: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Fock-space dimension.
        #[arg(long)]
        dim: Option<usize>,
        /// Wigner grid: points in x, points in p, half-width.
        #[arg(long, num_args = 3, value_names = ["NX", "NP", "RANGE"])]
        grid: Option<Vec<String>>,
        /// Largest integration step.
        #[arg(long)]
        dt: Option<f64>,
        /// Replace a scenario key, e.g. `--override gamma=0.002`.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List the built-in scenarios.
    List,
    /// Print the version.
    Version,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("DECOLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .map_err(|_| CliError::Config(format!("DECOLAB_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Version => println!("decolab {VERSION}"),
        Command::List => list()?,
        Command::Run {
            scenario,
            out,
            seed,
            dim,
            grid,
            dt,
            overrides,
        } => {
            configure_threads()?;
            let path = Path::new(&scenario);
            let doc = match builtins::resolve(&scenario)? {
                Some(doc) if !path.exists() => doc,
                _ => load_file(path)?,
            };
            let mut pairs = Vec::new();
            if let Some(s) = seed {
                pairs.push(("seed".to_string(), Value::from(s)));
            }
            if let Some(d) = dim {
                pairs.push(("dim".to_string(), Value::from(d)));
            }
            if let Some(dt) = dt {
                pairs.push(("dt".to_string(), Value::from(dt)));
            }
            if let Some(g) = grid {
                for (key, raw) in ["grid_nx", "grid_np", "grid_range"].into_iter().zip(g) {
                    pairs.push(parse_override(&format!("{key}={raw}"))?);
                }
            }
            for o in &overrides {
                pairs.push(parse_override(o)?);
            }
            let cases = expand(&doc, &pairs)?;
            for case in &cases {
                let start = std::time::Instant::now();
                let output = run_case(case)?;
                for path in write_outputs(std::slice::from_ref(&output), &out)? {
                    println!("{}", path.display());
                }
                log::info!("{} finished in {:.1} s", case.stem, start.elapsed().as_secs_f64());
            }
        }
    }
    Ok(())
}

fn list() -> CliResult<()> {
    for b in BUILTINS {
        let doc = b.document()?;
        let cases = expand(&doc, &[])?;
        let first = &cases[0].scenario;
        println!(
            "{:<6} {:<17} budget {:>5} s  {}",
            b.name,
            first.model.name(),
            first.budget_s.unwrap_or(0.0),
            first.description
        );
        let params = doc
            .as_object()
            .map(|m| {
                m.iter()
                    .filter(|(k, _)| !matches!(k.as_str(), "name" | "model" | "description" | "budget_s"))
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .unwrap_or_default();
        println!("       {params}");
    }
    Ok(())
}
