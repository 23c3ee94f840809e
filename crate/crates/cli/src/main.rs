//! `homoglab run <config.toml>`, `homoglab list [filter]`, `homoglab describe <scenario>`.

mod config;
mod failure;
mod output;
mod scenarios;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use config::ScenarioConfig;
use failure::Failure;

/// Overrides the output directory of `run`.
const OUT_ENV: &str = "HOMOGLAB_OUT";

#[derive(Parser)]
#[command(name = "homoglab", version, about = "Homogenization scenarios with almost translation-invariant coefficients")]
struct Cli {
    /// Caps the number of worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the scenario named in a TOML config.
    Run { config: PathBuf },
    /// Lists scenarios whose name contains the filter.
    List { filter: Option<String> },
    /// Prints a scenario's description and default config.
    Describe { scenario: String },
}

fn unknown(name: &str) -> Failure {
    Failure {
        kind: "ScenarioUnknown".into(),
        module: "cli".into(),
        message: format!("no scenario named `{name}` in the registry"),
        registry: Some(scenarios::names()),
        exit: failure::EXIT_CONFIG,
    }
}

fn run(path: &Path) -> Result<PathBuf, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let cfg = ScenarioConfig::parse(&text)?;
    let sc = scenarios::find(&cfg.scenario).ok_or_else(|| unknown(&cfg.scenario))?;
    let resolved = scenarios::resolve(cfg, sc)?;
    let dir = match std::env::var_os(OUT_ENV) {
        Some(d) => PathBuf::from(d),
        None => resolved
            .output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("homoglab-out").join(sc.name)),
    };
    let outcome = (sc.run)(&resolved)?;
    let summary = json!({
        "scenario": sc.name,
        "config": resolved,
        "results": outcome.results,
    });
    let mut files = vec![("summary.json".to_string(), output::to_json(&summary))];
    files.extend(outcome.files);
    output::write_all(&dir, &files)?;
    Ok(dir)
}

fn describe(name: &str) -> Result<String, Failure> {
    let sc = scenarios::find(name).ok_or_else(|| unknown(name))?;
    let defaults = toml::to_string(&(sc.defaults)()).map_err(|e| Failure::config(e.to_string()))?;
    Ok(format!(
        "{}: {}\naccepted fields: {}\n\n# default config\n{defaults}",
        sc.name,
        sc.description,
        sc.fields.join(", ")
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 || rayon::ThreadPoolBuilder::new().num_threads(j).build_global().is_err() {
            let f = Failure::config("--jobs must be a positive thread count");
            eprintln!("{}", serde_json::to_string(&f).expect("error serializes"));
            return ExitCode::from(f.exit);
        }
    }
    let result = match cli.command {
        Command::List { filter } => {
            let filter = filter.unwrap_or_default();
            for s in scenarios::REGISTRY.iter().filter(|s| s.name.contains(filter.as_str())) {
                println!("{:<20} {}", s.name, s.description);
            }
            Ok(())
        }
        Command::Describe { scenario } => describe(&scenario).map(|s| print!("{s}")),
        Command::Run { config } => run(&config).map(|dir| println!("{}", dir.display())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", serde_json::to_string(&f).expect("error serializes"));
            ExitCode::from(f.exit)
        }
    }
}
