use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use optomech_cli::commands::{run, Command};
use optomech_cli::config::{parse_config, ModelConfig};

/// Michelson-Sagnac optomechanics: couplings, cooling, noise budgets.
#[derive(Debug, Parser)]
#[command(name = "msi-optomech", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// `key = value` file; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override one key, e.g. `--set topology=PRM`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn load(args: &Args) -> Result<ModelConfig, String> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => ModelConfig::default(),
    };
    cfg.apply_overrides(&args.overrides)
        .map_err(|e| format!("--set: {e}"))?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: {}: {e}", args.out.display());
        return ExitCode::from(1);
    }
    match run(args.command, &cfg, &args.out) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if !outcome.passed {
                eprintln!("verification failed; see verify.json");
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
