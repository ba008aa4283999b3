use clap::Parser;
use fdnls_cli::config::{ConfigError, Verb};
use fdnls_cli::error::CliError;
use fdnls_cli::{execute, load, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Run an fdnls experiment from a config file and/or flags.
#[derive(Debug, Parser)]
#[command(name = "fdnls", version, after_help = verbs_help())]
struct Args {
    /// Verb to run; may instead be given as `verb` in the config.
    verb: Option<String>,
    /// Flat `key = value` or JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_path`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Override any key, e.g. `--set alpha=2.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn verbs_help() -> String {
    format!("Verbs: {}", Verb::names().join(", "))
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FDNLS_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| ConfigError::InvalidValue {
        key: "FDNLS_THREADS".into(),
        value: v.clone(),
        expected: "a positive integer".into(),
    })?;
    // Fails only if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(args: Args) -> Result<(), CliError> {
    threads()?;
    let ov = Overrides { verb: args.verb, out: args.out, seed: args.seed, format: args.format, sets: args.sets };
    let cfg = load(args.config.as_deref(), &ov)?;
    let manifest = execute(&cfg)?;
    println!(
        "{}: wrote {} files to {} in {:.3}s",
        manifest.verb,
        manifest.outputs.len() + 1,
        cfg.output_path().display(),
        manifest.wall_time_seconds
    );
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
