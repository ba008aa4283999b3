//! Config-driven front end to `fdnls-core`.

pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod verbs;

pub use config::SCHEMA_VERSION;
use config::{ExperimentConfig, RawConfig};
use error::CliError;
use manifest::{sha256_hex, OutputDigest, RunManifest};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub verb: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub sets: Vec<String>,
}

/// Reads the optional config file, then applies `--set` and the dedicated flags in that order.
pub fn load(config: Option<&Path>, ov: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut raw = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| config::ConfigError::Read {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
            RawConfig::from_text(&text, Some(path))?
        }
        None => RawConfig::default(),
    };
    for s in &ov.sets {
        raw.set(s)?;
    }
    if let Some(out) = &ov.out {
        raw.entries.insert("output_path".into(), out.display().to_string());
    }
    if let Some(seed) = ov.seed {
        raw.entries.insert("seed".into(), seed.to_string());
    }
    if let Some(f) = &ov.format {
        raw.entries.insert("format".into(), f.clone());
    }
    Ok(ExperimentConfig::resolve(raw, ov.verb.as_deref())?)
}

/// Runs the verb, writes every artifact plus `manifest.json`, and returns the manifest.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let artifacts = verbs::run(cfg)?;
    let dir = cfg.output_path();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;

    let format = cfg.format();
    let mut files: Vec<(String, Vec<u8>)> =
        artifacts.tables.iter().map(|t| (t.file_name(format), t.render(format))).collect();
    let mut report = serde_json::to_vec_pretty(&artifacts.report).expect("report serializes");
    report.push(b'\n');
    files.push(("report.json".into(), report));

    let mut outputs = Vec::new();
    for (name, data) in files {
        let path = dir.join(&name);
        std::fs::write(&path, &data).map_err(|e| CliError::io(&path, e))?;
        outputs.push(OutputDigest { file: name, bytes: data.len() as u64, sha256: sha256_hex(&data) });
    }
    let manifest = RunManifest {
        tool: "fdnls".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        schema_version: SCHEMA_VERSION.into(),
        verb: cfg.verb.name().into(),
        config: cfg.params.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs,
    };
    manifest.write(&dir).map_err(|e| CliError::io(dir.join(manifest::MANIFEST_FILE), e))?;
    Ok(manifest)
}
