//! Run configuration: command-line flags layered over an optional TOML
//! file with the same keys.

use std::path::{Path, PathBuf};

use clap::Args;
use clustered_ts::{PolicyId, Preset, ReportFormat};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_POLICIES: [PolicyId; 3] = [PolicyId::Tsg, PolicyId::Tscg, PolicyId::Utscg];
pub const DEFAULT_CUSTOM_HORIZON: u64 = 10_000;
pub const DEFAULT_CUSTOM_REPS: usize = 100;
pub const DEFAULT_SEED: u64 = 0;

/// Where the bandit instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    Preset(Preset),
    File(PathBuf),
}

impl InstanceSource {
    pub fn label(&self) -> String {
        match self {
            InstanceSource::Preset(p) => p.as_str().to_string(),
            InstanceSource::File(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: InstanceSource,
    pub policies: Vec<PolicyId>,
    pub horizon: u64,
    pub replications: usize,
    pub seed: u64,
    pub stride: u64,
    pub out: PathBuf,
    pub format: ReportFormat,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file with any of the keys below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in instance: mmwave or portfolio.
    #[arg(long)]
    pub preset: Option<String>,
    /// Instance file (.toml or .json).
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Comma-separated policy ids: tsg, tscg, utscg, ucb1, tlp.
    #[arg(long)]
    pub policies: Option<String>,
    /// Rounds per episode.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Independent replications per policy.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rounds between checkpoints.
    #[arg(long)]
    pub stride: Option<u64>,
    /// Report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    preset: Option<String>,
    instance: Option<PathBuf>,
    policies: Option<Vec<String>>,
    horizon: Option<u64>,
    reps: Option<usize>,
    seed: Option<u64>,
    stride: Option<u64>,
    out: Option<PathBuf>,
    format: Option<String>,
    threads: Option<usize>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let mut file: FileConfig = toml::from_str(&text)
        .map_err(|e| CliError::Parse(format!("config {}: {e}", path.display())))?;
    // Instance paths in a config file are relative to that file.
    if let (Some(inst), Some(dir)) = (&file.instance, path.parent()) {
        if inst.is_relative() {
            file.instance = Some(dir.join(inst));
        }
    }
    Ok(file)
}

pub fn parse_preset(s: &str) -> Result<Preset, CliError> {
    s.parse()
        .map_err(|e: clustered_ts::BanditError| usage(e.to_string()))
}

/// Resolves `--preset`/`--instance` into exactly one source.
pub fn resolve_source(
    preset: Option<&str>,
    instance: Option<&Path>,
) -> Result<InstanceSource, CliError> {
    match (preset, instance) {
        (Some(_), Some(_)) => Err(usage("--preset and --instance are mutually exclusive")),
        (None, None) => Err(usage(
            "an instance is required: pass --preset or --instance",
        )),
        (Some(p), None) => Ok(InstanceSource::Preset(parse_preset(p)?)),
        (None, Some(path)) => {
            if !path.is_file() {
                return Err(usage(format!(
                    "instance file {} does not exist",
                    path.display()
                )));
            }
            Ok(InstanceSource::File(path.to_path_buf()))
        }
    }
}

impl RunConfig {
    pub fn from_args(args: RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => load_file_config(path)?,
            None => FileConfig::default(),
        };

        // A flag-level source replaces the file's source entirely.
        let (preset, instance) = if args.preset.is_some() || args.instance.is_some() {
            (args.preset, args.instance)
        } else {
            (file.preset, file.instance)
        };
        let source = resolve_source(preset.as_deref(), instance.as_deref())?;

        let policies = match (args.policies, file.policies) {
            (Some(list), _) => PolicyId::parse_list(&list).map_err(|e| usage(e.to_string()))?,
            (None, Some(list)) => list
                .iter()
                .map(|p| p.parse())
                .collect::<Result<Vec<PolicyId>, _>>()
                .map_err(|e| usage(e.to_string()))?,
            (None, None) => DEFAULT_POLICIES.to_vec(),
        };
        if policies.is_empty() {
            return Err(usage("at least one policy is required"));
        }

        let (default_horizon, default_reps) = match &source {
            InstanceSource::Preset(p) => p.default_budget(),
            InstanceSource::File(_) => (DEFAULT_CUSTOM_HORIZON, DEFAULT_CUSTOM_REPS),
        };
        let horizon = args.horizon.or(file.horizon).unwrap_or(default_horizon);
        let replications = args.reps.or(file.reps).unwrap_or(default_reps);
        let stride = args
            .stride
            .or(file.stride)
            .unwrap_or(clustered_ts::ExperimentConfig::DEFAULT_STRIDE);
        if horizon == 0 {
            return Err(usage("--horizon must be at least 1"));
        }
        if replications == 0 {
            return Err(usage("--reps must be at least 1"));
        }
        if stride == 0 {
            return Err(usage("--stride must be at least 1"));
        }
        let threads = args.threads.or(file.threads);
        if threads == Some(0) {
            return Err(usage("--threads must be at least 1"));
        }

        let out_flag = args.out.or(file.out);
        let format = match args.format.or(file.format) {
            Some(f) => f.parse::<ReportFormat>().map_err(usage)?,
            None => match out_flag
                .as_ref()
                .and_then(|p| p.extension())
                .and_then(|e| e.to_str())
            {
                Some(ext) if ext.eq_ignore_ascii_case("json") => ReportFormat::Json,
                _ => ReportFormat::Csv,
            },
        };
        let out = out_flag.unwrap_or_else(|| {
            let ext = match format {
                ReportFormat::Csv => "csv",
                ReportFormat::Json => "json",
            };
            PathBuf::from(format!("{}_report.{ext}", source.label()))
        });

        Ok(Self {
            source,
            policies,
            horizon,
            replications,
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            stride,
            out,
            format,
            threads,
        })
    }
}
