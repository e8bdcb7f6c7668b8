//! Command-line front end: run experiments, check instance files and
//! print regret-bound values.
//!
//! Exit codes: 0 success, 2 usage error, 3 malformed input file,
//! 4 I/O failure.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clustered_ts::bounds::BoundResult;
use clustered_ts::report::write_report;
use clustered_ts::{
    run_experiment, BanditError, BanditInstance, BoundTable, ExperimentConfig, PolicyId,
};

use config::{resolve_source, InstanceSource, RunArgs, RunConfig, DEFAULT_CUSTOM_HORIZON};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<BanditError> for CliError {
    fn from(e: BanditError) -> Self {
        match e {
            BanditError::Io(_) | BanditError::Csv(_) => CliError::Io(e.to_string()),
            BanditError::InvalidExperiment(_)
            | BanditError::UnknownPolicy(_)
            | BanditError::InvalidScenario(_) => CliError::Usage(e.to_string()),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "clustered-ts",
    version,
    about = "Clustered Thompson sampling experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo comparison and write regret / optimal-rate curves.
    Run(RunArgs),
    /// Check an instance: unique optimum, strong dominance, unimodality, gaps.
    Validate(InstanceArgs),
    /// Print the regret-bound values for an instance.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Instance file (.toml or .json).
    pub file: Option<PathBuf>,
    /// Built-in instance instead of a file: mmwave or portfolio.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Horizon T (default: the preset budget, or 10000 for files).
    #[arg(long)]
    pub horizon: Option<u64>,
}

fn load(source: &InstanceSource) -> Result<BanditInstance, CliError> {
    match source {
        InstanceSource::Preset(p) => Ok(p.build()),
        InstanceSource::File(path) => BanditInstance::load(path).map_err(|e| match e {
            BanditError::Io(io) => CliError::Io(format!("cannot read {}: {io}", path.display())),
            other => CliError::Parse(format!("{}: {other}", path.display())),
        }),
    }
}

fn format_bound(b: &BoundResult) -> String {
    match b {
        Ok(v) => format!("{:.3}", v.total()),
        Err(na) => na.to_string(),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let cfg = RunConfig::from_args(args)?;
    let instance = load(&cfg.source)?;
    let label = cfg.source.label();

    if cfg.policies.contains(&PolicyId::Utscg) {
        let flags = instance.validate_unimodality();
        if flags.iter().any(|&u| !u) {
            let bad: Vec<String> = flags
                .iter()
                .enumerate()
                .filter(|(_, &u)| !u)
                .map(|(c, _)| c.to_string())
                .collect();
            eprintln!(
                "warning: cluster(s) {} not unimodal; utscg has no regret guarantee on this instance",
                bad.join(", ")
            );
        }
    }

    let experiment = ExperimentConfig {
        checkpoint_stride: cfg.stride,
        threads: cfg.threads,
        ..ExperimentConfig::new(
            cfg.policies.clone(),
            cfg.horizon,
            cfg.replications,
            cfg.seed,
        )
    };
    let report = run_experiment(&instance, &experiment)?;

    let file = File::create(&cfg.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cfg.out.display())))?;
    let mut out = BufWriter::new(file);
    write_report(&report, cfg.format, &label, &mut out)?;
    out.flush()
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", cfg.out.display())))?;

    println!(
        "{label}: T = {}, R = {}, seed = {}, report written to {}",
        cfg.horizon,
        cfg.replications,
        cfg.seed,
        cfg.out.display()
    );
    println!(
        "{:<8} {:>14} {:>10} {:>10}  bound",
        "policy", "mean regret", "stderr", "opt. rate"
    );
    for curve in &report.curves {
        let bound = report
            .bound_values
            .for_policy(curve.policy)
            .map(format_bound)
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<8} {:>14.3} {:>10.3} {:>10.4}  {}",
            curve.policy.as_str(),
            curve.final_mean_regret(),
            curve.final_stderr(),
            curve.final_optimal_rate(),
            bound
        );
    }
    Ok(())
}

fn instance_source(args: &InstanceArgs) -> Result<InstanceSource, CliError> {
    resolve_source(args.preset.as_deref(), args.file.as_deref())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into())
}

fn cmd_validate(args: InstanceArgs) -> Result<(), CliError> {
    let source = instance_source(&args)?;
    let instance = load(&source)?;
    let partition = instance.partition();
    println!(
        "{}: {} arms in {} clusters",
        source.label(),
        instance.num_arms(),
        partition.num_clusters()
    );

    let unique = instance.validate_unique_optimum();
    println!("unique optimum: {}", yes_no(unique));
    let gaps = if unique {
        Some(instance.compute_gaps()?)
    } else {
        None
    };
    match &gaps {
        Some(g) => println!(
            "strong dominance: {}",
            yes_no(instance.validate_strong_dominance(g))
        ),
        None => println!("strong dominance: n/a (optimal arm not unique)"),
    }
    let unimodal = instance.validate_unimodality();
    for (c, &u) in unimodal.iter().enumerate() {
        println!("cluster {c} unimodal: {}", yes_no(u));
    }
    if unimodal.iter().any(|&u| !u) {
        println!("warning: utscg has no regret guarantee on this instance");
    }

    let Some(g) = gaps else { return Ok(()) };
    println!();
    println!(
        "optimal arm {} in cluster {}, D_max = {:.6}",
        g.optimal_arm, g.optimal_cluster, g.d_max
    );
    println!("{:<6} {:>8} {:>14} {:>12}", "arm", "cluster", "mean", "gap");
    for (i, arm) in instance.arms().iter().enumerate() {
        println!(
            "{:<6} {:>8} {:>14.6} {:>12.6}",
            i,
            partition.cluster_of(i)?,
            arm.mean,
            g.per_arm_gap[i]
        );
    }
    println!(
        "{:<8} {:>12} {:>12} {:>12} {:>12}",
        "cluster", "gap", "prime gap", "distance", "width"
    );
    for c in 0..partition.num_clusters() {
        println!(
            "{:<8} {:>12.6} {:>12} {:>12} {:>12.6}",
            c,
            g.per_cluster_gap[c],
            opt(g.per_cluster_prime_gap[c]),
            opt(g.per_cluster_distance[c]),
            g.per_cluster_width[c]
        );
    }
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), CliError> {
    let source = instance_source(&args.instance)?;
    let instance = load(&source)?;
    let horizon = args.horizon.unwrap_or(match &source {
        InstanceSource::Preset(p) => p.default_budget().0,
        InstanceSource::File(_) => DEFAULT_CUSTOM_HORIZON,
    });
    if horizon == 0 {
        return Err(CliError::Usage("--horizon must be at least 1".into()));
    }
    let table = BoundTable::compute(&instance, horizon);
    println!("{}: T = {horizon}", source.label());
    for (name, policy, b) in [
        ("theorem1", PolicyId::Tsg, &table.theorem1),
        ("theorem2", PolicyId::Tscg, &table.theorem2),
        ("theorem3", PolicyId::Utscg, &table.theorem3),
    ] {
        match b {
            Ok(v) => println!(
                "{name} ({:<5}) {:>14.3}   log term {:.3}, constant {:.3}",
                policy.as_str(),
                v.total(),
                v.log_term,
                v.constant_term
            ),
            Err(na) => println!("{name} ({:<5}) {na}", policy.as_str()),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Bounds(args) => cmd_bounds(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
