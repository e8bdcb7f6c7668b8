//! Episode loop and Monte Carlo replication.
//!
//! Regret is pseudo-regret, `Σ_t (μ* − μ_{i(t)})`, computed from the true
//! means of the chosen arms rather than from realized rewards.
//!
//! Replication `r` of policy `p` is driven by
//! `RandomStream::from_seed(child_seed(master_seed, p, r))`: the policy
//! samples from that stream and the environment from a stream forked off
//! it before the first round. Replications are independent, so they run in
//! parallel and are reduced in replication order; reports do not depend on
//! the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::BoundTable;
use crate::environments::GaussianEnvironment;
use crate::error::{BanditError, Result};
use crate::model::BanditInstance;
use crate::policies::{make_policy, Policy, PolicyId};
use crate::rng::{child_seed, RandomStream};

/// Per-round record of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub chosen: Vec<usize>,
    pub rewards: Vec<f64>,
    pub cumulative_pseudo_regret: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }
}

/// Runs `policy` for `horizon` rounds, calling `on_step(t, policy, arm)`
/// after each round's observation.
pub fn run_episode_with<F>(
    instance: &BanditInstance,
    policy: &mut dyn Policy,
    horizon: u64,
    rng: &mut RandomStream,
    mut on_step: F,
) -> Result<Trajectory>
where
    F: FnMut(u64, &dyn Policy, usize),
{
    if horizon == 0 {
        return Err(BanditError::InvalidExperiment(
            "horizon must be at least 1".into(),
        ));
    }
    let best = instance.best_mean();
    let mut env = GaussianEnvironment::new(instance.clone(), rng.fork());
    let len = horizon as usize;
    let mut trajectory = Trajectory {
        chosen: Vec::with_capacity(len),
        rewards: Vec::with_capacity(len),
        cumulative_pseudo_regret: Vec::with_capacity(len),
    };
    let mut regret = 0.0;
    for t in 1..=horizon {
        let arm = policy.select(t, rng);
        let reward = env.draw_reward(arm)?;
        policy.observe(arm, reward)?;
        regret += best - instance.arms()[arm].mean;
        trajectory.chosen.push(arm);
        trajectory.rewards.push(reward);
        trajectory.cumulative_pseudo_regret.push(regret);
        on_step(t, &*policy, arm);
    }
    Ok(trajectory)
}

/// Runs a fresh `policy_id` policy on `instance` for `horizon` rounds.
pub fn run_episode(
    instance: &BanditInstance,
    policy_id: PolicyId,
    horizon: u64,
    rng: &mut RandomStream,
) -> Result<Trajectory> {
    let mut policy = make_policy(policy_id, instance);
    run_episode_with(instance, policy.as_mut(), horizon, rng, |_, _, _| {})
}

/// Fraction of the first `t` rounds that played an optimal arm.
pub fn optimal_rate(trajectory: &Trajectory, instance: &BanditInstance, t: usize) -> f64 {
    if t == 0 {
        return 0.0;
    }
    let best = instance.best_mean();
    let hits = trajectory.chosen[..t]
        .iter()
        .filter(|&&a| instance.arms()[a].mean == best)
        .count();
    hits as f64 / t as f64
}

/// Checkpoint rounds `stride, 2·stride, …`, ending exactly at `horizon`.
pub fn checkpoints(horizon: u64, stride: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=horizon / stride).map(|k| k * stride).collect();
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

/// Parameters of a Monte Carlo comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub policies: Vec<PolicyId>,
    pub horizon: u64,
    pub replications: usize,
    pub master_seed: u64,
    pub checkpoint_stride: u64,
    /// Worker threads; `None` uses the machine's parallelism. Has no effect
    /// on results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub const DEFAULT_STRIDE: u64 = 100;

    pub fn new(
        policies: Vec<PolicyId>,
        horizon: u64,
        replications: usize,
        master_seed: u64,
    ) -> Self {
        Self {
            policies,
            horizon,
            replications,
            master_seed,
            checkpoint_stride: Self::DEFAULT_STRIDE,
            threads: None,
        }
    }

    fn check(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(BanditError::InvalidExperiment("no policies".into()));
        }
        if self.horizon == 0 {
            return Err(BanditError::InvalidExperiment(
                "horizon must be at least 1".into(),
            ));
        }
        if self.replications == 0 {
            return Err(BanditError::InvalidExperiment(
                "replications must be at least 1".into(),
            ));
        }
        if self.checkpoint_stride == 0 {
            return Err(BanditError::InvalidExperiment(
                "checkpoint stride must be at least 1".into(),
            ));
        }
        if self.threads == Some(0) {
            return Err(BanditError::InvalidExperiment(
                "threads must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Aggregated curves of one policy, one entry per checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCurve {
    pub policy: PolicyId,
    pub mean_regret: Vec<f64>,
    pub regret_stderr: Vec<f64>,
    pub optimal_rate: Vec<f64>,
}

impl PolicyCurve {
    pub fn final_mean_regret(&self) -> f64 {
        *self.mean_regret.last().expect("at least one checkpoint")
    }

    pub fn final_stderr(&self) -> f64 {
        *self.regret_stderr.last().expect("at least one checkpoint")
    }

    pub fn final_optimal_rate(&self) -> f64 {
        *self.optimal_rate.last().expect("at least one checkpoint")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub checkpoints: Vec<u64>,
    pub curves: Vec<PolicyCurve>,
    pub bound_values: BoundTable,
}

impl ExperimentReport {
    pub fn curve(&self, policy: PolicyId) -> Option<&PolicyCurve> {
        self.curves.iter().find(|c| c.policy == policy)
    }
}

/// Checkpoint samples of one replication.
struct ReplicationSummary {
    regret: Vec<f64>,
    optimal_rate: Vec<f64>,
}

fn summarize(
    trajectory: &Trajectory,
    instance: &BanditInstance,
    checkpoints: &[u64],
) -> ReplicationSummary {
    let best = instance.best_mean();
    let mut regret = Vec::with_capacity(checkpoints.len());
    let mut optimal_rate = Vec::with_capacity(checkpoints.len());
    let mut hits = 0usize;
    let mut next = 0;
    for (s, &arm) in trajectory.chosen.iter().enumerate() {
        if instance.arms()[arm].mean == best {
            hits += 1;
        }
        let t = s as u64 + 1;
        if next < checkpoints.len() && checkpoints[next] == t {
            regret.push(trajectory.cumulative_pseudo_regret[s]);
            optimal_rate.push(hits as f64 / t as f64);
            next += 1;
        }
    }
    ReplicationSummary {
        regret,
        optimal_rate,
    }
}

fn run_replication(
    instance: &BanditInstance,
    policy: PolicyId,
    config: &ExperimentConfig,
    checkpoints: &[u64],
    replication: usize,
) -> Result<ReplicationSummary> {
    let mut rng = RandomStream::from_seed(child_seed(
        config.master_seed,
        policy.as_str(),
        replication as u64,
    ));
    let trajectory = run_episode(instance, policy, config.horizon, &mut rng)?;
    Ok(summarize(&trajectory, instance, checkpoints))
}

/// Mean and standard error (sample stddev over `√R`, zero when `R = 1`).
fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn aggregate(policy: PolicyId, reps: &[ReplicationSummary], n_checkpoints: usize) -> PolicyCurve {
    let mut curve = PolicyCurve {
        policy,
        mean_regret: Vec::with_capacity(n_checkpoints),
        regret_stderr: Vec::with_capacity(n_checkpoints),
        optimal_rate: Vec::with_capacity(n_checkpoints),
    };
    for k in 0..n_checkpoints {
        let (mean, stderr) = mean_and_stderr(reps.iter().map(|r| r.regret[k]));
        let rate = reps.iter().map(|r| r.optimal_rate[k]).sum::<f64>() / reps.len() as f64;
        curve.mean_regret.push(mean);
        curve.regret_stderr.push(stderr);
        curve.optimal_rate.push(rate);
    }
    curve
}

/// Runs every policy for `config.replications` seeded episodes and
/// aggregates regret and optimal-selection curves at each checkpoint.
pub fn run_experiment(
    instance: &BanditInstance,
    config: &ExperimentConfig,
) -> Result<ExperimentReport> {
    config.check()?;
    let cps = checkpoints(config.horizon, config.checkpoint_stride);

    let run_all = || -> Result<Vec<PolicyCurve>> {
        config
            .policies
            .iter()
            .map(|&policy| {
                let reps = (0..config.replications)
                    .into_par_iter()
                    .map(|r| run_replication(instance, policy, config, &cps, r))
                    .collect::<Result<Vec<_>>>()?;
                Ok(aggregate(policy, &reps, cps.len()))
            })
            .collect()
    };

    let curves = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| BanditError::InvalidExperiment(e.to_string()))?
            .install(run_all)?,
        None => run_all()?,
    };

    Ok(ExperimentReport {
        config: config.clone(),
        checkpoints: cps,
        curves,
        bound_values: BoundTable::compute(instance, config.horizon),
    })
}
