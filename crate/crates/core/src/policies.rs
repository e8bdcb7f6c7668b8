//! Online arm-selection policies behind one [`Policy`] interface.
//!
//! Thompson-sampling policies sample from `N(μ̂, 1/(N+1))` beliefs and
//! consume a fixed number of standard-normal variates per decision:
//!
//! | policy  | variates per `select`                 |
//! |---------|---------------------------------------|
//! | `tsg`   | `n` (every arm, index order)          |
//! | `tscg`  | `K + |C(t)|`                          |
//! | `utscg` | `K + |{leader} ∪ neighbors(leader)|`  |
//! | `ucb1`  | 0                                     |
//! | `tlp`   | 0                                     |
//!
//! Clusters are sampled in declaration order, arms in within-cluster
//! order. All argmax operations break ties toward the first candidate.
//!
//! `ucb1` uses the index `μ̂ + √(2 ln t / N)` after one forced pull per
//! arm. `tlp` is a two-level UCB1: clusters are scored from their
//! aggregate `(μ̂_C, N_C)` against the global round, arms inside the chosen
//! cluster against that cluster's own play count.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{BanditError, Result};
use crate::model::{BanditInstance, ClusterPartition, PosteriorState};
use crate::rng::NormalSource;

/// Identifier used on the command line and in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyId {
    Tsg,
    Tscg,
    Utscg,
    Ucb1,
    Tlp,
}

impl PolicyId {
    pub const ALL: [PolicyId; 5] = [
        PolicyId::Tsg,
        PolicyId::Tscg,
        PolicyId::Utscg,
        PolicyId::Ucb1,
        PolicyId::Tlp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyId::Tsg => "tsg",
            PolicyId::Tscg => "tscg",
            PolicyId::Utscg => "utscg",
            PolicyId::Ucb1 => "ucb1",
            PolicyId::Tlp => "tlp",
        }
    }

    /// Parses a comma-separated list such as `tsg,tscg,utscg`.
    pub fn parse_list(s: &str) -> Result<Vec<PolicyId>> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyId {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self> {
        PolicyId::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| BanditError::UnknownPolicy(s.to_string()))
    }
}

/// Uniform interface over all selection rules.
pub trait Policy: Send {
    fn id(&self) -> PolicyId;

    /// Chooses the arm to play in round `round` (1-based).
    fn select(&mut self, round: u64, rng: &mut dyn NormalSource) -> usize;

    /// Feeds back the reward of the arm played this round.
    fn observe(&mut self, arm: usize, reward: f64) -> Result<()>;

    /// Returns to the initial state: every `μ̂ = 0`, every `N = 0`.
    fn reset(&mut self);

    fn arm_states(&self) -> &[PosteriorState];

    /// Cluster-level beliefs, for policies that keep them.
    fn cluster_states(&self) -> Option<&[PosteriorState]> {
        None
    }
}

/// Builds a fresh policy for `instance`.
pub fn make_policy(id: PolicyId, instance: &BanditInstance) -> Box<dyn Policy> {
    let partition = instance.partition().clone();
    match id {
        PolicyId::Tsg => Box::new(Tsg::new(instance.num_arms())),
        PolicyId::Tscg => Box::new(Tscg::new(partition)),
        PolicyId::Utscg => Box::new(Utscg::new(partition)),
        PolicyId::Ucb1 => Box::new(Ucb1::new(instance.num_arms())),
        PolicyId::Tlp => Box::new(Tlp::new(partition)),
    }
}

/// Samples every candidate once, in iteration order, and returns the
/// candidate with the largest draw (first one on ties).
#[inline]
fn thompson_argmax<I>(candidates: I, states: &[PosteriorState], rng: &mut dyn NormalSource) -> usize
where
    I: IntoIterator<Item = usize>,
{
    let mut best = usize::MAX;
    let mut best_draw = f64::NEG_INFINITY;
    for i in candidates {
        let draw = states[i].sample(rng);
        if best == usize::MAX || draw > best_draw {
            best = i;
            best_draw = draw;
        }
    }
    best
}

fn check_arm(arm: usize, arms: usize) -> Result<()> {
    if arm >= arms {
        return Err(BanditError::UnknownArm { index: arm, arms });
    }
    Ok(())
}

/// Thompson sampling with a Gaussian prior over every arm.
#[derive(Debug, Clone)]
pub struct Tsg {
    arms: Vec<PosteriorState>,
}

impl Tsg {
    pub fn new(num_arms: usize) -> Self {
        Self {
            arms: vec![PosteriorState::new(); num_arms],
        }
    }

    pub fn from_states(arms: Vec<PosteriorState>) -> Self {
        Self { arms }
    }
}

impl Policy for Tsg {
    fn id(&self) -> PolicyId {
        PolicyId::Tsg
    }

    fn select(&mut self, _round: u64, rng: &mut dyn NormalSource) -> usize {
        thompson_argmax(0..self.arms.len(), &self.arms, rng)
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        check_arm(arm, self.arms.len())?;
        self.arms[arm].update(reward)
    }

    fn reset(&mut self) {
        self.arms.fill(PosteriorState::new());
    }

    fn arm_states(&self) -> &[PosteriorState] {
        &self.arms
    }
}

/// Arm and cluster beliefs shared by the clustered policies.
#[derive(Debug, Clone)]
pub struct ClusteredBeliefs {
    partition: ClusterPartition,
    arms: Vec<PosteriorState>,
    clusters: Vec<PosteriorState>,
}

impl ClusteredBeliefs {
    pub fn new(partition: ClusterPartition) -> Self {
        Self {
            arms: vec![PosteriorState::new(); partition.num_arms()],
            clusters: vec![PosteriorState::new(); partition.num_clusters()],
            partition,
        }
    }

    /// Overrides the stored beliefs. Lengths must match the partition.
    pub fn with_states(
        partition: ClusterPartition,
        arms: Vec<PosteriorState>,
        clusters: Vec<PosteriorState>,
    ) -> Result<Self> {
        if arms.len() != partition.num_arms() || clusters.len() != partition.num_clusters() {
            return Err(BanditError::InvalidInstance(
                "belief vectors do not match the partition".into(),
            ));
        }
        Ok(Self {
            partition,
            arms,
            clusters,
        })
    }

    pub fn partition(&self) -> &ClusterPartition {
        &self.partition
    }

    /// One draw per cluster, declaration order.
    fn sample_cluster(&self, rng: &mut dyn NormalSource) -> usize {
        thompson_argmax(0..self.clusters.len(), &self.clusters, rng)
    }

    /// The played arm and the cluster it belongs to both absorb the reward.
    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        check_arm(arm, self.arms.len())?;
        if !reward.is_finite() {
            return Err(BanditError::NonFiniteReward(reward));
        }
        let c = self.partition.cluster_of(arm)?;
        self.arms[arm].update(reward)?;
        self.clusters[c].update(reward)
    }

    fn reset(&mut self) {
        self.arms.fill(PosteriorState::new());
        self.clusters.fill(PosteriorState::new());
    }
}

/// What a clustered policy decided in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusteredChoice {
    pub cluster: usize,
    /// Empirical leader of the chosen cluster (UTSCG only).
    pub leader: Option<usize>,
    pub arm: usize,
}

/// Two-stage Thompson sampling: pick a cluster, then an arm inside it.
#[derive(Debug, Clone)]
pub struct Tscg {
    beliefs: ClusteredBeliefs,
}

impl Tscg {
    pub fn new(partition: ClusterPartition) -> Self {
        Self {
            beliefs: ClusteredBeliefs::new(partition),
        }
    }

    pub fn from_beliefs(beliefs: ClusteredBeliefs) -> Self {
        Self { beliefs }
    }

    pub fn choose(&self, rng: &mut dyn NormalSource) -> ClusteredChoice {
        let b = &self.beliefs;
        let cluster = b.sample_cluster(rng);
        let arm = thompson_argmax(b.partition.cluster(cluster).iter().copied(), &b.arms, rng);
        ClusteredChoice {
            cluster,
            leader: None,
            arm,
        }
    }
}

impl Policy for Tscg {
    fn id(&self) -> PolicyId {
        PolicyId::Tscg
    }

    fn select(&mut self, _round: u64, rng: &mut dyn NormalSource) -> usize {
        self.choose(rng).arm
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.beliefs.observe(arm, reward)
    }

    fn reset(&mut self) {
        self.beliefs.reset();
    }

    fn arm_states(&self) -> &[PosteriorState] {
        &self.beliefs.arms
    }

    fn cluster_states(&self) -> Option<&[PosteriorState]> {
        Some(&self.beliefs.clusters)
    }
}

/// Clustered Thompson sampling restricted to the empirical leader of the
/// chosen cluster and its within-cluster neighbors.
#[derive(Debug, Clone)]
pub struct Utscg {
    beliefs: ClusteredBeliefs,
}

impl Utscg {
    pub fn new(partition: ClusterPartition) -> Self {
        Self {
            beliefs: ClusteredBeliefs::new(partition),
        }
    }

    pub fn from_beliefs(beliefs: ClusteredBeliefs) -> Self {
        Self { beliefs }
    }

    /// Arm with the highest empirical mean in `cluster`, never-played arms
    /// included at `μ̂ = 0`. Returns its position within the cluster.
    fn leader_position(&self, cluster: usize) -> usize {
        let members = self.beliefs.partition.cluster(cluster);
        let mut best = 0;
        for (pos, &arm) in members.iter().enumerate().skip(1) {
            if self.beliefs.arms[arm].empirical_mean
                > self.beliefs.arms[members[best]].empirical_mean
            {
                best = pos;
            }
        }
        best
    }

    pub fn choose(&self, rng: &mut dyn NormalSource) -> ClusteredChoice {
        let b = &self.beliefs;
        let cluster = b.sample_cluster(rng);
        let members = b.partition.cluster(cluster);
        let pos = self.leader_position(cluster);
        // {leader} ∪ neighbors(leader), within-cluster order.
        let lo = pos.saturating_sub(1);
        let hi = (pos + 1).min(members.len() - 1);
        let arm = thompson_argmax(members[lo..=hi].iter().copied(), &b.arms, rng);
        ClusteredChoice {
            cluster,
            leader: Some(members[pos]),
            arm,
        }
    }
}

impl Policy for Utscg {
    fn id(&self) -> PolicyId {
        PolicyId::Utscg
    }

    fn select(&mut self, _round: u64, rng: &mut dyn NormalSource) -> usize {
        self.choose(rng).arm
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.beliefs.observe(arm, reward)
    }

    fn reset(&mut self) {
        self.beliefs.reset();
    }

    fn arm_states(&self) -> &[PosteriorState] {
        &self.beliefs.arms
    }

    fn cluster_states(&self) -> Option<&[PosteriorState]> {
        Some(&self.beliefs.clusters)
    }
}

/// UCB1 over the given candidates at round `t`: first unplayed candidate
/// if any, else argmax of `μ̂ + √(2 ln t / N)`.
pub fn ucb1_choose<I>(candidates: I, states: &[PosteriorState], t: u64) -> usize
where
    I: IntoIterator<Item = usize>,
{
    let log_t = (t.max(1) as f64).ln();
    let mut best = usize::MAX;
    let mut best_index = f64::NEG_INFINITY;
    for i in candidates {
        let s = &states[i];
        if s.pull_count == 0 {
            return i;
        }
        let index = s.empirical_mean + (2.0 * log_t / s.pull_count as f64).sqrt();
        if best == usize::MAX || index > best_index {
            best = i;
            best_index = index;
        }
    }
    best
}

/// UCB1 over the arms' `(μ̂, N)` at round `t`.
pub fn ucb1_select(states: &[PosteriorState], t: u64) -> usize {
    ucb1_choose(0..states.len(), states, t)
}

#[derive(Debug, Clone)]
pub struct Ucb1 {
    arms: Vec<PosteriorState>,
}

impl Ucb1 {
    pub fn new(num_arms: usize) -> Self {
        Self {
            arms: vec![PosteriorState::new(); num_arms],
        }
    }
}

impl Policy for Ucb1 {
    fn id(&self) -> PolicyId {
        PolicyId::Ucb1
    }

    fn select(&mut self, round: u64, _rng: &mut dyn NormalSource) -> usize {
        ucb1_select(&self.arms, round)
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        check_arm(arm, self.arms.len())?;
        self.arms[arm].update(reward)
    }

    fn reset(&mut self) {
        self.arms.fill(PosteriorState::new());
    }

    fn arm_states(&self) -> &[PosteriorState] {
        &self.arms
    }
}

/// Two-level policy: UCB1 over cluster aggregates, then UCB1 inside the
/// chosen cluster.
#[derive(Debug, Clone)]
pub struct Tlp {
    beliefs: ClusteredBeliefs,
}

impl Tlp {
    pub fn new(partition: ClusterPartition) -> Self {
        Self {
            beliefs: ClusteredBeliefs::new(partition),
        }
    }

    pub fn from_beliefs(beliefs: ClusteredBeliefs) -> Self {
        Self { beliefs }
    }

    pub fn choose(&self, round: u64) -> ClusteredChoice {
        let b = &self.beliefs;
        let cluster = ucb1_select(&b.clusters, round);
        let inner_round = b.clusters[cluster].pull_count + 1;
        let arm = ucb1_choose(
            b.partition.cluster(cluster).iter().copied(),
            &b.arms,
            inner_round,
        );
        ClusteredChoice {
            cluster,
            leader: None,
            arm,
        }
    }
}

impl Policy for Tlp {
    fn id(&self) -> PolicyId {
        PolicyId::Tlp
    }

    fn select(&mut self, round: u64, _rng: &mut dyn NormalSource) -> usize {
        self.choose(round).arm
    }

    fn observe(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.beliefs.observe(arm, reward)
    }

    fn reset(&mut self) {
        self.beliefs.reset();
    }

    fn arm_states(&self) -> &[PosteriorState] {
        &self.beliefs.arms
    }

    fn cluster_states(&self) -> Option<&[PosteriorState]> {
        Some(&self.beliefs.clusters)
    }
}
