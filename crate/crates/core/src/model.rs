//! Problem instances, Gaussian posteriors and the structural quantities
//! (gaps, strong dominance, unimodality, neighborhoods) shared by the
//! policies and the experiment runner.

use serde::{Deserialize, Serialize};

use crate::error::{BanditError, Result};
use crate::rng::NormalSource;

/// One arm: rewards are drawn from `N(mean, stddev²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec {
    pub mean: f64,
    pub stddev: f64,
}

impl ArmSpec {
    pub fn new(mean: f64, stddev: f64) -> Result<Self> {
        let arm = Self { mean, stddev };
        arm.check()?;
        Ok(arm)
    }

    fn check(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(BanditError::InvalidInstance(format!(
                "arm mean must be finite, got {}",
                self.mean
            )));
        }
        if !(self.stddev.is_finite() && self.stddev >= 0.0) {
            return Err(BanditError::InvalidInstance(format!(
                "arm stddev must be finite and non-negative, got {}",
                self.stddev
            )));
        }
        Ok(())
    }
}

/// A fixed partition of the arm indices into ordered clusters.
///
/// Within-cluster order is significant: it is the axis along which
/// unimodality is checked and neighbors are defined.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPartition {
    clusters: Vec<Vec<usize>>,
    cluster_of: Vec<usize>,
    position: Vec<usize>,
}

impl ClusterPartition {
    /// Builds a partition of `0..n_arms`. Every index must appear exactly
    /// once and no cluster may be empty.
    pub fn new(clusters: Vec<Vec<usize>>, n_arms: usize) -> Result<Self> {
        if clusters.is_empty() {
            return Err(BanditError::InvalidInstance("no clusters".into()));
        }
        let mut cluster_of = vec![usize::MAX; n_arms];
        let mut position = vec![usize::MAX; n_arms];
        for (c, members) in clusters.iter().enumerate() {
            if members.is_empty() {
                return Err(BanditError::InvalidInstance(format!(
                    "cluster {c} is empty"
                )));
            }
            for (pos, &arm) in members.iter().enumerate() {
                if arm >= n_arms {
                    return Err(BanditError::InvalidInstance(format!(
                        "cluster {c} references arm {arm}, but there are only {n_arms} arms"
                    )));
                }
                if cluster_of[arm] != usize::MAX {
                    return Err(BanditError::InvalidInstance(format!(
                        "arm {arm} appears in more than one cluster slot"
                    )));
                }
                cluster_of[arm] = c;
                position[arm] = pos;
            }
        }
        if let Some(missing) = cluster_of.iter().position(|&c| c == usize::MAX) {
            return Err(BanditError::InvalidInstance(format!(
                "arm {missing} is not assigned to any cluster"
            )));
        }
        Ok(Self {
            clusters,
            cluster_of,
            position,
        })
    }

    /// Every arm in its own cluster.
    pub fn singletons(n_arms: usize) -> Result<Self> {
        Self::new((0..n_arms).map(|i| vec![i]).collect(), n_arms)
    }

    /// All arms in one cluster, in index order.
    pub fn single_cluster(n_arms: usize) -> Result<Self> {
        Self::new(vec![(0..n_arms).collect()], n_arms)
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster(&self, c: usize) -> &[usize] {
        &self.clusters[c]
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn num_arms(&self) -> usize {
        self.cluster_of.len()
    }

    /// Cluster containing `arm`.
    pub fn cluster_of(&self, arm: usize) -> Result<usize> {
        self.cluster_of
            .get(arm)
            .copied()
            .ok_or(BanditError::UnknownArm {
                index: arm,
                arms: self.num_arms(),
            })
    }

    /// Arms adjacent to `arm` in its cluster's order, in that order.
    ///
    /// Interior arms have two neighbors, boundary arms one, and an arm in a
    /// singleton cluster none. Adjacency never crosses clusters.
    pub fn neighbors(&self, arm: usize) -> Result<Vec<usize>> {
        let c = self.cluster_of(arm)?;
        let members = &self.clusters[c];
        let pos = self.position[arm];
        let mut out = Vec::with_capacity(2);
        if pos > 0 {
            out.push(members[pos - 1]);
        }
        if pos + 1 < members.len() {
            out.push(members[pos + 1]);
        }
        Ok(out)
    }
}

/// A complete bandit problem: arm distributions plus cluster structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct BanditInstance {
    arms: Vec<ArmSpec>,
    partition: ClusterPartition,
}

/// On-disk layout of an instance: `arms = [{mean, stddev}]`,
/// `clusters = [[indices]]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceFile {
    clusters: Vec<Vec<usize>>,
    arms: Vec<ArmSpec>,
}

impl TryFrom<InstanceFile> for BanditInstance {
    type Error = BanditError;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let partition = ClusterPartition::new(file.clusters, file.arms.len())?;
        BanditInstance::new(file.arms, partition)
    }
}

impl From<BanditInstance> for InstanceFile {
    fn from(instance: BanditInstance) -> Self {
        InstanceFile {
            clusters: instance.partition.clusters,
            arms: instance.arms,
        }
    }
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmSpec>, partition: ClusterPartition) -> Result<Self> {
        if arms.is_empty() {
            return Err(BanditError::InvalidInstance("no arms".into()));
        }
        for arm in &arms {
            arm.check()?;
        }
        if partition.num_arms() != arms.len() {
            return Err(BanditError::InvalidInstance(format!(
                "partition covers {} arms but instance has {}",
                partition.num_arms(),
                arms.len()
            )));
        }
        Ok(Self { arms, partition })
    }

    /// Convenience constructor from per-cluster mean lists with a shared
    /// stddev. Arms are numbered cluster by cluster in the given order.
    pub fn from_cluster_means(cluster_means: &[Vec<f64>], stddev: f64) -> Result<Self> {
        let mut arms = Vec::new();
        let mut clusters = Vec::with_capacity(cluster_means.len());
        for means in cluster_means {
            let start = arms.len();
            for &mean in means {
                arms.push(ArmSpec::new(mean, stddev)?);
            }
            clusters.push((start..arms.len()).collect());
        }
        let partition = ClusterPartition::new(clusters, arms.len())?;
        Self::new(arms, partition)
    }

    pub fn arms(&self) -> &[ArmSpec] {
        &self.arms
    }

    pub fn arm(&self, i: usize) -> Result<&ArmSpec> {
        self.arms.get(i).ok_or(BanditError::UnknownArm {
            index: i,
            arms: self.arms.len(),
        })
    }

    pub fn partition(&self) -> &ClusterPartition {
        &self.partition
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.mean).collect()
    }

    /// `μ* = max_i μ_i`.
    pub fn best_mean(&self) -> f64 {
        self.arms
            .iter()
            .map(|a| a.mean)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest index attaining the best mean.
    pub fn optimal_arm(&self) -> usize {
        let best = self.best_mean();
        self.arms.iter().position(|a| a.mean == best).unwrap_or(0)
    }

    /// True iff exactly one arm attains the maximum mean.
    pub fn validate_unique_optimum(&self) -> bool {
        let best = self.best_mean();
        self.arms.iter().filter(|a| a.mean == best).count() == 1
    }

    /// Per-cluster unimodality verdicts.
    pub fn validate_unimodality(&self) -> Vec<bool> {
        self.partition
            .clusters()
            .iter()
            .map(|members| {
                let means: Vec<f64> = members.iter().map(|&i| self.arms[i].mean).collect();
                is_unimodal(&means)
            })
            .collect()
    }

    /// Strong dominance: every arm of the optimal cluster beats every arm
    /// of every other cluster (`d_C > 0` for all `C ≠ C*`).
    pub fn validate_strong_dominance(&self, gaps: &GapSummary) -> bool {
        gaps.per_cluster_distance
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != gaps.optimal_cluster)
            .all(|(_, d)| d.is_some_and(|d| d > 0.0))
    }

    /// Gap quantities of the instance. Fails when the optimum is tied.
    pub fn compute_gaps(&self) -> Result<GapSummary> {
        if !self.validate_unique_optimum() {
            return Err(BanditError::AmbiguousOptimum);
        }
        let best = self.best_mean();
        let optimal_arm = self.optimal_arm();
        let optimal_cluster = self.partition.cluster_of(optimal_arm)?;

        let per_arm_gap: Vec<f64> = self.arms.iter().map(|a| best - a.mean).collect();
        let d_max = per_arm_gap.iter().map(|d| d * d).fold(0.0, f64::max);

        let cluster_means = |c: usize| self.partition.cluster(c).iter().map(|&i| self.arms[i].mean);
        let upper: Vec<f64> = (0..self.partition.num_clusters())
            .map(|c| cluster_means(c).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let lower: Vec<f64> = (0..self.partition.num_clusters())
            .map(|c| cluster_means(c).fold(f64::INFINITY, f64::min))
            .collect();

        let mut per_cluster_gap = Vec::with_capacity(upper.len());
        let mut per_cluster_prime_gap = Vec::with_capacity(upper.len());
        let mut per_cluster_distance = Vec::with_capacity(upper.len());
        let mut per_cluster_width = Vec::with_capacity(upper.len());
        for c in 0..upper.len() {
            per_cluster_gap.push(best - lower[c]);
            per_cluster_width.push(upper[c] - lower[c]);
            if c == optimal_cluster {
                per_cluster_prime_gap.push(None);
                per_cluster_distance.push(None);
                continue;
            }
            per_cluster_prime_gap.push(Some(lower[optimal_cluster] - upper[c]));
            // Pairwise minimum over C* × C, taken literally.
            let mut distance = f64::INFINITY;
            for &i in self.partition.cluster(optimal_cluster) {
                for &j in self.partition.cluster(c) {
                    distance = distance.min(self.arms[i].mean - self.arms[j].mean);
                }
            }
            per_cluster_distance.push(Some(distance));
        }

        Ok(GapSummary {
            per_arm_gap,
            per_cluster_gap,
            per_cluster_prime_gap,
            per_cluster_distance,
            per_cluster_width,
            d_max,
            optimal_cluster,
            optimal_arm,
        })
    }

    /// Parses an instance document. `json` selects JSON, otherwise TOML.
    pub fn from_str_with_format(text: &str, format: InstanceFormat) -> Result<Self> {
        match format {
            InstanceFormat::Json => {
                serde_json::from_str(text).map_err(|e| BanditError::Parse(e.to_string()))
            }
            InstanceFormat::Toml => {
                toml::from_str(text).map_err(|e| BanditError::Parse(e.to_string()))
            }
        }
    }

    pub fn to_string_with_format(&self, format: InstanceFormat) -> Result<String> {
        match format {
            InstanceFormat::Json => Ok(serde_json::to_string_pretty(self)?),
            InstanceFormat::Toml => {
                toml::to_string(self).map_err(|e| BanditError::Parse(e.to_string()))
            }
        }
    }

    /// Loads an instance file; `.json` files are JSON, anything else TOML.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_with_format(&text, InstanceFormat::from_path(path))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = self.to_string_with_format(InstanceFormat::from_path(path))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Serialization format of an instance file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Toml,
    Json,
}

impl InstanceFormat {
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Toml,
        }
    }
}

/// Strictly increasing up to a single peak, then strictly decreasing.
/// Monotone sequences and singletons qualify; any plateau does not.
pub fn is_unimodal(means: &[f64]) -> bool {
    let mut i = 1;
    while i < means.len() && means[i] > means[i - 1] {
        i += 1;
    }
    while i < means.len() && means[i] < means[i - 1] {
        i += 1;
    }
    i >= means.len()
}

/// Gap quantities driving the regret bounds.
///
/// Cluster-indexed vectors follow the partition's cluster order. The
/// prime gap and distance are undefined for the optimal cluster and are
/// stored as `None` there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    /// `Δ_i = μ* − μ_i`.
    pub per_arm_gap: Vec<f64>,
    /// `Δ_C = μ* − min_{i∈C} μ_i`.
    pub per_cluster_gap: Vec<f64>,
    /// `Δ'_C = min_{i∈C*} μ_i − max_{j∈C} μ_j`.
    pub per_cluster_prime_gap: Vec<Option<f64>>,
    /// `d_C = min_{i∈C*, j∈C} (μ_i − μ_j)`.
    pub per_cluster_distance: Vec<Option<f64>>,
    /// `w_C = max_{i∈C} μ_i − min_{i∈C} μ_i`.
    pub per_cluster_width: Vec<f64>,
    /// `max_i Δ_i²`.
    pub d_max: f64,
    pub optimal_cluster: usize,
    pub optimal_arm: usize,
}

impl GapSummary {
    /// Smallest strictly positive arm gap, if any arm is suboptimal.
    pub fn min_positive_gap(&self) -> Option<f64> {
        self.per_arm_gap
            .iter()
            .copied()
            .filter(|&d| d > 0.0)
            .reduce(f64::min)
    }
}

/// Gaussian belief `N(μ̂, 1/(N+1))` over one arm's (or cluster's) mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PosteriorState {
    pub empirical_mean: f64,
    pub pull_count: u64,
}

impl PosteriorState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Folds one reward into the running average: `(μ̂·N + x) / (N + 1)`.
    pub fn update(&mut self, reward: f64) -> Result<()> {
        if !reward.is_finite() {
            return Err(BanditError::NonFiniteReward(reward));
        }
        let n = self.pull_count as f64;
        self.empirical_mean = (self.empirical_mean * n + reward) / (n + 1.0);
        self.pull_count += 1;
        Ok(())
    }

    /// Variance of the sampling distribution, `1/(N+1)`.
    pub fn sampling_variance(&self) -> f64 {
        1.0 / (self.pull_count as f64 + 1.0)
    }

    pub fn sampling_stddev(&self) -> f64 {
        self.sampling_variance().sqrt()
    }

    /// Draws `μ̂ + z/√(N+1)` using exactly one standard-normal variate.
    #[inline]
    pub fn sample(&self, rng: &mut dyn NormalSource) -> f64 {
        self.empirical_mean + rng.standard_normal() * self.sampling_stddev()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    fn portfolio() -> BanditInstance {
        crate::environments::build_portfolio_instance()
    }

    #[test]
    fn first_observation_becomes_mean() {
        let mut s = PosteriorState::new();
        s.update(0.5).unwrap();
        assert_eq!(
            s,
            PosteriorState {
                empirical_mean: 0.5,
                pull_count: 1
            }
        );
    }

    #[test]
    fn update_from_nonzero_state() {
        let mut s = PosteriorState {
            empirical_mean: 1.0,
            pull_count: 3,
        };
        s.update(0.0).unwrap();
        assert_eq!(s.pull_count, 4);
        assert!((s.empirical_mean - 0.75).abs() < 1e-15);
    }

    #[test]
    fn sequence_matches_batch_average() {
        let rewards = [0.2, 0.4, 0.6];
        let mut s = PosteriorState::new();
        for r in rewards {
            s.update(r).unwrap();
        }
        let batch: f64 = rewards.iter().sum::<f64>() / rewards.len() as f64;
        assert_eq!(s.pull_count, 3);
        assert!((s.empirical_mean - batch).abs() < 1e-12);
        assert!((s.empirical_mean - 0.4).abs() < 1e-12);
    }

    #[test]
    fn non_finite_reward_rejected() {
        let mut s = PosteriorState::new();
        assert!(matches!(
            s.update(f64::NAN),
            Err(BanditError::NonFiniteReward(_))
        ));
        assert!(s.update(f64::INFINITY).is_err());
        assert_eq!(s, PosteriorState::new());
    }

    #[test]
    fn sampling_stddev_follows_count() {
        assert_eq!(PosteriorState::new().sampling_stddev(), 1.0);
        let s = PosteriorState {
            empirical_mean: 0.0,
            pull_count: 3,
        };
        assert_eq!(s.sampling_stddev(), 0.5);
    }

    #[test]
    fn sample_mean_and_variance() {
        let s = PosteriorState {
            empirical_mean: 0.7,
            pull_count: 99,
        };
        let mut rng = RandomStream::from_seed(11);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        assert!((mean - 0.7).abs() <= 4.0 * 0.1 / (n as f64).sqrt());
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((var / 0.01 - 1.0).abs() <= 0.1, "variance {var}");
    }

    #[test]
    fn portfolio_gaps() {
        let inst = portfolio();
        let gaps = inst.compute_gaps().unwrap();
        assert_eq!(gaps.optimal_arm, 2);
        assert_eq!(inst.arms()[gaps.optimal_arm].mean, 0.070);
        assert_eq!(gaps.optimal_cluster, 0);
        // arm 20 (mean -0.030)
        assert!((gaps.per_arm_gap[19] - 0.100).abs() < 1e-12);
        assert!((gaps.per_cluster_prime_gap[1].unwrap() - 0.016).abs() < 1e-12);
        assert_eq!(gaps.per_arm_gap[2], 0.0);
        // d_C3 = 0.060 − 0.06
        assert_eq!(gaps.per_cluster_distance[2], Some(0.0));
        assert!((gaps.d_max - 0.01).abs() < 1e-12);
    }

    #[test]
    fn symmetric_gaps_when_one_arm_stands_out() {
        let inst = BanditInstance::from_cluster_means(&[vec![0.3, 0.3], vec![0.9, 0.3, 0.3]], 1.0)
            .unwrap();
        let gaps = inst.compute_gaps().unwrap();
        assert_eq!(gaps.optimal_arm, 2);
        for (i, &d) in gaps.per_arm_gap.iter().enumerate() {
            if i == 2 {
                assert_eq!(d, 0.0);
            } else {
                assert_eq!(d, gaps.per_arm_gap[0]);
            }
        }
    }

    #[test]
    fn tied_optimum_is_rejected() {
        let inst = BanditInstance::from_cluster_means(&[vec![0.1, 0.2, 0.2]], 1.0).unwrap();
        assert!(!inst.validate_unique_optimum());
        assert!(matches!(
            inst.compute_gaps(),
            Err(BanditError::AmbiguousOptimum)
        ));
    }

    #[test]
    fn unique_optimum_cases() {
        assert!(portfolio().validate_unique_optimum());
        let single = BanditInstance::from_cluster_means(&[vec![0.5]], 1.0).unwrap();
        assert!(single.validate_unique_optimum());
    }

    #[test]
    fn strong_dominance_cases() {
        let inst = portfolio();
        let gaps = inst.compute_gaps().unwrap();
        assert!(!inst.validate_strong_dominance(&gaps));

        let one = BanditInstance::from_cluster_means(&[vec![0.1, 0.5, 0.2]], 1.0).unwrap();
        assert!(one.validate_strong_dominance(&one.compute_gaps().unwrap()));

        let sd =
            BanditInstance::from_cluster_means(&[vec![0.9, 0.8], vec![0.3, 0.2]], 1.0).unwrap();
        assert!(sd.validate_strong_dominance(&sd.compute_gaps().unwrap()));
    }

    #[test]
    fn unimodality_examples() {
        assert!(is_unimodal(&[0.060, 0.063, 0.070, 0.067, 0.065]));
        assert!(is_unimodal(&[-0.02, 0.00, 0.02, 0.04, 0.06]));
        assert!(is_unimodal(&[0.5, 0.4, 0.1]));
        assert!(is_unimodal(&[1.0]));
        assert!(is_unimodal(&[]));
        assert!(!is_unimodal(&[0.1, 0.0, 0.1]));
        assert!(!is_unimodal(&[0.1, 0.1]));
        assert!(!is_unimodal(&[0.2, 0.1, 0.1]));
        assert_eq!(portfolio().validate_unimodality(), vec![true; 4]);
    }

    #[test]
    fn neighbor_examples() {
        let p = ClusterPartition::new(
            vec![vec![0, 1, 2, 3, 4, 5], vec![6, 7, 8, 9, 10], vec![11]],
            12,
        )
        .unwrap();
        assert_eq!(p.neighbors(8).unwrap(), vec![7, 9]);
        assert_eq!(p.neighbors(6).unwrap(), vec![7]);
        assert_eq!(p.neighbors(10).unwrap(), vec![9]);
        assert!(p.neighbors(11).unwrap().is_empty());
        assert!(matches!(
            p.neighbors(12),
            Err(BanditError::UnknownArm { .. })
        ));
    }

    #[test]
    fn neighbors_follow_declared_order() {
        let p = ClusterPartition::new(vec![vec![2, 0, 1]], 3).unwrap();
        assert_eq!(p.neighbors(0).unwrap(), vec![2, 1]);
        assert_eq!(p.neighbors(2).unwrap(), vec![0]);
    }

    #[test]
    fn partition_rejects_bad_layouts() {
        assert!(ClusterPartition::new(vec![vec![0, 1], vec![]], 2).is_err());
        assert!(ClusterPartition::new(vec![vec![0, 1], vec![1]], 2).is_err());
        assert!(ClusterPartition::new(vec![vec![0]], 2).is_err());
        assert!(ClusterPartition::new(vec![vec![0, 2]], 2).is_err());
        assert!(ClusterPartition::new(vec![], 0).is_err());
    }

    #[test]
    fn arm_spec_validation() {
        assert!(ArmSpec::new(0.1, -1.0).is_err());
        assert!(ArmSpec::new(f64::NAN, 1.0).is_err());
        assert!(ArmSpec::new(0.1, 0.0).is_ok());
    }

    #[test]
    fn instance_file_toml_and_json() {
        let toml_text = r#"
clusters = [[1, 0], [2]]

[[arms]]
mean = 0.5
stddev = 1.0

[[arms]]
mean = 0.25
stddev = 0.5

[[arms]]
mean = -0.1
stddev = 0.0
"#;
        let inst = BanditInstance::from_str_with_format(toml_text, InstanceFormat::Toml).unwrap();
        assert_eq!(inst.partition().cluster(0), &[1, 0]);
        assert_eq!(
            inst.arms()[1],
            ArmSpec {
                mean: 0.25,
                stddev: 0.5
            }
        );

        let json = inst.to_string_with_format(InstanceFormat::Json).unwrap();
        let back = BanditInstance::from_str_with_format(&json, InstanceFormat::Json).unwrap();
        assert_eq!(back, inst);

        let bad = r#"{"arms": [{"mean": 0.1, "stddev": 1.0}], "clusters": [[0, 1]]}"#;
        assert!(matches!(
            BanditInstance::from_str_with_format(bad, InstanceFormat::Json),
            Err(BanditError::Parse(_))
        ));
        assert!(BanditInstance::from_str_with_format("arms = 3", InstanceFormat::Toml).is_err());
    }
}
