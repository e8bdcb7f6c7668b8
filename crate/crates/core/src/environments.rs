//! Reward generators and the two benchmark instances: mmWave beam
//! selection over several carrier frequencies, and a clustered portfolio.

use serde::{Deserialize, Serialize};

use crate::error::{BanditError, Result};
use crate::model::{ArmSpec, BanditInstance, ClusterPartition};
use crate::rng::{NormalSource, RandomStream};

/// Draws `μ_i + σ_i·z` for the played arm, `z` from its own stream.
#[derive(Debug, Clone)]
pub struct GaussianEnvironment {
    instance: BanditInstance,
    rng: RandomStream,
}

impl GaussianEnvironment {
    pub fn new(instance: BanditInstance, rng: RandomStream) -> Self {
        Self { instance, rng }
    }

    pub fn instance(&self) -> &BanditInstance {
        &self.instance
    }

    pub fn draw_reward(&mut self, arm: usize) -> Result<f64> {
        let spec = *self.instance.arm(arm)?;
        let z = self.rng.standard_normal();
        Ok(spec.mean + spec.stddev * z)
    }
}

/// Free-space path loss in dB for a carrier in GHz over a distance in km:
/// `20·log10(f) + 20·log10(d) + 92.45`.
pub fn path_loss_db(frequency_ghz: f64, distance_km: f64) -> Result<f64> {
    if !(frequency_ghz > 0.0 && frequency_ghz.is_finite()) {
        return Err(BanditError::InvalidScenario(format!(
            "frequency must be positive, got {frequency_ghz} GHz"
        )));
    }
    if !(distance_km > 0.0 && distance_km.is_finite()) {
        return Err(BanditError::InvalidScenario(format!(
            "distance must be positive, got {distance_km} km"
        )));
    }
    Ok(20.0 * frequency_ghz.log10() + 20.0 * distance_km.log10() + 92.45)
}

/// Received signal power in mW: `10^((P_tx + G − PL)/10)`.
///
/// Receiver noise is not included; the environment adds it per draw.
pub fn rss_mean_mw(tx_power_dbm: f64, gain_db: f64, path_loss_db: f64) -> f64 {
    10f64.powf((tx_power_dbm + gain_db - path_loss_db) / 10.0)
}

/// Link geometry and antenna pattern for the mmWave instance.
///
/// Each frequency becomes one cluster holding `beams_per_frequency` beams,
/// one of which (at `main_lobe_position`, default the middle beam) sees
/// the main-lobe gain while the rest see the side-lobe gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmWaveScenario {
    pub tx_power_dbm: f64,
    pub main_gain_db: f64,
    pub side_gain_db: f64,
    pub distance_km: f64,
    pub frequencies_ghz: Vec<f64>,
    pub beams_per_frequency: usize,
    pub noise_stddev: f64,
    pub main_lobe_position: Option<usize>,
}

impl Default for MmWaveScenario {
    fn default() -> Self {
        Self {
            tx_power_dbm: 60.0,
            main_gain_db: 18.0,
            side_gain_db: 8.0,
            distance_km: 0.01,
            frequencies_ghz: vec![24.25, 43.5, 60.0],
            beams_per_frequency: 3,
            noise_stddev: 1.0,
            main_lobe_position: None,
        }
    }
}

impl MmWaveScenario {
    fn main_position(&self) -> usize {
        self.main_lobe_position
            .unwrap_or(self.beams_per_frequency / 2)
    }
}

/// One cluster per frequency, one main-lobe beam per cluster.
pub fn build_mmwave_instance(scenario: &MmWaveScenario) -> Result<BanditInstance> {
    if scenario.beams_per_frequency == 0 {
        return Err(BanditError::InvalidScenario(
            "beams_per_frequency must be at least 1".into(),
        ));
    }
    if scenario.frequencies_ghz.is_empty() {
        return Err(BanditError::InvalidScenario("no frequencies".into()));
    }
    if scenario.main_position() >= scenario.beams_per_frequency {
        return Err(BanditError::InvalidScenario(format!(
            "main lobe position {} outside {} beams",
            scenario.main_position(),
            scenario.beams_per_frequency
        )));
    }
    if !(scenario.noise_stddev >= 0.0 && scenario.noise_stddev.is_finite()) {
        return Err(BanditError::InvalidScenario(
            "noise stddev must be non-negative".into(),
        ));
    }

    let mut arms =
        Vec::with_capacity(scenario.frequencies_ghz.len() * scenario.beams_per_frequency);
    let mut clusters = Vec::with_capacity(scenario.frequencies_ghz.len());
    for &f in &scenario.frequencies_ghz {
        let pl = path_loss_db(f, scenario.distance_km)?;
        let main = rss_mean_mw(scenario.tx_power_dbm, scenario.main_gain_db, pl);
        let side = rss_mean_mw(scenario.tx_power_dbm, scenario.side_gain_db, pl);
        let start = arms.len();
        for beam in 0..scenario.beams_per_frequency {
            let mean = if beam == scenario.main_position() {
                main
            } else {
                side
            };
            arms.push(ArmSpec::new(mean, scenario.noise_stddev)?);
        }
        clusters.push((start..arms.len()).collect());
    }
    let partition = ClusterPartition::new(clusters, arms.len())?;
    BanditInstance::new(arms, partition)
}

/// Portfolio returns: 20 arms in 4 clusters of 5, unit noise.
pub const PORTFOLIO_MEANS: [[f64; 5]; 4] = [
    [0.060, 0.063, 0.070, 0.067, 0.065],
    [0.036, 0.042, 0.044, 0.040, 0.038],
    [-0.02, 0.00, 0.02, 0.04, 0.06],
    [-0.028, -0.026, -0.022, -0.024, -0.030],
];

pub fn build_portfolio_instance() -> BanditInstance {
    let clusters: Vec<Vec<f64>> = PORTFOLIO_MEANS.iter().map(|c| c.to_vec()).collect();
    BanditInstance::from_cluster_means(&clusters, 1.0).expect("portfolio table is a valid instance")
}

/// Built-in instances addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Mmwave,
    Portfolio,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Mmwave => "mmwave",
            Preset::Portfolio => "portfolio",
        }
    }

    pub fn build(self) -> BanditInstance {
        match self {
            Preset::Mmwave => build_mmwave_instance(&MmWaveScenario::default())
                .expect("default mmWave scenario is valid"),
            Preset::Portfolio => build_portfolio_instance(),
        }
    }

    /// `(horizon, replications)` used when the caller gives none.
    pub fn default_budget(self) -> (u64, usize) {
        match self {
            Preset::Mmwave => (20_000, 100),
            Preset::Portfolio => (30_000, 100),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mmwave" => Ok(Preset::Mmwave),
            "portfolio" => Ok(Preset::Portfolio),
            other => Err(BanditError::InvalidExperiment(format!(
                "unknown preset `{other}` (expected mmwave or portfolio)"
            ))),
        }
    }
}
