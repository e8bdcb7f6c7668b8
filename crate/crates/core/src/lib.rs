//! Thompson sampling for Gaussian bandits whose arms are grouped into
//! fixed clusters.
//!
//! The crate provides
//!
//! * [`model`]: instances, `N(μ̂, 1/(N+1))` beliefs, gap quantities and the
//!   strong-dominance / unimodality validators;
//! * [`policies`]: TSG, TSCG and UTSCG plus UCB1 and two-level UCB
//!   baselines behind the [`Policy`] trait;
//! * [`environments`]: Gaussian reward generation and the mmWave and
//!   portfolio benchmark instances;
//! * [`simulation`] and [`bounds`]: seeded Monte Carlo runs, regret and
//!   optimal-selection curves, and regret-bound leading terms;
//! * [`report`]: CSV and JSON output.

pub mod bounds;
pub mod environments;
pub mod error;
pub mod model;
pub mod policies;
pub mod report;
pub mod rng;
pub mod simulation;

pub use bounds::{BoundTable, BoundValue, NotApplicable};
pub use environments::{
    build_mmwave_instance, build_portfolio_instance, GaussianEnvironment, MmWaveScenario, Preset,
};
pub use error::{BanditError, Result};
pub use model::{
    ArmSpec, BanditInstance, ClusterPartition, GapSummary, InstanceFormat, PosteriorState,
};
pub use policies::{make_policy, Policy, PolicyId};
pub use report::ReportFormat;
pub use rng::{NormalSource, RandomStream};
pub use simulation::{run_episode, run_experiment, ExperimentConfig, ExperimentReport, Trajectory};
