//! Multi-agent multi-armed bandits for coordinated spatial reuse in
//! overlapping Wi-Fi BSSs.
//!
//! Each AP is an agent choosing a (transmit power, packet-detect threshold)
//! pair every iteration. Agents learn with ε-greedy or Gaussian Thompson
//! sampling from either their own normalized throughput or a reward shared
//! across all APs (average, max-min or proportional fairness). Two
//! environments are provided: a matrix game for studying the learning
//! dynamics, and a slotted CSMA/CA simulator with OBSS/PD.
//!
//! ```
//! use cmab_core::harness::{run_experiment, EnvKind, ExperimentConfig, StrategyKind};
//! use cmab_core::coordination::RewardKind;
//!
//! let cfg = ExperimentConfig {
//!     environment: EnvKind::Matrix,
//!     strategy: StrategyKind::EGreedy,
//!     reward: RewardKind::Avg,
//!     sim_time_s: 50.0,
//!     ..ExperimentConfig::default()
//! };
//! let (_traces, summary) = run_experiment(&cfg).unwrap();
//! assert_eq!(summary.iterations, 100);
//! ```

pub mod bandit;
pub mod coordination;
pub mod environment;
pub mod error;
pub mod harness;
pub mod obss_sim;
pub mod radio;
pub mod rng;
pub mod scenario;

pub use bandit::{Agent, AgentState, EpsSchedule, ExploitStatistic, Policy};
pub use coordination::{RewardKind, RewardStrategy};
pub use environment::{EnvStep, Environment, MatrixGameEnv, ObssSimEnv, PayoffMatrix};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, RunSummary};
pub use obss_sim::IterationMetrics;
pub use radio::McsTable;
pub use scenario::{Action, ActionSpace, Bss, Deployment, GridSpec, MacParams, Position, RadioParams, Scenario};
