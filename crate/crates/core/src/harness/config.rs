use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bandit::{EpsSchedule, ExploitStatistic, Policy};
use crate::coordination::{RewardKind, RewardStrategy, DEFAULT_PF_FLOOR};
use crate::environment::PayoffMatrix;
use crate::error::{ensure, Error, Result};
use crate::scenario::{enumerate_actions, Action, ActionLevels, ActionSpace, RadioParams, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Matrix,
    #[default]
    Obss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    #[serde(rename = "egreedy")]
    EGreedy,
    #[serde(rename = "thompson")]
    Thompson,
    /// Every BSS fixed at (default power, -72 dBm PD).
    #[serde(rename = "static-obsspd")]
    StaticObssPd,
    /// Every BSS fixed at (default power, default CCA).
    #[serde(rename = "static-dcf")]
    StaticDcf,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::EGreedy,
        StrategyKind::Thompson,
        StrategyKind::StaticObssPd,
        StrategyKind::StaticDcf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::EGreedy => "egreedy",
            StrategyKind::Thompson => "thompson",
            StrategyKind::StaticObssPd => "static-obsspd",
            StrategyKind::StaticDcf => "static-dcf",
        }
    }

    pub fn is_static(self) -> bool {
        matches!(self, StrategyKind::StaticObssPd | StrategyKind::StaticDcf)
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::validation("strategy", format!("unknown strategy `{s}`")))
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// PD of the static OBSS/PD baseline.
pub const OBSS_PD_BASELINE_DBM: f64 = -72.0;

/// Experiment file. Relative paths are resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Required for the `obss` environment. The matrix environment uses it only
    /// for the action space, defaulting to PD {-72, -82} x power {10, 20}.
    pub scenario: Option<PathBuf>,
    pub environment: EnvKind,
    pub strategy: StrategyKind,
    pub reward: RewardKind,
    pub pf_floor: f64,
    pub sim_time_s: f64,
    pub delta_s: f64,
    /// Falls back to the grid's drop count, or 1.
    pub drops: Option<usize>,
    pub base_seed: u64,
    pub output_dir: Option<PathBuf>,
    pub eps0: f64,
    pub exploit_statistic: ExploitStatistic,
    pub literal_ts_update: bool,
    /// Matrix environment only; the built-in toy game when absent.
    pub payoff_matrix: Option<PathBuf>,
    /// Overrides the payoff matrix's noise level.
    pub noise_std: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: None,
            environment: EnvKind::Obss,
            strategy: StrategyKind::EGreedy,
            reward: RewardKind::Avg,
            pf_floor: DEFAULT_PF_FLOOR,
            sim_time_s: 300.0,
            delta_s: 0.5,
            drops: None,
            base_seed: 0,
            output_dir: None,
            eps0: 0.1,
            exploit_statistic: ExploitStatistic::Mean,
            literal_ts_update: false,
            payoff_matrix: None,
            noise_std: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        resolve(&mut cfg.scenario);
        resolve(&mut cfg.payoff_matrix);
        resolve(&mut cfg.output_dir);
        Ok(cfg)
    }

    /// Iterations per drop, T = sim_time / Δ.
    pub fn iterations(&self) -> Result<usize> {
        ensure(
            self.delta_s.is_finite() && self.delta_s > 0.0,
            "delta_s",
            "must be finite and > 0",
        )?;
        ensure(
            self.sim_time_s.is_finite() && self.sim_time_s > 0.0,
            "sim_time_s",
            "must be finite and > 0",
        )?;
        let ratio = self.sim_time_s / self.delta_s;
        let t = ratio.round();
        ensure(
            t >= 1.0 && (ratio - t).abs() <= 1e-9 * ratio.max(1.0),
            "sim_time_s",
            format!("sim_time_s / delta_s = {ratio} is not a positive integer"),
        )?;
        Ok(t as usize)
    }

    pub fn policy(&self) -> Result<Option<Policy>> {
        Ok(match self.strategy {
            StrategyKind::EGreedy => Some(Policy::EGreedy {
                schedule: EpsSchedule::new(self.eps0)?,
                statistic: self.exploit_statistic,
            }),
            StrategyKind::Thompson => Some(Policy::Thompson {
                literal_update: self.literal_ts_update,
            }),
            StrategyKind::StaticObssPd | StrategyKind::StaticDcf => None,
        })
    }

    pub fn reward_strategy(&self) -> Result<RewardStrategy> {
        RewardStrategy::new(self.reward, self.pf_floor)
    }

    /// Checks every invariant and loads the referenced files.
    pub fn resolve(&self) -> Result<Resolved> {
        let iterations = self.iterations()?;
        let policy = self.policy()?;
        let reward = self.reward_strategy()?;
        let scenario = match &self.scenario {
            Some(p) => Some(Scenario::load(p)?),
            None => None,
        };
        let (radio, actions) = match &scenario {
            Some(s) => (s.radio.clone(), s.actions.clone()),
            None => {
                let lv = ActionLevels::default();
                (RadioParams::default(), enumerate_actions(&lv.pd_dbm, &lv.tx_power_dbm)?)
            }
        };
        let env = match self.environment {
            EnvKind::Obss => {
                let scenario = scenario
                    .ok_or_else(|| Error::validation("scenario", "the obss environment needs a scenario file"))?;
                ensure(
                    self.payoff_matrix.is_none(),
                    "payoff_matrix",
                    "only used by the matrix environment",
                )?;
                ResolvedEnv::Obss(scenario)
            }
            EnvKind::Matrix => {
                let mut matrix = match &self.payoff_matrix {
                    Some(p) => PayoffMatrix::load(p)?,
                    None => PayoffMatrix::toy(),
                };
                if let Some(sd) = self.noise_std {
                    ensure(sd.is_finite() && sd >= 0.0, "noise_std", "must be finite and >= 0")?;
                    matrix.noise_std = sd;
                }
                ensure(
                    matrix.n_actions() == actions.len(),
                    "payoff_matrix",
                    format!(
                        "matrix has {} actions per agent but the action space has {}",
                        matrix.n_actions(),
                        actions.len()
                    ),
                )?;
                if let Some(s) = &scenario {
                    ensure(
                        matrix.n_agents() == s.n_bss(),
                        "payoff_matrix",
                        format!(
                            "matrix has {} agents but the scenario has {} BSSs",
                            matrix.n_agents(),
                            s.n_bss()
                        ),
                    )?;
                }
                ResolvedEnv::Matrix(matrix)
            }
        };
        let static_action = match self.strategy {
            StrategyKind::StaticObssPd => Some(static_index(
                &actions,
                Action::new(radio.default_tx_power_dbm, OBSS_PD_BASELINE_DBM),
            )?),
            StrategyKind::StaticDcf => Some(static_index(
                &actions,
                Action::new(radio.default_tx_power_dbm, radio.default_cca_dbm),
            )?),
            _ => None,
        };
        let drops = match (self.drops, &env) {
            (Some(d), _) => d,
            (None, ResolvedEnv::Obss(s)) => s.default_drops(),
            (None, ResolvedEnv::Matrix(_)) => 1,
        };
        ensure(drops >= 1, "drops", "at least one drop is required")?;
        Ok(Resolved {
            config: self.clone(),
            env,
            actions,
            policy,
            reward,
            static_action,
            iterations,
            drops,
        })
    }
}

fn static_index(actions: &ActionSpace, action: Action) -> Result<usize> {
    actions.index_of(action).ok_or_else(|| {
        Error::validation(
            "strategy",
            format!(
                "baseline action ({} dBm, {} dBm) is not in the action space",
                action.tx_power_dbm, action.pd_dbm
            ),
        )
    })
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum ResolvedEnv {
    Matrix(PayoffMatrix),
    Obss(Scenario),
}

/// A validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub env: ResolvedEnv,
    pub actions: ActionSpace,
    pub policy: Option<Policy>,
    pub reward: RewardStrategy,
    pub static_action: Option<usize>,
    pub iterations: usize,
    pub drops: usize,
}

impl Resolved {
    pub fn n_agents(&self) -> usize {
        match &self.env {
            ResolvedEnv::Matrix(m) => m.n_agents(),
            ResolvedEnv::Obss(s) => s.n_bss(),
        }
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }
}
