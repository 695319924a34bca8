//! Per-agent bandit state, ε-greedy and Gaussian Thompson sampling.
//!
//! Rewards arrive one iteration late: the reward for the arm chosen at
//! iteration t is applied at the start of iteration t+1, just before the next
//! selection. [`Agent`] enforces that protocol; the free functions expose the
//! individual steps.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsSchedule {
    pub eps0: f64,
}

impl EpsSchedule {
    pub fn new(eps0: f64) -> Result<Self> {
        ensure((0.0..=1.0).contains(&eps0), "eps0", format!("{eps0} is outside [0, 1]"))?;
        Ok(EpsSchedule { eps0 })
    }
}

/// Exploration probability at iteration `t >= 1`.
pub fn eps_at(t: u64, sched: &EpsSchedule) -> f64 {
    debug_assert!(t >= 1);
    (sched.eps0 / (t as f64).sqrt()).min(1.0)
}

/// What ε-greedy exploits: the running mean reward of each arm, or the most recent one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExploitStatistic {
    #[default]
    Mean,
    Last,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    estimates: Vec<f64>,
    counts: Vec<u64>,
    t: u64,
    last_action: Option<usize>,
    pending: bool,
}

impl AgentState {
    pub fn new(n_arms: usize) -> Self {
        assert!(n_arms >= 1, "a bandit needs at least one arm");
        AgentState {
            estimates: vec![0.0; n_arms],
            counts: vec![0; n_arms],
            t: 0,
            last_action: None,
            pending: false,
        }
    }

    /// Builds a state with given estimates and counts, as after some play.
    pub fn with_history(estimates: Vec<f64>, counts: Vec<u64>) -> Self {
        assert_eq!(estimates.len(), counts.len());
        let mut s = AgentState::new(estimates.len());
        s.t = counts.iter().sum();
        s.estimates = estimates;
        s.counts = counts;
        s
    }

    pub fn n_arms(&self) -> usize {
        self.estimates.len()
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn last_action(&self) -> Option<usize> {
        self.last_action
    }

    pub fn pending(&self) -> bool {
        self.pending
    }

    /// Marks `k` as played at the next iteration; its reward is now owed.
    pub fn begin(&mut self, k: usize) -> Result<()> {
        if self.pending {
            return Err(Error::Protocol("selection while a reward is still pending".into()));
        }
        if k >= self.n_arms() {
            return Err(Error::Protocol(format!("arm {k} out of range")));
        }
        self.t += 1;
        self.last_action = Some(k);
        self.pending = true;
        Ok(())
    }

    fn settle(&mut self, k: usize) -> Result<()> {
        if !self.pending || self.last_action != Some(k) {
            return Err(Error::Protocol(format!("no pending reward for arm {k}")));
        }
        self.pending = false;
        Ok(())
    }

    /// Per-arm Thompson posterior as (mean, variance).
    pub fn thompson_params(&self) -> Vec<(f64, f64)> {
        self.estimates
            .iter()
            .zip(&self.counts)
            .map(|(&m, &n)| (m, 1.0 / (n as f64 + 1.0)))
            .collect()
    }
}

/// Index of the largest value, ties broken uniformly at random.
fn argmax<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ties = values.iter().filter(|&&v| v == best).count();
    let pick = if ties > 1 { rng.random_range(0..ties) } else { 0 };
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .nth(pick)
        .map(|(k, _)| k)
        .unwrap_or(0)
}

pub fn select_egreedy<R: Rng + ?Sized>(state: &AgentState, eps: f64, rng: &mut R) -> usize {
    if rng.random::<f64>() < eps {
        rng.random_range(0..state.n_arms())
    } else {
        argmax(&state.estimates, rng)
    }
}

pub fn select_thompson<R: Rng + ?Sized>(state: &AgentState, rng: &mut R) -> usize {
    let theta: Vec<f64> = state
        .thompson_params()
        .into_iter()
        .map(|(mean, var)| mean + var.sqrt() * rng.sample::<f64, _>(StandardNormal))
        .collect();
    argmax(&theta, rng)
}

/// Running-mean update.
pub fn update_mean(state: &mut AgentState, k: usize, reward: f64) -> Result<()> {
    state.settle(k)?;
    let n = state.counts[k] as f64;
    state.estimates[k] = (state.estimates[k] * n + reward) / (n + 1.0);
    state.counts[k] += 1;
    Ok(())
}

/// Keeps only the most recent reward of each arm.
pub fn update_last(state: &mut AgentState, k: usize, reward: f64) -> Result<()> {
    state.settle(k)?;
    state.estimates[k] = reward;
    state.counts[k] += 1;
    Ok(())
}

/// Thompson estimate update. The default form shrinks towards the zero prior,
/// `(r̂N + r) / (N + 2)`; `literal` uses `(r̂N + r) / (r + 2)`.
pub fn update_ts(state: &mut AgentState, k: usize, reward: f64, literal: bool) -> Result<()> {
    state.settle(k)?;
    let n = state.counts[k] as f64;
    let denom = if literal { reward + 2.0 } else { n + 2.0 };
    state.estimates[k] = (state.estimates[k] * n + reward) / denom;
    state.counts[k] += 1;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Policy {
    EGreedy {
        schedule: EpsSchedule,
        statistic: ExploitStatistic,
    },
    Thompson {
        literal_update: bool,
    },
}

/// A learner following the delayed-reward protocol.
#[derive(Debug, Clone)]
pub struct Agent {
    policy: Policy,
    state: AgentState,
    rng: SimRng,
    owed: Option<f64>,
}

impl Agent {
    pub fn new(policy: Policy, n_arms: usize, rng: SimRng) -> Self {
        Agent {
            policy,
            state: AgentState::new(n_arms),
            rng,
            owed: None,
        }
    }

    pub fn state(&self) -> &AgentState {
        &self.state
    }

    /// Applies last iteration's reward, if any, then picks the next arm.
    pub fn act(&mut self) -> Result<usize> {
        self.settle()?;
        let k = match self.policy {
            Policy::EGreedy { schedule, .. } => {
                let eps = eps_at(self.state.t + 1, &schedule);
                select_egreedy(&self.state, eps, &mut self.rng)
            }
            Policy::Thompson { .. } => select_thompson(&self.state, &mut self.rng),
        };
        self.state.begin(k)?;
        Ok(k)
    }

    /// Records the reward of the current arm; it is applied at the next `act` or `finish`.
    pub fn observe(&mut self, reward: f64) -> Result<()> {
        if !self.state.pending || self.owed.is_some() {
            return Err(Error::Protocol("reward without an outstanding action".into()));
        }
        self.owed = Some(reward);
        Ok(())
    }

    /// Applies the final reward so the state reflects every completed iteration.
    pub fn finish(&mut self) -> Result<()> {
        self.settle()
    }

    fn settle(&mut self) -> Result<()> {
        let Some(reward) = self.owed.take() else {
            if self.state.pending {
                return Err(Error::Protocol("previous action was never rewarded".into()));
            }
            return Ok(());
        };
        let k = self.state.last_action.expect("pending implies an action");
        match self.policy {
            Policy::EGreedy {
                statistic: ExploitStatistic::Mean,
                ..
            } => update_mean(&mut self.state, k, reward),
            Policy::EGreedy {
                statistic: ExploitStatistic::Last,
                ..
            } => update_last(&mut self.state, k, reward),
            Policy::Thompson { literal_update } => update_ts(&mut self.state, k, reward, literal_update),
        }
    }
}
