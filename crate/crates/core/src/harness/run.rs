use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Resolved, ResolvedEnv};
use crate::bandit::Agent;
use crate::coordination::distribute;
use crate::environment::{Environment, MatrixGameEnv, ObssSimEnv};
use crate::error::{Error, Result};
use crate::rng::{agent_seed, drop_seed, rng_from_seed, stream, STREAM_DEPLOYMENT, STREAM_ENVIRONMENT};

/// One agent in one iteration. Physical metrics are absent in the matrix
/// environment, where `throughput_mbps` carries the normalized payoff instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub drop: usize,
    pub iter: usize,
    pub agent: usize,
    pub action: usize,
    pub reward: f64,
    pub throughput_mbps: f64,
    pub airtime_frac: Option<f64>,
    pub delay_ms: Option<f64>,
    pub nav_frac: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropTrace {
    pub drop: usize,
    pub seed: u64,
    pub rows: Vec<TraceRow>,
    /// Set when the drop aborted; `rows` is then empty.
    pub error: Option<String>,
}

/// Runs every drop in parallel; results are ordered by drop index.
pub fn run_drops(exp: &Resolved) -> Vec<DropTrace> {
    (0..exp.drops)
        .into_par_iter()
        .map(|d| {
            let seed = drop_seed(exp.config.base_seed, d);
            match run_drop(exp, d, seed) {
                Ok(rows) => DropTrace {
                    drop: d,
                    seed,
                    rows,
                    error: None,
                },
                Err(e) => {
                    warn!("drop {d} aborted: {e}");
                    DropTrace {
                        drop: d,
                        seed,
                        rows: Vec::new(),
                        error: Some(e.to_string()),
                    }
                }
            }
        })
        .collect()
}

/// Algorithm-1 loop for one drop: select, step, share rewards, learn.
pub fn run_drop(exp: &Resolved, drop: usize, seed: u64) -> Result<Vec<TraceRow>> {
    let mut env: Box<dyn Environment> = match &exp.env {
        ResolvedEnv::Matrix(m) => Box::new(MatrixGameEnv::new(m.clone())),
        ResolvedEnv::Obss(s) => {
            let dep = s.deployment(&mut stream(seed, STREAM_DEPLOYMENT));
            debug!(
                "drop {drop}: channels {:?}",
                dep.bsses.iter().map(|b| b.channel).collect::<Vec<_>>()
            );
            Box::new(ObssSimEnv::new(dep, exp.actions.clone(), exp.config.delta_s)?)
        }
    };
    let n = env.n_agents();
    let mut env_rng = stream(seed, STREAM_ENVIRONMENT);
    let mut agents: Vec<Agent> = match exp.policy {
        Some(policy) => (0..n)
            .map(|p| Agent::new(policy, exp.n_actions(), rng_from_seed(agent_seed(seed, p))))
            .collect(),
        None => Vec::new(),
    };
    let mut rows = Vec::with_capacity(exp.iterations * n);
    for iter in 1..=exp.iterations {
        let joint: Vec<usize> = match exp.static_action {
            Some(k) => vec![k; n],
            None => agents.iter_mut().map(Agent::act).collect::<Result<_>>()?,
        };
        let step = env.step(&joint, &mut env_rng)?;
        let rewards = distribute(&exp.reward, &step.normalized);
        for (agent, &r) in agents.iter_mut().zip(&rewards) {
            agent.observe(r)?;
        }
        for p in 0..n {
            let m = step.metrics.as_ref().map(|m| m[p]);
            rows.push(TraceRow {
                drop,
                iter,
                agent: p,
                action: joint[p],
                reward: rewards[p],
                throughput_mbps: m.map_or(step.normalized[p], |m| m.throughput_mbps),
                airtime_frac: m.map(|m| m.airtime_frac),
                delay_ms: m.map(|m| m.mean_access_delay_ms),
                nav_frac: m.map(|m| m.nav_frac),
            });
        }
    }
    for agent in &mut agents {
        agent.finish()?;
        let plays: u64 = agent.state().counts().iter().sum();
        if plays != exp.iterations as u64 {
            return Err(Error::Protocol(format!(
                "agent played {plays} of {} iterations",
                exp.iterations
            )));
        }
    }
    Ok(rows)
}
