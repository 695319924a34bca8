//! Environments the learners act in: a matrix game and the slotted simulator.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::coordination::self_reward;
use crate::error::{ensure, Error, Result};
use crate::obss_sim::{simulate_iteration, IterationMetrics};
use crate::radio::isolation_throughput_mbps;
use crate::rng::SimRng;
use crate::scenario::{ActionSpace, Deployment};

pub const DEFAULT_NOISE_STD: f64 = 0.02;

/// Outcome of one iteration of duration Δ.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    /// Per-agent throughput normalized by its isolation throughput, in [0, 1].
    pub normalized: Vec<f64>,
    /// Physical metrics, when the environment has them.
    pub metrics: Option<Vec<IterationMetrics>>,
}

pub trait Environment {
    fn n_agents(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn step(&mut self, joint_action: &[usize], rng: &mut SimRng) -> Result<EnvStep>;
}

fn check_joint(joint: &[usize], n_agents: usize, n_actions: usize) -> Result<()> {
    ensure(
        joint.len() == n_agents,
        "joint_action",
        format!("expected {n_agents} actions, got {}", joint.len()),
    )?;
    if let Some(p) = joint.iter().position(|&k| k >= n_actions) {
        return Err(Error::validation(
            format!("joint_action[{p}]"),
            format!("action index {} out of range 0..{n_actions}", joint[p]),
        ));
    }
    Ok(())
}

/// Per-agent normalized throughput for every joint action.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    n_agents: usize,
    n_actions: usize,
    /// Row-major over the joint action, agent 0 most significant.
    table: Vec<Vec<f64>>,
    pub noise_std: f64,
}

/// On-disk form: entries keyed by comma-separated 0-based action indices, e.g. `"0,3"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PayoffFile {
    n_agents: usize,
    n_actions: usize,
    #[serde(default = "default_noise")]
    noise_std: f64,
    entries: BTreeMap<String, Vec<f64>>,
}

fn default_noise() -> f64 {
    DEFAULT_NOISE_STD
}

impl PayoffMatrix {
    pub fn from_fn(
        n_agents: usize,
        n_actions: usize,
        noise_std: f64,
        mut payoff: impl FnMut(&[usize]) -> Vec<f64>,
    ) -> Result<Self> {
        ensure(n_agents >= 1, "payoff.n_agents", "must be >= 1")?;
        ensure(n_actions >= 1, "payoff.n_actions", "must be >= 1")?;
        let size = n_actions.checked_pow(n_agents as u32).unwrap_or(usize::MAX);
        ensure(size <= 1 << 20, "payoff", "joint action space too large for a table")?;
        let mut table = Vec::with_capacity(size);
        for idx in 0..size {
            table.push(payoff(&Self::decode(idx, n_agents, n_actions)));
        }
        let m = PayoffMatrix {
            n_agents,
            n_actions,
            table,
            noise_std,
        };
        m.validate()?;
        Ok(m)
    }

    /// The two-BSS toy game: joint aggressive play (A1, A1) is best, a lone
    /// -72 dBm player is punished, and joint conservative play is a weak
    /// equilibrium. Actions are A1=(10,-72), A2=(10,-82), A3=(20,-72), A4=(20,-82).
    pub fn toy() -> Self {
        const DIAG: [f64; 4] = [1.0, 0.5, 0.95, 0.5];
        let aggressive = |a: usize| a == 0 || a == 2;
        PayoffMatrix::from_fn(2, 4, DEFAULT_NOISE_STD, |j| {
            let (a, b) = (j[0], j[1]);
            if a == b {
                vec![DIAG[a], DIAG[a]]
            } else if aggressive(a) != aggressive(b) {
                if aggressive(a) {
                    vec![0.20, 0.60]
                } else {
                    vec![0.60, 0.20]
                }
            } else if (a, b) == (1, 3) {
                // At equal PD the louder BSS wins the capture contest.
                vec![0.40, 0.55]
            } else if (a, b) == (3, 1) {
                vec![0.55, 0.40]
            } else {
                vec![0.45, 0.45]
            }
        })
        .expect("toy matrix is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: PayoffFile = serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_file(file)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PayoffFile = serde_json::from_str(text).map_err(|source| Error::Parse {
            path: "<payoff>".into(),
            source,
        })?;
        Self::from_file(file)
    }

    fn from_file(file: PayoffFile) -> Result<Self> {
        let mut parsed = BTreeMap::new();
        for (key, v) in &file.entries {
            let idx: Vec<usize> = key
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| {
                    Error::validation(format!("payoff.entries[{key}]"), "key must be comma-separated indices")
                })?;
            ensure(
                idx.len() == file.n_agents && idx.iter().all(|&k| k < file.n_actions),
                format!("payoff.entries[{key}]"),
                "key does not name a valid joint action",
            )?;
            parsed.insert(idx, v.clone());
        }
        let mut missing = None;
        let m = PayoffMatrix::from_fn(file.n_agents, file.n_actions, file.noise_std, |j| {
            parsed.get(j).cloned().unwrap_or_else(|| {
                missing.get_or_insert_with(|| j.to_vec());
                Vec::new()
            })
        });
        if let Some(j) = missing {
            let key: Vec<String> = j.iter().map(|k| k.to_string()).collect();
            return Err(Error::validation(
                "payoff.entries",
                format!("missing joint action {}", key.join(",")),
            ));
        }
        m
    }

    pub fn to_json(&self) -> String {
        let entries = self
            .table
            .iter()
            .enumerate()
            .map(|(idx, v)| {
                let key: Vec<String> = Self::decode(idx, self.n_agents, self.n_actions)
                    .iter()
                    .map(|k| k.to_string())
                    .collect();
                (key.join(","), v.clone())
            })
            .collect();
        let file = PayoffFile {
            n_agents: self.n_agents,
            n_actions: self.n_actions,
            noise_std: self.noise_std,
            entries,
        };
        serde_json::to_string_pretty(&file).expect("payoff matrix serializes")
    }

    fn validate(&self) -> Result<()> {
        ensure(
            self.noise_std.is_finite() && self.noise_std >= 0.0,
            "payoff.noise_std",
            "must be finite and >= 0",
        )?;
        for (idx, v) in self.table.iter().enumerate() {
            let at = format!("payoff.entries[{idx}]");
            ensure(v.len() == self.n_agents, at.clone(), "one value per agent is required")?;
            ensure(
                v.iter().all(|x| (0.0..=1.0).contains(x)),
                at,
                "entries must lie in [0, 1]",
            )?;
        }
        Ok(())
    }

    fn decode(mut idx: usize, n_agents: usize, n_actions: usize) -> Vec<usize> {
        let mut j = vec![0; n_agents];
        for slot in j.iter_mut().rev() {
            *slot = idx % n_actions;
            idx /= n_actions;
        }
        j
    }

    fn encode(&self, joint: &[usize]) -> usize {
        joint.iter().fold(0, |acc, &k| acc * self.n_actions + k)
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Noise-free payoffs of a joint action.
    pub fn payoff(&self, joint: &[usize]) -> Result<&[f64]> {
        check_joint(joint, self.n_agents, self.n_actions)?;
        Ok(&self.table[self.encode(joint)])
    }

    /// True for a two-player game that is unchanged when the players swap seats.
    pub fn is_symmetric(&self) -> bool {
        self.n_agents == 2
            && (0..self.n_actions).all(|a| {
                (0..self.n_actions).all(|b| {
                    let ab = &self.table[self.encode(&[a, b])];
                    let ba = &self.table[self.encode(&[b, a])];
                    ab[0] == ba[1] && ab[1] == ba[0]
                })
            })
    }
}

#[derive(Debug, Clone)]
pub struct MatrixGameEnv {
    matrix: PayoffMatrix,
}

impl MatrixGameEnv {
    pub fn new(matrix: PayoffMatrix) -> Self {
        MatrixGameEnv { matrix }
    }

    pub fn matrix(&self) -> &PayoffMatrix {
        &self.matrix
    }
}

impl Environment for MatrixGameEnv {
    fn n_agents(&self) -> usize {
        self.matrix.n_agents
    }

    fn n_actions(&self) -> usize {
        self.matrix.n_actions
    }

    fn step(&mut self, joint_action: &[usize], rng: &mut SimRng) -> Result<EnvStep> {
        let base = self.matrix.payoff(joint_action)?;
        let sd = self.matrix.noise_std;
        let normalized = base
            .iter()
            .map(|&v| {
                if sd > 0.0 {
                    (v + sd * rng.sample::<f64, _>(StandardNormal)).clamp(0.0, 1.0)
                } else {
                    v
                }
            })
            .collect();
        Ok(EnvStep {
            normalized,
            metrics: None,
        })
    }
}

/// The slotted CSMA/OBSS-PD simulator; one agent per BSS.
#[derive(Debug, Clone)]
pub struct ObssSimEnv {
    deployment: Deployment,
    actions: ActionSpace,
    delta_s: f64,
    isolation_mbps: Vec<f64>,
}

impl ObssSimEnv {
    pub fn new(deployment: Deployment, actions: ActionSpace, delta_s: f64) -> Result<Self> {
        ensure(
            delta_s.is_finite() && delta_s > 0.0,
            "delta_s",
            "must be finite and > 0",
        )?;
        actions.validate(&deployment.radio)?;
        let isolation_mbps = (0..deployment.len())
            .map(|i| isolation_throughput_mbps(i, &deployment))
            .collect::<Result<_>>()?;
        Ok(ObssSimEnv {
            deployment,
            actions,
            delta_s,
            isolation_mbps,
        })
    }

    pub fn deployment(&self) -> &Deployment {
        &self.deployment
    }

    pub fn isolation_mbps(&self) -> &[f64] {
        &self.isolation_mbps
    }
}

impl Environment for ObssSimEnv {
    fn n_agents(&self) -> usize {
        self.deployment.len()
    }

    fn n_actions(&self) -> usize {
        self.actions.len()
    }

    fn step(&mut self, joint_action: &[usize], rng: &mut SimRng) -> Result<EnvStep> {
        check_joint(joint_action, self.n_agents(), self.n_actions())?;
        let joint: Vec<_> = joint_action
            .iter()
            .map(|&k| self.actions.get(k).expect("index checked"))
            .collect();
        let metrics = simulate_iteration(&self.deployment, &joint, self.delta_s, rng)?;
        let normalized = metrics
            .iter()
            .zip(&self.isolation_mbps)
            .map(|(m, &iso)| self_reward(m.throughput_mbps, iso))
            .collect::<Result<_>>()?;
        Ok(EnvStep {
            normalized,
            metrics: Some(metrics),
        })
    }
}
