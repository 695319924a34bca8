use serde::Serialize;

use super::run::{DropTrace, TraceRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Metric {
    Throughput,
    Airtime,
    Delay,
    Nav,
    Reward,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Throughput,
        Metric::Airtime,
        Metric::Delay,
        Metric::Nav,
        Metric::Reward,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Throughput => "throughput_mbps",
            Metric::Airtime => "airtime_frac",
            Metric::Delay => "delay_ms",
            Metric::Nav => "nav_frac",
            Metric::Reward => "reward",
        }
    }

    pub fn of(self, row: &TraceRow) -> Option<f64> {
        match self {
            Metric::Throughput => Some(row.throughput_mbps),
            Metric::Airtime => row.airtime_frac,
            Metric::Delay => row.delay_ms,
            Metric::Nav => row.nav_frac,
            Metric::Reward => Some(row.reward),
        }
    }
}

/// Mean, minimum and maximum across BSSs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Spread> {
        if values.is_empty() {
            return None;
        }
        Some(Spread {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropSummary {
    pub drop: usize,
    /// `agent_means[p][m]`: mean of metric `Metric::ALL[m]` over iterations, if recorded.
    pub agent_means: Vec<[Option<f64>; 5]>,
    pub spread: [Option<Spread>; 5],
    /// `action_freq[p][k]` over the whole run.
    pub action_freq: Vec<Vec<f64>>,
    /// Same over the last-window iterations.
    pub action_freq_last: Vec<Vec<f64>>,
}

impl DropSummary {
    pub fn spread(&self, metric: Metric) -> Option<Spread> {
        self.spread[metric as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub n_agents: usize,
    pub n_actions: usize,
    pub iterations: usize,
    /// First iteration (1-based) of the last window, the final 25% of the run.
    pub last_window_start: usize,
    pub drops: Vec<DropSummary>,
    pub failed_drops: Vec<usize>,
    /// Per-drop spreads averaged across drops.
    pub overall: [Option<Spread>; 5],
    /// Frequencies pooled across drops.
    pub action_freq: Vec<Vec<f64>>,
    pub action_freq_last: Vec<Vec<f64>>,
    /// Mean reward per iteration, over agents and drops.
    pub reward_trace: Vec<f64>,
    pub cdf_throughput: Vec<(f64, f64)>,
    pub cdf_delay: Vec<(f64, f64)>,
}

impl RunSummary {
    pub fn overall(&self, metric: Metric) -> Option<Spread> {
        self.overall[metric as usize]
    }
}

pub fn last_window_start(iterations: usize) -> usize {
    iterations - iterations.div_ceil(4) + 1
}

/// Empirical CDF: sorted samples paired with k/n.
pub fn ecdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter()
        .enumerate()
        .map(|(k, x)| (x, (k + 1) as f64 / n))
        .collect()
}

fn frequencies(counts: &[Vec<u64>]) -> Vec<Vec<f64>> {
    counts
        .iter()
        .map(|c| {
            let total: u64 = c.iter().sum();
            c.iter()
                .map(|&x| if total == 0 { 0.0 } else { x as f64 / total as f64 })
                .collect()
        })
        .collect()
}

pub fn summarize(traces: &[DropTrace], n_agents: usize, n_actions: usize, iterations: usize) -> Result<RunSummary> {
    let ok: Vec<&DropTrace> = traces.iter().filter(|t| t.error.is_none()).collect();
    if ok.is_empty() || ok.iter().all(|t| t.rows.is_empty()) {
        return Err(Error::validation("traces", "no completed drops to summarize"));
    }
    let window = last_window_start(iterations);
    let mut pooled = vec![vec![0u64; n_actions]; n_agents];
    let mut pooled_last = vec![vec![0u64; n_actions]; n_agents];
    let mut reward_sum = vec![0.0; iterations];
    let mut reward_n = vec![0usize; iterations];
    let mut drops = Vec::with_capacity(ok.len());

    for t in &ok {
        let mut sums = vec![[0.0f64; 5]; n_agents];
        let mut seen = vec![[0usize; 5]; n_agents];
        let mut counts = vec![vec![0u64; n_actions]; n_agents];
        let mut counts_last = vec![vec![0u64; n_actions]; n_agents];
        for row in &t.rows {
            let (p, k) = (row.agent, row.action);
            if p >= n_agents || k >= n_actions || row.iter == 0 || row.iter > iterations {
                return Err(Error::validation(
                    "traces",
                    format!(
                        "row out of range: drop {} iter {} agent {p} action {k}",
                        row.drop, row.iter
                    ),
                ));
            }
            for (m, metric) in Metric::ALL.iter().enumerate() {
                if let Some(v) = metric.of(row) {
                    sums[p][m] += v;
                    seen[p][m] += 1;
                }
            }
            counts[p][k] += 1;
            if row.iter >= window {
                counts_last[p][k] += 1;
            }
            reward_sum[row.iter - 1] += row.reward;
            reward_n[row.iter - 1] += 1;
        }
        let agent_means: Vec<[Option<f64>; 5]> = (0..n_agents)
            .map(|p| std::array::from_fn(|m| (seen[p][m] > 0).then(|| sums[p][m] / seen[p][m] as f64)))
            .collect();
        let spread = std::array::from_fn(|m| {
            let vals: Vec<f64> = agent_means.iter().filter_map(|a| a[m]).collect();
            Spread::of(&vals)
        });
        for p in 0..n_agents {
            for k in 0..n_actions {
                pooled[p][k] += counts[p][k];
                pooled_last[p][k] += counts_last[p][k];
            }
        }
        drops.push(DropSummary {
            drop: t.drop,
            agent_means,
            spread,
            action_freq: frequencies(&counts),
            action_freq_last: frequencies(&counts_last),
        });
    }

    let overall = std::array::from_fn(|m| {
        let s: Vec<Spread> = drops.iter().filter_map(|d| d.spread[m]).collect();
        if s.is_empty() {
            return None;
        }
        let n = s.len() as f64;
        Some(Spread {
            mean: s.iter().map(|x| x.mean).sum::<f64>() / n,
            min: s.iter().map(|x| x.min).sum::<f64>() / n,
            max: s.iter().map(|x| x.max).sum::<f64>() / n,
        })
    });
    let per_bss = |metric: Metric| -> Vec<f64> {
        drops
            .iter()
            .flat_map(|d| d.agent_means.iter().filter_map(move |a| a[metric as usize]))
            .collect()
    };
    Ok(RunSummary {
        n_agents,
        n_actions,
        iterations,
        last_window_start: window,
        failed_drops: traces.iter().filter(|t| t.error.is_some()).map(|t| t.drop).collect(),
        overall,
        action_freq: frequencies(&pooled),
        action_freq_last: frequencies(&pooled_last),
        reward_trace: reward_sum
            .iter()
            .zip(&reward_n)
            .map(|(&s, &n)| if n == 0 { 0.0 } else { s / n as f64 })
            .collect(),
        cdf_throughput: ecdf(&per_bss(Metric::Throughput)),
        cdf_delay: ecdf(&per_bss(Metric::Delay)),
        drops,
    })
}
