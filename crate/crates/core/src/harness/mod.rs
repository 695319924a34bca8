//! Experiment orchestration: drops, baselines, aggregation and CSV export.
//!
//! Output directory layout:
//!
//! | file | content |
//! |------|---------|
//! | `manifest.json` | resolved config, drop seeds, action space; written before simulating |
//! | `trace.csv` | one row per (drop, iteration, agent) |
//! | `summary.csv` | mean/min/max across BSSs per drop, and averaged over drops (`all`) |
//! | `actions.csv` | action frequencies over the full run and over the last 25% |
//! | `rewards.csv` | mean reward per iteration |
//! | `cdf_throughput.csv`, `cdf_delay.csv` | empirical CDFs of per-BSS means |
//! | `errors.csv` | aborted drops, only when there are any |

mod config;
mod export;
mod run;
mod summary;

use std::path::{Path, PathBuf};

use log::info;

pub use config::{EnvKind, ExperimentConfig, Resolved, ResolvedEnv, StrategyKind, OBSS_PD_BASELINE_DBM};
pub use export::{read_trace, write_summary, write_trace, Manifest, TRACE_HEADER};
pub use run::{run_drop, run_drops, DropTrace, TraceRow};
pub use summary::{ecdf, last_window_start, summarize, DropSummary, Metric, RunSummary, Spread};

use crate::coordination::RewardKind;
use crate::error::{Error, Result};

/// Runs all drops and aggregates them, without touching the filesystem.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(Vec<DropTrace>, RunSummary)> {
    let exp = config.resolve()?;
    let traces = run_drops(&exp);
    let summary = summarize(&traces, exp.n_agents(), exp.n_actions(), exp.iterations)?;
    Ok((traces, summary))
}

/// Manifest first, then the simulation, then the CSV files.
pub fn execute(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    let exp = config.resolve()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    Manifest::new(&exp).write(out_dir)?;
    info!(
        "{} + {}: {} drops x {} iterations -> {}",
        exp.config.strategy,
        exp.config.reward,
        exp.drops,
        exp.iterations,
        out_dir.display()
    );
    let traces = run_drops(&exp);
    write_trace(out_dir, &traces)?;
    export::write_errors(out_dir, &traces)?;
    let summary = summarize(&traces, exp.n_agents(), exp.n_actions(), exp.iterations)?;
    write_summary(out_dir, &summary)?;
    Ok(summary)
}

/// Re-aggregates a finished run from its `trace.csv`.
///
/// The action count comes from `manifest.json` when present, so actions that
/// were never played still get a row.
pub fn report(dir: &Path) -> Result<RunSummary> {
    let traces = read_trace(dir)?;
    let rows = traces.iter().flat_map(|t| &t.rows);
    let n_agents = rows.clone().map(|r| r.agent + 1).max().unwrap_or(0);
    let iterations = rows.clone().map(|r| r.iter).max().unwrap_or(0);
    let seen_actions = rows.map(|r| r.action + 1).max().unwrap_or(0);
    let n_actions = match Manifest::load(dir) {
        Ok(m) => m.n_actions.max(seen_actions),
        Err(_) => seen_actions,
    };
    let summary = summarize(&traces, n_agents, n_actions, iterations)?;
    write_summary(dir, &summary)?;
    Ok(summary)
}

/// Runs every strategy x reward combination into `out_dir/<strategy>-<reward>/`
/// and writes `sweep.csv` with the across-drop averages.
pub fn sweep(
    config: &ExperimentConfig,
    strategies: &[StrategyKind],
    rewards: &[RewardKind],
    out_dir: &Path,
) -> Result<Vec<(StrategyKind, RewardKind, RunSummary)>> {
    if strategies.is_empty() || rewards.is_empty() {
        return Err(Error::validation("sweep", "need at least one strategy and one reward"));
    }
    let mut results = Vec::new();
    let mut rows = Vec::new();
    for &strategy in strategies {
        for &reward in rewards {
            let cfg = ExperimentConfig {
                strategy,
                reward,
                ..config.clone()
            };
            let dir: PathBuf = out_dir.join(format!("{strategy}-{reward}"));
            let s = execute(&cfg, &dir)?;
            let mut row = vec![strategy.to_string(), reward.to_string()];
            for m in [Metric::Throughput, Metric::Delay] {
                match s.overall(m) {
                    Some(sp) => row.extend([sp.mean, sp.min, sp.max].map(|x| x.to_string())),
                    None => row.extend(std::iter::repeat_n(String::new(), 3)),
                }
            }
            rows.push(row);
            results.push((strategy, reward, s));
        }
    }
    let path = out_dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|source| Error::Csv {
        path: path.clone(),
        source,
    })?;
    let header = [
        "strategy",
        "reward",
        "throughput_mean",
        "throughput_min",
        "throughput_max",
        "delay_mean",
        "delay_min",
        "delay_max",
    ];
    let csv_err = |source| Error::Csv {
        path: path.clone(),
        source,
    };
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(results)
}
