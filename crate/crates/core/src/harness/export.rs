use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Resolved};
use super::run::{DropTrace, TraceRow};
use super::summary::{Metric, RunSummary};
use crate::error::{Error, Result};
use crate::scenario::Action;

pub const TRACE_HEADER: [&str; 9] = [
    "drop",
    "iter",
    "agent",
    "action",
    "reward",
    "throughput_mbps",
    "airtime_frac",
    "delay_ms",
    "nav_frac",
];

/// Everything needed to reproduce a run, written before it starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator: String,
    pub config: ExperimentConfig,
    pub iterations: usize,
    pub drops: usize,
    pub n_agents: usize,
    pub n_actions: usize,
    pub actions: Vec<Action>,
    pub drop_seeds: Vec<u64>,
}

impl Manifest {
    pub fn new(exp: &Resolved) -> Self {
        let mut config = exp.config.clone();
        config.output_dir = None;
        config.drops = Some(exp.drops);
        Manifest {
            generator: format!("cmab-core {}", env!("CARGO_PKG_VERSION")),
            config,
            iterations: exp.iterations,
            drops: exp.drops,
            n_agents: exp.n_agents(),
            n_actions: exp.n_actions(),
            actions: exp.actions.actions().to_vec(),
            drop_seeds: (0..exp.drops)
                .map(|d| crate::rng::drop_seed(exp.config.base_seed, d))
                .collect(),
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Parse { path, source })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trace(dir: &Path, traces: &[DropTrace]) -> Result<()> {
    let path = dir.join("trace.csv");
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&path)
        .map_err(csv_err(&path))?;
    w.write_record(TRACE_HEADER).map_err(csv_err(&path))?;
    for row in traces.iter().flat_map(|t| &t.rows) {
        w.serialize(row).map_err(csv_err(&path))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn read_trace(dir: &Path) -> Result<Vec<DropTrace>> {
    let path = dir.join("trace.csv");
    let mut r = csv::Reader::from_path(&path).map_err(csv_err(&path))?;
    let header: Vec<String> = r.headers().map_err(csv_err(&path))?.iter().map(String::from).collect();
    if header != TRACE_HEADER {
        return Err(Error::validation("trace.csv", format!("unexpected header {header:?}")));
    }
    let mut traces: Vec<DropTrace> = Vec::new();
    for rec in r.deserialize::<TraceRow>() {
        let row = rec.map_err(csv_err(&path))?;
        match traces.last_mut() {
            Some(t) if t.drop == row.drop => t.rows.push(row),
            _ => traces.push(DropTrace {
                drop: row.drop,
                seed: 0,
                rows: vec![row],
                error: None,
            }),
        }
    }
    Ok(traces)
}

fn num(x: f64) -> String {
    x.to_string()
}

/// Writes the aggregate files derived from a summary.
pub fn write_summary(dir: &Path, s: &RunSummary) -> Result<()> {
    let mut rows = Vec::new();
    let mut push = |drop: String, m: Metric, sp: super::summary::Spread| {
        rows.push(vec![drop, m.name().to_string(), num(sp.mean), num(sp.min), num(sp.max)]);
    };
    for d in &s.drops {
        for m in Metric::ALL {
            if let Some(sp) = d.spread(m) {
                push(d.drop.to_string(), m, sp);
            }
        }
    }
    for m in Metric::ALL {
        if let Some(sp) = s.overall(m) {
            push("all".into(), m, sp);
        }
    }
    write_rows(
        &dir.join("summary.csv"),
        &["drop", "metric", "mean", "min", "max"],
        rows,
    )?;

    let mut rows = Vec::new();
    let mut freq_rows = |drop: String, full: &[Vec<f64>], last: &[Vec<f64>]| {
        for (p, (f, l)) in full.iter().zip(last).enumerate() {
            for (k, (a, b)) in f.iter().zip(l).enumerate() {
                rows.push(vec![drop.clone(), p.to_string(), k.to_string(), num(*a), num(*b)]);
            }
        }
    };
    for d in &s.drops {
        freq_rows(d.drop.to_string(), &d.action_freq, &d.action_freq_last);
    }
    freq_rows("all".into(), &s.action_freq, &s.action_freq_last);
    write_rows(
        &dir.join("actions.csv"),
        &["drop", "agent", "action", "freq_full", "freq_last"],
        rows,
    )?;

    write_rows(
        &dir.join("rewards.csv"),
        &["iter", "mean_reward"],
        s.reward_trace
            .iter()
            .enumerate()
            .map(|(i, r)| vec![(i + 1).to_string(), num(*r)]),
    )?;
    write_rows(
        &dir.join("cdf_throughput.csv"),
        &["throughput_mbps", "cdf"],
        s.cdf_throughput.iter().map(|(x, p)| vec![num(*x), num(*p)]),
    )?;
    write_rows(
        &dir.join("cdf_delay.csv"),
        &["delay_ms", "cdf"],
        s.cdf_delay.iter().map(|(x, p)| vec![num(*x), num(*p)]),
    )?;
    Ok(())
}

pub fn write_errors(dir: &Path, traces: &[DropTrace]) -> Result<()> {
    let failed: Vec<_> = traces.iter().filter(|t| t.error.is_some()).collect();
    let path = dir.join("errors.csv");
    if failed.is_empty() {
        return match std::fs::remove_file(&path) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(Error::io(&path, e)),
            _ => Ok(()),
        };
    }
    write_rows(
        &path,
        &["drop", "error"],
        failed
            .iter()
            .map(|t| vec![t.drop.to_string(), t.error.clone().unwrap_or_default()]),
    )
}
