use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cmab_core::coordination::RewardKind;
use cmab_core::harness::{self, Metric, RunSummary, StrategyKind};
use cmab_core::{Error, ExperimentConfig};

/// Multi-agent bandits for coordinated Wi-Fi spatial reuse.
#[derive(Parser)]
#[command(name = "cmab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `base_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `drops`.
        #[arg(long)]
        drops: Option<usize>,
        /// Overrides `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every strategy x reward combination.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "egreedy,thompson")]
        strategies: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "self,avg,maxmin,pf")]
        rewards: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        drops: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the aggregate CSVs of a finished run from its trace.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn load(config: &Path, seed: Option<u64>, drops: Option<usize>) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    if drops.is_some() {
        cfg.drops = drops;
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn print_summary(label: &str, s: &RunSummary) {
    let fmt = |m: Metric| match s.overall(m) {
        Some(sp) => format!("{:.3}/{:.3}/{:.3}", sp.mean, sp.min, sp.max),
        None => "-".into(),
    };
    println!(
        "{label}: {} drops, {} iterations; throughput mean/min/max {}; delay {}; reward {}",
        s.drops.len(),
        s.iterations,
        fmt(Metric::Throughput),
        fmt(Metric::Delay),
        fmt(Metric::Reward),
    );
    if !s.failed_drops.is_empty() {
        println!("  failed drops: {:?}", s.failed_drops);
    }
    for (p, f) in s.action_freq.iter().enumerate() {
        let freqs: Vec<String> = f
            .iter()
            .enumerate()
            .map(|(k, x)| format!("A{}={:.3}", k + 1, x))
            .collect();
        println!("  agent {p}: {}", freqs.join(" "));
    }
}

fn parse_all<T: std::str::FromStr<Err = Error>>(names: &[String]) -> Result<Vec<T>, Error> {
    names.iter().map(|s| s.trim().parse()).collect()
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            seed,
            drops,
            out,
        } => {
            let cfg = load(&config, seed, drops)?;
            let dir = out_dir(&cfg, out);
            let s = harness::execute(&cfg, &dir)?;
            print_summary(&format!("{} + {}", cfg.strategy, cfg.reward), &s);
            println!("wrote {}", dir.display());
        }
        Command::Sweep {
            config,
            strategies,
            rewards,
            seed,
            drops,
            out,
        } => {
            let cfg = load(&config, seed, drops)?;
            let strategies: Vec<StrategyKind> = parse_all(&strategies)?;
            let rewards: Vec<RewardKind> = parse_all(&rewards)?;
            let dir = out_dir(&cfg, out);
            for (st, rw, s) in harness::sweep(&cfg, &strategies, &rewards, &dir)? {
                print_summary(&format!("{st} + {rw}"), &s);
            }
            println!("wrote {}", dir.join("sweep.csv").display());
        }
        Command::Report { input } => {
            let s = harness::report(&input)?;
            print_summary(&input.display().to_string(), &s);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.is_validation() { 2 } else { 1 };
            eprintln!("error: {:#}", anyhow::Error::new(e).context("cmab failed"));
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn out_dir_precedence() {
        let cfg = ExperimentConfig {
            output_dir: Some("a".into()),
            ..Default::default()
        };
        assert_eq!(out_dir(&cfg, Some("b".into())), PathBuf::from("b"));
        assert_eq!(out_dir(&cfg, None), PathBuf::from("a"));
        assert_eq!(out_dir(&ExperimentConfig::default(), None), PathBuf::from("out"));
    }
}
