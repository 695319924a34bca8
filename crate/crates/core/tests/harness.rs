use std::path::PathBuf;

use cmab_core::harness::{self, run_experiment, EnvKind, ExperimentConfig, StrategyKind, TRACE_HEADER};
use cmab_core::radio::rx_power_dbm;
use cmab_core::rng::rng_from_seed;
use cmab_core::{RewardKind, Scenario};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn toy_obss(strategy: StrategyKind, sim_time_s: f64) -> ExperimentConfig {
    ExperimentConfig {
        scenario: Some(root().join("scenarios/toy.json")),
        environment: EnvKind::Obss,
        strategy,
        sim_time_s,
        drops: Some(2),
        ..ExperimentConfig::default()
    }
}

#[test]
fn toy_fixture_link_budget() {
    let sc = Scenario::load(root().join("scenarios/toy.json")).unwrap();
    let dep = sc.deployment(&mut rng_from_seed(0));
    let d = dep.bsses[0].ap_pos.distance(dep.bsses[1].ap_pos);
    // At 20 dBm the other AP is heard between the two PD levels, at 10 dBm
    // below both.
    let loud = rx_power_dbm(20.0, d, &dep.radio);
    let quiet = rx_power_dbm(10.0, d, &dep.radio);
    assert!((loud - -75.015).abs() < 1e-3, "{loud}");
    assert!((quiet - -85.015).abs() < 1e-3, "{quiet}");
    assert!(loud < -72.0 && loud > -82.0);
    assert!(quiet < -82.0);
}

#[test]
fn static_baselines_play_one_action() {
    for (strategy, pd) in [(StrategyKind::StaticObssPd, -72.0), (StrategyKind::StaticDcf, -82.0)] {
        let cfg = toy_obss(strategy, 5.0);
        let exp = cfg.resolve().unwrap();
        let (traces, _) = run_experiment(&cfg).unwrap();
        let mut played: Vec<usize> = traces.iter().flat_map(|t| &t.rows).map(|r| r.action).collect();
        played.dedup();
        assert_eq!(played.len(), 1, "{strategy}");
        let a = exp.actions.get(played[0]).unwrap();
        assert_eq!(a.pd_dbm, pd);
    }
}

#[test]
fn action_counts_sum_to_iterations() {
    let cfg = toy_obss(StrategyKind::Thompson, 20.0);
    let (traces, summary) = run_experiment(&cfg).unwrap();
    assert_eq!(summary.iterations, 40);
    for t in &traces {
        assert!(t.error.is_none());
        for agent in 0..2 {
            let n = t.rows.iter().filter(|r| r.agent == agent).count();
            assert_eq!(n, summary.iterations);
        }
    }
    for f in &summary.action_freq {
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn every_reward_runs_on_both_environments() {
    for env in [EnvKind::Matrix, EnvKind::Obss] {
        for reward in RewardKind::ALL {
            let cfg = ExperimentConfig {
                environment: env,
                reward,
                ..toy_obss(StrategyKind::EGreedy, 5.0)
            };
            let (traces, summary) = run_experiment(&cfg).unwrap();
            assert!(traces.iter().all(|t| t.error.is_none()));
            assert_eq!(summary.drops.len(), 2);
        }
    }
}

#[test]
fn report_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    harness::execute(&toy_obss(StrategyKind::EGreedy, 10.0), dir.path()).unwrap();
    let files = [
        "summary.csv",
        "actions.csv",
        "rewards.csv",
        "cdf_throughput.csv",
        "cdf_delay.csv",
    ];
    let before: Vec<Vec<u8>> = files
        .iter()
        .map(|f| std::fs::read(dir.path().join(f)).unwrap())
        .collect();
    for f in files {
        std::fs::remove_file(dir.path().join(f)).unwrap();
    }
    harness::report(dir.path()).unwrap();
    for (f, b) in files.iter().zip(before) {
        assert_eq!(std::fs::read(dir.path().join(f)).unwrap(), b, "{f}");
    }
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), TRACE_HEADER.join(","));
    assert!(!dir.path().join("errors.csv").exists());
}

#[test]
fn shipped_configs_resolve() {
    for name in ["toy_matrix.json", "toy_obss.json", "grid9.json"] {
        let cfg = ExperimentConfig::load(root().join("configs").join(name)).unwrap();
        cfg.resolve().unwrap();
    }
}
