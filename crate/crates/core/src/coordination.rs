//! Individual and shared rewards under perfect monitoring.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

pub const DEFAULT_PF_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    #[serde(rename = "self")]
    SelfInterest,
    Avg,
    MaxMin,
    Pf,
}

impl RewardKind {
    pub const ALL: [RewardKind; 4] = [
        RewardKind::SelfInterest,
        RewardKind::Avg,
        RewardKind::MaxMin,
        RewardKind::Pf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RewardKind::SelfInterest => "self",
            RewardKind::Avg => "avg",
            RewardKind::MaxMin => "maxmin",
            RewardKind::Pf => "pf",
        }
    }
}

impl std::str::FromStr for RewardKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RewardKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::validation("reward", format!("unknown reward strategy `{s}`")))
    }
}

impl std::fmt::Display for RewardKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardStrategy {
    pub kind: RewardKind,
    pub pf_floor: f64,
}

impl RewardStrategy {
    pub fn new(kind: RewardKind, pf_floor: f64) -> Result<Self> {
        ensure(
            pf_floor.is_finite() && pf_floor > 0.0,
            "pf_floor",
            "must be finite and > 0",
        )?;
        Ok(RewardStrategy { kind, pf_floor })
    }

    pub fn is_shared(&self) -> bool {
        self.kind != RewardKind::SelfInterest
    }
}

/// Throughput normalized by the isolation throughput, clamped to [0, 1].
pub fn self_reward(throughput_mbps: f64, isolation_mbps: f64) -> Result<f64> {
    ensure(
        isolation_mbps > 0.0,
        "isolation_mbps",
        "isolation throughput must be positive",
    )?;
    Ok((throughput_mbps / isolation_mbps).clamp(0.0, 1.0))
}

/// The common scalar of a shared strategy. `None` under SELF, where there is
/// no common value, and for an empty list.
pub fn shared_reward(strategy: &RewardStrategy, individual: &[f64]) -> Option<f64> {
    if individual.is_empty() {
        return None;
    }
    match strategy.kind {
        RewardKind::SelfInterest => None,
        RewardKind::Avg => Some(individual.iter().sum::<f64>() / individual.len() as f64),
        RewardKind::MaxMin => Some(individual.iter().cloned().fold(f64::INFINITY, f64::min)),
        RewardKind::Pf => Some(individual.iter().map(|r| r.max(strategy.pf_floor).ln()).sum()),
    }
}

/// Reward each agent learns from.
pub fn distribute(strategy: &RewardStrategy, individual: &[f64]) -> Vec<f64> {
    match shared_reward(strategy, individual) {
        Some(r) => vec![r; individual.len()],
        None => individual.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strat(kind: RewardKind) -> RewardStrategy {
        RewardStrategy::new(kind, DEFAULT_PF_FLOOR).unwrap()
    }

    #[test]
    fn self_reward_examples() {
        assert_eq!(self_reward(60.0, 60.0).unwrap(), 1.0);
        assert_eq!(self_reward(0.0, 60.0).unwrap(), 0.0);
        assert_eq!(self_reward(30.0, 60.0).unwrap(), 0.5);
        assert_eq!(self_reward(70.0, 60.0).unwrap(), 1.0);
        assert!(self_reward(10.0, 0.0).unwrap_err().is_validation());
    }

    #[test]
    fn shared_examples() {
        assert_eq!(shared_reward(&strat(RewardKind::Avg), &[0.5, 1.0]), Some(0.75));
        assert_eq!(shared_reward(&strat(RewardKind::MaxMin), &[0.5, 1.0]), Some(0.5));
        let pf = shared_reward(&strat(RewardKind::Pf), &[0.5, 0.5]).unwrap();
        assert!((pf - 2.0 * 0.5f64.ln()).abs() < 1e-15);
        assert!((pf + 1.3863).abs() < 1e-4);
        assert_eq!(shared_reward(&strat(RewardKind::SelfInterest), &[0.5]), None);
        assert_eq!(shared_reward(&strat(RewardKind::Avg), &[]), None);
    }

    #[test]
    fn distribute_examples() {
        assert_eq!(distribute(&strat(RewardKind::Avg), &[0.2, 0.8]), vec![0.5, 0.5]);
        assert_eq!(
            distribute(&strat(RewardKind::SelfInterest), &[0.2, 0.8]),
            vec![0.2, 0.8]
        );
        let pf = distribute(&strat(RewardKind::Pf), &[0.0, 1.0]);
        assert!(pf[0] <= 1e-6f64.ln());
        assert!((pf[0] + 13.8155).abs() < 1e-4);
        assert_eq!(pf[0].to_bits(), pf[1].to_bits());
    }

    #[test]
    fn names_round_trip() {
        for k in RewardKind::ALL {
            assert_eq!(k.name().parse::<RewardKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.name()));
        }
        assert!("median".parse::<RewardKind>().is_err());
        assert!(RewardStrategy::new(RewardKind::Pf, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn bounds_and_permutation(mut r in proptest::collection::vec(0.0f64..=1.0, 1..10)) {
            let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let avg = shared_reward(&strat(RewardKind::Avg), &r).unwrap();
            let mm = shared_reward(&strat(RewardKind::MaxMin), &r).unwrap();
            let pf = shared_reward(&strat(RewardKind::Pf), &r).unwrap();
            prop_assert!(avg >= lo - 1e-12 && avg <= hi + 1e-12);
            prop_assert!(mm >= lo && mm <= hi);
            prop_assert!(pf <= 0.0);
            r.reverse();
            prop_assert!((shared_reward(&strat(RewardKind::Avg), &r).unwrap() - avg).abs() < 1e-12);
            prop_assert_eq!(shared_reward(&strat(RewardKind::MaxMin), &r).unwrap(), mm);
            prop_assert!((shared_reward(&strat(RewardKind::Pf), &r).unwrap() - pf).abs() < 1e-9);
        }

        #[test]
        fn equal_rewards_collapse(v in 0.0f64..=1.0, n in 1usize..10) {
            let r = vec![v; n];
            prop_assert_eq!(shared_reward(&strat(RewardKind::MaxMin), &r), Some(v));
            prop_assert!((shared_reward(&strat(RewardKind::Avg), &r).unwrap() - v).abs() < 1e-15);
        }

        #[test]
        fn pf_monotone(r in proptest::collection::vec(0.0f64..=1.0, 1..6), k in 0usize..6, bump in 0.0f64..1.0) {
            let k = k % r.len();
            let mut up = r.clone();
            up[k] += bump;
            let s = strat(RewardKind::Pf);
            prop_assert!(shared_reward(&s, &up).unwrap() >= shared_reward(&s, &r).unwrap());
        }

        #[test]
        fn shared_rewards_identical(r in proptest::collection::vec(0.0f64..=1.0, 1..10)) {
            for kind in [RewardKind::Avg, RewardKind::MaxMin, RewardKind::Pf] {
                let d = distribute(&strat(kind), &r);
                prop_assert!(d.iter().all(|x| x.to_bits() == d[0].to_bits()));
            }
        }
    }
}
