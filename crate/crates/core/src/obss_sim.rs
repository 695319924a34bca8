//! Slotted CSMA/CA with OBSS/PD spatial reuse.
//!
//! One call simulates one learning iteration: a fresh full-buffer downlink
//! run over `floor(duration / slot)` slots for a fixed joint (power, PD)
//! configuration. Within a slot each BSS is in exactly one of three states:
//! transmitting (airtime), deferring to co-channel traffic it senses above its
//! PD (the NAV proxy), or counting down its backoff.
//!
//! Each BSS draws its backoffs from its own stream, seeded from the caller's
//! stream in BSS order. The fast path skips runs of slots in which nothing
//! starts or ends. It shares the per-slot event logic with
//! [`Simulation::run_reference`], which steps every slot, so both consume
//! every stream in the same order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::radio::{phy_rate_mbps, rx_power_dbm, select_mcs, sinr_db};
use crate::rng::{rng_from_seed, SimRng};
use crate::scenario::{Action, Deployment, MacParams, RadioParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub throughput_mbps: f64,
    pub airtime_frac: f64,
    pub mean_access_delay_ms: f64,
    /// Proxy: share of slots spent deferring to sensed co-channel OBSS traffic.
    pub nav_frac: f64,
    pub tx_attempts: u64,
    pub tx_failures: u64,
}

/// One TXOP as scheduled by the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Txop {
    pub bss: usize,
    pub start_slot: u64,
    /// Exclusive.
    pub end_slot: u64,
    pub mcs: Option<usize>,
    pub success: bool,
}

/// Airtime of one MPDU in µs.
pub fn frame_airtime_us(mcs: usize, mac: &MacParams, radio: &RadioParams) -> f64 {
    f64::from(mac.data_len_bytes) * 8.0 / phy_rate_mbps(mcs, radio)
}

/// Frames aggregated into one TXOP at `mcs`.
pub fn ampdu_frames(mcs: usize, mac: &MacParams, radio: &RadioParams) -> u32 {
    let airtime = frame_airtime_us(mcs, mac, radio);
    let fit = if airtime > 0.0 {
        ((mac.txop_limit_us - mac.overhead_us_per_txop) / airtime).floor()
    } else {
        f64::INFINITY
    };
    fit.min(f64::from(mac.ampdu_max)) as u32
}

/// TXOP length in slots at `mcs`.
pub fn txop_slots(mcs: usize, mac: &MacParams, radio: &RadioParams) -> u64 {
    let n = ampdu_frames(mcs, mac, radio);
    let us = (mac.overhead_us_per_txop + f64::from(n) * frame_airtime_us(mcs, mac, radio)).min(mac.txop_limit_us);
    ((us / mac.slot_us).ceil() as u64).max(1)
}

pub fn simulate_iteration<R: Rng + ?Sized>(
    deployment: &Deployment,
    joint_action: &[Action],
    duration_s: f64,
    rng: &mut R,
) -> Result<Vec<IterationMetrics>> {
    Ok(Simulation::new(deployment, joint_action, duration_s)?.run(rng).metrics)
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub metrics: Vec<IterationMetrics>,
    pub txops: Vec<Txop>,
    pub n_slots: u64,
}

#[derive(Debug, Clone)]
struct Link {
    signal_dbm: f64,
    /// Received power at this STA from every AP (own entry unused).
    from_ap_dbm: Vec<f64>,
}

/// Precomputed geometry and parameters for one joint configuration.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    dep: &'a Deployment,
    n_slots: u64,
    duration_s: f64,
    /// `hears[i]` lists co-channel BSSs whose AP signal reaches AP `i` at or above its PD.
    hears: Vec<Vec<usize>>,
    cochannel: Vec<Vec<usize>>,
    links: Vec<Vec<Link>>,
}

#[derive(Debug, Clone, Default)]
struct BssState {
    backoff: u64,
    cw_exp: u32,
    tx_remaining: u64,
    txop_success: bool,
    next_sta: usize,
    released_at: u64,
    airtime: u64,
    nav: u64,
    bits: u64,
    attempts: u64,
    failures: u64,
    delay_slots: u64,
}

impl<'a> Simulation<'a> {
    pub fn new(dep: &'a Deployment, joint_action: &[Action], duration_s: f64) -> Result<Self> {
        let n = dep.len();
        ensure(
            joint_action.len() == n,
            "joint_action",
            format!("expected {n} actions, got {}", joint_action.len()),
        )?;
        ensure(
            duration_s.is_finite() && duration_s > 0.0,
            "duration_s",
            "must be finite and > 0",
        )?;
        let n_slots = (duration_s * 1e6 / dep.mac.slot_us).floor() as u64;
        if n_slots == 0 {
            return Err(Error::validation("duration_s", "shorter than one slot"));
        }
        let radio = &dep.radio;
        let cochannel: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i && dep.bsses[j].channel == dep.bsses[i].channel)
                    .collect()
            })
            .collect();
        let hears = (0..n)
            .map(|i| {
                cochannel[i]
                    .iter()
                    .copied()
                    .filter(|&j| {
                        let d = dep.bsses[j].ap_pos.distance(dep.bsses[i].ap_pos);
                        rx_power_dbm(joint_action[j].tx_power_dbm, d, radio) >= joint_action[i].pd_dbm
                    })
                    .collect()
            })
            .collect();
        let links = dep
            .bsses
            .iter()
            .enumerate()
            .map(|(i, b)| {
                b.sta_pos
                    .iter()
                    .map(|sta| Link {
                        signal_dbm: rx_power_dbm(joint_action[i].tx_power_dbm, b.ap_pos.distance(*sta), radio),
                        from_ap_dbm: dep
                            .bsses
                            .iter()
                            .enumerate()
                            .map(|(j, o)| rx_power_dbm(joint_action[j].tx_power_dbm, o.ap_pos.distance(*sta), radio))
                            .collect(),
                    })
                    .collect()
            })
            .collect();
        Ok(Simulation {
            dep,
            n_slots,
            duration_s,
            hears,
            cochannel,
            links,
        })
    }

    pub fn n_slots(&self) -> u64 {
        self.n_slots
    }

    /// Event-skipping run.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        self.run_streams(&mut self.streams(rng))
    }

    /// Slot-by-slot run; same results as [`Simulation::run`].
    pub fn run_reference<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        self.execute(&mut self.streams(rng), false)
    }

    /// Event-skipping run with explicit per-BSS backoff streams.
    pub fn run_streams(&self, streams: &mut [SimRng]) -> Outcome {
        self.execute(streams, true)
    }

    fn streams<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<SimRng> {
        (0..self.dep.len()).map(|_| rng_from_seed(rng.random())).collect()
    }

    fn execute(&self, streams: &mut [SimRng], skip: bool) -> Outcome {
        assert_eq!(streams.len(), self.dep.len(), "one backoff stream per BSS");
        let mac = &self.dep.mac;
        let n = self.dep.len();
        let mut st: Vec<BssState> = (0..n)
            .map(|_| BssState {
                cw_exp: mac.cwe_min,
                ..BssState::default()
            })
            .collect();
        for (s, rng) in st.iter_mut().zip(streams.iter_mut()) {
            s.backoff = draw_backoff(mac, s.cw_exp, rng);
        }
        let mut txops = Vec::new();
        let mut busy = vec![false; n];
        let mut slot = 0;
        while slot < self.n_slots {
            self.sense(&st, &mut busy);
            if skip {
                let quiet = self.quiet_slots(&st, &busy).min(self.n_slots - slot);
                if quiet > 0 {
                    for (s, &b) in st.iter_mut().zip(&busy) {
                        if s.tx_remaining > 0 {
                            s.tx_remaining -= quiet;
                            s.airtime += quiet;
                        } else if b {
                            s.nav += quiet;
                        } else {
                            s.backoff -= quiet;
                        }
                    }
                    slot += quiet;
                    continue;
                }
            }
            self.step(slot, &mut st, &busy, &mut txops, streams);
            slot += 1;
        }
        let metrics = st.iter().map(|s| self.metrics(s)).collect();
        Outcome {
            metrics,
            txops,
            n_slots: self.n_slots,
        }
    }

    fn sense(&self, st: &[BssState], busy: &mut [bool]) {
        for (i, b) in busy.iter_mut().enumerate() {
            *b = self.hears[i].iter().any(|&j| st[j].tx_remaining > 0);
        }
    }

    /// Slots before the next TXOP start or end, given the current carrier-sense state.
    fn quiet_slots(&self, st: &[BssState], busy: &[bool]) -> u64 {
        st.iter()
            .zip(busy)
            .map(|(s, &b)| {
                if s.tx_remaining > 0 {
                    s.tx_remaining - 1
                } else if b {
                    u64::MAX
                } else {
                    s.backoff
                }
            })
            .min()
            .unwrap_or(u64::MAX)
    }

    fn step(&self, slot: u64, st: &mut [BssState], busy: &[bool], txops: &mut Vec<Txop>, streams: &mut [SimRng]) {
        let mac = &self.dep.mac;
        let radio = &self.dep.radio;
        let mut starters = Vec::new();
        for (i, s) in st.iter_mut().enumerate() {
            if s.tx_remaining > 0 {
                continue;
            }
            if busy[i] {
                s.nav += 1;
            } else if s.backoff == 0 {
                starters.push(i);
            } else {
                s.backoff -= 1;
            }
        }
        for &i in &starters {
            let link = &self.links[i][st[i].next_sta];
            let interferers: Vec<f64> = self.cochannel[i]
                .iter()
                .filter(|&&j| st[j].tx_remaining > 0 || starters.contains(&j))
                .map(|&j| link.from_ap_dbm[j])
                .collect();
            let sinr = sinr_db(link.signal_dbm, &interferers, radio.noise_dbm);
            let mcs = select_mcs(sinr, &self.dep.mcs);
            let success = mcs.is_some() && sinr >= radio.capture_threshold_db;
            let m = mcs.unwrap_or(0);
            let len = txop_slots(m, mac, radio);
            txops.push(Txop {
                bss: i,
                start_slot: slot,
                end_slot: slot + len,
                mcs,
                success,
            });
            let s = &mut st[i];
            s.attempts += 1;
            if success {
                s.bits += u64::from(ampdu_frames(m, mac, radio)) * u64::from(mac.data_len_bytes) * 8;
            } else {
                s.failures += 1;
            }
            s.delay_slots += slot - s.released_at;
            s.tx_remaining = len;
            s.txop_success = success;
            s.next_sta = (s.next_sta + 1) % self.links[i].len();
        }
        for (s, rng) in st.iter_mut().zip(streams.iter_mut()) {
            if s.tx_remaining == 0 {
                continue;
            }
            s.airtime += 1;
            s.tx_remaining -= 1;
            if s.tx_remaining == 0 {
                s.cw_exp = if s.txop_success {
                    mac.cwe_min
                } else {
                    (s.cw_exp + 1).min(mac.cwe_max)
                };
                s.backoff = draw_backoff(mac, s.cw_exp, rng);
                s.released_at = slot + 1;
            }
        }
    }

    fn metrics(&self, s: &BssState) -> IterationMetrics {
        let slots = self.n_slots as f64;
        let mean_access_delay_ms = if s.attempts == 0 {
            self.duration_s * 1e3
        } else {
            s.delay_slots as f64 * self.dep.mac.slot_us / 1e3 / s.attempts as f64
        };
        IterationMetrics {
            throughput_mbps: s.bits as f64 / self.duration_s / 1e6,
            airtime_frac: s.airtime as f64 / slots,
            mean_access_delay_ms,
            nav_frac: s.nav as f64 / slots,
            tx_attempts: s.attempts,
            tx_failures: s.failures,
        }
    }
}

fn draw_backoff<R: Rng + ?Sized>(mac: &MacParams, cw_exp: u32, rng: &mut R) -> u64 {
    let cw = u64::from(mac.cw0) << cw_exp;
    rng.random_range(0..cw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::McsTable;
    use crate::rng::rng_from_seed;
    use crate::scenario::{Bss, Position};
    use proptest::prelude::*;

    fn bss(id: usize, ap: (f64, f64), sta: (f64, f64), channel: u32) -> Bss {
        Bss {
            id,
            ap_pos: Position(ap.0, ap.1),
            sta_pos: vec![Position(sta.0, sta.1)],
            channel,
        }
    }

    fn deployment(bsses: Vec<Bss>) -> Deployment {
        Deployment::new(bsses, RadioParams::default(), MacParams::default(), McsTable::default()).unwrap()
    }

    fn toy() -> Deployment {
        deployment(vec![
            bss(0, (0.0, 0.0), (-2.0, 0.0), 1),
            bss(1, (19.2, 0.0), (21.2, 0.0), 1),
        ])
    }

    const DCF: Action = Action {
        tx_power_dbm: 20.0,
        pd_dbm: -82.0,
    };

    #[test]
    fn frame_airtime_examples() {
        let (mac, radio) = (MacParams::default(), RadioParams::default());
        assert!((frame_airtime_us(11, &mac, &radio) - 12000.0 / 121.875).abs() < 1e-12);
        assert!((frame_airtime_us(11, &mac, &radio) - 98.4615).abs() < 1e-4);
        assert!((frame_airtime_us(0, &mac, &radio) - 1641.0256).abs() < 1e-4);
        let empty = MacParams {
            data_len_bytes: 0,
            ..MacParams::default()
        };
        assert_eq!(frame_airtime_us(5, &empty, &radio), 0.0);
    }

    #[test]
    fn aggregation_arithmetic() {
        let (mac, radio) = (MacParams::default(), RadioParams::default());
        // floor(5384 / 98.46) = 54 frames; 100 + 54 * 98.46 = 5416.9 µs -> 602 slots.
        assert_eq!(ampdu_frames(11, &mac, &radio), 54);
        assert_eq!(txop_slots(11, &mac, &radio), 602);
        // floor(5384 / 1641.03) = 3 frames at MCS 0.
        assert_eq!(ampdu_frames(0, &mac, &radio), 3);
        let small = MacParams {
            ampdu_max: 8,
            ..MacParams::default()
        };
        assert_eq!(ampdu_frames(11, &small, &radio), 8);
    }

    #[test]
    fn isolation_matches_slot_accounting() {
        let dep = deployment(vec![bss(0, (0.0, 0.0), (2.0, 0.0), 1)]);
        let m = simulate_iteration(&dep, &[DCF], 0.5, &mut rng_from_seed(5)).unwrap()[0];
        // Renewal cycle: mean backoff (CW 32) of 15.5 idle slots, then 602 TXOP slots of 54 MPDUs.
        let cycle = 15.5 + 602.0;
        let oracle_tput = 54.0 * 12000.0 / (cycle * 9.0);
        let oracle_air = 602.0 / cycle;
        assert!(m.airtime_frac >= 0.95, "{m:?}");
        assert!((m.throughput_mbps - oracle_tput).abs() / oracle_tput < 0.05, "{m:?}");
        assert!((m.airtime_frac - oracle_air).abs() < 0.01, "{m:?}");
        assert_eq!(m.nav_frac, 0.0);
        assert_eq!(m.tx_failures, 0);
    }

    #[test]
    fn fast_path_matches_reference() {
        let grid = deployment(vec![
            bss(0, (0.0, 0.0), (1.0, 0.5), 1),
            bss(1, (6.7, 0.0), (7.5, 0.2), 1),
            bss(2, (13.3, 0.0), (12.5, 1.0), 1),
            bss(3, (0.0, 6.7), (0.3, 7.7), 2),
            bss(4, (6.7, 6.7), (6.0, 6.0), 1),
        ]);
        let actions = [
            Action::new(20.0, -72.0),
            Action::new(10.0, -82.0),
            Action::new(20.0, -82.0),
            Action::new(10.0, -72.0),
            Action::new(20.0, -62.0),
        ];
        for seed in 0..5 {
            let sim = Simulation::new(&grid, &actions, 0.2).unwrap();
            let fast = sim.run(&mut rng_from_seed(seed));
            let slow = sim.run_reference(&mut rng_from_seed(seed));
            assert_eq!(fast.metrics, slow.metrics);
            assert_eq!(fast.txops, slow.txops);
        }
    }

    #[test]
    fn channel_isolation() {
        let a = bss(0, (0.0, 0.0), (-2.0, 0.0), 1);
        let mut b = bss(1, (5.0, 0.0), (7.0, 3.0), 2);
        let both = deployment(vec![a.clone(), b.clone()]);
        let joint = Simulation::new(&both, &[DCF, Action::new(10.0, -72.0)], 0.5)
            .unwrap()
            .run_streams(&mut [rng_from_seed(3), rng_from_seed(4)]);
        b.id = 0;
        let solo_a = deployment(vec![a]);
        let solo_b = deployment(vec![b]);
        let alone_a = Simulation::new(&solo_a, &[DCF], 0.5)
            .unwrap()
            .run_streams(&mut [rng_from_seed(3)]);
        let alone_b = Simulation::new(&solo_b, &[Action::new(10.0, -72.0)], 0.5)
            .unwrap()
            .run_streams(&mut [rng_from_seed(4)]);
        assert_eq!(joint.metrics[0], alone_a.metrics[0]);
        assert_eq!(joint.metrics[1], alone_b.metrics[0]);
    }

    #[test]
    fn symmetric_pair_shares_airtime() {
        let dep = deployment(vec![
            bss(0, (0.0, 0.0), (-2.0, 0.0), 1),
            bss(1, (10.0, 0.0), (12.0, 0.0), 1),
        ]);
        let sim = Simulation::new(&dep, &[DCF, DCF], 1.0).unwrap();
        let out = sim.run(&mut rng_from_seed(11));
        for m in &out.metrics {
            assert!((0.40..=0.55).contains(&m.airtime_frac), "{m:?}");
        }
    }

    #[test]
    fn starved_bss_reports_full_delay() {
        // Ten slots are shorter than most initial backoffs, so some BSSs never get access.
        let dep = toy();
        let mut starved = 0;
        for seed in 0..20 {
            let m = simulate_iteration(&dep, &[DCF, DCF], 90e-6, &mut rng_from_seed(seed)).unwrap();
            for x in m.iter().filter(|x| x.tx_attempts == 0) {
                starved += 1;
                assert!((x.mean_access_delay_ms - 0.09).abs() < 1e-12);
                assert_eq!(x.throughput_mbps, 0.0);
                assert_eq!(x.airtime_frac, 0.0);
            }
        }
        assert!(starved > 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let dep = toy();
        assert!(simulate_iteration(&dep, &[DCF], 0.5, &mut rng_from_seed(1)).is_err());
        assert!(simulate_iteration(&dep, &[DCF, DCF], 0.0, &mut rng_from_seed(1)).is_err());
        assert!(simulate_iteration(&dep, &[DCF, DCF], 1e-7, &mut rng_from_seed(1)).is_err());
    }

    fn arb_deployment() -> impl Strategy<Value = Deployment> {
        proptest::collection::vec(
            ((0.0f64..20.0, 0.0f64..20.0), (-1.5f64..1.5, -1.5f64..1.5), 1u32..3),
            1..5,
        )
        .prop_map(|v| {
            deployment(
                v.into_iter()
                    .enumerate()
                    .map(|(i, ((x, y), (dx, dy), ch))| bss(i, (x, y), (x + dx, y + dy), ch))
                    .collect(),
            )
        })
    }

    fn arb_action() -> impl Strategy<Value = Action> {
        (
            prop_oneof![Just(10.0), Just(20.0)],
            prop_oneof![Just(-62.0), Just(-72.0), Just(-82.0)],
        )
            .prop_map(|(p, pd)| Action::new(p, pd))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn slot_conservation(dep in arb_deployment(), acts in proptest::collection::vec(arb_action(), 5), seed in any::<u64>()) {
            let joint = &acts[..dep.len()];
            let sim = Simulation::new(&dep, joint, 0.05).unwrap();
            let out = sim.run(&mut rng_from_seed(seed));
            let quantum = 1.0 / out.n_slots as f64;
            for m in &out.metrics {
                prop_assert!(m.airtime_frac + m.nav_frac <= 1.0 + 1e-12);
                let idle = 1.0 - m.airtime_frac - m.nav_frac;
                prop_assert!(idle >= -quantum);
                prop_assert!(m.tx_failures <= m.tx_attempts);
                prop_assert!(m.throughput_mbps >= 0.0);
            }
            // Delivered bits are whole A-MPDUs.
            let (mac, radio) = (&dep.mac, &dep.radio);
            for (i, m) in out.metrics.iter().enumerate() {
                let bits: f64 = out.txops.iter()
                    .filter(|t| t.bss == i && t.success)
                    .map(|t| f64::from(ampdu_frames(t.mcs.unwrap(), mac, radio)) * f64::from(mac.data_len_bytes) * 8.0)
                    .sum();
                prop_assert!((m.throughput_mbps - bits / 0.05 / 1e6).abs() < 1e-9);
            }
        }

        #[test]
        fn fast_equals_reference(dep in arb_deployment(), acts in proptest::collection::vec(arb_action(), 5), seed in any::<u64>()) {
            let sim = Simulation::new(&dep, &acts[..dep.len()], 0.05).unwrap();
            let fast = sim.run(&mut rng_from_seed(seed));
            let slow = sim.run_reference(&mut rng_from_seed(seed));
            prop_assert_eq!(fast.metrics, slow.metrics);
            prop_assert_eq!(fast.txops, slow.txops);
        }

        #[test]
        fn deterministic(dep in arb_deployment(), acts in proptest::collection::vec(arb_action(), 5), seed in any::<u64>()) {
            let a = simulate_iteration(&dep, &acts[..dep.len()], 0.05, &mut rng_from_seed(seed)).unwrap();
            let b = simulate_iteration(&dep, &acts[..dep.len()], 0.05, &mut rng_from_seed(seed)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn dcf_has_no_overlap_between_sensing_pairs(dep in arb_deployment(), seed in any::<u64>()) {
            let joint = vec![DCF; dep.len()];
            let sim = Simulation::new(&dep, &joint, 0.05).unwrap();
            let out = sim.run(&mut rng_from_seed(seed));
            for a in &out.txops {
                for b in &out.txops {
                    if a.bss == b.bss || !sim.hears[b.bss].contains(&a.bss) || !sim.hears[a.bss].contains(&b.bss) {
                        continue;
                    }
                    let overlap = a.start_slot < b.end_slot && b.start_slot < a.end_slot;
                    // Only simultaneous backoff expiry can make mutually sensing TXOPs overlap.
                    prop_assert!(!overlap || a.start_slot == b.start_slot);
                }
            }
        }

        #[test]
        fn raising_pd_never_adds_nav(seed in any::<u64>(), power in prop_oneof![Just(10.0), Just(20.0)]) {
            let dep = toy();
            let low = [Action::new(20.0, -82.0), Action::new(power, -82.0)];
            let high = [Action::new(20.0, -72.0), Action::new(power, -82.0)];
            let a = simulate_iteration(&dep, &low, 0.05, &mut rng_from_seed(seed)).unwrap();
            let b = simulate_iteration(&dep, &high, 0.05, &mut rng_from_seed(seed)).unwrap();
            prop_assert!(b[0].nav_frac <= a[0].nav_frac);
        }
    }
}
