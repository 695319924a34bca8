//! Propagation, link budget, SINR, MCS selection and PHY rates.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::rng::rng_from_seed;
use crate::scenario::{Action, Deployment, RadioParams};

/// Data subcarriers of a 20 MHz HE channel.
const N_SD: f64 = 234.0;
/// OFDM symbol duration without guard interval, µs.
const T_DFT_US: f64 = 12.8;

/// (bits per subcarrier, coding rate) for MCS 0..11.
const MODULATION: [(u32, f64); 12] = [
    (1, 1.0 / 2.0),
    (2, 1.0 / 2.0),
    (2, 3.0 / 4.0),
    (4, 1.0 / 2.0),
    (4, 3.0 / 4.0),
    (6, 2.0 / 3.0),
    (6, 3.0 / 4.0),
    (6, 5.0 / 6.0),
    (8, 3.0 / 4.0),
    (8, 5.0 / 6.0),
    (10, 3.0 / 4.0),
    (10, 5.0 / 6.0),
];

/// Sensitivities of -82..-52 dBm against a -95 dBm noise floor.
pub const DEFAULT_MCS_THRESHOLDS_DB: [f64; 12] =
    [13.0, 16.0, 18.0, 21.0, 25.0, 29.0, 30.0, 31.0, 36.0, 38.0, 41.0, 43.0];

pub const MCS_COUNT: usize = 12;

/// Seed and horizon used to measure isolation throughput.
const ISOLATION_SEED: u64 = 0x1501;
const ISOLATION_HORIZON_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct McsTable {
    thresholds_db: Vec<f64>,
}

impl Default for McsTable {
    fn default() -> Self {
        McsTable {
            thresholds_db: DEFAULT_MCS_THRESHOLDS_DB.to_vec(),
        }
    }
}

impl McsTable {
    pub fn from_thresholds(thresholds_db: &[f64]) -> Result<Self> {
        let table = McsTable {
            thresholds_db: thresholds_db.to_vec(),
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        let path = "mcs_thresholds_db";
        ensure(
            self.thresholds_db.len() == MCS_COUNT,
            path,
            format!("expected {MCS_COUNT} thresholds, got {}", self.thresholds_db.len()),
        )?;
        ensure(self.thresholds_db.iter().all(|t| t.is_finite()), path, "must be finite")?;
        if let Some(k) = (1..MCS_COUNT).find(|&k| self.thresholds_db[k] <= self.thresholds_db[k - 1]) {
            return Err(Error::validation(
                format!("{path}[{k}]"),
                "thresholds must be strictly increasing",
            ));
        }
        Ok(())
    }

    pub fn thresholds_db(&self) -> &[f64] {
        &self.thresholds_db
    }

    pub fn modulation(mcs: usize) -> (u32, f64) {
        MODULATION[mcs]
    }
}

pub fn path_loss_db(distance_m: f64, radio: &RadioParams) -> f64 {
    let d = distance_m.max(1.0);
    radio.pl0_db
        + 10.0 * radio.pathloss_exponent * d.log10()
        + radio.shadowing_db / 2.0
        + (radio.obstacles_db / 2.0) * (d / 10.0)
}

pub fn rx_power_dbm(tx_dbm: f64, distance_m: f64, radio: &RadioParams) -> f64 {
    tx_dbm + radio.tx_gain_dbi + radio.rx_gain_dbi - path_loss_db(distance_m, radio)
}

/// Power sum in the linear domain. An empty list is zero power, i.e. `-inf` dBm.
pub fn combine_powers_dbm(levels: &[f64]) -> f64 {
    let mw: f64 = levels.iter().map(|l| 10f64.powf(l / 10.0)).sum();
    10.0 * mw.log10()
}

pub fn sinr_db(signal_dbm: f64, interferers: &[f64], noise_dbm: f64) -> f64 {
    if interferers.is_empty() {
        return signal_dbm - noise_dbm;
    }
    let mut all = Vec::with_capacity(interferers.len() + 1);
    all.extend_from_slice(interferers);
    all.push(noise_dbm);
    signal_dbm - combine_powers_dbm(&all)
}

/// Highest MCS whose threshold the SINR reaches, or `None` if the link cannot be decoded.
pub fn select_mcs(sinr_db: f64, table: &McsTable) -> Option<usize> {
    table.thresholds_db.iter().rposition(|&t| sinr_db >= t)
}

pub fn phy_rate_mbps(mcs: usize, radio: &RadioParams) -> f64 {
    let (bits, rc) = MODULATION[mcs];
    N_SD * f64::from(bits) * rc * f64::from(radio.spatial_streams) / (T_DFT_US + radio.guard_interval_us)
}

/// Throughput of `bss` with every other BSS silent, at the default transmit power and CCA.
///
/// Measured with the slotted simulator itself so that it carries the same MAC
/// overheads as the normalized throughputs it divides.
pub fn isolation_throughput_mbps(bss: usize, deployment: &Deployment) -> Result<f64> {
    let at = format!("bsses[{bss}]");
    let src = deployment
        .bsses
        .get(bss)
        .ok_or_else(|| Error::validation(at.clone(), "no such BSS"))?;
    let radio = &deployment.radio;
    for (k, sta) in src.sta_pos.iter().enumerate() {
        let rx = rx_power_dbm(radio.default_tx_power_dbm, src.ap_pos.distance(*sta), radio);
        let sinr = sinr_db(rx, &[], radio.noise_dbm);
        if select_mcs(sinr, &deployment.mcs).is_none() || sinr < radio.capture_threshold_db {
            return Err(Error::validation(
                format!("{at}.sta_pos[{k}]"),
                format!("STA is undecodable in isolation (SINR {sinr:.2} dB)"),
            ));
        }
    }
    let mut alone = src.clone();
    alone.id = 0;
    let single = Deployment {
        bsses: vec![alone],
        radio: radio.clone(),
        mac: deployment.mac.clone(),
        mcs: deployment.mcs.clone(),
    };
    let action = Action::new(radio.default_tx_power_dbm, radio.default_cca_dbm);
    let metrics = crate::obss_sim::simulate_iteration(
        &single,
        &[action],
        ISOLATION_HORIZON_S,
        &mut rng_from_seed(ISOLATION_SEED),
    )?;
    let gamma = metrics[0].throughput_mbps;
    ensure(gamma > 0.0, at, "isolation throughput is zero")?;
    Ok(gamma)
}
