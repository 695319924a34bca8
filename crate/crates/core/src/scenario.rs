//! Deployments, radio/MAC parameters, action spaces and the scenario file.
//!
//! Defaults follow the reference 802.11ax setup: 5 GHz, 20 MHz, 3.2 µs GI,
//! -95 dBm noise, 20 dBm transmit power, -82 dBm CCA, log-distance path loss
//! with PL0 = 5 dB, exponent 4.4, 9.5 dB shadowing and 30 dB obstacle factor,
//! 5.484 ms TXOP, 64-frame A-MPDU of 1500-byte frames, CW0 = 16 and CW
//! exponents 1..5.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::radio::McsTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub carrier_freq_ghz: f64,
    pub bandwidth_mhz: f64,
    pub guard_interval_us: f64,
    pub noise_dbm: f64,
    pub default_tx_power_dbm: f64,
    pub default_cca_dbm: f64,
    pub spatial_streams: u32,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub capture_threshold_db: f64,
    pub pl0_db: f64,
    pub pathloss_exponent: f64,
    pub shadowing_db: f64,
    pub obstacles_db: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        RadioParams {
            carrier_freq_ghz: 5.0,
            bandwidth_mhz: 20.0,
            guard_interval_us: 3.2,
            noise_dbm: -95.0,
            default_tx_power_dbm: 20.0,
            default_cca_dbm: -82.0,
            spatial_streams: 1,
            tx_gain_dbi: 0.0,
            rx_gain_dbi: 0.0,
            capture_threshold_db: 10.0,
            pl0_db: 5.0,
            pathloss_exponent: 4.4,
            shadowing_db: 9.5,
            obstacles_db: 30.0,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("carrier_freq_ghz", self.carrier_freq_ghz),
            ("bandwidth_mhz", self.bandwidth_mhz),
            ("guard_interval_us", self.guard_interval_us),
            ("noise_dbm", self.noise_dbm),
            ("default_tx_power_dbm", self.default_tx_power_dbm),
            ("default_cca_dbm", self.default_cca_dbm),
            ("tx_gain_dbi", self.tx_gain_dbi),
            ("rx_gain_dbi", self.rx_gain_dbi),
            ("capture_threshold_db", self.capture_threshold_db),
            ("pl0_db", self.pl0_db),
            ("pathloss_exponent", self.pathloss_exponent),
            ("shadowing_db", self.shadowing_db),
            ("obstacles_db", self.obstacles_db),
        ];
        for (name, v) in fields {
            ensure(v.is_finite(), format!("radio.{name}"), "must be finite")?;
        }
        ensure(
            self.noise_dbm < self.default_cca_dbm,
            "radio.noise_dbm",
            format!(
                "noise floor {} dBm must lie below the CCA level {} dBm",
                self.noise_dbm, self.default_cca_dbm
            ),
        )?;
        ensure(self.pathloss_exponent > 0.0, "radio.pathloss_exponent", "must be > 0")?;
        ensure(self.bandwidth_mhz > 0.0, "radio.bandwidth_mhz", "must be > 0")?;
        // The OFDM rate constants (234 data subcarriers, 12.8 µs symbol) only hold at 20 MHz.
        ensure(
            self.bandwidth_mhz == 20.0,
            "radio.bandwidth_mhz",
            "only 20 MHz channels are supported",
        )?;
        ensure(self.guard_interval_us > 0.0, "radio.guard_interval_us", "must be > 0")?;
        ensure(self.spatial_streams >= 1, "radio.spatial_streams", "must be >= 1")?;
        ensure(self.shadowing_db >= 0.0, "radio.shadowing_db", "must be >= 0")?;
        ensure(self.obstacles_db >= 0.0, "radio.obstacles_db", "must be >= 0")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacParams {
    pub txop_limit_us: f64,
    pub ampdu_max: u32,
    pub data_len_bytes: u32,
    pub cw0: u32,
    pub cwe_min: u32,
    pub cwe_max: u32,
    pub slot_us: f64,
    /// Fixed per-TXOP cost standing in for preambles, inter-frame spaces and the block ack.
    pub overhead_us_per_txop: f64,
}

impl Default for MacParams {
    fn default() -> Self {
        MacParams {
            txop_limit_us: 5484.0,
            ampdu_max: 64,
            data_len_bytes: 1500,
            cw0: 16,
            cwe_min: 1,
            cwe_max: 5,
            slot_us: 9.0,
            overhead_us_per_txop: 100.0,
        }
    }
}

impl MacParams {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.txop_limit_us.is_finite() && self.txop_limit_us > 0.0,
            "mac.txop_limit_us",
            "must be finite and > 0",
        )?;
        ensure(self.ampdu_max >= 1, "mac.ampdu_max", "must be >= 1")?;
        ensure(self.cw0 >= 2, "mac.cw0", "must be >= 2")?;
        ensure(
            self.cwe_min <= self.cwe_max,
            "mac.cwe_min",
            format!("cwe_min {} exceeds cwe_max {}", self.cwe_min, self.cwe_max),
        )?;
        ensure(
            u64::from(self.cw0) << self.cwe_max <= u64::from(u32::MAX),
            "mac.cwe_max",
            "contention window overflows",
        )?;
        ensure(
            self.slot_us.is_finite() && self.slot_us > 0.0,
            "mac.slot_us",
            "must be finite and > 0",
        )?;
        ensure(
            self.overhead_us_per_txop.is_finite()
                && self.overhead_us_per_txop >= 0.0
                && self.overhead_us_per_txop < self.txop_limit_us,
            "mac.overhead_us_per_txop",
            "must be finite, >= 0 and below the TXOP limit",
        )?;
        Ok(())
    }
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position(pub f64, pub f64);

impl Position {
    pub fn distance(self, other: Position) -> f64 {
        (self.0 - other.0).hypot(self.1 - other.1)
    }

    fn is_finite(self) -> bool {
        self.0.is_finite() && self.1.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bss {
    pub id: usize,
    pub ap_pos: Position,
    /// Downlink traffic is served round-robin across these stations.
    pub sta_pos: Vec<Position>,
    pub channel: u32,
}

impl Bss {
    fn validate(&self, at: &str) -> Result<()> {
        ensure(
            !self.sta_pos.is_empty(),
            format!("{at}.sta_pos"),
            "at least one STA is required",
        )?;
        ensure(self.ap_pos.is_finite(), format!("{at}.ap_pos"), "must be finite")?;
        for (k, sta) in self.sta_pos.iter().enumerate() {
            ensure(sta.is_finite(), format!("{at}.sta_pos[{k}]"), "must be finite")?;
        }
        ensure(
            self.channel >= 1,
            format!("{at}.channel"),
            "channels are numbered from 1",
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub bsses: Vec<Bss>,
    pub radio: RadioParams,
    pub mac: MacParams,
    #[serde(default)]
    pub mcs: McsTable,
}

impl Deployment {
    /// Validates all invariants and orders BSSs by id.
    pub fn new(bsses: Vec<Bss>, radio: RadioParams, mac: MacParams, mcs: McsTable) -> Result<Self> {
        let mut dep = Deployment { bsses, radio, mac, mcs };
        dep.validate()?;
        dep.bsses.sort_by_key(|b| b.id);
        Ok(dep)
    }

    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        self.mac.validate()?;
        self.mcs.validate()?;
        ensure(!self.bsses.is_empty(), "bsses", "at least one BSS is required")?;
        let mut seen = BTreeSet::new();
        for (i, b) in self.bsses.iter().enumerate() {
            let at = format!("bsses[{i}]");
            b.validate(&at)?;
            if !seen.insert(b.id) {
                return Err(Error::validation(
                    format!("{at}.id"),
                    format!("duplicate BSS id {}", b.id),
                ));
            }
        }
        if let Some(missing) = (0..self.bsses.len()).find(|id| !seen.contains(id)) {
            return Err(Error::validation(
                "bsses",
                format!("BSS ids must be contiguous from 0; id {missing} is missing"),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.bsses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bsses.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub tx_power_dbm: f64,
    pub pd_dbm: f64,
}

impl Action {
    pub fn new(tx_power_dbm: f64, pd_dbm: f64) -> Self {
        Action { tx_power_dbm, pd_dbm }
    }
}

/// Ordered per-agent action set. Index 0 is A1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    actions: Vec<Action>,
}

impl ActionSpace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<Action> {
        self.actions.get(index).copied()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn index_of(&self, action: Action) -> Option<usize> {
        self.actions.iter().position(|a| *a == action)
    }

    pub fn validate(&self, radio: &RadioParams) -> Result<()> {
        for (k, a) in self.actions.iter().enumerate() {
            ensure(
                a.pd_dbm >= radio.noise_dbm,
                format!("actions[{k}].pd_dbm"),
                format!("PD {} dBm lies below the noise floor {} dBm", a.pd_dbm, radio.noise_dbm),
            )?;
        }
        Ok(())
    }
}

/// Cartesian product of PD and power levels, ordered by transmit power
/// ascending and then by PD descending (so the least sensitive PD comes first).
pub fn enumerate_actions(pd_levels: &[f64], power_levels: &[f64]) -> Result<ActionSpace> {
    fn checked_levels(levels: &[f64], path: &str) -> Result<()> {
        ensure(!levels.is_empty(), path, "at least one level is required")?;
        for (k, v) in levels.iter().enumerate() {
            ensure(v.is_finite(), format!("{path}[{k}]"), "must be finite")?;
            if levels[..k].contains(v) {
                return Err(Error::validation(
                    format!("{path}[{k}]"),
                    format!("duplicate level {v}"),
                ));
            }
        }
        Ok(())
    }
    checked_levels(pd_levels, "actions.pd_dbm")?;
    checked_levels(power_levels, "actions.tx_power_dbm")?;

    let mut powers = power_levels.to_vec();
    powers.sort_by(f64::total_cmp);
    let mut pds = pd_levels.to_vec();
    pds.sort_by(|a, b| b.total_cmp(a));

    let actions = powers
        .iter()
        .flat_map(|&p| pds.iter().map(move |&pd| Action::new(p, pd)))
        .collect();
    Ok(ActionSpace { actions })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub side_m: f64,
    pub coverage_diameter_m: f64,
    pub freq_reuse: u32,
    pub drops: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            rows: 3,
            cols: 3,
            side_m: 20.0,
            coverage_diameter_m: 3.0,
            freq_reuse: 3,
            drops: 20,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.rows * self.cols >= 1,
            "grid.rows",
            "grid needs at least one cubicle",
        )?;
        ensure(
            self.side_m.is_finite() && self.side_m > 0.0,
            "grid.side_m",
            "must be finite and > 0",
        )?;
        let cell = self.side_m / self.rows.max(self.cols) as f64;
        ensure(
            self.coverage_diameter_m >= 0.0 && self.coverage_diameter_m < cell,
            "grid.coverage_diameter_m",
            format!("must be in [0, {cell}) so coverage disks fit their cubicles"),
        )?;
        ensure(self.freq_reuse >= 1, "grid.freq_reuse", "must be >= 1")?;
        ensure(self.drops >= 1, "grid.drops", "must be >= 1")?;
        Ok(())
    }

    pub fn ap_position(&self, row: usize, col: usize) -> Position {
        let w = self.side_m / self.cols as f64;
        let h = self.side_m / self.rows as f64;
        Position((col as f64 + 0.5) * w, (row as f64 + 0.5) * h)
    }
}

/// One random drop: an AP at every cubicle center (row-major ids), one STA
/// uniform in the coverage disk, and a channel uniform over 1..=freq_reuse.
pub fn generate_grid_drop<R: Rng + ?Sized>(
    spec: &GridSpec,
    radio: &RadioParams,
    mac: &MacParams,
    rng: &mut R,
) -> Deployment {
    let radius = spec.coverage_diameter_m / 2.0;
    let mut bsses = Vec::with_capacity(spec.rows * spec.cols);
    for row in 0..spec.rows {
        for col in 0..spec.cols {
            let ap = spec.ap_position(row, col);
            let r = radius * rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            let sta = Position(ap.0 + r * theta.cos(), ap.1 + r * theta.sin());
            let channel = rng.random_range(1..=spec.freq_reuse);
            bsses.push(Bss {
                id: bsses.len(),
                ap_pos: ap,
                sta_pos: vec![sta],
                channel,
            });
        }
    }
    Deployment {
        bsses,
        radio: radio.clone(),
        mac: mac.clone(),
        mcs: McsTable::default(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionLevels {
    pub pd_dbm: Vec<f64>,
    pub tx_power_dbm: Vec<f64>,
}

impl Default for ActionLevels {
    fn default() -> Self {
        ActionLevels {
            pd_dbm: vec![-72.0, -82.0],
            tx_power_dbm: vec![10.0, 20.0],
        }
    }
}

/// On-disk scenario document. Everything except the layout (`bsses` or `grid`) is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub radio: RadioParams,
    #[serde(default)]
    pub mac: MacParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcs_thresholds_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bsses: Option<Vec<Bss>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub actions: ActionLevels,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Layout {
    Explicit(Deployment),
    Grid(GridSpec),
}

/// A validated scenario: layout, radio/MAC parameters and the per-agent action space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub layout: Layout,
    pub radio: RadioParams,
    pub mac: MacParams,
    pub mcs: McsTable,
    pub actions: ActionSpace,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ScenarioFile = serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        file.radio.validate()?;
        file.mac.validate()?;
        let mcs = match &file.mcs_thresholds_db {
            Some(t) => McsTable::from_thresholds(t)?,
            None => McsTable::default(),
        };
        let actions = enumerate_actions(&file.actions.pd_dbm, &file.actions.tx_power_dbm)?;
        actions.validate(&file.radio)?;
        let layout = match (file.bsses, file.grid) {
            (Some(bsses), None) => Layout::Explicit(Deployment::new(
                bsses,
                file.radio.clone(),
                file.mac.clone(),
                mcs.clone(),
            )?),
            (None, Some(grid)) => {
                grid.validate()?;
                Layout::Grid(grid)
            }
            (Some(_), Some(_)) => return Err(Error::validation("grid", "give either `bsses` or `grid`, not both")),
            (None, None) => return Err(Error::validation("bsses", "one of `bsses` or `grid` is required")),
        };
        Ok(Scenario {
            layout,
            radio: file.radio,
            mac: file.mac,
            mcs,
            actions,
        })
    }

    pub fn n_bss(&self) -> usize {
        match &self.layout {
            Layout::Explicit(d) => d.len(),
            Layout::Grid(g) => g.rows * g.cols,
        }
    }

    /// Drops configured by the layout (1 for explicit deployments).
    pub fn default_drops(&self) -> usize {
        match &self.layout {
            Layout::Explicit(_) => 1,
            Layout::Grid(g) => g.drops,
        }
    }

    /// Deployment for one drop. Explicit layouts ignore the stream.
    pub fn deployment<R: Rng + ?Sized>(&self, rng: &mut R) -> Deployment {
        match &self.layout {
            Layout::Explicit(d) => d.clone(),
            Layout::Grid(g) => {
                let mut d = generate_grid_drop(g, &self.radio, &self.mac, rng);
                d.mcs = self.mcs.clone();
                d
            }
        }
    }
}

/// Loads an explicit-layout scenario file as a validated deployment.
pub fn load_deployment(path: impl AsRef<Path>) -> Result<Deployment> {
    match Scenario::load(path)?.layout {
        Layout::Explicit(d) => Ok(d),
        Layout::Grid(_) => Err(Error::validation(
            "grid",
            "grid scenarios are generated per drop; load them with Scenario::load",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    #[test]
    fn toy_action_labels() {
        let space = enumerate_actions(&[-72.0, -82.0], &[10.0, 20.0]).unwrap();
        let expected = [(10.0, -72.0), (10.0, -82.0), (20.0, -72.0), (20.0, -82.0)];
        assert_eq!(space.len(), 4);
        for (k, (p, pd)) in expected.into_iter().enumerate() {
            assert_eq!(space.get(k), Some(Action::new(p, pd)), "A{}", k + 1);
        }
    }

    #[test]
    fn ordering_ignores_input_order() {
        let a = enumerate_actions(&[-82.0, -72.0], &[20.0, 10.0]).unwrap();
        let b = enumerate_actions(&[-72.0, -82.0], &[10.0, 20.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singleton_and_larger_products() {
        let one = enumerate_actions(&[-82.0], &[20.0]).unwrap();
        assert_eq!(one.actions(), &[Action::new(20.0, -82.0)]);

        let twelve = enumerate_actions(&[-62.0, -72.0, -82.0], &[5.0, 10.0, 15.0, 20.0]).unwrap();
        assert_eq!(twelve.len(), 12);
        assert_eq!(twelve.get(0), Some(Action::new(5.0, -62.0)));
        assert_eq!(twelve.get(2), Some(Action::new(5.0, -82.0)));
        assert_eq!(twelve.get(3), Some(Action::new(10.0, -62.0)));
        assert_eq!(twelve.get(11), Some(Action::new(20.0, -82.0)));
    }

    #[test]
    fn duplicate_or_empty_levels_rejected() {
        let err = enumerate_actions(&[-72.0, -72.0], &[10.0]).unwrap_err();
        assert!(matches!(err, Error::Validation { ref path, .. } if path == "actions.pd_dbm[1]"));
        assert!(enumerate_actions(&[], &[10.0]).is_err());
        assert!(enumerate_actions(&[-72.0], &[f64::NAN]).is_err());
    }

    #[test]
    fn grid_centers() {
        let spec = GridSpec::default();
        let d = generate_grid_drop(
            &spec,
            &RadioParams::default(),
            &MacParams::default(),
            &mut rng_from_seed(1),
        );
        assert_eq!(d.len(), 9);
        let centers = [10.0 / 3.0, 10.0, 50.0 / 3.0];
        for (i, b) in d.bsses.iter().enumerate() {
            assert_eq!(b.id, i);
            assert!((b.ap_pos.0 - centers[i % 3]).abs() < 1e-12);
            assert!((b.ap_pos.1 - centers[i / 3]).abs() < 1e-12);
            assert!((1..=3).contains(&b.channel));
        }

        let single = GridSpec {
            rows: 1,
            cols: 1,
            ..GridSpec::default()
        };
        let d = generate_grid_drop(
            &single,
            &RadioParams::default(),
            &MacParams::default(),
            &mut rng_from_seed(1),
        );
        assert_eq!(d.bsses[0].ap_pos, Position(10.0, 10.0));
    }

    #[test]
    fn grid_drop_reproducible() {
        let spec = GridSpec::default();
        let gen = |seed| {
            let d = generate_grid_drop(
                &spec,
                &RadioParams::default(),
                &MacParams::default(),
                &mut rng_from_seed(seed),
            );
            serde_json::to_vec(&d).unwrap()
        };
        assert_eq!(gen(99), gen(99));
        assert_ne!(gen(99), gen(100));
    }

    #[test]
    fn grid_validation() {
        let bad = GridSpec {
            coverage_diameter_m: 7.0,
            ..GridSpec::default()
        };
        assert!(bad.validate().is_err());
        let bad = GridSpec {
            rows: 0,
            ..GridSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn radio_and_mac_invariants() {
        assert!(RadioParams::default().validate().is_ok());
        assert!(MacParams::default().validate().is_ok());
        let r = RadioParams {
            noise_dbm: -80.0,
            ..RadioParams::default()
        };
        assert!(matches!(r.validate(), Err(Error::Validation { ref path, .. }) if path == "radio.noise_dbm"));
        let r = RadioParams {
            bandwidth_mhz: 40.0,
            ..RadioParams::default()
        };
        assert!(r.validate().is_err());
        let m = MacParams {
            cwe_min: 6,
            ..MacParams::default()
        };
        assert!(m.validate().is_err());
        let m = MacParams {
            cw0: 1,
            ..MacParams::default()
        };
        assert!(m.validate().is_err());
    }

    #[test]
    fn scenario_defaults_and_errors() {
        let json = r#"{"bsses":[{"id":0,"ap_pos":[0,0],"sta_pos":[[1,0]],"channel":1}]}"#;
        let s = Scenario::from_file(serde_json::from_str(json).unwrap()).unwrap();
        assert_eq!(s.mac, MacParams::default());
        assert_eq!(s.radio, RadioParams::default());
        assert_eq!(s.actions.len(), 4);

        let partial = r#"{"mac":{"ampdu_max":32},"bsses":[{"id":0,"ap_pos":[0,0],"sta_pos":[[1,0]],"channel":1}]}"#;
        let s = Scenario::from_file(serde_json::from_str(partial).unwrap()).unwrap();
        assert_eq!(s.mac.ampdu_max, 32);
        assert_eq!(s.mac.cw0, 16);

        let dup = r#"{"bsses":[{"id":0,"ap_pos":[0,0],"sta_pos":[[1,0]],"channel":1},
                               {"id":0,"ap_pos":[5,0],"sta_pos":[[6,0]],"channel":1}]}"#;
        let err = Scenario::from_file(serde_json::from_str(dup).unwrap()).unwrap_err();
        assert!(err.to_string().contains("duplicate BSS id 0"), "{err}");

        let gap = r#"{"bsses":[{"id":1,"ap_pos":[0,0],"sta_pos":[[1,0]],"channel":1}]}"#;
        assert!(Scenario::from_file(serde_json::from_str(gap).unwrap()).is_err());

        let nosta = r#"{"bsses":[{"id":0,"ap_pos":[0,0],"sta_pos":[],"channel":1}]}"#;
        assert!(Scenario::from_file(serde_json::from_str(nosta).unwrap()).is_err());

        let low_pd = r#"{"actions":{"pd_dbm":[-99],"tx_power_dbm":[20]},
                         "bsses":[{"id":0,"ap_pos":[0,0],"sta_pos":[[1,0]],"channel":1}]}"#;
        assert!(Scenario::from_file(serde_json::from_str(low_pd).unwrap()).is_err());

        assert!(Scenario::from_file(ScenarioFile::default()).is_err());
    }

    proptest! {
        #[test]
        fn actions_biject_onto_product(
            pds in proptest::collection::btree_set(-95i32..-40, 1..5),
            powers in proptest::collection::btree_set(0i32..30, 1..5),
        ) {
            let pds: Vec<f64> = pds.into_iter().map(f64::from).collect();
            let powers: Vec<f64> = powers.into_iter().map(f64::from).collect();
            let space = enumerate_actions(&pds, &powers).unwrap();
            prop_assert_eq!(space.len(), pds.len() * powers.len());
            for (k, a) in space.actions().iter().enumerate() {
                prop_assert_eq!(space.index_of(*a), Some(k));
                prop_assert!(pds.contains(&a.pd_dbm) && powers.contains(&a.tx_power_dbm));
            }
            for w in space.actions().windows(2) {
                let ordered = w[0].tx_power_dbm < w[1].tx_power_dbm
                    || (w[0].tx_power_dbm == w[1].tx_power_dbm && w[0].pd_dbm > w[1].pd_dbm);
                prop_assert!(ordered);
            }
        }

        #[test]
        fn stas_stay_inside_coverage(seed in any::<u64>(), diameter in 0.0f64..6.0) {
            let spec = GridSpec { coverage_diameter_m: diameter, ..GridSpec::default() };
            let d = generate_grid_drop(&spec, &RadioParams::default(), &MacParams::default(), &mut rng_from_seed(seed));
            for b in &d.bsses {
                prop_assert!(b.ap_pos.distance(b.sta_pos[0]) <= diameter / 2.0 + 1e-12);
            }
        }
    }
}
