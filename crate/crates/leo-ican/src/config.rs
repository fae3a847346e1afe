//! TOML experiment configuration.
//!
//! ```toml
//! seeds = 20            # seeds 0..20 unless overridden on the command line
//! schemes = ["cfg:dc", "cfg:zf", "gdop_greedy:dc", "cfg:mrt"]
//!
//! [scenario]
//! satellites = 7
//! cells = 7
//! altitude_km = 600.0
//! cell_radius_km = 43.3
//! min_separation_deg = 15.0
//! min_elevation_deg = 50.0
//!
//! [radio]
//! frequency_ghz = 4.0
//! bandwidth_mhz = 50.0
//! beam_power_dbw = 26.0
//! noise_density_dbm_hz = -174.0
//! atmosphere_loss_db = 0.5
//! antennas_x = 4
//! antennas_y = 4
//!
//! [selection]
//! serving = 4
//! gdop_threshold = 6.0
//! multi_pass = false
//! max_passes = 20
//! # preference_cap = 10
//!
//! [dc]
//! delta_mbps = 0.5
//! max_outer = 50
//! init = "mrt"          # or "random"
//! init_seed = 0
//! solver_tol = 1e-6
//! solver_max_iters = 5000
//!
//! [output]
//! beams = false
//! ```
//!
//! Every key is optional; omitted keys take the values above.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use leo_ican_core::beamforming::{BeamformingScheme, DcInit, DcOptions};
use leo_ican_core::convex::SolverOptions;
use leo_ican_core::{RadioParams, ScenarioSpec, SelectionParams};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionKind {
    GdopGreedy,
    Cfg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamformingKind {
    Mrt,
    Zf,
    Dc,
}

/// A selection algorithm paired with an inner beamforming scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SchemeId {
    pub selection: SelectionKind,
    pub beamforming: BeamformingKind,
}

impl SchemeId {
    pub const PROPOSAL: SchemeId = SchemeId::new(SelectionKind::Cfg, BeamformingKind::Dc);
    pub const BASELINE_1: SchemeId = SchemeId::new(SelectionKind::Cfg, BeamformingKind::Mrt);
    pub const BASELINE_2: SchemeId = SchemeId::new(SelectionKind::Cfg, BeamformingKind::Zf);
    pub const BASELINE_3: SchemeId = SchemeId::new(SelectionKind::GdopGreedy, BeamformingKind::Dc);

    pub const fn new(selection: SelectionKind, beamforming: BeamformingKind) -> Self {
        Self {
            selection,
            beamforming,
        }
    }

    /// The four compared schemes, proposal first.
    pub fn table() -> Vec<SchemeId> {
        vec![
            Self::PROPOSAL,
            Self::BASELINE_2,
            Self::BASELINE_3,
            Self::BASELINE_1,
        ]
    }

    /// Row name used in the comparison table, if the pair is one of its rows.
    pub fn label(&self) -> &'static str {
        match *self {
            Self::PROPOSAL => "proposal",
            Self::BASELINE_1 => "baseline 1",
            Self::BASELINE_2 => "baseline 2",
            Self::BASELINE_3 => "baseline 3",
            _ => "",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let selection = match self.selection {
            SelectionKind::GdopGreedy => "gdop_greedy",
            SelectionKind::Cfg => "cfg",
        };
        let beamforming = match self.beamforming {
            BeamformingKind::Mrt => "mrt",
            BeamformingKind::Zf => "zf",
            BeamformingKind::Dc => "dc",
        };
        write!(f, "{selection}:{beamforming}")
    }
}

impl FromStr for SchemeId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || {
            HarnessError::Config(format!(
                "unknown scheme `{s}`, expected <gdop_greedy|cfg>:<mrt|zf|dc>"
            ))
        };
        let (sel, bf) = s.split_once(':').ok_or_else(bad)?;
        let selection = match sel.trim() {
            "gdop_greedy" => SelectionKind::GdopGreedy,
            "cfg" => SelectionKind::Cfg,
            _ => return Err(bad()),
        };
        let beamforming = match bf.trim() {
            "mrt" => BeamformingKind::Mrt,
            "zf" => BeamformingKind::Zf,
            "dc" => BeamformingKind::Dc,
            _ => return Err(bad()),
        };
        Ok(Self {
            selection,
            beamforming,
        })
    }
}

impl TryFrom<String> for SchemeId {
    type Error = HarnessError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SchemeId> for String {
    fn from(id: SchemeId) -> Self {
        id.to_string()
    }
}

/// Antenna presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Profile {
    /// 4x4 arrays.
    Desk,
    /// 8x8 arrays.
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub satellites: usize,
    pub cells: usize,
    pub altitude_km: f64,
    pub cell_radius_km: f64,
    pub min_separation_deg: f64,
    pub min_elevation_deg: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let spec = ScenarioSpec::default();
        Self {
            satellites: spec.satellites,
            cells: spec.cells,
            altitude_km: spec.altitude_m / 1e3,
            cell_radius_km: spec.cell_radius_m / 1e3,
            min_separation_deg: spec.min_separation_deg,
            min_elevation_deg: spec.min_elevation_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub frequency_ghz: f64,
    pub bandwidth_mhz: f64,
    pub beam_power_dbw: f64,
    pub noise_density_dbm_hz: f64,
    pub atmosphere_loss_db: f64,
    pub antennas_x: usize,
    pub antennas_y: usize,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            frequency_ghz: 4.0,
            bandwidth_mhz: 50.0,
            beam_power_dbw: 26.0,
            noise_density_dbm_hz: -174.0,
            atmosphere_loss_db: 0.5,
            antennas_x: 4,
            antennas_y: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub serving: usize,
    pub gdop_threshold: f64,
    pub multi_pass: bool,
    pub max_passes: usize,
    pub preference_cap: Option<usize>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        let p = SelectionParams::default();
        Self {
            serving: p.serving,
            gdop_threshold: p.gdop_threshold,
            multi_pass: p.multi_pass,
            max_passes: p.max_passes,
            preference_cap: p.preference_cap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Mrt,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DcConfig {
    pub delta_mbps: f64,
    pub max_outer: usize,
    pub init: InitKind,
    pub init_seed: u64,
    pub solver_tol: f64,
    pub solver_max_iters: usize,
}

impl Default for DcConfig {
    fn default() -> Self {
        let d = DcOptions::default();
        Self {
            delta_mbps: d.delta_bps / 1e6,
            max_outer: d.max_outer,
            init: InitKind::Mrt,
            init_seed: 0,
            solver_tol: d.solver.tol,
            solver_max_iters: d.solver.max_iters,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Also write `beams.csv`.
    pub beams: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: u64,
    pub schemes: Vec<SchemeId>,
    pub scenario: ScenarioConfig,
    pub radio: RadioConfig,
    pub selection: SelectionConfig,
    pub dc: DcConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seeds: 20,
            schemes: SchemeId::table(),
            scenario: ScenarioConfig::default(),
            radio: RadioConfig::default(),
            selection: SelectionConfig::default(),
            dc: DcConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let config: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply_profile(&mut self, profile: Profile) {
        let n = match profile {
            Profile::Desk => 4,
            Profile::Paper => 8,
        };
        self.radio.antennas_x = n;
        self.radio.antennas_y = n;
    }

    /// Default seed list `0..seeds`.
    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds).collect()
    }

    pub fn radio_params(&self) -> RadioParams {
        let r = &self.radio;
        RadioParams::from_link_budget(
            r.frequency_ghz * 1e9,
            r.bandwidth_mhz * 1e6,
            r.beam_power_dbw,
            r.noise_density_dbm_hz,
            r.atmosphere_loss_db,
            r.antennas_x,
            r.antennas_y,
        )
    }

    pub fn scenario_spec(&self) -> ScenarioSpec {
        let s = &self.scenario;
        ScenarioSpec {
            satellites: s.satellites,
            cells: s.cells,
            altitude_m: s.altitude_km * 1e3,
            cell_radius_m: s.cell_radius_km * 1e3,
            min_separation_deg: s.min_separation_deg,
            min_elevation_deg: s.min_elevation_deg,
            radio: self.radio_params(),
        }
    }

    pub fn selection_params(&self) -> SelectionParams {
        let s = &self.selection;
        SelectionParams {
            serving: s.serving,
            gdop_threshold: s.gdop_threshold,
            multi_pass: s.multi_pass,
            max_passes: s.max_passes,
            preference_cap: s.preference_cap,
        }
    }

    pub fn dc_options(&self) -> DcOptions {
        let d = &self.dc;
        DcOptions {
            delta_bps: d.delta_mbps * 1e6,
            max_outer: d.max_outer,
            init: match d.init {
                InitKind::Mrt => DcInit::Mrt,
                InitKind::Random => DcInit::Random { seed: d.init_seed },
            },
            solver: SolverOptions {
                tol: d.solver_tol,
                max_iters: d.solver_max_iters,
                record_trace: false,
            },
        }
    }

    pub fn beamforming(&self, kind: BeamformingKind) -> BeamformingScheme {
        match kind {
            BeamformingKind::Mrt => BeamformingScheme::Mrt,
            BeamformingKind::Zf => BeamformingScheme::Zf,
            BeamformingKind::Dc => BeamformingScheme::Dc(self.dc_options()),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.schemes.is_empty() {
            return bad("schemes must not be empty");
        }
        let mut seen = self.schemes.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.schemes.len() {
            return bad("schemes must not repeat");
        }
        if self.selection.serving < 3 {
            return bad("selection.serving must be at least 3");
        }
        if self.selection.serving > self.scenario.satellites {
            return bad("selection.serving exceeds the satellite count");
        }
        if self.selection.gdop_threshold.is_nan() || self.selection.gdop_threshold <= 0.0 {
            return bad("selection.gdop_threshold must be positive");
        }
        if self.selection.preference_cap == Some(0) {
            return bad("selection.preference_cap must be at least 1");
        }
        if !(self.dc.delta_mbps > 0.0) || self.dc.max_outer == 0 {
            return bad("dc.delta_mbps and dc.max_outer must be positive");
        }
        if !(self.dc.solver_tol > 0.0) || self.dc.solver_max_iters == 0 {
            return bad("dc.solver_tol and dc.solver_max_iters must be positive");
        }
        self.scenario_spec().validate().map_err(HarnessError::Core)
    }
}
