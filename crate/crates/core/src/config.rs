//! Experiment configuration: a flat TOML file with one table per estimator family.
//!
//! ```toml
//! scenario = "VTV-SDWW-500"
//! frames = 500
//! snr = [0, 10, 20, 30, 40]
//! estimators = ["wi-fp-als", "lmmse-100"]
//!
//! [wi]
//! P = 2
//! ```
//!
//! Every key is optional; see [`ExperimentConfig::default`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::{AddTtParams, DEFAULT_R0};
use crate::channel::TdlProfile;
use crate::error::{Error, Result};
use crate::frame::FrameSpec;
use crate::modulation::Modulation;
use crate::wi::WiScheme;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Built-in profile name, ignored when `[profile]` is given.
    pub scenario: String,
    pub frames: usize,
    pub snr: Vec<f64>,
    /// Constellation order, 4 or 16.
    pub modulation: usize,
    pub seed: u64,
    pub estimators: Vec<String>,
    /// Data-region symbols per frame, `I`.
    pub symbols: usize,
    /// Code rate; enters only the data-rate figures.
    pub code_rate: f64,
    /// Worker threads, 0 for one per core.
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub wi: WiConfig,
    pub lmmse: LmmseConfig,
    pub rbf: RbfConfig,
    pub addtt: AddTtConfig,
    pub export: ExportConfig,
    pub profile: Option<ProfileConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WiConfig {
    /// Pilot symbols per frame; by default 1, 2 or 3 from the scenario's Doppler.
    #[serde(rename = "P")]
    pub pilot_symbols: Option<usize>,
    /// LP pilots per pilot symbol and DFT taps for ALS/LP.
    #[serde(rename = "L")]
    pub taps: usize,
    /// Scheme used by `export-dataset`.
    pub scheme: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LmmseConfig {
    /// Window for the plain `lmmse` estimator id.
    pub window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RbfConfig {
    pub r0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AddTtConfig {
    pub alpha: f64,
    pub beta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExportConfig {
    pub train: usize,
    pub test: usize,
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub name: String,
    pub delays_ns: Vec<f64>,
    pub gains_db: Vec<f64>,
    pub doppler_hz: f64,
    #[serde(default)]
    pub velocity_kmh: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: "VTV-SDWW-500".into(),
            frames: 100,
            snr: vec![0.0, 10.0, 20.0, 30.0, 40.0],
            modulation: 4,
            seed: 1,
            estimators: ["wi-fp-sls", "wi-fp-als", "wi-lp", "lmmse-100"]
                .map(String::from)
                .to_vec(),
            symbols: 100,
            code_rate: 0.5,
            workers: 0,
            out: None,
            wi: WiConfig::default(),
            lmmse: LmmseConfig::default(),
            rbf: RbfConfig::default(),
            addtt: AddTtConfig::default(),
            export: ExportConfig::default(),
            profile: None,
        }
    }
}

impl Default for WiConfig {
    fn default() -> Self {
        Self {
            pilot_symbols: None,
            taps: 12,
            scheme: "fp-als".into(),
        }
    }
}

impl Default for LmmseConfig {
    fn default() -> Self {
        Self { window: 100 }
    }
}

impl Default for RbfConfig {
    fn default() -> Self {
        Self { r0: DEFAULT_R0 }
    }
}

impl Default for AddTtConfig {
    fn default() -> Self {
        let p = AddTtParams::default();
        Self {
            alpha: p.alpha,
            beta: p.beta,
        }
    }
}

impl Default for ExportConfig {
    fn default() -> Self {
        Self {
            train: 8000,
            test: 2000,
            snr: 30.0,
        }
    }
}

/// Estimators the runner knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorId {
    /// `Ĥ = H`.
    Ideal,
    /// Preamble LS held over the whole frame.
    Ls,
    Lmmse(usize),
    Rbf,
    AddTt,
    Wi(WiScheme),
}

impl EstimatorId {
    pub fn parse(s: &str, default_window: usize) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "ideal" => Self::Ideal,
            "ls" => Self::Ls,
            "lmmse" => Self::Lmmse(default_window),
            "rbf" => Self::Rbf,
            "addtt" => Self::AddTt,
            _ => {
                if let Some(w) = s.strip_prefix("lmmse-") {
                    let w = w
                        .parse()
                        .map_err(|_| Error::UnknownScheme(format!("bad LMMSE window in {s}")))?;
                    Self::Lmmse(w)
                } else if let Some(scheme) = s.strip_prefix("wi-").and_then(WiScheme::parse) {
                    Self::Wi(scheme)
                } else {
                    return Err(Error::UnknownScheme(s.to_string()));
                }
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            Self::Ideal => "ideal".into(),
            Self::Ls => "ls".into(),
            Self::Lmmse(w) => format!("lmmse-{w}"),
            Self::Rbf => "rbf".into(),
            Self::AddTt => "addtt".into(),
            Self::Wi(s) => format!("wi-{}", s.name()),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            msg: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config { line: 0, msg });
        if self.frames == 0 {
            return bad("frames must be at least 1".into());
        }
        if self.snr.is_empty() {
            return bad("snr list is empty".into());
        }
        if self.snr.iter().any(|s| s.is_nan()) {
            return bad("snr values must be numbers".into());
        }
        if self.estimators.is_empty() {
            return bad("estimator list is empty".into());
        }
        Modulation::from_order(self.modulation)?;
        self.estimator_ids()?;
        WiScheme::parse(&self.wi.scheme)
            .ok_or_else(|| Error::UnknownScheme(self.wi.scheme.clone()))?;
        if let Some(p) = self.wi.pilot_symbols {
            if !(1..=3).contains(&p) {
                return bad(format!("wi.P = {p} outside 1..=3"));
            }
        }
        if !(self.addtt.alpha > 0.0 && self.addtt.alpha <= 1.0) {
            return bad(format!("addtt.alpha = {} outside (0, 1]", self.addtt.alpha));
        }
        if !(self.rbf.r0 > 0.0) {
            return bad(format!("rbf.r0 = {} must be positive", self.rbf.r0));
        }
        self.profile()?.validate()?;
        self.standard_spec()?.validate()
    }

    pub fn estimator_ids(&self) -> Result<Vec<EstimatorId>> {
        self.estimators
            .iter()
            .map(|s| EstimatorId::parse(s, self.lmmse.window))
            .collect()
    }

    pub fn profile(&self) -> Result<TdlProfile> {
        match &self.profile {
            Some(p) => Ok(TdlProfile {
                name: p.name.clone(),
                delays_ns: p.delays_ns.clone(),
                gains_db: p.gains_db.clone(),
                doppler_hz: p.doppler_hz,
                velocity_kmh: p.velocity_kmh,
            }),
            None => TdlProfile::named(&self.scenario)
                .ok_or_else(|| Error::Profile(format!("unknown scenario {}", self.scenario))),
        }
    }

    /// Configured `P`, or 1/2/3 for Doppler up to 250 Hz, up to 500 Hz, above.
    pub fn pilot_symbols(&self) -> Result<usize> {
        if let Some(p) = self.wi.pilot_symbols {
            return Ok(p);
        }
        let fd = self.profile()?.doppler_hz;
        Ok(if fd <= 250.0 {
            1
        } else if fd <= 500.0 {
            2
        } else {
            3
        })
    }

    fn finish(&self, spec: FrameSpec) -> Result<FrameSpec> {
        let mut spec = spec.with_modulation(Modulation::from_order(self.modulation)?);
        spec.code_rate = self.code_rate;
        Ok(spec)
    }

    pub fn standard_spec(&self) -> Result<FrameSpec> {
        self.finish(FrameSpec::standard(self.symbols))
    }

    pub fn wi_spec(&self, scheme: WiScheme) -> Result<FrameSpec> {
        let spec = FrameSpec::weighted(self.symbols, self.pilot_symbols()?, scheme.pilot_scheme())
            .with_lp_pilots(self.wi.taps);
        self.finish(spec)
    }

    pub fn addtt_params(&self) -> AddTtParams {
        AddTtParams {
            alpha: self.addtt.alpha,
            beta: self.addtt.beta,
            taps: self.wi.taps,
        }
    }

    pub fn export_scheme(&self) -> WiScheme {
        WiScheme::parse(&self.wi.scheme).unwrap_or(WiScheme::FpAls)
    }

    pub fn scenario_name(&self) -> String {
        self.profile
            .as_ref()
            .map(|p| p.name.clone())
            .unwrap_or_else(|| self.scenario.clone())
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}
