//! Run configuration, initial-data families, snapshots and record output.

mod records;
mod snapshot;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::ModelParams;
use crate::error::{Error, Result};
use crate::integrator::{Cadence, StepperConfig, SEAM_WARNING};
use crate::picard::PicardConfig;
use crate::spectral::{Field, GridSpec};

pub use records::{to_ndjson_line, CsvSink, NdjsonSink, NdjsonWriter};
pub use snapshot::{load_snapshot, read_snapshot, save_snapshot, Snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridParams {
    pub n: usize,
    pub half_length: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            n: 1024,
            half_length: 20.0,
        }
    }
}

impl GridParams {
    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, self.half_length).map_err(|e| Error::config_at("grid", e.to_string()))
    }
}

fn one() -> f64 {
    1.0
}

/// Initial momentum profiles. Every kind except `from_file` adds `floor`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDataFamily {
    /// `amplitude·exp(−(x−center)²/width²)`.
    GaussianBump {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        floor: f64,
    },
    /// `amplitude·sech((x−center)/width)`.
    SechBump {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        floor: f64,
    },
    /// Two Gaussians; the second has amplitude `ratio·amplitude` and width `width2`
    /// (defaulting to `width`).
    ShiftedPair {
        amplitude: f64,
        width: f64,
        centers: [f64; 2],
        #[serde(default = "one")]
        ratio: f64,
        #[serde(default)]
        width2: Option<f64>,
        #[serde(default)]
        floor: f64,
    },
    /// `amplitude·cos(k_j x + phase)` with `k_j` the j-th grid wavenumber.
    SingleMode {
        amplitude: f64,
        index: usize,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        floor: f64,
    },
    /// Momentum read from a snapshot on the same grid.
    FromFile { path: PathBuf },
}

impl InitialDataFamily {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::config_at(format!("initial_data.{field}"), msg));
        let finite = |field: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                bad(field, format!("must be finite, got {v}"))
            }
        };
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                bad(field, format!("must be positive, got {v}"))
            }
        };
        match *self {
            Self::GaussianBump { amplitude, width, center, floor }
            | Self::SechBump { amplitude, width, center, floor } => {
                finite("amplitude", amplitude)?;
                positive("width", width)?;
                finite("center", center)?;
                finite("floor", floor)
            }
            Self::ShiftedPair { amplitude, width, centers, ratio, width2, floor } => {
                finite("amplitude", amplitude)?;
                positive("width", width)?;
                finite("centers", centers[0])?;
                finite("centers", centers[1])?;
                finite("ratio", ratio)?;
                if let Some(w) = width2 {
                    positive("width2", w)?;
                }
                finite("floor", floor)
            }
            Self::SingleMode { amplitude, index, phase, floor } => {
                finite("amplitude", amplitude)?;
                if index > grid.n() / 2 {
                    return bad("index", format!("must be at most n/2 = {}, got {index}", grid.n() / 2));
                }
                finite("phase", phase)?;
                finite("floor", floor)
            }
            Self::FromFile { ref path } => {
                if path.as_os_str().is_empty() {
                    return bad("path", "must not be empty".into());
                }
                Ok(())
            }
        }
    }
}

/// A sampled initial momentum and the seam warning it raised, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialField {
    pub m: Field,
    pub seam_warning: Option<String>,
}

pub fn build_initial_m(family: &InitialDataFamily, grid: GridSpec) -> Result<InitialField> {
    family.validate(&grid)?;
    let gauss = |x: f64, a: f64, c: f64, w: f64| a * (-((x - c) / w).powi(2)).exp();
    let m = match *family {
        InitialDataFamily::GaussianBump { amplitude, width, center, floor } => {
            Field::from_fn(grid, |x| gauss(x, amplitude, center, width) + floor)
        }
        InitialDataFamily::SechBump { amplitude, width, center, floor } => {
            Field::from_fn(grid, |x| amplitude / ((x - center) / width).cosh() + floor)
        }
        InitialDataFamily::ShiftedPair { amplitude, width, centers, ratio, width2, floor } => {
            let w2 = width2.unwrap_or(width);
            Field::from_fn(grid, |x| {
                gauss(x, amplitude, centers[0], width) + gauss(x, ratio * amplitude, centers[1], w2) + floor
            })
        }
        InitialDataFamily::SingleMode { amplitude, index, phase, floor } => {
            let k = grid.wavenumber(index);
            Field::from_fn(grid, |x| amplitude * (k * x + phase).cos() + floor)
        }
        InitialDataFamily::FromFile { ref path } => {
            let snap = read_snapshot(path)?;
            if snap.grid != grid {
                return Err(Error::config_at(
                    "initial_data.path",
                    format!(
                        "snapshot grid (n = {}, L = {}) differs from the scenario grid (n = {}, L = {})",
                        snap.grid.n(),
                        snap.grid.half_length(),
                        grid.n(),
                        grid.half_length()
                    ),
                ));
            }
            snap.m
        }
    };
    let seam = m.seam_max();
    let seam_warning = (seam > SEAM_WARNING).then(|| {
        let msg = format!("initial momentum reaches {seam:e} at |x| >= L/2; domain contamination likely");
        log::warn!("{msg}");
        msg
    });
    Ok(InitialField { m, seam_warning })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    /// Diagnostics record cadence in accepted steps.
    pub record_every: usize,
    /// Field history cadence in accepted steps; zero disables the history.
    pub history_every: usize,
    pub directory: PathBuf,
    /// Output spacing for characteristic bundles.
    pub characteristic_dt: f64,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            record_every: 10,
            history_every: 4,
            directory: PathBuf::from("out"),
            characteristic_dt: 1e-3,
        }
    }
}

impl Outputs {
    pub fn cadence(&self) -> Cadence {
        Cadence {
            record_every: self.record_every,
            history_every: self.history_every,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertificateSettings {
    /// The unquantified constant inside `C₁`.
    pub c: f64,
}

impl Default for CertificateSettings {
    fn default() -> Self {
        Self { c: 1.0 }
    }
}

fn default_certificate() -> Option<CertificateSettings> {
    Some(CertificateSettings::default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitCheckConfig {
    /// Amplitude scalings applied to the scenario's initial momentum.
    pub epsilons: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
}

impl Default for LimitCheckConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![0.2, 0.1, 0.05],
            horizon: 1.0,
            dt: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentityConfig {
    /// Amplitude of a smooth bump added to u after Helmholtz inversion; nonzero
    /// values break the `u = p * m` link on purpose.
    pub u_perturbation: f64,
    /// Integration horizon for the characteristic identities.
    pub horizon: f64,
    pub dt: f64,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self {
            u_perturbation: 0.0,
            horizon: 0.5,
            dt: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub grid: GridParams,
    pub initial_data: InitialDataFamily,
    #[serde(default)]
    pub model: ModelParams,
    #[serde(default)]
    pub stepper: StepperConfig,
    #[serde(default)]
    pub outputs: Outputs,
    /// Characteristic seeds x₀.
    #[serde(default)]
    pub seeds: Vec<f64>,
    /// `null` disables the certificate.
    #[serde(default = "default_certificate")]
    pub certificate: Option<CertificateSettings>,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub limit_check: LimitCheckConfig,
    #[serde(default)]
    pub identities: IdentityConfig,
}

impl Scenario {
    /// Minimal scenario with defaults around the given initial data.
    pub fn with_initial_data(initial_data: InitialDataFamily) -> Self {
        Self {
            grid: GridParams::default(),
            initial_data,
            model: ModelParams::default(),
            stepper: StepperConfig::default(),
            outputs: Outputs::default(),
            seeds: Vec::new(),
            certificate: default_certificate(),
            picard: PicardConfig::default(),
            limit_check: LimitCheckConfig::default(),
            identities: IdentityConfig::default(),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        self.grid.spec()
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid_spec()?;
        self.initial_data.validate(&grid)?;
        if !self.model.kappa.is_finite() {
            return Err(Error::config_at("model.kappa", "must be finite"));
        }
        self.stepper.validate()?;
        if self.outputs.record_every == 0 {
            return Err(Error::config_at("outputs.record_every", "must be positive"));
        }
        if !(self.outputs.characteristic_dt.is_finite() && self.outputs.characteristic_dt > 0.0) {
            return Err(Error::config_at("outputs.characteristic_dt", "must be positive"));
        }
        let half = 0.5 * grid.half_length();
        for (i, &x) in self.seeds.iter().enumerate() {
            if !(x.is_finite() && x.abs() <= half) {
                return Err(Error::config_at(
                    format!("seeds[{i}]"),
                    format!("seed {x} lies outside [-L/2, L/2] = [{}, {half}]", -half),
                ));
            }
        }
        if let Some(cert) = self.certificate {
            if !(cert.c.is_finite() && cert.c > 0.0) {
                return Err(Error::config_at("certificate.c", "must be positive"));
            }
        }
        self.picard.validate()?;
        let lc = &self.limit_check;
        if lc.epsilons.is_empty() {
            return Err(Error::config_at("limit_check.epsilons", "must not be empty"));
        }
        if let Some(i) = lc.epsilons.iter().position(|&e| !(e > 0.0 && e <= 0.5)) {
            return Err(Error::config_at(
                format!("limit_check.epsilons[{i}]"),
                format!("must lie in (0, 0.5], got {}", lc.epsilons[i]),
            ));
        }
        if !(lc.horizon > 0.0 && lc.horizon.is_finite()) {
            return Err(Error::config_at("limit_check.horizon", "must be positive"));
        }
        if !(lc.dt > 0.0 && lc.dt <= lc.horizon) {
            return Err(Error::config_at("limit_check.dt", "must be positive and at most the horizon"));
        }
        let id = &self.identities;
        if !id.u_perturbation.is_finite() {
            return Err(Error::config_at("identities.u_perturbation", "must be finite"));
        }
        if !(id.horizon > 0.0 && id.horizon.is_finite()) {
            return Err(Error::config_at("identities.horizon", "must be positive"));
        }
        if !(id.dt > 0.0 && id.dt <= id.horizon) {
            return Err(Error::config_at("identities.dt", "must be positive and at most the horizon"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    parse_scenario_with(text, &[])
}

/// Parses a document, applies `KEY=VALUE` overrides, and validates.
pub fn parse_scenario_with(text: &str, overrides: &[String]) -> Result<Scenario> {
    let mut doc: Value = serde_json::from_str(text)
        .map_err(|e| Error::config_at(".", format!("malformed JSON: {e}")))?;
    for spec in overrides {
        apply_override(&mut doc, spec)?;
    }
    let scenario: Scenario = serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        Error::config_at(path, e.into_inner().to_string())
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Sets a dotted path such as `stepper.t_end=2` in a JSON document. The value is
/// read as JSON when it parses, otherwise as a string. Numeric segments index arrays.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override {spec:?} is not of the form KEY=VALUE")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::config(format!("override key {key:?} is malformed")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    for segment in key.split('.') {
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        node = match node {
            Value::Array(items) => {
                let i: usize = segment
                    .parse()
                    .map_err(|_| Error::config_at(key, format!("{segment:?} does not index an array")))?;
                let len = items.len();
                items
                    .get_mut(i)
                    .ok_or_else(|| Error::config_at(key, format!("index {i} out of range for length {len}")))?
            }
            Value::Object(map) => map.entry(segment).or_insert(Value::Null),
            _ => return Err(Error::config_at(key, format!("{segment:?} descends into a scalar"))),
        };
    }
    *node = value;
    Ok(())
}
