//! Experiment configuration: TOML with one table per concern. Unknown keys
//! are rejected and every value is validated before any computation starts.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use maxwell_qr::formulations::{QrParams, Variant};
use maxwell_qr::mesh::PartitionConfig;
use maxwell_qr::C64;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub domain: Domain,
    pub partition: Partition,
    pub physics: Physics,
    pub data: Data,
    pub method: Method,
    pub sweep: Sweep,
    pub extension: Extension,
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Disc,
    Ring,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Domain {
    pub shape: Shape,
    pub radius: f64,
    pub inner_radius: f64,
    pub h: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Self { shape: Shape::Disc, radius: 1.0, inner_radius: 0.75, h: 0.1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Partition {
    /// `G34`, `GE37`, `GExt` or `intervals`.
    pub kind: String,
    pub electrodes: usize,
    pub electrode_length: f64,
    pub intervals: Vec<[f64; 2]>,
}

impl Default for Partition {
    fn default() -> Self {
        Self {
            kind: "G34".into(),
            electrodes: PartitionConfig::GE37_COUNT,
            electrode_length: PartitionConfig::GE37_LENGTH,
            intervals: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub k: f64,
    /// Constant coefficient as `[re, im]`.
    pub kappa: [f64; 2],
}

impl Default for Physics {
    fn default() -> Self {
        Self { k: 1.0, kappa: [1.0, 1.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Data {
    /// `plane-wave`, `discrete-oracle` or `file`.
    pub source: String,
    pub direction: [f64; 2],
    pub file: Option<PathBuf>,
    pub noise: f64,
}

impl Default for Data {
    fn default() -> Self {
        Self { source: "plane-wave".into(), direction: [1.0, 0.0], file: None, noise: 0.0 }
    }
}

/// A number or a keyword such as `auto` / `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberOr {
    Number(f64),
    Word(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Method {
    pub variant: String,
    pub delta: f64,
    pub eta: NumberOr,
    pub nu: NumberOr,
    pub nu_inner: Option<NumberOr>,
}

impl Default for Method {
    fn default() -> Self {
        Self {
            variant: "QR".into(),
            delta: 1e-6,
            eta: NumberOr::Word("auto".into()),
            nu: NumberOr::Word("delta".into()),
            nu_inner: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sweep {
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
}

impl Default for Sweep {
    fn default() -> Self {
        let (lo, hi, n) = maxwell_qr::driver::DEFAULT_GRID;
        Self { delta_min: lo, delta_max: hi, points: n }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Extension {
    pub enabled: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: PathBuf,
    pub svg: bool,
    /// Write measured wall-clock times instead of zeros.
    pub timings: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), svg: false, timings: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaRule {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuRule {
    Delta,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    PlaneWave { direction: [f64; 2] },
    DiscreteOracle { direction: [f64; 2] },
    File(PathBuf),
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub shape: Shape,
    pub radius: f64,
    pub inner_radius: f64,
    pub h: f64,
    pub partition: PartitionConfig,
    pub k: f64,
    pub kappa: C64,
    pub source: DataSource,
    pub noise: f64,
    pub variant: Variant,
    pub delta: f64,
    pub eta: EtaRule,
    pub nu_outer: NuRule,
    pub nu_inner: NuRule,
    pub grid: Vec<f64>,
    pub extension: bool,
    pub out_dir: PathBuf,
    pub svg: bool,
    pub timings: bool,
    /// SHA-256 of the normalized configuration.
    pub hash: String,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(format!("{name} must be positive and finite, got {v}")))
    }
}

fn nu_rule(name: &str, v: &NumberOr) -> Result<NuRule, CliError> {
    match v {
        NumberOr::Word(w) if w == "delta" => Ok(NuRule::Delta),
        NumberOr::Number(x) => positive(name, *x).map(NuRule::Fixed),
        NumberOr::Word(w) => Err(bad(format!("{name} must be a number or `delta`, got `{w}`"))),
    }
}

impl Config {
    #[cfg(test)]
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    /// Reads `path` (or starts from the defaults) and applies `section.key=value`
    /// overrides, where `value` is a TOML value; bare words are taken as strings.
    pub fn load_with(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| bad(format!("cannot read {}: {e}", p.display())))?;
                text.parse().map_err(|e: toml::de::Error| bad(e.to_string()))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            let (key, raw) = item.split_once('=').ok_or_else(|| bad(format!("override `{item}` is not key=value")))?;
            let (section, field) =
                key.trim().split_once('.').ok_or_else(|| bad(format!("override key `{key}` must be section.field")))?;
            let value = parse_value(raw.trim());
            let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let toml::Value::Table(t) = entry else {
                return Err(bad(format!("`{section}` is not a table")));
            };
            t.insert(field.to_string(), value);
        }
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| bad(e.to_string()))
    }

    /// SHA-256 of the normalized configuration. The output directory is left
    /// out so identical runs written to different places share a hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output.dir = PathBuf::new();
        let canonical = toml::to_string(&c).expect("configuration serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<Experiment, CliError> {
        let d = &self.domain;
        let radius = positive("domain.radius", d.radius)?;
        let h = positive("domain.h", d.h)?;
        let inner_radius = match d.shape {
            Shape::Ring => {
                let r = positive("domain.inner_radius", d.inner_radius)?;
                if r >= radius {
                    return Err(bad("domain.inner_radius must be smaller than domain.radius"));
                }
                r
            }
            Shape::Disc => d.inner_radius,
        };
        if h >= radius {
            return Err(bad("domain.h must be smaller than domain.radius"));
        }

        let p = &self.partition;
        let partition = match p.kind.to_ascii_lowercase().as_str() {
            "g34" => PartitionConfig::G34,
            "ge37" | "electrodes" => {
                if p.electrodes == 0 {
                    return Err(bad("partition.electrodes must be at least 1"));
                }
                PartitionConfig::Electrodes {
                    count: p.electrodes,
                    length: positive("partition.electrode_length", p.electrode_length)?,
                }
            }
            "gext" => {
                if d.shape == Shape::Disc {
                    return Err(bad("partition GExt needs a ring: the disc would have no inaccessible boundary"));
                }
                PartitionConfig::GExt
            }
            "intervals" => {
                if p.intervals.is_empty() {
                    return Err(bad("partition.intervals must list at least one [start, end] pair"));
                }
                for &[a, b] in &p.intervals {
                    if !(0.0..=2.0 * PI).contains(&a) || !(0.0..=2.0 * PI).contains(&b) {
                        return Err(bad(format!("interval [{a}, {b}] must lie in [0, 2π]")));
                    }
                }
                PartitionConfig::Intervals(p.intervals.iter().map(|&[a, b]| (a, b)).collect())
            }
            other => return Err(bad(format!("unknown partition.kind `{other}`"))),
        };

        let ph = &self.physics;
        if !ph.k.is_finite() {
            return Err(bad("physics.k must be finite"));
        }
        if !(ph.kappa[0] > 0.0) || !ph.kappa[1].is_finite() {
            return Err(bad("physics.kappa must have a positive real part"));
        }

        let dt = &self.data;
        let dir = dt.direction;
        let check_dir = || -> Result<[f64; 2], CliError> {
            let n = dir[0].hypot(dir[1]);
            if (n - 1.0).abs() > 1e-12 {
                return Err(bad(format!("data.direction must be a unit vector, |d| = {n}")));
            }
            Ok(dir)
        };
        let source = match dt.source.as_str() {
            "plane-wave" => DataSource::PlaneWave { direction: check_dir()? },
            "discrete-oracle" => DataSource::DiscreteOracle { direction: check_dir()? },
            "file" => DataSource::File(dt.file.clone().ok_or_else(|| bad("data.source = \"file\" needs data.file"))?),
            other => return Err(bad(format!("unknown data.source `{other}`"))),
        };
        if !(dt.noise >= 0.0) || !dt.noise.is_finite() {
            return Err(bad("data.noise must be finite and nonnegative"));
        }

        let m = &self.method;
        let variant: Variant = m.variant.parse().map_err(bad)?;
        let delta = positive("method.delta", m.delta)?;
        let eta = match &m.eta {
            NumberOr::Word(w) if w == "auto" => EtaRule::Auto,
            NumberOr::Number(x) => EtaRule::Fixed(positive("method.eta", *x)?),
            NumberOr::Word(w) => return Err(bad(format!("method.eta must be a number or `auto`, got `{w}`"))),
        };
        let nu_outer = nu_rule("method.nu", &m.nu)?;
        let nu_inner = match &m.nu_inner {
            Some(v) => nu_rule("method.nu_inner", v)?,
            None => nu_outer,
        };

        let s = &self.sweep;
        let grid =
            maxwell_qr::driver::delta_grid(s.delta_min, s.delta_max, s.points).map_err(|e| bad(e.to_string()))?;

        if self.extension.enabled && d.shape != Shape::Ring {
            return Err(bad("extension.enabled requires domain.shape = \"ring\""));
        }

        Ok(Experiment {
            shape: d.shape,
            radius,
            inner_radius,
            h,
            partition,
            k: ph.k,
            kappa: C64::new(ph.kappa[0], ph.kappa[1]),
            source,
            noise: dt.noise,
            variant,
            delta,
            eta,
            nu_outer,
            nu_inner,
            grid,
            extension: self.extension.enabled,
            out_dir: self.output.dir.clone(),
            svg: self.output.svg,
            timings: self.output.timings,
            hash: self.hash(),
        })
    }
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl Experiment {
    /// Method parameters at `delta` for a given `eta`.
    pub fn params(&self, delta: f64, eta: f64) -> QrParams {
        let nu = |r: NuRule| match r {
            NuRule::Delta => delta,
            NuRule::Fixed(v) => v,
        };
        match self.variant {
            Variant::Qr => QrParams::qr(delta),
            Variant::Rqr => QrParams::rqr(delta, eta),
            Variant::Rrqr => QrParams { nu_inner: nu(self.nu_inner), ..QrParams::rrqr(delta, eta, nu(self.nu_outer)) },
        }
    }

    /// Whether ν follows δ along a sweep.
    pub fn nu_tied(&self) -> bool {
        self.variant == Variant::Rrqr && self.nu_outer == NuRule::Delta
    }
}
