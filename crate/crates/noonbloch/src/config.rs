//! Run configuration: a flat TOML document validated into a [`RunConfig`].

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use noonbloch_core::state::{build_noon, NoonState};
use noonbloch_core::{LatticeParams, LatticeWindow, ZGrid};
use serde::Deserialize;
use thiserror::Error;

/// Guard on `z_max` in Bloch periods unless `allow_long_z` is set.
pub const MAX_BLOCH_PERIODS: f64 = 4.0;
pub const DEFAULT_SAMPLES: usize = 512;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Syntax(String),
    #[error("`{key}`: {message}")]
    Schema { key: String, message: String },
    #[error("`{key}`: {message}")]
    Physics { key: String, message: String },
}

impl ConfigError {
    fn schema(key: &str, message: impl Into<String>) -> Self {
        Self::Schema { key: key.into(), message: message.into() }
    }

    fn physics(key: &str, message: impl Into<String>) -> Self {
        Self::Physics { key: key.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Observable {
    /// Density of the NOON state.
    Density,
    /// Density of the same photons injected into `site_a` alone.
    SingleDensity,
    Correlation(u32),
    Gamma(u32),
    Period,
    Verify,
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Density => f.write_str("density"),
            Observable::SingleDensity => f.write_str("single_density"),
            Observable::Correlation(p) => write!(f, "correlation({p})"),
            Observable::Gamma(p) => write!(f, "gamma({p})"),
            Observable::Period => f.write_str("period"),
            Observable::Verify => f.write_str("verify"),
        }
    }
}

/// Observable name as written in the document; a missing split defaults to
/// `N/2` once the photon number is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ObservableSpec {
    Fixed(Observable),
    Correlation(Option<u32>),
    Gamma(Option<u32>),
}

impl FromStr for ObservableSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let split = |name: &str| -> Result<Option<Option<u32>>, String> {
            let Some(rest) = s.strip_prefix(name) else {
                return Ok(None);
            };
            if rest.is_empty() {
                return Ok(Some(None));
            }
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| format!("malformed observable `{s}`"))?;
            let p = inner
                .trim()
                .parse::<u32>()
                .map_err(|_| format!("photon split in `{s}` must be a non-negative integer"))?;
            Ok(Some(Some(p)))
        };
        match s {
            "density" => return Ok(Self::Fixed(Observable::Density)),
            "single_density" => return Ok(Self::Fixed(Observable::SingleDensity)),
            "period" => return Ok(Self::Fixed(Observable::Period)),
            "verify" => return Ok(Self::Fixed(Observable::Verify)),
            _ => {}
        }
        if let Some(p) = split("correlation")? {
            return Ok(Self::Correlation(p));
        }
        if let Some(p) = split("gamma")? {
            return Ok(Self::Gamma(p));
        }
        Err(format!(
            "unknown observable `{s}` (expected density, single_density, correlation(p), gamma(p), period, verify)"
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Matrix,
}

/// Pass thresholds of the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub unitarity: f64,
    pub revival: f64,
    pub ode: f64,
    pub oracle: f64,
    pub normalization: f64,
    pub density: f64,
    /// Relative error of the γ period against `2λ_B / (N|Δ|)`.
    pub period: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unitarity: 1e-10,
            revival: 1e-10,
            ode: 1e-8,
            oracle: 1e-9,
            normalization: 1e-9,
            density: 1e-9,
            period: 0.01,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(rename = "N")]
    n_photons: u32,
    site_a: i64,
    site_b: i64,
    #[serde(default)]
    phase: f64,
    #[serde(rename = "C", default = "one")]
    coupling: f64,
    #[serde(rename = "B", default = "one")]
    tilt: f64,
    half_width: Option<usize>,
    #[serde(default)]
    z_min: f64,
    z_max: Option<f64>,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default)]
    allow_long_z: bool,
    observables: Option<Vec<String>>,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    formats: Option<Vec<Format>>,
    #[serde(default)]
    tolerances: Tolerances,
}

fn one() -> f64 {
    1.0
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lattice: LatticeParams,
    pub window: LatticeWindow,
    pub state: NoonState,
    pub grid: ZGrid,
    pub observables: BTreeSet<Observable>,
    pub output_dir: PathBuf,
    pub formats: BTreeSet<Format>,
    pub tolerances: Tolerances,
}

impl RunConfig {
    /// Split used for `period` (the first requested `gamma`, else `N/2`).
    pub fn period_split(&self) -> u32 {
        self.observables
            .iter()
            .find_map(|o| match o {
                Observable::Gamma(p) => Some(*p),
                _ => None,
            })
            .unwrap_or(self.state.n_photons() / 2)
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let doc: Document = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;

    let lattice = LatticeParams::new(doc.coupling, doc.tilt).map_err(|e| {
        let key = if doc.coupling.is_finite() && doc.coupling > 0.0 { "B" } else { "C" };
        ConfigError::schema(key, e.to_string())
    })?;
    let state = build_noon(doc.n_photons, doc.site_a, doc.site_b, doc.phase).map_err(|e| {
        let key = if doc.n_photons == 0 { "N" } else { "site_b" };
        ConfigError::schema(key, e.to_string())
    })?;
    if !doc.phase.is_finite() {
        return Err(ConfigError::schema("phase", "must be finite"));
    }

    let n = state.n_photons();
    let mut observables = BTreeSet::new();
    let names = doc
        .observables
        .unwrap_or_else(|| vec!["density".into(), "gamma".into(), "period".into()]);
    for (i, name) in names.iter().enumerate() {
        let key = format!("observables[{i}]");
        let spec = name
            .parse::<ObservableSpec>()
            .map_err(|m| ConfigError::schema(&key, m))?;
        let obs = match spec {
            ObservableSpec::Fixed(o) => o,
            ObservableSpec::Correlation(p) => Observable::Correlation(p.unwrap_or(n / 2)),
            ObservableSpec::Gamma(p) => Observable::Gamma(p.unwrap_or(n / 2)),
        };
        if let Observable::Correlation(p) | Observable::Gamma(p) = obs {
            if p > n {
                return Err(ConfigError::schema(&key, format!("photon split {p} exceeds N = {n}")));
            }
        }
        observables.insert(obs);
    }

    let needs_period = observables
        .iter()
        .any(|o| matches!(o, Observable::Gamma(_) | Observable::Period | Observable::Verify));
    if lattice.is_uniform() && needs_period {
        return Err(ConfigError::physics(
            "B",
            "infinite period: gamma, period and verify need B > 0",
        ));
    }

    let z_max = match (doc.z_max, lattice.bloch_period()) {
        (Some(z), _) => z,
        (None, Ok(lam)) => 2.0 * lam,
        (None, Err(_)) => return Err(ConfigError::schema("z_max", "required when B = 0")),
    };
    let grid = ZGrid::new(doc.z_min, z_max, doc.samples).map_err(|_| {
        ConfigError::schema(
            "z_max",
            format!(
                "need 0 <= z_min < z_max and samples >= 2 (z_min = {}, z_max = {z_max}, samples = {})",
                doc.z_min, doc.samples
            ),
        )
    })?;
    if let Ok(lam) = lattice.bloch_period() {
        if !doc.allow_long_z && z_max > MAX_BLOCH_PERIODS * lam * (1.0 + 1e-12) {
            return Err(ConfigError::physics(
                "z_max",
                format!(
                    "{z_max} exceeds {MAX_BLOCH_PERIODS} Bloch periods ({}); set allow_long_z = true to override",
                    MAX_BLOCH_PERIODS * lam
                ),
            ));
        }
    }

    let margin = lattice.required_margin(z_max);
    let inputs = [state.site_a(), state.site_b()];
    let window = match doc.half_width {
        Some(hw) => {
            let w = LatticeWindow::new(hw).map_err(|e| ConfigError::schema("half_width", e.to_string()))?;
            w.check_margin(&inputs, margin).map_err(|_| {
                let need = LatticeWindow::minimal_for(&inputs, margin).half_width();
                ConfigError::physics(
                    "half_width",
                    format!("window too small for C/B: half_width must be at least {need} (got {hw})"),
                )
            })?;
            w
        }
        None => LatticeWindow::minimal_for(&inputs, margin),
    };

    let formats: BTreeSet<Format> = doc
        .formats
        .unwrap_or_else(|| vec![Format::Table, Format::Matrix])
        .into_iter()
        .collect();
    for obs in &observables {
        let needed = match obs {
            Observable::Correlation(_) => Format::Matrix,
            _ => Format::Table,
        };
        if !formats.contains(&needed) {
            return Err(ConfigError::schema(
                "formats",
                format!("observable {obs} needs the {needed:?} format"),
            ));
        }
    }

    Ok(RunConfig {
        lattice,
        window,
        state,
        grid,
        observables,
        output_dir: doc.output_dir,
        formats,
        tolerances: doc.tolerances,
    })
}
