//! Experiment configuration files and their validation.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use bell_lab::hbt::HbtConfig;
use bell_lab::metrics::Search;
use bell_lab::{Behavior, Integration, ModelDescriptor, Setting};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SEED_ENV: &str = "BELL_LAB_SEED";
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Validation failure located by a JSON pointer into the config.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { pointer: pointer.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "(root)" } else { &self.pointer };
        write!(f, "{at}: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Correlate,
    Chsh,
    Maximize,
    CheckLocality,
    PolytopeMembership,
    Hbt,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Correlate => "correlate",
            ExperimentKind::Chsh => "chsh",
            ExperimentKind::Maximize => "maximize",
            ExperimentKind::CheckLocality => "check-locality",
            ExperimentKind::PolytopeMembership => "polytope-membership",
            ExperimentKind::Hbt => "hbt",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unsupported format {other:?} (expected json or csv)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSpec {
    pub method: Method,
    #[serde(default)]
    pub n: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_grid_settings")]
    pub settings: usize,
    #[serde(default = "default_grid_hidden")]
    pub hidden: usize,
}

fn default_grid_settings() -> usize {
    bell_lab::locality::DEFAULT_GRID_SETTINGS
}

fn default_grid_hidden() -> usize {
    bell_lab::locality::DEFAULT_GRID_HIDDEN
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { settings: default_grid_settings(), hidden: default_grid_hidden() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HbtSection {
    pub alpha1: f64,
    pub alpha2: f64,
    pub n_events: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<String>,
}

/// The config file as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub model: Option<ModelDescriptor>,
    #[serde(default)]
    pub settings: Option<SettingsSpec>,
    #[serde(default)]
    pub integration: Option<IntegrationSpec>,
    #[serde(default)]
    pub search: Option<Search>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub behavior: Option<Behavior>,
    #[serde(default)]
    pub hbt: Option<HbtSection>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

/// Command-line and environment overrides.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub seed_flag: Option<u64>,
    pub seed_env: Option<String>,
}

/// A validated experiment with every default and override applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub experiment: ExperimentKind,
    pub model: Option<ModelDescriptor>,
    pub settings_a: Vec<Setting>,
    pub settings_b: Vec<Setting>,
    pub integration: Integration,
    pub search: Search,
    pub grid: GridSpec,
    pub tolerance: f64,
    pub behavior: Option<Behavior>,
    pub hbt: Option<HbtConfig>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn pointer_from_path(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut p = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => p.push_str(&format!("/{index}")),
            Segment::Map { key } => p.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => p.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    p
}

/// Extracts the field name from serde's "missing field `x`" message.
fn missing_field(msg: &str) -> Option<&str> {
    let rest = msg.strip_prefix("missing field `")?;
    rest.split('`').next()
}

const NEEDS_MODEL: [ExperimentKind; 4] =
    [ExperimentKind::Correlate, ExperimentKind::Chsh, ExperimentKind::Maximize, ExperimentKind::CheckLocality];

/// Parses and validates config text into a runnable plan.
pub fn parse_config(text: &str, overrides: &Overrides) -> Result<Plan, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::new("", format!("invalid JSON: {e}")))?;
    let obj = value.as_object().ok_or_else(|| ConfigError::new("", "config must be a JSON object"))?;

    // structural checks first so that common omissions get precise pointers
    let kind: ExperimentKind = match obj.get("experiment") {
        None => return Err(ConfigError::new("/experiment", "missing required field")),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| ConfigError::new("/experiment", e.to_string()))?,
    };
    if NEEDS_MODEL.contains(&kind) && !obj.contains_key("model") {
        return Err(ConfigError::new("/model", format!("experiment {} requires a model", kind.as_str())));
    }
    if kind == ExperimentKind::PolytopeMembership && !obj.contains_key("model") && !obj.contains_key("behavior") {
        return Err(ConfigError::new("/model", "polytope-membership requires a model or a behavior"));
    }
    if kind == ExperimentKind::Hbt && !obj.contains_key("hbt") {
        return Err(ConfigError::new("/hbt", "experiment hbt requires an hbt section"));
    }

    let cfg: ExperimentConfig = serde_path_to_error::deserialize(&value).map_err(|e| {
        let mut pointer = pointer_from_path(e.path());
        let msg = e.inner().to_string();
        if let Some(field) = missing_field(&msg) {
            pointer.push('/');
            pointer.push_str(field);
        }
        ConfigError::new(pointer, msg)
    })?;
    plan(cfg, overrides)
}

fn seed_override(overrides: &Overrides) -> Result<Option<u64>, ConfigError> {
    if let Some(s) = overrides.seed_flag {
        return Ok(Some(s));
    }
    match &overrides.seed_env {
        Some(raw) => raw
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| ConfigError::new("", format!("{SEED_ENV}={raw:?} is not an unsigned integer"))),
        None => Ok(None),
    }
}

fn settings(v: &[f64], pointer: &str) -> Result<Vec<Setting>, ConfigError> {
    if v.is_empty() {
        return Err(ConfigError::new(pointer, "needs at least one angle"));
    }
    if let Some(k) = v.iter().position(|x| !x.is_finite()) {
        return Err(ConfigError::new(format!("{pointer}/{k}"), "angle must be finite"));
    }
    Ok(v.iter().copied().map(Setting::new).collect())
}

fn plan(cfg: ExperimentConfig, overrides: &Overrides) -> Result<Plan, ConfigError> {
    let seed_over = seed_override(overrides)?;
    let kind = cfg.experiment;

    if let Some(m) = &cfg.model {
        m.build().map_err(|e| ConfigError::new("/model", e.to_string()))?;
    }

    let (settings_a, settings_b) = match &cfg.settings {
        Some(s) => (settings(&s.a, "/settings/a")?, settings(&s.b, "/settings/b")?),
        None => match kind {
            ExperimentKind::Correlate | ExperimentKind::Chsh => {
                return Err(ConfigError::new("/settings", format!("experiment {} requires settings", kind.as_str())))
            }
            ExperimentKind::PolytopeMembership if cfg.behavior.is_none() => {
                return Err(ConfigError::new("/settings", "membership of a model requires settings"))
            }
            ExperimentKind::Hbt => {
                let (a, b) = bell_lab::hbt::default_hbt_settings();
                (a, b)
            }
            _ => (Vec::new(), Vec::new()),
        },
    };
    let needs_pairs = matches!(kind, ExperimentKind::Chsh)
        || (kind == ExperimentKind::PolytopeMembership && cfg.behavior.is_none());
    if needs_pairs {
        if settings_a.len() != 2 {
            return Err(ConfigError::new("/settings/a", "needs exactly two angles (a, a')"));
        }
        if settings_b.len() != 2 {
            return Err(ConfigError::new("/settings/b", "needs exactly two angles (b, b')"));
        }
    }

    let integration = match &cfg.integration {
        None => Integration::quadrature(),
        Some(spec) => match spec.method {
            Method::Quadrature => {
                let n = spec.n.unwrap_or(bell_lab::integrate::DEFAULT_QUADRATURE_NODES as u64);
                if n == 0 {
                    return Err(ConfigError::new("/integration/n", "n must be at least 1"));
                }
                Integration::Quadrature { n: n as usize }
            }
            Method::MonteCarlo => {
                let n = spec.n.ok_or_else(|| ConfigError::new("/integration/n", "monte-carlo requires n"))?;
                if n == 0 {
                    return Err(ConfigError::new("/integration/n", "n must be at least 1"));
                }
                let seed = seed_over
                    .or(spec.seed)
                    .ok_or_else(|| ConfigError::new("/integration/seed", "monte-carlo requires a seed"))?;
                Integration::MonteCarlo { n, seed }
            }
        },
    };

    let search = cfg.search.unwrap_or_default();
    if search.grid_n < 8 {
        return Err(ConfigError::new("/search/grid_n", "grid_n must be at least 8"));
    }
    let grid = cfg.grid.clone().unwrap_or_default();
    if grid.settings == 0 {
        return Err(ConfigError::new("/grid/settings", "must be at least 1"));
    }
    if grid.hidden == 0 {
        return Err(ConfigError::new("/grid/hidden", "must be at least 1"));
    }
    let tolerance = cfg.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance >= 0.0 && tolerance.is_finite()) {
        return Err(ConfigError::new("/tolerance", "must be finite and >= 0"));
    }
    if let Some(b) = &cfg.behavior {
        if b.shape() != (2, 2) {
            return Err(ConfigError::new("/behavior", "membership needs a 2x2 behavior"));
        }
    }

    let hbt = match &cfg.hbt {
        None => None,
        Some(h) => {
            let seed = seed_over.or(h.seed).ok_or_else(|| ConfigError::new("/hbt/seed", "hbt requires a seed"))?;
            if h.n_events == 0 {
                return Err(ConfigError::new("/hbt/n_events", "must be at least 1"));
            }
            let mut c = HbtConfig::new(h.alpha1, h.alpha2, h.n_events, seed);
            if let Some(t) = h.threshold {
                c.threshold = t;
            }
            c.validate().map_err(|e| ConfigError::new("/hbt", e.to_string()))?;
            Some(c)
        }
    };

    let output = cfg.output.clone().unwrap_or_default();
    let format = match overrides.format.as_deref() {
        Some(f) => f.parse().map_err(|e: String| ConfigError::new("", e))?,
        None => match output.format.as_deref() {
            Some(f) => f.parse().map_err(|e: String| ConfigError::new("/output/format", e))?,
            None => Format::Json,
        },
    };
    let out = overrides.out.clone().or(output.path);

    Ok(Plan {
        experiment: kind,
        model: cfg.model,
        settings_a,
        settings_b,
        integration,
        search,
        grid,
        tolerance,
        behavior: cfg.behavior,
        hbt,
        out,
        format,
    })
}
