//! Run configuration: TOML or JSON, every field optional, validated before any
//! computation.

use std::f64::consts::TAU;
use std::fmt;
use std::path::{Path, PathBuf};

use qising_core::dynamics::DynamicsParams;
use qising_core::isingnet::ChainConfig;
use qising_core::spacetime::{HalfIndex, MinimalCone};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub tol: f64,
    pub parallel: usize,
    pub window: WindowConfig,
    pub dynamics: DynamicsConfig,
    pub events: EventsConfig,
    pub state: StateConfig,
    pub verify_net: VerifyNetConfig,
    pub u0: U0Config,
    pub search: SearchConfig,
    pub oscillator: OscillatorConfig,
    pub regions: RegionsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tol: 1e-8,
            parallel: 1,
            window: WindowConfig::default(),
            dynamics: DynamicsConfig::default(),
            events: EventsConfig::default(),
            state: StateConfig::default(),
            verify_net: VerifyNetConfig::default(),
            u0: U0Config::default(),
            search: SearchConfig::default(),
            oscillator: OscillatorConfig::default(),
            regions: RegionsConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    pub x_min: i64,
    pub x_max: i64,
    pub padding: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            x_min: -2,
            x_max: 3,
            padding: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub theta1: f64,
    pub theta2: f64,
    pub eta1: i8,
    pub eta2: i8,
    /// Draw the parameters from the run seed instead.
    pub random: bool,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            theta1: 0.4,
            theta2: 0.9,
            eta1: 1,
            eta2: -1,
            random: false,
        }
    }
}

/// The event `½(1 + sign · U)` for the generator `U` of the minimal cone
/// `O^m_x + (t, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EventSpec {
    pub x: f64,
    pub t: i64,
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EventsConfig {
    pub a: EventSpec,
    pub b: EventSpec,
}

impl Default for EventSpec {
    fn default() -> Self {
        Self { x: -0.5, t: 1, sign: 1 }
    }
}

impl Default for EventsConfig {
    fn default() -> Self {
        Self {
            a: EventSpec { x: -0.5, t: 1, sign: 1 },
            b: EventSpec { x: 0.5, t: 1, sign: 1 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateConfig {
    pub lambdas: [f64; 4],
    /// JSON file holding the density matrix as rows of `[re, im]` pairs;
    /// overrides `lambdas`.
    pub density_file: Option<PathBuf>,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self {
            lambdas: [1.0, 1.0, 0.6, 1.4],
            density_file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyNetConfig {
    pub max_n: usize,
}

impl Default for VerifyNetConfig {
    fn default() -> Self {
        Self { max_n: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct U0Config {
    /// Dynamics to sweep; the standard 3×3×2×2 grid when absent.
    pub grid: Option<Vec<DynamicsParams>>,
    /// Also evaluate the cause for these weights at the configured dynamics.
    pub probe_lambdas: Option<[f64; 4]>,
}

impl Default for U0Config {
    fn default() -> Self {
        Self {
            grid: None,
            probe_lambdas: Some([1.6, 1.4, 0.5, 0.5]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchTarget {
    /// Algebra of the weak-past support region.
    WeakPast,
    /// The whole window algebra.
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub restarts: usize,
    pub iters: usize,
    pub target: SearchTarget,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            iters: 3000,
            target: SearchTarget::WeakPast,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorConfig {
    pub n_levels: usize,
    pub points: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub hbar: f64,
    pub m: f64,
    pub omega: f64,
}

impl Default for OscillatorConfig {
    fn default() -> Self {
        Self {
            n_levels: 8,
            points: 100,
            t_min: 0.0,
            t_max: TAU,
            hbar: 1.0,
            m: 1.0,
            omega: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DiagramFormat {
    Text,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionsConfig {
    pub format: DiagramFormat,
    pub x_range: (i64, i64),
    pub t_range: (i64, i64),
}

impl Default for RegionsConfig {
    fn default() -> Self {
        Self {
            format: DiagramFormat::Text,
            x_range: (-4, 4),
            t_range: (-3, 2),
        }
    }
}

fn invalid(path: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("{path}: {msg}"))
}

impl EventSpec {
    pub fn cone(&self) -> Result<MinimalCone, ConfigError> {
        let x = HalfIndex::from_f64(self.x).ok_or_else(|| invalid("x", "must be a multiple of 1/2"))?;
        Ok(MinimalCone::new(x, self.t))
    }

    fn validate(&self, path: &str) -> Result<(), ConfigError> {
        self.cone().map_err(|e| invalid(path, e))?;
        if self.sign != 1 && self.sign != -1 {
            return Err(invalid(&format!("{path}.sign"), "must be +1 or -1"));
        }
        Ok(())
    }
}

impl RunConfig {
    /// Reads a TOML or JSON config (by extension). A JSON report produced by
    /// this tool is accepted too; its embedded config is used.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg = if is_json {
            Self::from_json(&text)?
        } else {
            Self::from_toml(&text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text).map_err(|e| ConfigError(format!("invalid TOML: {e}")))?;
        serde_path_to_error::deserialize(de).map_err(|e| invalid(&e.path().to_string(), e.inner()))
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ConfigError(format!("invalid JSON: {e}")))?;
        let value = match value {
            serde_json::Value::Object(mut map) if map.contains_key("command") && map.contains_key("config") => {
                map.remove("config").unwrap_or_default()
            }
            other => other,
        };
        serde_path_to_error::deserialize(value).map_err(|e| invalid(&e.path().to_string(), e.inner()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid("tol", "must be positive"));
        }
        if self.parallel == 0 {
            return Err(invalid("parallel", "must be at least 1"));
        }
        self.chain_config()?;
        if !self.dynamics.random {
            self.dynamics_params()?;
        }
        self.events.a.validate("events.a")?;
        self.events.b.validate("events.b")?;
        if self.state.density_file.is_none() {
            qising_core::probspace::validate_lambdas(self.state.lambdas).map_err(|e| invalid("state.lambdas", e))?;
        }
        if let Some(grid) = &self.u0.grid {
            for (k, p) in grid.iter().enumerate() {
                p.validate().map_err(|e| invalid(&format!("u0.grid[{k}]"), e))?;
            }
        }
        if let Some(l) = self.u0.probe_lambdas {
            qising_core::probspace::validate_lambdas(l).map_err(|e| invalid("u0.probe_lambdas", e))?;
        }
        if self.search.restarts == 0 || self.search.iters == 0 {
            return Err(invalid("search", "restarts and iters must be positive"));
        }
        let o = &self.oscillator;
        qising_core::oscillator::FockTruncation::with_units(o.n_levels, o.hbar, o.m, o.omega)
            .map_err(|e| invalid("oscillator", e))?;
        if o.points < 2 || !(o.t_max > o.t_min) {
            return Err(invalid("oscillator", "need at least 2 points and t_max > t_min"));
        }
        let r = &self.regions;
        if r.x_range.0 > r.x_range.1 || r.t_range.0 > r.t_range.1 {
            return Err(invalid("regions", "ranges must be ordered"));
        }
        Ok(())
    }

    pub fn chain_config(&self) -> Result<ChainConfig, ConfigError> {
        ChainConfig::new(self.window.x_min, self.window.x_max, self.window.padding).map_err(|e| invalid("window", e))
    }

    pub fn dynamics_params(&self) -> Result<DynamicsParams, ConfigError> {
        let d = &self.dynamics;
        if d.random {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            return Ok(DynamicsParams::random(&mut rng));
        }
        DynamicsParams::new(d.theta1, d.theta2, d.eta1, d.eta2).map_err(|e| invalid("dynamics", e))
    }
}
