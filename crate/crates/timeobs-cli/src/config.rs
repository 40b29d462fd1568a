//! Flat key = value run configuration.
//!
//! The format is a plain text file of `section.key = value` lines with
//! `#` comments.  Keys outside the schema, duplicate keys, and values
//! violating the library's invariants are all rejected on load with the
//! offending key path, so a run either starts from a fully validated
//! configuration or not at all.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use timeobs::scattering::{BarrierModel, UnitsConvention};
use timeobs::time_densities::EnergyQuadrature;
use timeobs::two_level::{Level, TwoLevelConfig};
use timeobs::wavepacket::GaussianPacket;
use timeobs::weak_sim::{DetectorState, FiniteSystem};
use timeobs::TimeObsError;

/// Configuration failure with the key path that caused it.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "units.hbar",
    "units.mass",
    "barrier.type",
    "barrier.strength",
    "barrier.height",
    "barrier.width",
    "packet.p_mean",
    "packet.sigma",
    "packet.x0",
    "grid.x_min",
    "grid.x_max",
    "grid.points",
    "quadrature.rel_tol",
    "quadrature.max_panels",
    "asymptotic.x2",
    "arrival.x",
    "arrival.dt",
    "arrival.sweep",
    "arrival.sweep_min",
    "arrival.sweep_max",
    "arrival.points",
    "two_level.omega",
    "two_level.coupling",
    "two_level.t_min",
    "two_level.t_max",
    "two_level.points",
    "weak_sim.omega",
    "weak_sim.coupling",
    "weak_sim.time",
    "weak_sim.level",
    "weak_sim.final_state",
    "weak_sim.var_q",
    "weak_sim.covariance",
    "weak_sim.lambda",
    "weak_sim.random_configs",
    "output.format",
];

/// Raw parsed key/value pairs.
struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", idx + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError(format!("line {}: empty key or value", idx + 1)));
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError(format!("unknown key '{key}'")));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError(format!("duplicate key '{key}'")));
            }
        }
        Ok(RawConfig { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| ConfigError(format!("{key}: invalid number '{v}': {e}")))
            })
            .transpose()
    }

    fn require_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64(key)?
            .ok_or_else(|| ConfigError(format!("missing key '{key}'")))
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|e| ConfigError(format!("{key}: invalid count '{v}': {e}")))
            })
            .transpose()
    }

    fn require_usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.usize(key)?
            .ok_or_else(|| ConfigError(format!("missing key '{key}'")))
    }

    fn level(&self, key: &str) -> Result<Option<Level>, ConfigError> {
        self.get(key)
            .map(|v| match v {
                "0" => Ok(Level::Zero),
                "1" => Ok(Level::One),
                other => Err(ConfigError(format!(
                    "{key}: expected 0 or 1, got '{other}'"
                ))),
            })
            .transpose()
    }

    fn section_present(&self, prefix: &str) -> bool {
        self.values.keys().any(|k| k.starts_with(prefix))
    }
}

/// Position grid request.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

/// Variable swept by the arrival command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Mean momentum of the packet at a fixed window.
    Momentum,
    /// Resolution window at a fixed packet.
    Window,
}

impl SweepVariable {
    /// Column name of the swept quantity.
    pub fn column(&self) -> &'static str {
        match self {
            SweepVariable::Momentum => "p",
            SweepVariable::Window => "dt",
        }
    }
}

/// Arrival command request.
#[derive(Debug, Clone, Copy)]
pub struct ArrivalSpec {
    pub x: f64,
    pub dt: Option<f64>,
    pub sweep: SweepVariable,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub points: usize,
}

/// Two-level command request.
#[derive(Debug, Clone, Copy)]
pub struct TwoLevelSpec {
    pub omega: f64,
    pub coupling: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

/// Weak-simulation command request.
#[derive(Debug, Clone, Copy)]
pub struct WeakSimSpec {
    pub omega: f64,
    pub coupling: f64,
    pub time: f64,
    pub level: Level,
    pub final_state: Option<Level>,
    pub var_q: f64,
    pub covariance: f64,
    pub lambda: f64,
    pub random_configs: usize,
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub units: UnitsConvention,
    pub barrier: Option<BarrierModel>,
    pub packet: Option<GaussianPacket>,
    pub grid: Option<GridSpec>,
    pub quadrature: EnergyQuadrature,
    pub asymptotic_x2: Option<f64>,
    pub arrival: Option<ArrivalSpec>,
    pub two_level: Option<TwoLevelSpec>,
    pub weak_sim: Option<WeakSimSpec>,
}

fn lib_err(section: &str, e: TimeObsError) -> ConfigError {
    ConfigError(format!("{section}: {e}"))
}

impl RunConfig {
    /// Loads and validates a configuration file.  The optional tolerance
    /// replaces the configured quadrature relative tolerance.
    pub fn load(path: &Path, tolerance: Option<f64>) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read '{}': {e}", path.display())))?;
        Self::from_text(&text, tolerance)
    }

    /// Parses and validates configuration text.
    pub fn from_text(text: &str, tolerance: Option<f64>) -> Result<Self, ConfigError> {
        let raw = RawConfig::parse(text)?;

        if let Some(format) = raw.get("output.format") {
            if format != "csv" {
                return Err(ConfigError(format!(
                    "output.format: only 'csv' is supported, got '{format}'"
                )));
            }
        }

        let hbar = raw.f64("units.hbar")?.unwrap_or(1.0);
        let mass = raw.f64("units.mass")?.unwrap_or(1.0);
        let units = UnitsConvention::new(hbar, mass).map_err(|e| lib_err("units", e))?;

        let barrier = Self::barrier(&raw)?;
        let packet = Self::packet(&raw)?;
        let grid = Self::grid(&raw)?;
        let quadrature = Self::quadrature(&raw, tolerance)?;
        let asymptotic_x2 = raw.f64("asymptotic.x2")?;
        let arrival = Self::arrival(&raw, packet.as_ref())?;
        let two_level = Self::two_level(&raw, &units)?;
        let weak_sim = Self::weak_sim(&raw, &units)?;

        Ok(RunConfig {
            units,
            barrier,
            packet,
            grid,
            quadrature,
            asymptotic_x2,
            arrival,
            two_level,
            weak_sim,
        })
    }

    fn barrier(raw: &RawConfig) -> Result<Option<BarrierModel>, ConfigError> {
        let Some(kind) = raw.get("barrier.type") else {
            if raw.section_present("barrier.") {
                return Err(ConfigError("missing key 'barrier.type'".into()));
            }
            return Ok(None);
        };
        let reject = |key: &str| -> Result<(), ConfigError> {
            if raw.get(key).is_some() {
                Err(ConfigError(format!(
                    "{key} is not valid for barrier.type = {kind}"
                )))
            } else {
                Ok(())
            }
        };
        let model = match kind {
            "free" => {
                reject("barrier.strength")?;
                reject("barrier.height")?;
                reject("barrier.width")?;
                BarrierModel::Free
            }
            "delta" => {
                reject("barrier.height")?;
                reject("barrier.width")?;
                BarrierModel::Delta {
                    strength: raw.require_f64("barrier.strength")?,
                }
            }
            "rectangular" => {
                reject("barrier.strength")?;
                BarrierModel::Rectangular {
                    height: raw.require_f64("barrier.height")?,
                    width: raw.require_f64("barrier.width")?,
                }
            }
            other => {
                return Err(ConfigError(format!(
                    "barrier.type: expected free, delta or rectangular, got '{other}'"
                )))
            }
        };
        model.validate().map_err(|e| lib_err("barrier", e))?;
        Ok(Some(model))
    }

    fn packet(raw: &RawConfig) -> Result<Option<GaussianPacket>, ConfigError> {
        if !raw.section_present("packet.") {
            return Ok(None);
        }
        let p_mean = raw.require_f64("packet.p_mean")?;
        let sigma = raw.require_f64("packet.sigma")?;
        let packet = match raw.f64("packet.x0")? {
            Some(x0) => GaussianPacket::with_start(p_mean, sigma, x0),
            None => GaussianPacket::new(p_mean, sigma),
        }
        .map_err(|e| lib_err("packet", e))?;
        Ok(Some(packet))
    }

    fn grid(raw: &RawConfig) -> Result<Option<GridSpec>, ConfigError> {
        if !raw.section_present("grid.") {
            return Ok(None);
        }
        let spec = GridSpec {
            x_min: raw.require_f64("grid.x_min")?,
            x_max: raw.require_f64("grid.x_max")?,
            points: raw.require_usize("grid.points")?,
        };
        if !(spec.x_min.is_finite() && spec.x_max.is_finite() && spec.x_min < spec.x_max) {
            return Err(ConfigError(format!(
                "grid: x_min must be below x_max, got [{}, {}]",
                spec.x_min, spec.x_max
            )));
        }
        if spec.points < 2 {
            return Err(ConfigError(format!(
                "grid.points: need at least 2, got {}",
                spec.points
            )));
        }
        Ok(Some(spec))
    }

    fn quadrature(
        raw: &RawConfig,
        tolerance: Option<f64>,
    ) -> Result<EnergyQuadrature, ConfigError> {
        let defaults = EnergyQuadrature::default();
        let rel_tol = tolerance
            .or(raw.f64("quadrature.rel_tol")?)
            .unwrap_or(defaults.rel_tol);
        let max_panels = raw
            .usize("quadrature.max_panels")?
            .unwrap_or(defaults.max_panels);
        EnergyQuadrature::new(rel_tol, max_panels).map_err(|e| lib_err("quadrature", e))
    }

    fn arrival(
        raw: &RawConfig,
        packet: Option<&GaussianPacket>,
    ) -> Result<Option<ArrivalSpec>, ConfigError> {
        if !raw.section_present("arrival.") {
            return Ok(None);
        }
        let sweep = match raw.get("arrival.sweep") {
            Some("p") => SweepVariable::Momentum,
            Some("dt") => SweepVariable::Window,
            Some(other) => {
                return Err(ConfigError(format!(
                    "arrival.sweep: expected p or dt, got '{other}'"
                )))
            }
            None => return Err(ConfigError("missing key 'arrival.sweep'".into())),
        };
        let spec = ArrivalSpec {
            x: raw.require_f64("arrival.x")?,
            dt: raw.f64("arrival.dt")?,
            sweep,
            sweep_min: raw.require_f64("arrival.sweep_min")?,
            sweep_max: raw.require_f64("arrival.sweep_max")?,
            points: raw.require_usize("arrival.points")?,
        };
        if !spec.x.is_finite() {
            return Err(ConfigError(format!(
                "arrival.x: must be finite, got {}",
                spec.x
            )));
        }
        if !(spec.sweep_min.is_finite()
            && spec.sweep_max.is_finite()
            && spec.sweep_min < spec.sweep_max)
        {
            return Err(ConfigError(format!(
                "arrival: sweep_min must be below sweep_max, got [{}, {}]",
                spec.sweep_min, spec.sweep_max
            )));
        }
        if spec.points < 2 {
            return Err(ConfigError(format!(
                "arrival.points: need at least 2, got {}",
                spec.points
            )));
        }
        match sweep {
            SweepVariable::Momentum => {
                let dt = spec.dt.ok_or_else(|| {
                    ConfigError("missing key 'arrival.dt' (required when sweeping p)".into())
                })?;
                if !(dt.is_finite() && dt > 0.0) {
                    return Err(ConfigError(format!(
                        "arrival.dt: must be positive, got {dt}"
                    )));
                }
                if let Some(base) = packet {
                    for p in [spec.sweep_min, spec.sweep_max] {
                        GaussianPacket::with_start(p, base.sigma, base.x0)
                            .map_err(|e| lib_err("arrival sweep", e))?;
                    }
                }
            }
            SweepVariable::Window => {
                if spec.dt.is_some() {
                    return Err(ConfigError(
                        "arrival.dt conflicts with arrival.sweep = dt".into(),
                    ));
                }
                if spec.sweep_min <= 0.0 {
                    return Err(ConfigError(format!(
                        "arrival.sweep_min: windows must be positive, got {}",
                        spec.sweep_min
                    )));
                }
            }
        }
        Ok(Some(spec))
    }

    fn two_level(
        raw: &RawConfig,
        units: &UnitsConvention,
    ) -> Result<Option<TwoLevelSpec>, ConfigError> {
        if !raw.section_present("two_level.") {
            return Ok(None);
        }
        let spec = TwoLevelSpec {
            omega: raw.require_f64("two_level.omega")?,
            coupling: raw.require_f64("two_level.coupling")?,
            t_min: raw.require_f64("two_level.t_min")?,
            t_max: raw.require_f64("two_level.t_max")?,
            points: raw.require_usize("two_level.points")?,
        };
        TwoLevelConfig::new(spec.omega, Complex64::new(spec.coupling, 0.0), units.hbar)
            .map_err(|e| lib_err("two_level", e))?;
        if !(spec.t_min.is_finite() && spec.t_max.is_finite() && spec.t_min < spec.t_max)
            || spec.t_min < 0.0
        {
            return Err(ConfigError(format!(
                "two_level: need 0 <= t_min < t_max, got [{}, {}]",
                spec.t_min, spec.t_max
            )));
        }
        if spec.points < 2 {
            return Err(ConfigError(format!(
                "two_level.points: need at least 2, got {}",
                spec.points
            )));
        }
        Ok(Some(spec))
    }

    fn weak_sim(
        raw: &RawConfig,
        units: &UnitsConvention,
    ) -> Result<Option<WeakSimSpec>, ConfigError> {
        if !raw.section_present("weak_sim.") {
            return Ok(None);
        }
        let spec = WeakSimSpec {
            omega: raw.require_f64("weak_sim.omega")?,
            coupling: raw.require_f64("weak_sim.coupling")?,
            time: raw.require_f64("weak_sim.time")?,
            level: raw.level("weak_sim.level")?.unwrap_or(Level::Zero),
            final_state: raw.level("weak_sim.final_state")?,
            var_q: raw.f64("weak_sim.var_q")?.unwrap_or(1.0),
            covariance: raw.f64("weak_sim.covariance")?.unwrap_or(0.0),
            lambda: raw.f64("weak_sim.lambda")?.unwrap_or(0.05),
            random_configs: raw.usize("weak_sim.random_configs")?.unwrap_or(0),
        };
        if !(spec.time.is_finite() && spec.time > 0.0) {
            return Err(ConfigError(format!(
                "weak_sim.time: must be positive, got {}",
                spec.time
            )));
        }
        if !(spec.lambda.is_finite() && spec.lambda > 0.0) {
            return Err(ConfigError(format!(
                "weak_sim.lambda: must be positive, got {}",
                spec.lambda
            )));
        }
        FiniteSystem::two_level(
            spec.omega,
            Complex64::new(spec.coupling, 0.0),
            spec.level,
            units,
        )
        .map_err(|e| lib_err("weak_sim", e))?;
        DetectorState::gaussian_with_covariance(spec.var_q, spec.covariance, units)
            .map_err(|e| lib_err("weak_sim detector", e))?;
        Ok(Some(spec))
    }
}
