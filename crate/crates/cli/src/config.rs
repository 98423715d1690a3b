//! Flat `key = value` scenario configuration.
//!
//! Lines are `key = value` with dotted section keys (`packet.sigma0 = 0.5`).
//! `#` starts a comment. Every key has a default, unknown keys are rejected,
//! and every error carries the offending line number when there is one.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use subquantum::collapse::{BumpProfile, CollapseConfig};
use subquantum::lattice::LatticeConfig;
use subquantum::superposition::{GradientCorrelation, MagnitudeLaw, ReductionConfig, Sign};
use subquantum::walkers::EnsembleConfig;
use subquantum::{DiffusivitySchedule, PacketSpec};

pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    Dispersion,
    Trajectories,
    Interfere,
    Entangle,
    Collapse,
    Validate,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Dispersion,
        Scenario::Trajectories,
        Scenario::Interfere,
        Scenario::Entangle,
        Scenario::Collapse,
        Scenario::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Dispersion => "dispersion",
            Scenario::Trajectories => "trajectories",
            Scenario::Interfere => "interfere",
            Scenario::Entangle => "entangle",
            Scenario::Collapse => "collapse",
            Scenario::Validate => "validate",
        }
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                format!(
                    "unknown scenario `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSettings {
    pub cell_count: usize,
    pub horizon: f64,
    /// Half-width of the domain in units of `sigma(horizon)`.
    pub domain_sigmas: f64,
    pub dt_max: f64,
    pub safety: f64,
    pub outputs: usize,
    /// Exponent of `D(t) ∝ t^p`; `1` is the physical schedule.
    pub diffusivity_exponent: f64,
}

impl Default for LatticeSettings {
    fn default() -> Self {
        Self {
            cell_count: 2048,
            horizon: 2.0,
            domain_sigmas: 10.0,
            dt_max: LatticeConfig::DEFAULT_DT_MAX,
            safety: LatticeConfig::DEFAULT_SAFETY,
            outputs: LatticeConfig::DEFAULT_OUTPUTS,
            diffusivity_exponent: 1.0,
        }
    }
}

impl LatticeSettings {
    pub fn build(&self, spec: &PacketSpec) -> subquantum::Result<LatticeConfig> {
        let mut cfg =
            LatticeConfig::covering(spec, self.cell_count, self.horizon, self.domain_sigmas)?;
        cfg.dt_max = self.dt_max;
        cfg.safety = self.safety;
        cfg.outputs = self.outputs;
        cfg.schedule = if self.diffusivity_exponent == 1.0 {
            DiffusivitySchedule::Linear
        } else {
            DiffusivitySchedule::Power {
                exponent: self.diffusivity_exponent,
            }
        };
        cfg.validate(spec)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSettings {
    pub n_walkers: usize,
    pub dt: f64,
    pub horizon: f64,
    pub outputs: usize,
    pub histogram_bins: usize,
}

impl Default for EnsembleSettings {
    fn default() -> Self {
        Self {
            n_walkers: 1_000_000,
            dt: 0.01,
            horizon: 2.0,
            outputs: 10,
            histogram_bins: 100,
        }
    }
}

impl EnsembleSettings {
    pub fn build(&self, seed: u64) -> subquantum::Result<EnsembleConfig> {
        EnsembleConfig::new(self.n_walkers, self.dt, self.horizon, seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionSettings {
    pub n_samples: usize,
    pub alphas: Vec<f64>,
    pub k_s: f64,
    pub k_u: f64,
    pub magnitude_spread: f64,
    pub r_a: f64,
    pub r_b: f64,
    pub sign: Sign,
    pub points: usize,
}

impl Default for SuperpositionSettings {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            alphas: vec![0.5, 1.0, 2.0],
            k_s: 1.0,
            k_u: 1.0,
            magnitude_spread: 0.0,
            r_a: std::f64::consts::FRAC_1_SQRT_2,
            r_b: std::f64::consts::FRAC_1_SQRT_2,
            sign: Sign::Plus,
            points: 361,
        }
    }
}

impl SuperpositionSettings {
    pub fn reduction(
        &self,
        alpha: f64,
        seed: u64,
        correlation: GradientCorrelation,
    ) -> ReductionConfig {
        ReductionConfig {
            n_samples: self.n_samples,
            weight_alpha: alpha,
            seed,
            k_s: self.k_s,
            k_u: self.k_u,
            magnitudes: if self.magnitude_spread > 0.0 {
                MagnitudeLaw::Uniform {
                    spread: self.magnitude_spread,
                }
            } else {
                MagnitudeLaw::Fixed
            },
            correlation,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntangleSettings {
    pub k1: f64,
    pub k2: f64,
    pub r_max: f64,
    pub points: usize,
    pub product_instances: usize,
}

impl Default for EntangleSettings {
    fn default() -> Self {
        Self {
            k1: 1.0,
            k2: -1.0,
            r_max: std::f64::consts::PI,
            points: 361,
            product_instances: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseSettings {
    pub rates: Vec<f64>,
    pub n_samples: usize,
    /// Field parameters; `model.a` is replaced by each entry of `rates`.
    pub model: CollapseConfig,
}

impl Default for CollapseSettings {
    fn default() -> Self {
        Self {
            rates: vec![0.0, 0.5, 1.0, 2.0],
            n_samples: 20_000,
            model: CollapseConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Option<Scenario>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub emit_svg: bool,
    pub packet: PacketSpec,
    pub lattice: LatticeSettings,
    pub ensemble: EnsembleSettings,
    pub superposition: SuperpositionSettings,
    pub entangle: EntangleSettings,
    pub collapse: CollapseSettings,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            seed: DEFAULT_SEED,
            output_dir: None,
            emit_svg: false,
            packet: PacketSpec::default(),
            lattice: LatticeSettings::default(),
            ensemble: EnsembleSettings::default(),
            superposition: SuperpositionSettings::default(),
            entangle: EntangleSettings::default(),
            collapse: CollapseSettings::default(),
        }
    }
}

fn parse_f64(raw: &str) -> Result<f64, String> {
    let v: f64 = raw
        .parse()
        .map_err(|_| format!("`{raw}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{raw}` is not finite"));
    }
    Ok(v)
}

fn parse_int<T: FromStr>(raw: &str) -> Result<T, String> {
    raw.replace('_', "")
        .parse()
        .map_err(|_| format!("`{raw}` is not a non-negative integer"))
}

fn parse_bool(raw: &str) -> Result<bool, String> {
    match raw {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("`{raw}` is not a boolean")),
    }
}

fn parse_list(raw: &str) -> Result<Vec<f64>, String> {
    let values = raw
        .split(',')
        .map(|s| parse_f64(s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("list is empty".into());
    }
    Ok(values)
}

fn positive(v: f64) -> Result<f64, String> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be > 0, got {v}"))
    }
}

fn non_negative(v: f64) -> Result<f64, String> {
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be >= 0, got {v}"))
    }
}

fn at_least(v: usize, min: usize) -> Result<usize, String> {
    if v >= min {
        Ok(v)
    } else {
        Err(format!("must be >= {min}, got {v}"))
    }
}

fn list_fmt(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut lines: BTreeMap<String, usize> = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::at(
                    Some(line_no),
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            if let Some(prev) = lines.insert(key.to_string(), line_no) {
                return Err(ConfigError::at(
                    Some(line_no),
                    format!("duplicate key `{key}` (first set on line {prev})"),
                ));
            }
            cfg.assign(key, value)
                .map_err(|m| ConfigError::at(Some(line_no), format!("{key}: {m}")))?;
        }
        cfg.validate()
            .map_err(|(key, m)| ConfigError::at(lines.get(key).copied(), format!("{key}: {m}")))?;
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn assign(&mut self, key: &str, v: &str) -> Result<(), String> {
        let p = &mut self.packet;
        let l = &mut self.lattice;
        let e = &mut self.ensemble;
        let s = &mut self.superposition;
        let n = &mut self.entangle;
        let c = &mut self.collapse;
        match key {
            "scenario" => self.scenario = Some(v.parse()?),
            "seed" => self.seed = parse_int(v)?,
            "output_dir" => self.output_dir = (!v.is_empty()).then(|| PathBuf::from(v)),
            "emit_svg" => self.emit_svg = parse_bool(v)?,
            "packet.hbar" => p.hbar = positive(parse_f64(v)?)?,
            "packet.mass" => p.mass = positive(parse_f64(v)?)?,
            "packet.sigma0" => p.sigma0 = positive(parse_f64(v)?)?,
            "packet.v" => p.v = parse_f64(v)?,
            "packet.x0" => p.x0 = parse_f64(v)?,
            "lattice.cell_count" => l.cell_count = at_least(parse_int(v)?, 64)?,
            "lattice.horizon" => l.horizon = positive(parse_f64(v)?)?,
            "lattice.domain_sigmas" => l.domain_sigmas = positive(parse_f64(v)?)?,
            "lattice.dt_max" => l.dt_max = positive(parse_f64(v)?)?,
            "lattice.safety" => {
                let x = positive(parse_f64(v)?)?;
                if x > 0.5 {
                    return Err(format!("must lie in (0, 0.5], got {x}"));
                }
                l.safety = x;
            }
            "lattice.outputs" => l.outputs = at_least(parse_int(v)?, 1)?,
            "lattice.diffusivity_exponent" => l.diffusivity_exponent = non_negative(parse_f64(v)?)?,
            "ensemble.n_walkers" => e.n_walkers = at_least(parse_int(v)?, 1000)?,
            "ensemble.dt" => e.dt = positive(parse_f64(v)?)?,
            "ensemble.horizon" => e.horizon = positive(parse_f64(v)?)?,
            "ensemble.outputs" => e.outputs = at_least(parse_int(v)?, 1)?,
            "ensemble.histogram_bins" => e.histogram_bins = at_least(parse_int(v)?, 10)?,
            "superposition.n_samples" => s.n_samples = at_least(parse_int(v)?, 10_000)?,
            "superposition.alphas" => {
                s.alphas = parse_list(v)?
                    .into_iter()
                    .map(non_negative)
                    .collect::<Result<_, _>>()?
            }
            "superposition.k_s" => s.k_s = non_negative(parse_f64(v)?)?,
            "superposition.k_u" => s.k_u = non_negative(parse_f64(v)?)?,
            "superposition.magnitude_spread" => {
                let x = non_negative(parse_f64(v)?)?;
                if x > 1.0 {
                    return Err(format!("must lie in [0, 1], got {x}"));
                }
                s.magnitude_spread = x;
            }
            "superposition.r_a" => s.r_a = non_negative(parse_f64(v)?)?,
            "superposition.r_b" => s.r_b = non_negative(parse_f64(v)?)?,
            "superposition.sign" => {
                s.sign = match v {
                    "plus" | "+" => Sign::Plus,
                    "minus" | "-" => Sign::Minus,
                    _ => return Err(format!("expected `plus` or `minus`, got `{v}`")),
                }
            }
            "superposition.points" => s.points = at_least(parse_int(v)?, 2)?,
            "entangle.k1" => n.k1 = parse_f64(v)?,
            "entangle.k2" => n.k2 = parse_f64(v)?,
            "entangle.r_max" => n.r_max = positive(parse_f64(v)?)?,
            "entangle.points" => n.points = at_least(parse_int(v)?, 2)?,
            "entangle.product_instances" => n.product_instances = at_least(parse_int(v)?, 1)?,
            "collapse.rates" => c.rates = parse_list(v)?,
            "collapse.n_samples" => c.n_samples = at_least(parse_int(v)?, 10_000)?,
            "collapse.t" => c.model.t = non_negative(parse_f64(v)?)?,
            "collapse.kt" => c.model.kt = positive(parse_f64(v)?)?,
            "collapse.omega" => c.model.omega = positive(parse_f64(v)?)?,
            "collapse.epsilon" => {
                let x = non_negative(parse_f64(v)?)?;
                if x >= 1.0 {
                    return Err(format!("must lie in [0, 1), got {x}"));
                }
                c.model.epsilon = x;
            }
            "collapse.sigma" => c.model.sigma = positive(parse_f64(v)?)?,
            "collapse.window_half_width" => c.model.window_half_width = positive(parse_f64(v)?)?,
            "collapse.grid_points" => c.model.grid_points = at_least(parse_int(v)?, 3)?,
            "collapse.coupling" => c.model.coupling = non_negative(parse_f64(v)?)?,
            "collapse.bump_center" => c.model.profile.center = parse_f64(v)?,
            "collapse.bump_width" => c.model.profile.width = positive(parse_f64(v)?)?,
            "collapse.bump_height" => c.model.profile.height = parse_f64(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let (p, l, e, s, n, c) = (
            &self.packet,
            &self.lattice,
            &self.ensemble,
            &self.superposition,
            &self.entangle,
            &self.collapse,
        );
        let m = &c.model;
        vec![
            (
                "scenario",
                self.scenario
                    .map(|s| s.name().to_string())
                    .unwrap_or_default(),
            ),
            ("seed", self.seed.to_string()),
            (
                "output_dir",
                self.output_dir
                    .as_ref()
                    .map(|d| d.display().to_string())
                    .unwrap_or_default(),
            ),
            ("emit_svg", self.emit_svg.to_string()),
            ("packet.hbar", p.hbar.to_string()),
            ("packet.mass", p.mass.to_string()),
            ("packet.sigma0", p.sigma0.to_string()),
            ("packet.v", p.v.to_string()),
            ("packet.x0", p.x0.to_string()),
            ("lattice.cell_count", l.cell_count.to_string()),
            ("lattice.horizon", l.horizon.to_string()),
            ("lattice.domain_sigmas", l.domain_sigmas.to_string()),
            ("lattice.dt_max", l.dt_max.to_string()),
            ("lattice.safety", l.safety.to_string()),
            ("lattice.outputs", l.outputs.to_string()),
            (
                "lattice.diffusivity_exponent",
                l.diffusivity_exponent.to_string(),
            ),
            ("ensemble.n_walkers", e.n_walkers.to_string()),
            ("ensemble.dt", e.dt.to_string()),
            ("ensemble.horizon", e.horizon.to_string()),
            ("ensemble.outputs", e.outputs.to_string()),
            ("ensemble.histogram_bins", e.histogram_bins.to_string()),
            ("superposition.n_samples", s.n_samples.to_string()),
            ("superposition.alphas", list_fmt(&s.alphas)),
            ("superposition.k_s", s.k_s.to_string()),
            ("superposition.k_u", s.k_u.to_string()),
            (
                "superposition.magnitude_spread",
                s.magnitude_spread.to_string(),
            ),
            ("superposition.r_a", s.r_a.to_string()),
            ("superposition.r_b", s.r_b.to_string()),
            (
                "superposition.sign",
                match s.sign {
                    Sign::Plus => "plus".into(),
                    Sign::Minus => "minus".into(),
                },
            ),
            ("superposition.points", s.points.to_string()),
            ("entangle.k1", n.k1.to_string()),
            ("entangle.k2", n.k2.to_string()),
            ("entangle.r_max", n.r_max.to_string()),
            ("entangle.points", n.points.to_string()),
            (
                "entangle.product_instances",
                n.product_instances.to_string(),
            ),
            ("collapse.rates", list_fmt(&c.rates)),
            ("collapse.n_samples", c.n_samples.to_string()),
            ("collapse.t", m.t.to_string()),
            ("collapse.kt", m.kt.to_string()),
            ("collapse.omega", m.omega.to_string()),
            ("collapse.epsilon", m.epsilon.to_string()),
            ("collapse.sigma", m.sigma.to_string()),
            (
                "collapse.window_half_width",
                m.window_half_width.to_string(),
            ),
            ("collapse.grid_points", m.grid_points.to_string()),
            ("collapse.coupling", m.coupling.to_string()),
            ("collapse.bump_center", m.profile.center.to_string()),
            ("collapse.bump_width", m.profile.width.to_string()),
            ("collapse.bump_height", m.profile.height.to_string()),
        ]
    }

    /// Collapse model for one dissipation rate, with `hbar` taken from the packet.
    pub fn collapse_model(&self, rate: f64) -> CollapseConfig {
        CollapseConfig {
            a: rate,
            hbar: self.packet.hbar,
            ..self.collapse.model
        }
    }

    pub fn bump(&self) -> BumpProfile {
        self.collapse.model.profile
    }

    /// Cross-field checks. Returns the key to blame and a message.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        self.packet
            .validate()
            .map_err(|e| ("packet.sigma0", e.to_string()))?;
        self.lattice
            .build(&self.packet)
            .map_err(|e| ("lattice.cell_count", e.to_string()))?;
        self.ensemble
            .build(self.seed)
            .map_err(|e| ("ensemble.horizon", e.to_string()))?;
        if self.superposition.k_s + self.superposition.k_u <= 0.0 {
            return Err((
                "superposition.k_s",
                "k_s and k_u cannot both be zero".into(),
            ));
        }
        if self.superposition.r_a + self.superposition.r_b <= 0.0 {
            return Err((
                "superposition.r_a",
                "r_a and r_b cannot both be zero".into(),
            ));
        }
        for &rate in &self.collapse.rates {
            self.collapse_model(rate)
                .validate()
                .map_err(|e| ("collapse.epsilon", e.to_string()))?;
            subquantum::collapse::dissipation_ratio(rate, self.collapse.model.t)
                .map_err(|e| ("collapse.rates", e.to_string()))?;
        }
        Ok(())
    }
}
