//! Coupled-map-lattice diffusion with a time-dependent diffusivity.
//!
//! The density is evolved in the frame co-moving with the packet center by
//! the explicit three-point map
//! `p'[i] = p[i] + alpha (p[i+1] - 2 p[i] + p[i-1])`, `alpha = D(t_mid) dt / dx^2`,
//! with zero-flux boundaries. The drift `v t` is added back when positions
//! are reported.

pub use crate::analytics::DiffusivitySchedule;
use crate::analytics::PacketSpec;
use crate::error::{check_time, invalid, Error, Result};
use crate::exec::Exec;
use crate::numerics::{gaussian, CompensatedSum};

const STENCIL_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    pub cell_count: usize,
    pub dx: f64,
    /// Upper bound on a single time step.
    pub dt_max: f64,
    pub horizon: f64,
    /// Target `alpha` used when choosing the adaptive step, in `(0, 0.5]`.
    pub safety: f64,
    /// Number of evenly spaced output intervals; `outputs + 1` fields are emitted.
    pub outputs: usize,
    pub schedule: DiffusivitySchedule,
}

impl LatticeConfig {
    pub const DEFAULT_SAFETY: f64 = 0.25;
    pub const DEFAULT_DT_MAX: f64 = 0.01;
    pub const DEFAULT_OUTPUTS: usize = 40;

    /// Lattice of `cell_count` cells spanning `x0 ± domain_sigmas * sigma(horizon)`.
    pub fn covering(
        spec: &PacketSpec,
        cell_count: usize,
        horizon: f64,
        domain_sigmas: f64,
    ) -> Result<Self> {
        spec.validate()?;
        let half_width = spec.x0.abs() + domain_sigmas * spec.sigma(horizon)?;
        Ok(Self {
            cell_count,
            dx: 2.0 * half_width / cell_count as f64,
            dt_max: Self::DEFAULT_DT_MAX,
            horizon,
            safety: Self::DEFAULT_SAFETY,
            outputs: Self::DEFAULT_OUTPUTS,
            schedule: DiffusivitySchedule::Linear,
        })
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.cell_count as f64 * self.dx
    }

    pub fn validate(&self, spec: &PacketSpec) -> Result<()> {
        spec.validate()?;
        if self.cell_count < 64 {
            return Err(invalid(
                "cell_count",
                format!("must be >= 64, got {}", self.cell_count),
            ));
        }
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(invalid("dx", format!("must be > 0, got {}", self.dx)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid(
                "horizon",
                format!("must be > 0, got {}", self.horizon),
            ));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(invalid(
                "dt_max",
                format!("must be > 0, got {}", self.dt_max),
            ));
        }
        if !(self.safety > 0.0 && self.safety <= 0.5) {
            return Err(invalid(
                "safety",
                format!("must lie in (0, 0.5], got {}", self.safety),
            ));
        }
        if self.outputs == 0 {
            return Err(invalid("outputs", "must be >= 1"));
        }
        if let DiffusivitySchedule::Power { exponent } = self.schedule {
            if !(exponent.is_finite() && exponent >= 0.0) {
                return Err(invalid(
                    "schedule",
                    format!("exponent must be >= 0, got {exponent}"),
                ));
            }
        }
        let required = spec.x0.abs() + 8.0 * spec.sigma(self.horizon)?;
        let half_width = self.half_width();
        if half_width < required {
            return Err(Error::DomainTooSmall {
                half_width,
                required,
            });
        }
        Ok(())
    }

    /// Co-moving position of the center of cell `i`.
    #[inline]
    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5 - 0.5 * self.cell_count as f64) * self.dx
    }
}

/// Probability density per cell at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    values: Vec<f64>,
    t: f64,
    spec: PacketSpec,
    config: LatticeConfig,
}

impl LatticeField {
    /// Samples the `t = 0` Gaussian at the cell centers and renormalizes the
    /// sampled mass to one.
    pub fn new(spec: PacketSpec, config: LatticeConfig) -> Result<Self> {
        config.validate(&spec)?;
        let mut values: Vec<f64> = (0..config.cell_count)
            .map(|i| gaussian(config.cell_center(i), spec.x0, spec.sigma0))
            .collect();
        let mass = values.iter().copied().collect::<CompensatedSum>().value() * config.dx;
        values.iter_mut().for_each(|v| *v /= mass);
        Ok(Self {
            values,
            t: 0.0,
            spec,
            config,
        })
    }

    /// Resumes from saved cell values at time `t`. Values are taken as is;
    /// a corrupted density shows up later as a quantile error.
    pub fn from_state(
        spec: PacketSpec,
        config: LatticeConfig,
        values: Vec<f64>,
        t: f64,
    ) -> Result<Self> {
        config.validate(&spec)?;
        check_time(t)?;
        if values.len() != config.cell_count {
            return Err(invalid(
                "values",
                format!("expected {} cells, got {}", config.cell_count, values.len()),
            ));
        }
        Ok(Self {
            values,
            t,
            spec,
            config,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn spec(&self) -> &PacketSpec {
        &self.spec
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    /// Lab-frame position of cell `i` (drift included).
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.config.cell_center(i) + self.spec.v * self.t
    }

    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .collect::<CompensatedSum>()
            .value()
            * self.config.dx
    }

    /// Lab-frame center of mass.
    pub fn mean(&self) -> f64 {
        self.comoving_mean() + self.spec.v * self.t
    }

    fn comoving_mean(&self) -> f64 {
        let first: CompensatedSum = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.config.cell_center(i))
            .collect();
        first.value() * self.config.dx / self.mass()
    }

    /// Second central moment.
    pub fn variance(&self) -> f64 {
        let mean = self.comoving_mean();
        let second: CompensatedSum = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let d = self.config.cell_center(i) - mean;
                v * d * d
            })
            .collect();
        second.value() * self.config.dx / self.mass()
    }

    pub fn diffusivity_at(&self, t: f64) -> f64 {
        self.config.schedule.at(&self.spec, t)
    }

    /// Stencil coefficient for a step of length `dt` from the current time.
    pub fn alpha(&self, dt: f64) -> f64 {
        let dx = self.config.dx;
        self.diffusivity_at(self.t + 0.5 * dt) * dt / (dx * dx)
    }

    /// Advances the field by one explicit step of length `dt`.
    pub fn step(&mut self, dt: f64, exec: &Exec) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("must be > 0, got {dt}")));
        }
        let alpha = self.alpha(dt);
        if alpha > 0.5 {
            return Err(Error::Unstable {
                alpha,
                t: self.t,
                dt,
            });
        }
        let input = &self.values;
        let n = input.len();
        let mut next = vec![0.0; n];
        exec.for_each_chunk_mut(&mut next, STENCIL_CHUNK, |offset, out| {
            for (k, slot) in out.iter_mut().enumerate() {
                let i = offset + k;
                let here = input[i];
                let left = if i == 0 { here } else { input[i - 1] };
                let right = if i + 1 == n { here } else { input[i + 1] };
                *slot = here + alpha * (right - 2.0 * here + left);
            }
        });
        self.values = next;
        self.t += dt;
        Ok(())
    }

    /// Adaptive step: `safety dx^2 / max(D(t), D_floor)` capped by `dt_max`,
    /// then shortened so that `D` at the step midpoint also respects
    /// `safety`.
    pub fn suggested_dt(&self) -> f64 {
        let cfg = &self.config;
        let dx2 = cfg.dx * cfg.dx;
        let floor = self.diffusivity_at(cfg.dt_max);
        let d_now = self.diffusivity_at(self.t).max(floor);
        let mut dt = (cfg.safety * dx2 / d_now).min(cfg.dt_max);
        let d_mid = self.diffusivity_at(self.t + 0.5 * dt);
        if d_mid > 0.0 {
            dt = dt.min(cfg.safety * dx2 / d_mid);
        }
        dt
    }

    fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(cell) => Err(Error::NonFinite { cell, t: self.t }),
            None => Ok(()),
        }
    }

    /// Position where the cumulative probability reaches `q`, by linear
    /// interpolation inside the crossing cell. Lab frame.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(invalid("q", format!("must lie in (0, 1), got {q}")));
        }
        let dx = self.config.dx;
        let total = self.mass();
        let mut acc = CompensatedSum::new();
        let mut below = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::NonMonotoneCdf { cell: i, t: self.t });
            }
            acc.add(v * dx);
            let above = acc.value() / total;
            if above >= q && above > below {
                let left_edge = self.x(i) - 0.5 * dx;
                return Ok(left_edge + (q - below) / (above - below) * dx);
            }
            below = above;
        }
        Err(Error::NonMonotoneCdf {
            cell: self.values.len() - 1,
            t: self.t,
        })
    }
}

pub fn init_lattice(spec: PacketSpec, config: LatticeConfig) -> Result<LatticeField> {
    LatticeField::new(spec, config)
}

/// Output of a lattice run.
#[derive(Debug, Clone)]
pub struct LatticeRun {
    /// Fields at the evenly spaced output times, starting with `t = 0`.
    pub fields: Vec<LatticeField>,
    /// `(t, measured variance)` for every emitted field.
    pub variance_series: Vec<(f64, f64)>,
    pub steps: usize,
}

/// Integrates from `t = 0` to the horizon, emitting `config.outputs + 1`
/// fields at evenly spaced times.
pub fn run(spec: PacketSpec, config: LatticeConfig, exec: &Exec) -> Result<LatticeRun> {
    let mut field = LatticeField::new(spec, config)?;
    let mut fields = Vec::with_capacity(config.outputs + 1);
    fields.push(field.clone());
    let mut steps = 0;
    for k in 1..=config.outputs {
        let target = config.horizon * k as f64 / config.outputs as f64;
        while field.t < target {
            let mut dt = field.suggested_dt();
            let remaining = target - field.t;
            let last = dt >= remaining * (1.0 - 1e-9);
            if last {
                dt = remaining;
            }
            field.step(dt, exec)?;
            if last {
                field.t = target;
            }
            steps += 1;
        }
        field.check_finite()?;
        fields.push(field.clone());
    }
    let variance_series = fields.iter().map(|f| (f.t, f.variance())).collect();
    Ok(LatticeRun {
        fields,
        variance_series,
        steps,
    })
}

/// Constant-quantile streamline of the density.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTrajectory {
    pub q: f64,
    /// `(t, x)` pairs in the lab frame, strictly increasing in `t`.
    pub samples: Vec<(f64, f64)>,
}

impl QuantileTrajectory {
    /// Mean and standard deviation over time of `(x - x0 - v t) / sigma(t)`,
    /// with `sigma(t)` measured from the matching field.
    pub fn ratio_stats(&self, fields: &[LatticeField]) -> (f64, f64) {
        let ratios: Vec<f64> = self
            .samples
            .iter()
            .zip(fields)
            .map(|(&(t, x), f)| (x - f.spec.x0 - f.spec.v * t) / f.variance().sqrt())
            .collect();
        let n = ratios.len() as f64;
        let mean = ratios.iter().sum::<f64>() / n;
        let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        (mean, var.sqrt())
    }
}

pub fn extract_quantile_trajectories(
    fields: &[LatticeField],
    quantiles: &[f64],
) -> Result<Vec<QuantileTrajectory>> {
    if fields.is_empty() {
        return Err(invalid("fields", "at least one field is required"));
    }
    quantiles
        .iter()
        .map(|&q| {
            let samples = fields
                .iter()
                .map(|f| Ok((f.t, f.quantile(q)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(QuantileTrajectory { q, samples })
        })
        .collect()
}

/// The nine evenly spaced quantiles `0.1, 0.2, ..., 0.9`.
pub fn nine_quantiles() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

/// Measured spreading ratio `sigma(horizon) / sigma(0)` of a run.
pub fn spreading_ratio(run: &LatticeRun) -> f64 {
    let first = run.variance_series.first().map(|p| p.1).unwrap_or(f64::NAN);
    let last = run.variance_series.last().map(|p| p.1).unwrap_or(f64::NAN);
    (last / first).sqrt()
}
