//! Closed-form description of a freely spreading Gaussian packet driven by
//! sub-quantum diffusion with a linearly growing diffusivity.
//!
//! These functions are the reference that the lattice and walker simulations
//! are measured against. Everything is one-dimensional and all inputs are
//! rejected for `t < 0`.

use crate::error::{check_time, invalid, Error, Result};
use crate::numerics::{gaussian, gradient, second_difference, trapezoid, UniformGrid};

/// Physical parameters of one prepared Gaussian packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    pub hbar: f64,
    pub mass: f64,
    /// Initial r.m.s. width.
    pub sigma0: f64,
    /// Drift velocity of the packet center.
    pub v: f64,
    /// Center at `t = 0`.
    pub x0: f64,
}

/// Scales fixed by a [`PacketSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// Diffusion constant `hbar / 2m`.
    pub diffusion: f64,
    /// Initial velocity fluctuation `D / sigma0`.
    pub u0: f64,
    /// Oscillator frequency `D / (2 sigma0^2)`.
    pub omega: f64,
    /// Diffusion length `2 sigma0`.
    pub diffusion_length: f64,
}

/// Diffusivity law used by the simulations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DiffusivitySchedule {
    /// `D(t) = u0^2 t`.
    #[default]
    Linear,
    /// `D(t) = u0^2 t^exponent`; only useful as a negative control.
    Power { exponent: f64 },
    /// `D(t) = 0`.
    Frozen,
}

impl DiffusivitySchedule {
    pub fn at(&self, spec: &PacketSpec, t: f64) -> f64 {
        let rate = spec.diffusivity_rate();
        match *self {
            DiffusivitySchedule::Linear => rate * t,
            DiffusivitySchedule::Power { exponent } => rate * t.powf(exponent),
            DiffusivitySchedule::Frozen => 0.0,
        }
    }
}

/// Split of the conserved fluctuation energy at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySplit {
    /// `m <u^2> / 2 = hbar^2 / (8 m sigma(t)^2)`.
    pub osmotic: f64,
    /// The deficit `m <(du)^2> / 2` handed over to the convective motion.
    pub exchanged: f64,
}

impl EnergySplit {
    pub fn total(&self) -> f64 {
        self.osmotic + self.exchanged
    }
}

impl Default for PacketSpec {
    /// Natural units: `hbar = m = sigma0 = 1`, at rest at the origin.
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            sigma0: 1.0,
            v: 0.0,
            x0: 0.0,
        }
    }
}

impl PacketSpec {
    pub fn new(hbar: f64, mass: f64, sigma0: f64) -> Result<Self> {
        let spec = Self {
            hbar,
            mass,
            sigma0,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_drift(mut self, v: f64) -> Self {
        self.v = v;
        self
    }

    pub fn with_center(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("hbar", self.hbar),
            ("mass", self.mass),
            ("sigma0", self.sigma0),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(
                    name,
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        for (name, value) in [("v", self.v), ("x0", self.x0)] {
            if !value.is_finite() {
                return Err(invalid(name, format!("must be finite, got {value}")));
            }
        }
        Ok(())
    }

    pub fn scales(&self) -> DerivedScales {
        let diffusion = self.hbar / (2.0 * self.mass);
        DerivedScales {
            diffusion,
            u0: diffusion / self.sigma0,
            omega: diffusion / (2.0 * self.sigma0 * self.sigma0),
            diffusion_length: 2.0 * self.sigma0,
        }
    }

    /// `u0^2`, the constant rate of change of the diffusivity.
    pub fn diffusivity_rate(&self) -> f64 {
        let u0 = self.scales().u0;
        u0 * u0
    }

    /// Packet variance `sigma0^2 (1 + D^2 t^2 / sigma0^4)`.
    pub fn variance(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let d = self.scales().diffusion;
        let s2 = self.sigma0 * self.sigma0;
        Ok(s2 * (1.0 + d * d * t * t / (s2 * s2)))
    }

    pub fn sigma(&self, t: f64) -> Result<f64> {
        self.variance(t).map(f64::sqrt)
    }

    /// The spreading ratio `sigma(t) / sigma0`.
    pub fn spreading_ratio(&self, t: f64) -> Result<f64> {
        Ok(self.sigma(t)? / self.sigma0)
    }

    /// Time-dependent diffusivity `D(t) = u0^2 t`.
    pub fn diffusivity(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.diffusivity_rate() * t)
    }

    /// `(1/t) * integral of D over [0, t]`, which is `D(t) / 2`.
    pub fn time_averaged_diffusivity(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        if t == 0.0 {
            return Err(Error::NonPositiveTime(t));
        }
        Ok(0.5 * self.diffusivity_rate() * t)
    }

    /// Averaged trajectory of the element that started `x_init` away from
    /// the packet center: `x0 + v t + x_init sigma(t)/sigma0`.
    pub fn trajectory(&self, x_init: f64, t: f64) -> Result<f64> {
        Ok(self.x0 + self.v * t + x_init * self.spreading_ratio(t)?)
    }

    /// Same trajectory written through the oscillator frequency:
    /// `x0 + v t + x_init sqrt(1 + 4 omega^2 t^2)`.
    pub fn trajectory_via_omega(&self, x_init: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        let w = self.scales().omega;
        Ok(self.x0 + self.v * t + x_init * (1.0 + 4.0 * w * w * t * t).sqrt())
    }

    /// Average total velocity at position `x_tot` and time `t`.
    pub fn velocity_field(&self, x_tot: f64, t: f64) -> Result<f64> {
        let s2 = self.variance(t)?;
        let d = self.scales().diffusion;
        let offset = x_tot - self.x0 - self.v * t;
        Ok(self.v + offset * d * d * t / (s2 * self.sigma0 * self.sigma0))
    }

    /// `Delta p * Delta x` with `Delta x = sigma(t)` and `Delta p = hbar / 2 sigma(t)`.
    pub fn uncertainty_product(&self, t: f64) -> Result<f64> {
        let sigma = self.sigma(t)?;
        let dp = self.hbar / (2.0 * sigma);
        Ok(dp * sigma)
    }

    pub fn energy_split(&self, t: f64) -> Result<EnergySplit> {
        check_time(t)?;
        let d = self.scales().diffusion;
        let growth = d * d * t * t / self.sigma0.powi(4);
        let initial = self.avg_quantum_potential();
        Ok(EnergySplit {
            osmotic: initial / (1.0 + growth),
            exchanged: initial * growth / (1.0 + growth),
        })
    }

    /// Average quantum potential `hbar^2 / (8 m sigma0^2)`.
    pub fn avg_quantum_potential(&self) -> f64 {
        self.hbar * self.hbar / (8.0 * self.mass * self.sigma0 * self.sigma0)
    }

    /// Packet density at `(x, t)`.
    pub fn density(&self, x: f64, t: f64) -> Result<f64> {
        let sigma = self.sigma(t)?;
        Ok(gaussian(x, self.x0 + self.v * t, sigma))
    }
}

/// Average of the pointwise quantum potential `-(hbar^2/2m) (sqrt P)'' / sqrt P`
/// over the `t = 0` density, evaluated numerically: the second derivative by
/// a central three-point stencil and the average by the trapezoid rule on
/// `center ± 10 sigma0` with `points` nodes.
pub fn quantum_potential_quadrature(spec: &PacketSpec, points: usize) -> Result<f64> {
    spec.validate()?;
    let grid = UniformGrid::centered(spec.x0, 10.0 * spec.sigma0, points)?;
    let p = grid.sample(|x| gaussian(x, spec.x0, spec.sigma0));
    let amp: Vec<f64> = p.iter().map(|v| v.sqrt()).collect();
    let curvature = second_difference(&amp, grid.step)?;
    let prefactor = -spec.hbar * spec.hbar / (2.0 * spec.mass);
    // P * Q = prefactor * sqrt(P) * (sqrt P)''
    let weighted: Vec<f64> = amp
        .iter()
        .zip(&curvature)
        .map(|(a, c)| prefactor * a * c)
        .collect();
    Ok(trapezoid(&weighted[1..points - 1], grid.step))
}

/// Both sides of `<(d ln P)^2> = -<d^2 ln P>` for a density sampled on a
/// uniform grid. Derivatives use central differences; the averages are
/// trapezoid sums over the interior nodes.
pub fn fisher_identity(density: &[f64], step: f64) -> Result<(f64, f64)> {
    let n = density.len();
    if n < 3 {
        return Err(Error::GridTooCoarse(n));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("step", format!("must be > 0, got {step}")));
    }
    let log_p = density
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 0.0 && value.is_finite() {
                Ok(value.ln())
            } else {
                Err(Error::NonPositiveLog { index, value })
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let slope = gradient(&log_p, step)?;
    let curvature = second_difference(&log_p, step)?;
    let interior = 1..n - 1;
    let lhs: Vec<f64> = interior
        .clone()
        .map(|i| density[i] * slope[i] * slope[i])
        .collect();
    let rhs: Vec<f64> = interior.map(|i| -density[i] * curvature[i]).collect();
    Ok((trapezoid(&lhs, step), trapezoid(&rhs, step)))
}

/// Zitterbewegung frequency `m0 c^2 / hbar`.
pub fn zitterbewegung_frequency(rest_mass: f64, c: f64, hbar: f64) -> Result<f64> {
    for (name, value) in [("rest_mass", rest_mass), ("c", c), ("hbar", hbar)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(invalid(
                name,
                format!("must be finite and > 0, got {value}"),
            ));
        }
    }
    Ok(rest_mass * c * c / hbar)
}
