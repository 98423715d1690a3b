//! Dissipation asymmetry, momentum fluctuations and fringe visibility.
//!
//! The ratio between heat-dissipation and heat-absorption probabilities is
//! `p(A)/p(-A) = exp(A t)`. A budget `epsilon = p(A) + p(-A)` fixes the two
//! probabilities, which then shift the density inside the osmotic momentum:
//! `dp_tot = -(hbar/2) grad ln(P + p(-A) - p(A))`.
//!
//! The visibility harness is a model: each path picks up a Gaussian phase
//! kick whose variance is `coupling * mean_x (dp_tot - dp)^2 * t^2 / hbar^2`,
//! where `dp = -(hbar/2) grad ln P` is the symmetric osmotic momentum.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_time, invalid, Error, Result};
use crate::exec::Exec;
use crate::numerics::{gaussian, gradient, CompensatedSum, UniformGrid};
use crate::rng::{self, label};
use crate::superposition::SuperpositionSetup;

/// Largest admissible `A t` before `exp` is treated as overflow.
pub const MAX_EXPONENT: f64 = 700.0;

/// Gaussian bump `height * exp(-(x - center)^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self {
            center: 0.0,
            width: 1.0,
            height: 1.0,
        }
    }
}

impl BumpProfile {
    pub fn value(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        self.height * (-0.5 * z * z).exp()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -(x - self.center) / (self.width * self.width) * self.value(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseConfig {
    /// Dissipation rate `A` (1/time).
    pub a: f64,
    pub t: f64,
    pub kt: f64,
    pub omega: f64,
    pub hbar: f64,
    pub profile: BumpProfile,
    /// Fluctuation budget `p(A) + p(-A)`.
    pub epsilon: f64,
    /// Width of the Gaussian density `P` on the evaluation window.
    pub sigma: f64,
    pub window_half_width: f64,
    pub grid_points: usize,
    /// Proportionality constant of the phase-kick variance.
    pub coupling: f64,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            t: 1.0,
            kt: 1.0,
            omega: 1.0,
            hbar: 1.0,
            profile: BumpProfile::default(),
            epsilon: 2e-3,
            sigma: 1.0,
            window_half_width: 3.0,
            grid_points: 601,
            coupling: 25.0,
        }
    }
}

impl CollapseConfig {
    pub fn with_rate(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn grid(&self) -> Result<UniformGrid> {
        UniformGrid::centered(0.0, self.window_half_width, self.grid_points)
    }

    /// Gaussian density sampled on [`grid`](Self::grid).
    pub fn density(&self) -> Result<Vec<f64>> {
        Ok(self.grid()?.sample(|x| gaussian(x, 0.0, self.sigma)))
    }

    pub fn validate(&self) -> Result<()> {
        check_time(self.t)?;
        for (name, v) in [
            ("kT", self.kt),
            ("omega", self.omega),
            ("hbar", self.hbar),
            ("sigma", self.sigma),
            ("window_half_width", self.window_half_width),
            ("profile.width", self.profile.width),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !self.a.is_finite()
            || !self.profile.height.is_finite()
            || !self.profile.center.is_finite()
        {
            return Err(invalid("A/profile", "must be finite"));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(invalid(
                "coupling",
                format!("must be >= 0, got {}", self.coupling),
            ));
        }
        check_epsilon(self.epsilon)?;
        let min_p = self.density()?.into_iter().fold(f64::INFINITY, f64::min);
        if self.epsilon >= min_p {
            return Err(invalid(
                "epsilon",
                format!(
                    "must be below the smallest density on the window ({min_p:e}), got {}",
                    self.epsilon
                ),
            ));
        }
        Ok(())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(invalid(
            "epsilon",
            format!("must lie in [0, 1), got {epsilon}"),
        ));
    }
    Ok(())
}

/// `exp(A t)`.
pub fn dissipation_ratio(a: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let x = a * t;
    if x.is_nan() {
        return Err(invalid("A", "must be finite"));
    }
    if x > MAX_EXPONENT {
        return Err(Error::Overflow(x));
    }
    Ok(x.exp())
}

/// `(p(A), p(-A))` with sum `epsilon` and ratio `exp(A t)`.
pub fn probabilities_from_ratio(a: f64, t: f64, epsilon: f64) -> Result<(f64, f64)> {
    check_epsilon(epsilon)?;
    let r = dissipation_ratio(a, t)?;
    Ok((epsilon / (1.0 + r.recip()), epsilon / (1.0 + r)))
}

/// `A = delta_U / (hbar omega t)`.
pub fn rate_from_energy(delta_u: f64, hbar: f64, omega: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(delta_u / (hbar * omega * t))
}

/// `A = delta_W / (kT t)`.
pub fn rate_from_work(delta_w: f64, kt: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    Ok(delta_w / (kt * t))
}

/// `1/2 grad(delta_U / omega)` sampled on `grid`.
pub fn external_fluctuation(
    profile: &BumpProfile,
    omega: f64,
    grid: &UniformGrid,
) -> Result<Vec<f64>> {
    if !(omega > 0.0) {
        return Err(invalid("omega", format!("must be > 0, got {omega}")));
    }
    let scaled = grid.sample(|x| profile.value(x) / omega);
    Ok(gradient(&scaled, grid.step)?
        .into_iter()
        .map(|g| 0.5 * g)
        .collect())
}

/// `-(hbar/2) grad ln(P + p(-A) - p(A))` with scalar probabilities.
pub fn total_fluctuation(
    p: &[f64],
    pa: f64,
    pma: f64,
    grid: &UniformGrid,
    hbar: f64,
) -> Result<Vec<f64>> {
    let offsets = vec![pma - pa; p.len()];
    total_fluctuation_with_offsets(p, &offsets, grid, hbar)
}

/// Field-valued variant: `offsets[i] = p(-A)(x_i) - p(A)(x_i)`.
pub fn total_fluctuation_with_offsets(
    p: &[f64],
    offsets: &[f64],
    grid: &UniformGrid,
    hbar: f64,
) -> Result<Vec<f64>> {
    if p.len() != grid.len || offsets.len() != grid.len {
        return Err(invalid("P", "density, offsets and grid lengths differ"));
    }
    let mut logs = Vec::with_capacity(p.len());
    for (i, (&pi, &oi)) in p.iter().zip(offsets).enumerate() {
        let arg = pi + oi;
        if !(arg > 0.0) {
            return Err(Error::NonPositiveLog {
                index: i,
                value: arg,
            });
        }
        logs.push(arg.ln());
    }
    Ok(gradient(&logs, grid.step)?
        .into_iter()
        .map(|g| -0.5 * hbar * g)
        .collect())
}

/// Per-point rates `A(x) = delta_U(x) / (hbar omega t)` for the field-valued
/// generalization of `p(A)`.
pub fn local_rates(config: &CollapseConfig, grid: &UniformGrid) -> Result<Vec<f64>> {
    grid.points()
        .map(|x| rate_from_energy(config.profile.value(x), config.hbar, config.omega, config.t))
        .collect()
}

/// Offsets `p(-A(x)) - p(A(x))` built from [`local_rates`].
pub fn offset_field(config: &CollapseConfig, grid: &UniformGrid) -> Result<Vec<f64>> {
    local_rates(config, grid)?
        .into_iter()
        .map(|a| probabilities_from_ratio(a, config.t, config.epsilon).map(|(pa, pma)| pma - pa))
        .collect()
}

/// Mean over the window of `(dp_tot - dp)^2`.
pub fn mean_excess_sqr(config: &CollapseConfig) -> Result<f64> {
    config.validate()?;
    let grid = config.grid()?;
    let p = config.density()?;
    let (pa, pma) = probabilities_from_ratio(config.a, config.t, config.epsilon)?;
    let total = total_fluctuation(&p, pa, pma, &grid, config.hbar)?;
    let osmotic = total_fluctuation(&p, 0.0, 0.0, &grid, config.hbar)?;
    let sum: CompensatedSum = total
        .iter()
        .zip(&osmotic)
        .map(|(a, b)| (a - b).powi(2))
        .collect();
    Ok(sum.value() / grid.len as f64)
}

/// Standard deviation of a single path's phase kick.
pub fn kick_std(config: &CollapseConfig) -> Result<f64> {
    let e2 = mean_excess_sqr(config)?;
    Ok((config.coupling * e2).sqrt() * config.t / config.hbar)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibility {
    pub visibility: f64,
    pub stderr: f64,
    /// Visibility with `A = 0`.
    pub baseline: f64,
    pub kick_std: f64,
}

/// Fringe visibility `(P_max - P_min)/(P_max + P_min)` of the kick-averaged
/// two-path intensity `R_A^2 + R_B^2 + 2 R_A R_B Re(m e^{i dphi})`, where
/// `m = <exp(i (kick_A - kick_B))>` is estimated from `n_samples` draws.
/// Kicks reuse the same normal draws for every `A` at a given seed.
pub fn visibility_under_collapse(
    setup: &SuperpositionSetup,
    config: &CollapseConfig,
    n_samples: usize,
    seed: u64,
    exec: &Exec,
) -> Result<Visibility> {
    let [a, b] = setup.paths() else {
        return Err(invalid("setup", "visibility needs exactly two paths"));
    };
    if n_samples < 10_000 {
        return Err(invalid(
            "n_samples",
            format!("must be >= 10^4, got {n_samples}"),
        ));
    }
    let (ra, rb) = (a.amplitude(), b.amplitude());
    let contrast = 2.0 * ra * rb / (ra * ra + rb * rb);
    let baseline_cfg = config.with_rate(0.0);
    let s = kick_std(config)?;
    let baseline = contrast * coherence(kick_std(&baseline_cfg)?, n_samples, seed, exec).0;
    let (m, se) = coherence(s, n_samples, seed, exec);
    Ok(Visibility {
        visibility: contrast * m,
        stderr: contrast * se,
        baseline,
        kick_std: s,
    })
}

/// `(|<exp(i s (Z_A - Z_B))>|, stderr)` by the delta method.
fn coherence(s: f64, n: usize, seed: u64, exec: &Exec) -> (f64, f64) {
    let parts = exec.map_ranges(n, 4096, |range| {
        let mut acc = [CompensatedSum::new(); 5];
        for i in range {
            let mut rng = rng::stream(seed, label::COLLAPSE, i as u64, 0);
            let za: f64 = StandardNormal.sample(&mut rng);
            let zb: f64 = StandardNormal.sample(&mut rng);
            let (sn, cs) = (s * (za - zb)).sin_cos();
            for (slot, v) in acc.iter_mut().zip([cs, sn, cs * cs, sn * sn, cs * sn]) {
                slot.add(v);
            }
        }
        acc
    });
    let mut acc = [CompensatedSum::new(); 5];
    for part in &parts {
        for (slot, p) in acc.iter_mut().zip(part) {
            slot.merge(p);
        }
    }
    let nf = n as f64;
    let [c, sn, cc, ss, cs] = acc.map(|a| a.value() / nf);
    let m = c.hypot(sn);
    let (vc, vs, cov) = (cc - c * c, ss - sn * sn, cs - c * sn);
    let var = if m > 0.0 {
        (c * c * vc + sn * sn * vs + 2.0 * c * sn * cov) / (m * m)
    } else {
        0.5 * (vc + vs)
    };
    (m, (var.max(0.0) / nf).sqrt())
}
