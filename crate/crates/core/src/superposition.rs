//! Complex momentum, superposition coefficients and interference.
//!
//! A path carries an amplitude `R`, an action `S` and their gradients. With
//! `k = grad S / hbar` and `k_u = -grad R / R` the complex wave vector is
//! `k + i k_u` and the logarithmic derivative of `psi = R exp(iS/hbar)` is
//! `grad psi / psi = -k_u + i k`, so both have squared modulus
//! `k_tot^2 = k^2 + k_u^2`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::numerics::CompensatedSum;
use crate::rng::{self, label};

/// Real 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0.iter().zip(other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Isotropic unit vector from three normal draws.
    pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v = Vec3(std::array::from_fn(|_| StandardNormal.sample(rng)));
            let n = v.norm();
            if n > 1e-12 {
                return v * (1.0 / n);
            }
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self * -1.0
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3(self.0.map(|c| c * s))
    }
}

/// Complex 3-vector stored as real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVec3 {
    pub re: Vec3,
    pub im: Vec3,
}

impl CVec3 {
    pub fn new(re: Vec3, im: Vec3) -> Self {
        Self { re, im }
    }

    pub fn component(&self, i: usize) -> Complex64 {
        Complex64::new(self.re.0[i], self.im.0[i])
    }

    fn from_components(c: [Complex64; 3]) -> Self {
        Self {
            re: Vec3(c.map(|z| z.re)),
            im: Vec3(c.map(|z| z.im)),
        }
    }

    /// `sum_i |z_i|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.re.norm_sqr() + self.im.norm_sqr()
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self::from_components(std::array::from_fn(|i| self.component(i) * z))
    }

    pub fn div(&self, z: Complex64) -> Self {
        Self::from_components(std::array::from_fn(|i| self.component(i) / z))
    }
}

impl Add for CVec3 {
    type Output = CVec3;
    fn add(self, o: CVec3) -> CVec3 {
        CVec3::new(self.re + o.re, self.im + o.im)
    }
}

/// One path: amplitude, action and their gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathWave {
    amplitude: f64,
    action: f64,
    s_grad: Vec3,
    r_grad: Vec3,
    hbar: f64,
    k: Vec3,
    k_u: Vec3,
}

impl PathWave {
    pub fn new(amplitude: f64, action: f64, s_grad: Vec3, r_grad: Vec3, hbar: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(invalid(
                "R",
                format!("must be finite and > 0, got {amplitude}"),
            ));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(invalid(
                "hbar",
                format!("must be finite and > 0, got {hbar}"),
            ));
        }
        if !(action.is_finite() && s_grad.is_finite() && r_grad.is_finite()) {
            return Err(invalid("path", "action and gradients must be finite"));
        }
        Ok(Self {
            amplitude,
            action,
            s_grad,
            r_grad,
            hbar,
            k: s_grad * (1.0 / hbar),
            k_u: r_grad * (-1.0 / amplitude),
        })
    }

    /// Builds a path from its wave vectors: `grad S = hbar k`,
    /// `grad R = -R k_u`, with the phase `S / hbar` given directly.
    pub fn from_wave_vectors(
        amplitude: f64,
        phase: f64,
        k: Vec3,
        k_u: Vec3,
        hbar: f64,
    ) -> Result<Self> {
        Self::new(amplitude, phase * hbar, k * hbar, k_u * -amplitude, hbar)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn action(&self) -> f64 {
        self.action
    }

    pub fn phase(&self) -> f64 {
        self.action / self.hbar
    }

    pub fn s_grad(&self) -> Vec3 {
        self.s_grad
    }

    pub fn r_grad(&self) -> Vec3 {
        self.r_grad
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn k(&self) -> Vec3 {
        self.k
    }

    pub fn k_u(&self) -> Vec3 {
        self.k_u
    }

    /// `k^2 + k_u^2`.
    pub fn k_tot_sqr(&self) -> f64 {
        self.k.norm_sqr() + self.k_u.norm_sqr()
    }

    /// `(hbar k, hbar k_u)`: real and imaginary parts of `p = m (v + i u)`.
    pub fn complex_momentum(&self) -> CVec3 {
        CVec3::new(self.k * self.hbar, self.k_u * self.hbar)
    }

    /// `psi = R exp(i S / hbar)`.
    pub fn psi(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase())
    }

    /// `grad psi = (grad R + i R grad S / hbar) exp(i S / hbar)`.
    pub fn grad_psi(&self) -> CVec3 {
        let unit = Complex64::from_polar(1.0, self.phase());
        CVec3::new(self.r_grad, self.k * self.amplitude).scale(unit)
    }

    /// `grad psi / psi`.
    pub fn log_derivative(&self) -> CVec3 {
        CVec3::new(-self.k_u, self.k)
    }
}

/// Superposition coefficient `c = (k - i grad R / R) / sqrt(N)`.
pub fn coefficient(path: &PathWave, normalization: f64) -> Result<CVec3> {
    if !(normalization > 0.0 && normalization.is_finite()) {
        return Err(invalid(
            "N",
            format!("must be finite and > 0, got {normalization}"),
        ));
    }
    let s = 1.0 / normalization.sqrt();
    Ok(CVec3::new(path.k * s, path.k_u * s))
}

/// Addition (`Plus`) or the antisymmetric subtraction (`Minus`) of amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionSetup {
    paths: Vec<PathWave>,
    sign: Sign,
    normalization: f64,
}

impl SuperpositionSetup {
    /// Normalizes so that the squared coefficients sum to one:
    /// `N = sum_a k_tot,a^2`.
    pub fn new(paths: Vec<PathWave>, sign: Sign) -> Result<Self> {
        if paths.is_empty() {
            return Err(invalid("paths", "at least one path is required"));
        }
        if paths.len() == 2 {
            let (a, b) = (paths[0].k_tot_sqr(), paths[1].k_tot_sqr());
            if (a - b).abs() > 1e-12 * a.max(b) {
                return Err(invalid(
                    "paths",
                    format!("two-path setups need |k_tot,A| = |k_tot,B|, got {a} and {b}"),
                ));
            }
        }
        let normalization = paths.iter().map(PathWave::k_tot_sqr).sum();
        if !(normalization > 0.0) {
            return Err(invalid("paths", "total wave number vanishes"));
        }
        Ok(Self {
            paths,
            sign,
            normalization,
        })
    }

    /// Two paths with amplitudes `R_A`, `R_B`, phase difference `delta_phi`
    /// and a common plane-wave wave vector.
    pub fn two_path(r_a: f64, r_b: f64, delta_phi: f64, sign: Sign) -> Result<Self> {
        let k = Vec3::new(1.0, 0.0, 0.0);
        let a = PathWave::from_wave_vectors(r_a, delta_phi, k, Vec3::ZERO, 1.0)?;
        let b = PathWave::from_wave_vectors(r_b, 0.0, k, Vec3::ZERO, 1.0)?;
        Self::new(vec![a, b], sign)
    }

    pub fn paths(&self) -> &[PathWave] {
        &self.paths
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn coefficients(&self) -> Vec<CVec3> {
        self.paths
            .iter()
            .map(|p| coefficient(p, self.normalization).expect("normalization validated"))
            .collect()
    }

    /// `sum_a |c_a|^2`.
    pub fn born_total(&self) -> f64 {
        self.coefficients().iter().map(CVec3::norm_sqr).sum()
    }

    /// `(S_A - S_B) / hbar` for a two-path setup.
    pub fn relative_phase(&self) -> Option<f64> {
        match self.paths.as_slice() {
            [a, b] => Some(a.phase() - b.phase()),
            _ => None,
        }
    }
}

/// `R_A^2 + R_B^2 + sign 2 R_A R_B cos(delta_phi)`.
pub fn two_path_intensity(r_a: f64, r_b: f64, delta_phi: f64, sign: Sign) -> Result<f64> {
    if !(r_a >= 0.0 && r_b >= 0.0) {
        return Err(invalid(
            "R",
            format!("amplitudes must be >= 0, got {r_a}, {r_b}"),
        ));
    }
    Ok(r_a * r_a + r_b * r_b + sign.value() * 2.0 * r_a * r_b * delta_phi.cos())
}

/// Double-slit pattern: equal amplitudes `1/sqrt 2` normalized by `N = 1/2`.
pub fn double_slit(delta_phi: f64) -> f64 {
    0.5 * two_path_intensity(FRAC_1_SQRT_2, FRAC_1_SQRT_2, delta_phi, Sign::Plus)
        .expect("amplitudes are positive")
}

/// Anti-correlated two-particle intensity: `(1/4)(2 + 2 cos 2 dphi)` with
/// `dphi = r . (k1 - k2)`, i.e. `cos^2(r . (k1 - k2))`.
pub fn two_particle_intensity(r: Vec3, k1: Vec3, k2: Vec3) -> f64 {
    let dphi = r.dot(&(k1 - k2));
    0.25 * (1.0 + 1.0 + 2.0 * (2.0 * dphi).cos())
}

/// `(|grad(psi1 psi2) / (psi1 psi2)|^2, (grad(R1 R2)/(R1 R2))^2 + (grad(S1 + S2)/hbar)^2)`.
pub fn product_rule_check(path1: &PathWave, path2: &PathWave) -> (f64, f64) {
    let (psi1, psi2) = (path1.psi(), path2.psi());
    let grad = path1.grad_psi().scale(psi2) + path2.grad_psi().scale(psi1);
    let lhs = grad.div(psi1 * psi2).norm_sqr();
    let r_part =
        path1.r_grad() * (1.0 / path1.amplitude()) + path2.r_grad() * (1.0 / path2.amplitude());
    let s_part = (path1.s_grad() + path2.s_grad()) * (1.0 / path1.hbar());
    (lhs, r_part.norm_sqr() + s_part.norm_sqr())
}

/// How `|grad R / R|` and `|grad S / hbar|` are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MagnitudeLaw {
    Fixed,
    /// `m * U[1 - spread, 1 + spread]`, second moment `m^2 (1 + spread^2 / 3)`.
    Uniform {
        spread: f64,
    },
}

impl MagnitudeLaw {
    fn draw<R: Rng + ?Sized>(&self, base: f64, rng: &mut R) -> f64 {
        match *self {
            MagnitudeLaw::Fixed => base,
            MagnitudeLaw::Uniform { spread } => {
                base * (1.0 + spread * (2.0 * rng.random::<f64>() - 1.0))
            }
        }
    }

    fn second_moment(&self, base: f64) -> f64 {
        match *self {
            MagnitudeLaw::Fixed => base * base,
            MagnitudeLaw::Uniform { spread } => base * base * (1.0 + spread * spread / 3.0),
        }
    }
}

/// Direction statistics of the sampled gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientCorrelation {
    /// All four directions independent and isotropic.
    Isotropic,
    /// Negative control: both wave vectors share one direction and each
    /// amplitude gradient lies along it, oriented by the sign of
    /// `sin(S_A - S_B)/hbar` (`+` for A, `-` for B). The cross products
    /// `grad R_i . grad S_j` then correlate with the phase.
    Aligned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionConfig {
    pub n_samples: usize,
    /// `R_B = alpha R_A`; zero gives the single-path case.
    pub weight_alpha: f64,
    pub seed: u64,
    /// Base magnitude of `grad S / hbar`.
    pub k_s: f64,
    /// Base magnitude of `grad R / R`.
    pub k_u: f64,
    pub magnitudes: MagnitudeLaw,
    pub correlation: GradientCorrelation,
}

impl ReductionConfig {
    pub fn new(n_samples: usize, weight_alpha: f64, seed: u64) -> Self {
        Self {
            n_samples,
            weight_alpha,
            seed,
            k_s: 1.0,
            k_u: 1.0,
            magnitudes: MagnitudeLaw::Fixed,
            correlation: GradientCorrelation::Isotropic,
        }
    }

    /// Analytically known `<(grad R/R)^2> + <(grad S/hbar)^2>`.
    pub fn target(&self) -> f64 {
        self.magnitudes.second_moment(self.k_u) + self.magnitudes.second_moment(self.k_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionResult {
    /// `sum |grad psi|^2 / sum |psi|^2` over accepted samples.
    pub mean_full: f64,
    pub target: f64,
    pub stderr: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl ReductionResult {
    pub fn deviation_in_stderr(&self) -> f64 {
        if self.stderr > 0.0 {
            (self.mean_full - self.target).abs() / self.stderr
        } else if self.mean_full == self.target {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, n_stderr: f64) -> bool {
        (self.mean_full - self.target).abs() <= n_stderr * self.stderr + 1e-12 * self.target
    }
}

/// One Monte Carlo sample: `(|grad psi|^2, |psi|^2)`, or `None` if the
/// superposed amplitude (nearly) vanishes.
fn reduction_sample(cfg: &ReductionConfig, index: u64) -> Option<(f64, f64)> {
    let mut rng = rng::stream(cfg.seed, label::SUPERPOSITION, index, 0);
    let phase_a = TAU * rng.random::<f64>();
    let phase_b = TAU * rng.random::<f64>();
    let r_a = 1.0;
    let r_b = cfg.weight_alpha;
    let ks_a = cfg.magnitudes.draw(cfg.k_s, &mut rng);
    let ks_b = cfg.magnitudes.draw(cfg.k_s, &mut rng);
    let ku_a = cfg.magnitudes.draw(cfg.k_u, &mut rng);
    let ku_b = cfg.magnitudes.draw(cfg.k_u, &mut rng);
    let (dir_ka, dir_kb, dir_ra, dir_rb) = match cfg.correlation {
        GradientCorrelation::Isotropic => (
            Vec3::random_unit(&mut rng),
            Vec3::random_unit(&mut rng),
            Vec3::random_unit(&mut rng),
            Vec3::random_unit(&mut rng),
        ),
        GradientCorrelation::Aligned => {
            let e = Vec3::random_unit(&mut rng);
            let s = (phase_a - phase_b).sin().signum();
            (e, e, e * s, e * -s)
        }
    };
    // grad R = R * (grad R / R); the wave vectors k_u = -grad R / R
    let a = PathWave::from_wave_vectors(r_a, phase_a, dir_ka * ks_a, dir_ra * -ku_a, 1.0).ok()?;
    let (psi, grad) = if r_b > 0.0 {
        let b =
            PathWave::from_wave_vectors(r_b, phase_b, dir_kb * ks_b, dir_rb * -ku_b, 1.0).ok()?;
        (a.psi() + b.psi(), a.grad_psi() + b.grad_psi())
    } else {
        (a.psi(), a.grad_psi())
    };
    let density = psi.norm_sqr();
    if density < 1e-12 * (r_a * r_a + r_b * r_b) {
        return None;
    }
    Some((grad.norm_sqr(), density))
}

/// Monte Carlo check that the density-weighted mean of
/// `|grad(psi_A + psi_B) / (psi_A + psi_B)|^2` equals `k_tot^2`.
pub fn ktot_reduction_check(cfg: &ReductionConfig, exec: &Exec) -> Result<ReductionResult> {
    if cfg.n_samples < 10_000 {
        return Err(invalid(
            "n_samples",
            format!("must be >= 10^4, got {}", cfg.n_samples),
        ));
    }
    if !(cfg.weight_alpha >= 0.0 && cfg.weight_alpha.is_finite()) {
        return Err(invalid(
            "weight_alpha",
            format!("must be >= 0, got {}", cfg.weight_alpha),
        ));
    }
    if !(cfg.k_s >= 0.0 && cfg.k_u >= 0.0 && cfg.k_s + cfg.k_u > 0.0) {
        return Err(invalid(
            "k_s/k_u",
            "magnitudes must be >= 0 and not both zero",
        ));
    }
    if let MagnitudeLaw::Uniform { spread } = cfg.magnitudes {
        if !(0.0..=1.0).contains(&spread) {
            return Err(invalid(
                "spread",
                format!("must lie in [0, 1], got {spread}"),
            ));
        }
    }
    let chunks = exec.map_ranges(cfg.n_samples, 2048, |range| {
        range
            .map(|i| reduction_sample(cfg, i as u64))
            .collect::<Vec<_>>()
    });
    let samples: Vec<Option<(f64, f64)>> = chunks.into_iter().flatten().collect();
    let rejected = samples.iter().filter(|s| s.is_none()).count();
    let accepted: Vec<(f64, f64)> = samples.into_iter().flatten().collect();
    let total = cfg.n_samples;
    let rate = rejected as f64 / total as f64;
    if rate > 0.01 {
        return Err(Error::TooManyRejections {
            rejected,
            total,
            rate,
        });
    }
    let n = accepted.len() as f64;
    let num = accepted
        .iter()
        .map(|s| s.0)
        .collect::<CompensatedSum>()
        .value();
    let den = accepted
        .iter()
        .map(|s| s.1)
        .collect::<CompensatedSum>()
        .value();
    let ratio = num / den;
    let resid = accepted
        .iter()
        .map(|&(a, b)| (a - ratio * b).powi(2))
        .collect::<CompensatedSum>()
        .value();
    let stderr = (resid / (n * (n - 1.0))).sqrt() / (den / n);
    Ok(ReductionResult {
        mean_full: ratio,
        target: cfg.target(),
        stderr,
        accepted: accepted.len(),
        rejected,
    })
}

/// `361`-point grid over `[0, 2 pi]` used by the interference scenarios.
pub fn phase_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n)
            .map(|i| 2.0 * PI * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
