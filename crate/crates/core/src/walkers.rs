//! Monte Carlo ensemble of Brownian walkers.
//!
//! Each walker starts at an offset drawn from the `sigma0` Gaussian and then
//! collects independent Gaussian increments of variance `2 D(t_mid) dt`.
//! Every draw comes from its own `(seed, walker, step)` substream and every
//! reduction runs over fixed walker chunks merged in index order, so results
//! are bit-identical for any worker count.

use crate::analytics::{DiffusivitySchedule, PacketSpec};
use crate::error::{invalid, Error, Result};
use crate::exec::{Exec, DEFAULT_CHUNK};
use crate::numerics::CompensatedSum;
use crate::rng::{self, label};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_walkers: usize,
    pub dt: f64,
    pub horizon: f64,
    pub master_seed: u64,
    pub schedule: DiffusivitySchedule,
}

impl EnsembleConfig {
    pub fn new(n_walkers: usize, dt: f64, horizon: f64, master_seed: u64) -> Result<Self> {
        let cfg = Self {
            n_walkers,
            dt,
            horizon,
            master_seed,
            schedule: DiffusivitySchedule::Linear,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_walkers < 1000 {
            return Err(invalid(
                "n_walkers",
                format!("must be >= 1000, got {}", self.n_walkers),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(invalid(
                "horizon",
                format!("must be >= dt, got {}", self.horizon),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkerEnsemble {
    positions: Vec<f64>,
    initial_positions: Vec<f64>,
    diffusive_displacements: Vec<f64>,
    steps_taken: u64,
    spec: PacketSpec,
    config: EnsembleConfig,
}

/// Sample moments of the walker positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `variance * sqrt(2 / (N - 1))`.
    pub stderr_variance: f64,
}

/// Empirical split of the second moment about the packet center into its
/// initial, linear (cross) and quadratic parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTerms {
    pub x2: f64,
    pub x2_init: f64,
    /// `2 <x(0) * displacement>`.
    pub linear_term: f64,
    /// `<displacement^2>`.
    pub quadratic_term: f64,
    pub stderr_linear: f64,
    pub stderr_quadratic: f64,
}

/// Uncertainty product estimated from a position histogram through the
/// osmotic velocity `u = -(hbar / 2m) d ln P / dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyEstimate {
    pub delta_x: f64,
    pub delta_p: f64,
    pub product: f64,
}

struct Partial {
    a: CompensatedSum,
    b: CompensatedSum,
    c: CompensatedSum,
}

impl WalkerEnsemble {
    /// Draws the initial offsets; displacements start at zero.
    pub fn sample_initial(spec: PacketSpec, config: EnsembleConfig, exec: &Exec) -> Result<Self> {
        spec.validate()?;
        config.validate()?;
        let n = config.n_walkers;
        let mut initial_positions = vec![0.0; n];
        let seed = config.master_seed;
        let sigma0 = spec.sigma0;
        exec.for_each_chunk_mut(&mut initial_positions, DEFAULT_CHUNK, |offset, chunk| {
            for (k, x) in chunk.iter_mut().enumerate() {
                *x = sigma0 * rng::normal(seed, label::WALKER_INIT, (offset + k) as u64, 0);
            }
        });
        let positions = initial_positions.iter().map(|x| spec.x0 + x).collect();
        Ok(Self {
            positions,
            initial_positions,
            diffusive_displacements: vec![0.0; n],
            steps_taken: 0,
            spec,
            config,
        })
    }

    /// Rebuilds an ensemble from stored offsets and displacements after
    /// `steps_taken` steps.
    pub fn from_parts(
        spec: PacketSpec,
        config: EnsembleConfig,
        initial_positions: Vec<f64>,
        diffusive_displacements: Vec<f64>,
        steps_taken: u64,
    ) -> Result<Self> {
        spec.validate()?;
        config.validate()?;
        let n = config.n_walkers;
        if initial_positions.len() != n || diffusive_displacements.len() != n {
            return Err(invalid(
                "walkers",
                format!(
                    "expected {n} offsets and displacements, got {} and {}",
                    initial_positions.len(),
                    diffusive_displacements.len()
                ),
            ));
        }
        let center = spec.x0 + spec.v * steps_taken as f64 * config.dt;
        let positions = initial_positions
            .iter()
            .zip(&diffusive_displacements)
            .map(|(a, b)| center + a + b)
            .collect();
        Ok(Self {
            positions,
            initial_positions,
            diffusive_displacements,
            steps_taken,
            spec,
            config,
        })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn initial_positions(&self) -> &[f64] {
        &self.initial_positions
    }

    pub fn diffusive_displacements(&self) -> &[f64] {
        &self.diffusive_displacements
    }

    pub fn t(&self) -> f64 {
        self.steps_taken as f64 * self.config.dt
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn spec(&self) -> &PacketSpec {
        &self.spec
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    /// Advances every walker by `n_steps` steps of length `dt`.
    pub fn advance(&mut self, n_steps: usize, exec: &Exec) -> Result<()> {
        let dt = self.config.dt;
        let first = self.steps_taken;
        let requested = (first + n_steps as u64) as f64 * dt;
        if requested > self.config.horizon * (1.0 + 1e-12) {
            return Err(Error::HorizonExceeded {
                requested,
                horizon: self.config.horizon,
            });
        }
        let widths: Vec<f64> = (0..n_steps as u64)
            .map(|k| {
                let t_mid = ((first + k) as f64 + 0.5) * dt;
                (2.0 * self.config.schedule.at(&self.spec, t_mid) * dt).sqrt()
            })
            .collect();
        let seed = self.config.master_seed;
        exec.for_each_chunk_mut(
            &mut self.diffusive_displacements,
            DEFAULT_CHUNK,
            |offset, chunk| {
                for (k, disp) in chunk.iter_mut().enumerate() {
                    let walker = (offset + k) as u64;
                    for (j, &w) in widths.iter().enumerate() {
                        if w > 0.0 {
                            *disp +=
                                w * rng::normal(seed, label::WALKER_STEP, walker, first + j as u64);
                        }
                    }
                }
            },
        );
        self.steps_taken += n_steps as u64;
        let center = self.spec.x0 + self.spec.v * self.t();
        let initial = &self.initial_positions;
        let diffusive = &self.diffusive_displacements;
        exec.for_each_chunk_mut(&mut self.positions, DEFAULT_CHUNK, |offset, chunk| {
            for (k, x) in chunk.iter_mut().enumerate() {
                let i = offset + k;
                *x = center + initial[i] + diffusive[i];
            }
        });
        Ok(())
    }

    /// Advances to the step nearest to time `t`.
    pub fn advance_to(&mut self, t: f64, exec: &Exec) -> Result<()> {
        let target = (t / self.config.dt).round() as u64;
        if target < self.steps_taken {
            return Err(invalid(
                "t",
                format!("{t} lies before the current time {}", self.t()),
            ));
        }
        self.advance((target - self.steps_taken) as usize, exec)
    }

    fn reduce(&self, exec: &Exec, f: impl Fn(usize) -> (f64, f64, f64) + Sync + Send) -> [f64; 3] {
        let partials = exec.map_ranges(self.len(), DEFAULT_CHUNK, |range| {
            let mut p = Partial {
                a: CompensatedSum::new(),
                b: CompensatedSum::new(),
                c: CompensatedSum::new(),
            };
            for i in range {
                let (a, b, c) = f(i);
                p.a.add(a);
                p.b.add(b);
                p.c.add(c);
            }
            p
        });
        let mut total = Partial {
            a: CompensatedSum::new(),
            b: CompensatedSum::new(),
            c: CompensatedSum::new(),
        };
        for p in &partials {
            total.a.merge(&p.a);
            total.b.merge(&p.b);
            total.c.merge(&p.c);
        }
        [total.a.value(), total.b.value(), total.c.value()]
    }

    pub fn moments(&self, exec: &Exec) -> Moments {
        let n = self.len() as f64;
        let x = &self.positions;
        let [sum, _, _] = self.reduce(exec, |i| (x[i], 0.0, 0.0));
        let mean = sum / n;
        let [ss, _, _] = self.reduce(exec, |i| ((x[i] - mean).powi(2), 0.0, 0.0));
        let variance = if n > 1.0 { ss / (n - 1.0) } else { 0.0 };
        Moments {
            mean,
            variance,
            stderr_variance: variance * (2.0 / (n - 1.0).max(1.0)).sqrt(),
        }
    }

    /// Pearson correlation between initial offsets and diffusive
    /// displacements, with the `3 / sqrt(N)` null-hypothesis bound.
    pub fn orthogonality_stats(&self, exec: &Exec) -> Result<(f64, f64)> {
        let n = self.len() as f64;
        let a = &self.initial_positions;
        let b = &self.diffusive_displacements;
        let [sa, sb, _] = self.reduce(exec, |i| (a[i], b[i], 0.0));
        let (ma, mb) = (sa / n, sb / n);
        let [saa, sbb, sab] = self.reduce(exec, |i| {
            let (da, db) = (a[i] - ma, b[i] - mb);
            (da * da, db * db, da * db)
        });
        if saa <= 0.0 || sbb <= 0.0 {
            return Err(Error::Degenerate(format!(
                "correlation undefined: position spread {saa}, displacement spread {sbb}"
            )));
        }
        Ok((sab / (saa * sbb).sqrt(), 3.0 / n.sqrt()))
    }

    pub fn cross_term_decomposition(&self, exec: &Exec) -> CrossTerms {
        let n = self.len() as f64;
        let center = self.spec.x0 + self.spec.v * self.t();
        let (x, a, b) = (
            &self.positions,
            &self.initial_positions,
            &self.diffusive_displacements,
        );
        let [x2, x2_init, cross] = self.reduce(exec, |i| {
            let r = x[i] - center;
            (r * r, a[i] * a[i], a[i] * b[i])
        });
        let [quad, _, _] = self.reduce(exec, |i| (b[i] * b[i], 0.0, 0.0));
        let (x2, x2_init, cross, quad) = (x2 / n, x2_init / n, cross / n, quad / n);
        let [var_cross, var_quad, _] = self.reduce(exec, |i| {
            (
                (a[i] * b[i] - cross).powi(2),
                (b[i] * b[i] - quad).powi(2),
                0.0,
            )
        });
        let denom = (n - 1.0).max(1.0);
        CrossTerms {
            x2,
            x2_init,
            linear_term: 2.0 * cross,
            quadratic_term: quad,
            stderr_linear: 2.0 * (var_cross / denom / n).sqrt(),
            stderr_quadratic: (var_quad / denom / n).sqrt(),
        }
    }

    /// Histogram estimate of `Delta p * Delta x`. The histogram spans
    /// `± 5` sample standard deviations with `bins` bins; the log-density
    /// slope uses central differences between occupied neighbours.
    pub fn uncertainty_from_histogram(
        &self,
        bins: usize,
        exec: &Exec,
    ) -> Result<UncertaintyEstimate> {
        if bins < 10 {
            return Err(invalid("bins", format!("must be >= 10, got {bins}")));
        }
        let m = self.moments(exec);
        let sd = m.variance.sqrt();
        if sd <= 0.0 {
            return Err(Error::Degenerate("zero positional spread".into()));
        }
        let half = 5.0 * sd;
        let width = 2.0 * half / bins as f64;
        let lo = m.mean - half;
        let x = &self.positions;
        let partials = exec.map_ranges(self.len(), DEFAULT_CHUNK, |range| {
            let mut counts = vec![0u64; bins];
            for i in range {
                let b = ((x[i] - lo) / width).floor();
                if b >= 0.0 && (b as usize) < bins {
                    counts[b as usize] += 1;
                }
            }
            counts
        });
        let mut counts = vec![0u64; bins];
        for part in partials {
            counts.iter_mut().zip(part).for_each(|(c, p)| *c += p);
        }
        let scale = self.spec.hbar / (2.0 * self.spec.mass);
        let mut weighted = CompensatedSum::new();
        let mut weight = 0u64;
        for j in 1..bins - 1 {
            let (l, c, r) = (counts[j - 1], counts[j], counts[j + 1]);
            if l == 0 || c == 0 || r == 0 {
                continue;
            }
            let slope = ((r as f64).ln() - (l as f64).ln()) / (2.0 * width);
            let u = -scale * slope;
            weighted.add(c as f64 * u * u);
            weight += c;
        }
        if weight == 0 {
            return Err(Error::Degenerate("empty histogram".into()));
        }
        let delta_p = self.spec.mass * (weighted.value() / weight as f64).sqrt();
        Ok(UncertaintyEstimate {
            delta_x: sd,
            delta_p,
            product: sd * delta_p,
        })
    }
}
