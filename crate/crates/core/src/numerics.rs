//! Small numerical kernels shared by the modules: compensated summation,
//! uniform grids, trapezoid quadrature and central finite differences.

use crate::error::{Error, Result};

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum in, keeping both compensation terms.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Uniformly spaced sample points `start + i * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformGrid {
    /// Grid of `len` points covering `[lo, hi]` inclusive.
    pub fn spanning(lo: f64, hi: f64, len: usize) -> Result<Self> {
        if len < 3 {
            return Err(Error::GridTooCoarse(len));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(crate::error::invalid(
                "grid",
                format!("need finite lo < hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(Self {
            start: lo,
            step: (hi - lo) / (len - 1) as f64,
            len,
        })
    }

    /// Symmetric grid over `center ± half_width`.
    pub fn centered(center: f64, half_width: f64, len: usize) -> Result<Self> {
        Self::spanning(center - half_width, center + half_width, len)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.x(i))
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.points().map(f).collect()
    }
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let interior = compensated_sum(values[1..n - 1].iter().copied());
            step * (interior + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Trapezoid rule for a function on `[a, b]` with `intervals` panels.
pub fn trapezoid_fn(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let values: Vec<f64> = (0..=intervals).map(|i| f(a + i as f64 * h)).collect();
    trapezoid(&values, h)
}

/// First derivative by second-order central differences, with second-order
/// one-sided stencils at both ends.
pub fn gradient(values: &[f64], step: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::GridTooCoarse(n));
    }
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * step);
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * step);
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * step);
    }
    Ok(out)
}

/// Second derivative at interior points `1..n-1` (three-point stencil).
/// Entries 0 and n-1 are copied from their neighbours.
pub fn second_difference(values: &[f64], step: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::GridTooCoarse(n));
    }
    let h2 = step * step;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / h2;
    }
    out[0] = out[1];
    out[n - 1] = out[n - 2];
    Ok(out)
}

/// Normal density with mean `mu` and standard deviation `sigma`.
#[inline]
pub fn gaussian(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}
