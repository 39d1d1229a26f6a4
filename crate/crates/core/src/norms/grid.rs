use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Samples vanishing to this level count as zero at the window edges.
pub const EDGE_TOL: f64 = 1e-12;

/// Complex samples on the uniform grid `x_j = a + j·h`, `j = 0..n`, with
/// `h = (b - a)/n`, over the window `[a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub window: (f64, f64),
    pub spacing: f64,
    pub samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn sample<F>(a: f64, b: f64, n: usize, f: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let h = (b - a) / n as f64;
        Self {
            window: (a, b),
            spacing: h,
            samples: (0..n).map(|j| f(a + j as f64 * h)).collect(),
        }
    }

    pub fn sample_real<F>(a: f64, b: f64, n: usize, f: F) -> Self
    where
        F: Fn(f64) -> f64,
    {
        Self::sample(a, b, n, |x| Complex64::new(f(x), 0.0))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.window.0 + j as f64 * self.spacing
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.samples
            .iter()
            .enumerate()
            .map(|(j, &v)| (self.x(j), v))
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            samples: self.samples.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        if self.len() != other.len() || (self.spacing - other.spacing).abs() > 1e-15 * self.spacing
        {
            return Err(invalid("grid", "grid functions live on different grids"));
        }
        Ok(Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a - b)
                .collect(),
            ..self.clone()
        })
    }

    /// Checks that the samples vanish at both ends of the window, i.e. the
    /// function is compactly supported inside it.
    pub fn check_support(&self) -> Result<()> {
        let margin = (self.len() / 100).max(1);
        let edge = self.samples[..margin]
            .iter()
            .chain(&self.samples[self.len() - margin..])
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if edge > EDGE_TOL {
            return Err(Error::SupportTouchesBoundary(edge));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn fft(data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan: Arc<dyn rustfft::Fft<f64>> = if inverse {
        planner.plan_fft_inverse(data.len())
    } else {
        planner.plan_fft_forward(data.len())
    };
    plan.process(data);
}

/// Bessel potential `(I - d²/dx²)^{s/2} F`, applied through the discrete
/// Fourier transform on the window with the multiplier `(1 + ξ²)^{s/2}`.
pub fn bessel_potential(f: &GridFunction, s: f64) -> GridFunction {
    let n = f.len();
    let mut buf = f.samples.clone();
    fft(&mut buf, false);
    let period = n as f64 * f.spacing;
    for (k, v) in buf.iter_mut().enumerate() {
        let kk = if k <= n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        };
        let xi = 2.0 * std::f64::consts::PI * kk / period;
        *v *= (1.0 + xi * xi).powf(0.5 * s) / n as f64;
    }
    fft(&mut buf, true);
    GridFunction {
        samples: buf,
        ..f.clone()
    }
}

/// Rectangle-rule `L^q` norm of the samples (grid max for `q = ∞`).
pub fn lq_norm(f: &GridFunction, q: f64) -> f64 {
    if q.is_infinite() {
        f.max_abs()
    } else {
        (f.samples.iter().map(|v| v.norm().powf(q)).sum::<f64>() * f.spacing).powf(1.0 / q)
    }
}

/// Fractional Sobolev norm `‖(I - d²/dx²)^{s/2} F‖_{L^q}`.
pub fn sobolev_norm(f: &GridFunction, s: f64, q: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(invalid(
            "s",
            format!("smoothness must be non-negative, got {s}"),
        ));
    }
    if !(q >= 1.0) {
        return Err(invalid("q", format!("need q >= 1, got {q}")));
    }
    if f.is_empty() {
        return Err(invalid("F", "empty grid"));
    }
    f.check_support()?;
    if s == 0.0 {
        return Ok(lq_norm(f, q));
    }
    Ok(lq_norm(&bessel_potential(f, s), q))
}
