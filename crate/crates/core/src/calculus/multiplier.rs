use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

type Eval = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Declared support of a multiplier on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Interval(f64, f64),
    Unbounded,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Interval(a, b) => a <= x && x <= b,
            Support::Unbounded => true,
        }
    }

    fn dilate(self, t: f64) -> Self {
        match self {
            Support::Interval(a, b) => Support::Interval(a / t, b / t),
            Support::Unbounded => Support::Unbounded,
        }
    }

    fn intersect(self, other: Support) -> Self {
        match (self, other) {
            (Support::Unbounded, s) | (s, Support::Unbounded) => s,
            (Support::Interval(a, b), Support::Interval(c, d)) => {
                Support::Interval(a.max(c), b.min(d))
            }
        }
    }
}

/// A bounded Borel function `F: [0, ∞) → ℂ` fed to the functional calculus.
#[derive(Clone)]
pub struct MultiplierFunction {
    name: String,
    eval: Eval,
    support: Support,
    sampling_hint: usize,
}

impl fmt::Debug for MultiplierFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierFunction")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("sampling_hint", &self.sampling_hint)
            .finish()
    }
}

pub const DEFAULT_SAMPLING_HINT: usize = 4096;

impl MultiplierFunction {
    pub fn new<F>(name: impl Into<String>, support: Support, f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            support,
            sampling_hint: DEFAULT_SAMPLING_HINT,
        }
    }

    pub fn real<F>(name: impl Into<String>, support: Support, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, support, move |x| Complex64::new(f(x), 0.0))
    }

    pub fn with_sampling_hint(mut self, hint: usize) -> Self {
        self.sampling_hint = hint;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn sampling_hint(&self) -> usize {
        self.sampling_hint
    }

    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        (self.eval)(x)
    }

    pub fn value_at_zero(&self) -> Complex64 {
        self.eval(0.0)
    }

    /// Constant multiplier.
    pub fn constant(c: f64) -> Self {
        Self::real(format!("const:{c}"), Support::Unbounded, move |_| c)
    }

    /// Heat multiplier `e^{-tλ}`.
    pub fn heat(t: f64) -> Self {
        Self::real(format!("heat:{t}"), Support::Unbounded, move |x| {
            (-t * x).exp()
        })
    }

    /// Riesz (Bochner–Riesz) mean `(1 - λ)_+^δ`.
    pub fn riesz_mean(delta: f64) -> Self {
        Self::real(
            format!("riesz_mean:{delta}"),
            Support::Interval(0.0, 1.0),
            move |x| {
                if x < 1.0 {
                    (1.0 - x).powf(delta)
                } else {
                    0.0
                }
            },
        )
    }

    /// Imaginary power `λ^{iτ}`, set to 1 at `λ = 0`.
    pub fn imaginary_power(tau: f64) -> Self {
        Self::new(
            format!("imaginary_power:{tau}"),
            Support::Unbounded,
            move |x| {
                if x > 0.0 {
                    Complex64::from_polar(1.0, tau * x.ln())
                } else {
                    Complex64::new(1.0, 0.0)
                }
            },
        )
    }

    /// Indicator `χ_[a, b]`.
    pub fn indicator(a: f64, b: f64) -> Self {
        Self::real(
            format!("indicator:{a},{b}"),
            Support::Interval(a, b),
            move |x| {
                if a <= x && x <= b {
                    1.0
                } else {
                    0.0
                }
            },
        )
    }

    /// Dilated reference bump `λ ↦ η(tλ)`.
    pub fn bump_dilate(t: f64) -> Self {
        Self::real(
            format!("bump_dilate:{t}"),
            Support::Interval(0.25 / t, 1.0 / t),
            move |x| crate::norms::eta(t * x),
        )
    }

    /// Piecewise-linear interpolation of `(knots, values)`, zero outside
    /// the knot range.
    pub fn tabulated(knots: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if knots.len() != values.len() || knots.len() < 2 {
            return Err(invalid(
                "samples",
                "need at least two knots and matching values",
            ));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("samples", "knots must be strictly increasing"));
        }
        let (lo, hi) = (knots[0], *knots.last().unwrap());
        Ok(Self::new(
            "tabulated",
            Support::Interval(lo, hi),
            move |x| {
                if x < lo || x > hi {
                    return Complex64::new(0.0, 0.0);
                }
                let k = knots.partition_point(|&t| t <= x).clamp(1, knots.len() - 1);
                let (x0, x1) = (knots[k - 1], knots[k]);
                let s = (x - x0) / (x1 - x0);
                values[k - 1] * (1.0 - s) + values[k] * s
            },
        ))
    }

    /// Parses a named preset: `heat[:t]`, `riesz_mean:δ`,
    /// `imaginary_power:τ`, `indicator:a,b`, `bump_dilate:t`, `const:c`.
    pub fn from_preset(preset: &str) -> Result<Self> {
        let (name, args) = preset.split_once(':').unwrap_or((preset, ""));
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| invalid("multiplier", format!("{preset}: {e}")))?
        };
        let arg = |i: usize| -> Result<f64> {
            nums.get(i)
                .copied()
                .ok_or_else(|| invalid("multiplier", format!("{preset}: missing argument {i}")))
        };
        Ok(match name {
            "heat" => Self::heat(nums.first().copied().unwrap_or(1.0)),
            "riesz_mean" => Self::riesz_mean(arg(0)?),
            "imaginary_power" => Self::imaginary_power(arg(0)?),
            "indicator" => Self::indicator(arg(0)?, arg(1)?),
            "bump_dilate" => Self::bump_dilate(arg(0)?),
            "const" => Self::constant(arg(0)?),
            other => {
                return Err(Error::Unknown {
                    kind: "multiplier preset",
                    name: other.to_string(),
                })
            }
        })
    }

    /// Dilation `δ_t F(λ) = F(tλ)`.
    pub fn dilate(&self, t: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            name: format!("{}@{t}", self.name),
            eval: Arc::new(move |x| inner(t * x)),
            support: self.support.dilate(t),
            sampling_hint: self.sampling_hint,
        }
    }

    /// Complex conjugate `F̄`.
    pub fn conj(&self) -> Self {
        let inner = self.eval.clone();
        Self {
            name: format!("conj({})", self.name),
            eval: Arc::new(move |x| inner(x).conj()),
            support: self.support,
            sampling_hint: self.sampling_hint,
        }
    }

    /// Pointwise product `F·G`.
    pub fn mul(&self, other: &MultiplierFunction) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self {
            name: format!("{}*{}", self.name, other.name),
            eval: Arc::new(move |x| f(x) * g(x)),
            support: self.support.intersect(other.support),
            sampling_hint: self.sampling_hint.max(other.sampling_hint),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let f = self.eval.clone();
        Self {
            name: format!("{c}*{}", self.name),
            eval: Arc::new(move |x| c * f(x)),
            support: self.support,
            sampling_hint: self.sampling_hint,
        }
    }
}

/// `F_{r,M}(λ) = F(λ)(1 - e^{-(rλ)^m})^M`; vanishes at `λ = 0`.
pub fn regularize_multiplier(
    f: &MultiplierFunction,
    r: f64,
    big_m: u32,
    m: f64,
) -> Result<MultiplierFunction> {
    if !(r > 0.0) {
        return Err(invalid("r", format!("must be positive, got {r}")));
    }
    if big_m < 1 {
        return Err(invalid("M", "must be at least 1"));
    }
    let inner = f.eval.clone();
    Ok(MultiplierFunction {
        name: format!("{}_reg(r={r},M={big_m})", f.name),
        eval: Arc::new(move |x| {
            let factor = (1.0 - (-(r * x).powf(m)).exp()).powi(big_m as i32);
            inner(x) * factor
        }),
        support: f.support,
        sampling_hint: f.sampling_hint,
    })
}

/// Dyadic decomposition `F = Σ_ℓ F^ℓ` with `F^ℓ(λ) = φ(2^{-ℓ}λ) F(λ)`.
#[derive(Debug, Clone)]
pub struct DyadicPieces {
    f: MultiplierFunction,
}

impl DyadicPieces {
    pub fn piece(&self, level: i32) -> MultiplierFunction {
        let inner = self.f.eval.clone();
        let scale = 2f64.powi(-level);
        MultiplierFunction {
            name: format!("{}^{level}", self.f.name),
            eval: Arc::new(move |x| inner(x) * crate::norms::phi(scale * x)),
            support: Support::Interval(2f64.powi(level) / 4.0, 2f64.powi(level)),
            sampling_hint: self.f.sampling_hint,
        }
    }

    /// Levels whose piece support `[2^ℓ/4, 2^ℓ]` meets `[lo, hi]`
    /// (`0 < lo ≤ hi`).
    pub fn levels_meeting(&self, lo: f64, hi: f64) -> std::ops::RangeInclusive<i32> {
        let first = lo.log2().floor() as i32;
        let last = (4.0 * hi).log2().ceil() as i32;
        first..=last
    }

    /// Sum of the pieces at the given levels.
    pub fn partial_sum(&self, levels: std::ops::RangeInclusive<i32>) -> MultiplierFunction {
        let inner = self.f.eval.clone();
        let (a, b) = (*levels.start(), *levels.end());
        MultiplierFunction {
            name: format!("{}^[{a}..{b}]", self.f.name),
            eval: Arc::new(move |x| {
                let w: f64 = (a..=b).map(|l| crate::norms::phi(2f64.powi(-l) * x)).sum();
                inner(x) * w
            }),
            support: self.f.support,
            sampling_hint: self.f.sampling_hint,
        }
    }
}

/// Splits `F` with the partition of unity from [`crate::norms::phi`].
///
/// The partition property of `φ` is re-checked on a logarithmic grid and
/// an error is returned if it fails to `1e-10`.
pub fn dyadic_pieces(f: &MultiplierFunction) -> Result<DyadicPieces> {
    let residual = crate::norms::phi_partition_residual();
    if residual > 1e-10 {
        return Err(Error::PartitionResidual(residual));
    }
    Ok(DyadicPieces { f: f.clone() })
}
