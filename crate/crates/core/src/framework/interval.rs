//! Per-dimension α-superlevel intervals of Gaussian components and the
//! axis-aligned boxes assembled from them.
//!
//! For a univariate normal with mean `μ` and standard deviation `σ` the set
//! `{x : φ(x) ≥ α}` is `[μ − σw, μ + σw]` where
//!
//! * density mode: `w = √(−2 ln(√(2π) α σ))`, defined for `α ≤ 1/(√(2π) σ)`;
//! * normalized mode (density divided by its peak): `w = √(−2 ln α)`, defined
//!   for `α ≤ 1`.
//!
//! Both modes share the length derivative `∂l/∂α = −4σ²/(α l)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::GaussianComponent;

/// Minimum interval length for a box to count as having interior.
pub const INTERIOR_TOL: f64 = 1e-12;

/// Relative slack when comparing `α` against the peak, so that `α` equal
/// to the peak up to rounding yields the degenerate interval `[μ, μ]`.
const PEAK_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// Thresholds compare against the raw component density.
    Density,
    /// Thresholds compare against the density divided by its peak, so
    /// `α ∈ (0, 1]`.
    #[default]
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalInterval {
    pub lower: f64,
    pub upper: f64,
    pub component: usize,
    pub dimension: usize,
    pub alpha: f64,
    /// Set when `α` exceeds the peak; `lower`/`upper` then hold `μ`.
    pub empty: bool,
}

impl CriticalInterval {
    pub fn new(lower: f64, upper: f64, alpha: f64) -> Result<Self> {
        if !(lower <= upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid interval [{lower}, {upper}]")));
        }
        Ok(Self {
            lower,
            upper,
            component: 0,
            dimension: 0,
            alpha,
            empty: false,
        })
    }

    pub fn empty_at(center: f64, alpha: f64) -> Self {
        Self {
            lower: center,
            upper: center,
            component: 0,
            dimension: 0,
            alpha,
            empty: true,
        }
    }

    pub fn at(mut self, component: usize, dimension: usize) -> Self {
        self.component = component;
        self.dimension = dimension;
        self
    }

    pub fn length(&self) -> f64 {
        if self.empty {
            0.0
        } else {
            self.upper - self.lower
        }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        !self.empty && x >= self.lower - tol && x <= self.upper + tol
    }

    /// `other ⊆ self`.
    pub fn encloses(&self, other: &CriticalInterval) -> bool {
        !self.empty && !other.empty && other.lower >= self.lower && other.upper <= self.upper
    }

    /// `[max lower, min upper]`, or `None` when disjoint or either is empty.
    pub fn intersection(&self, other: &CriticalInterval) -> Option<(f64, f64)> {
        if self.empty || other.empty {
            return None;
        }
        let lo = self.lower.max(other.lower);
        let hi = self.upper.min(other.upper);
        (lo <= hi).then_some((lo, hi))
    }
}

/// `w` such that the superlevel set is `μ ± σw`; `None` above the peak.
pub fn half_width_factor(sigma: f64, alpha: f64, mode: AlphaMode) -> Option<f64> {
    let ratio = match mode {
        AlphaMode::Density => (2.0 * PI).sqrt() * alpha * sigma,
        AlphaMode::Normalized => alpha,
    };
    if ratio > 1.0 + PEAK_SLACK {
        return None;
    }
    Some((-2.0 * ratio.ln()).max(0.0).sqrt())
}

/// The α-critical interval of a univariate normal.
pub fn critical_interval(mu: f64, sigma: f64, alpha: f64, mode: AlphaMode) -> Result<CriticalInterval> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("mean must be finite, got {mu}")));
    }
    Ok(match half_width_factor(sigma, alpha, mode) {
        Some(w) => CriticalInterval {
            lower: mu - sigma * w,
            upper: mu + sigma * w,
            component: 0,
            dimension: 0,
            alpha,
            empty: false,
        },
        None => CriticalInterval::empty_at(mu, alpha),
    })
}

/// `∂l/∂α = −4σ²/(α l)` for an interval of length `l` at threshold `α`.
pub fn interval_shrink_rate(sigma: f64, alpha: f64, length: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(alpha > 0.0) {
        return Err(Error::InvalidArgument("sigma and alpha must be positive".into()));
    }
    if !(length > 0.0) {
        return Err(Error::Singular);
    }
    Ok(-4.0 * sigma * sigma / (alpha * length))
}

/// Axis-aligned product of per-dimension intervals for one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalBox {
    pub component: usize,
    pub intervals: Vec<CriticalInterval>,
}

impl CriticalBox {
    pub fn new(component: usize, intervals: Vec<CriticalInterval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidArgument("box needs at least one interval".into()));
        }
        let alpha = intervals[0].alpha;
        let intervals = intervals
            .into_iter()
            .enumerate()
            .map(|(e, iv)| {
                if iv.alpha != alpha {
                    return Err(Error::InvalidArgument("box intervals must share alpha".into()));
                }
                Ok(iv.at(component, e))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { component, intervals })
    }

    /// The box spanned by `(min, max)` pairs, e.g. the projected data hull.
    pub fn from_bounds(component: usize, bounds: &[(f64, f64)], alpha: f64) -> Result<Self> {
        Self::new(
            component,
            bounds
                .iter()
                .map(|&(lo, hi)| CriticalInterval::new(lo, hi, alpha))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dims(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.iter().any(|iv| iv.empty)
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.intervals.iter().map(CriticalInterval::length).collect()
    }

    /// Euclidean length of the diagonal; zero for an empty box.
    pub fn diameter(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.intervals.iter().map(|iv| iv.length().powi(2)).sum::<f64>().sqrt()
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.intervals.iter().map(CriticalInterval::midpoint).collect()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dims() && self.intervals.iter().zip(x).all(|(iv, &v)| iv.contains(v, tol))
    }
}

/// Product of the marginal critical intervals of `component`, using
/// `σ_e = √Σ_ee`.
pub fn critical_box(component: &GaussianComponent, index: usize, alpha: f64, mode: AlphaMode) -> Result<CriticalBox> {
    let intervals = (0..component.dims())
        .map(|e| critical_interval(component.mean()[e], component.sigma(e), alpha, mode))
        .collect::<Result<Vec<_>>>()?;
    CriticalBox::new(index, intervals)
}

/// Whether the box contains an open ball: non-empty with every side longer
/// than [`INTERIOR_TOL`].
pub fn has_interior(b: &CriticalBox) -> bool {
    !b.is_empty() && b.intervals.iter().all(|iv| iv.length() > INTERIOR_TOL)
}
