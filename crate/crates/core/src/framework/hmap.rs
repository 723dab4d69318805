//! Affine contraction maps between consecutive critical intervals and
//! fixed-point iteration on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::interval::CriticalInterval;

/// Slack allowed on the observed per-step contraction.
pub const CONTRACTION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HMapMode {
    /// `y = K (x − inf Γ)`.
    PaperLiteral,
    /// `y = inf I + K (x − inf Γ)` with `I = Γ ∩ Γ'`: maps the source onto
    /// `I`, so the fixed point lies inside the nested region.
    #[default]
    Anchored,
}

/// Contraction map `x ↦ offset + k·x` for one component and dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HMap {
    pub component: usize,
    pub dimension: usize,
    pub k: f64,
    pub offset: f64,
    pub source: CriticalInterval,
    /// `I = source ∩ next`, the image of `source` in anchored mode.
    pub target_intersection: CriticalInterval,
    pub mode: HMapMode,
}

impl HMap {
    pub fn apply(&self, x: f64) -> f64 {
        self.offset + self.k * x
    }

    /// Closed-form fixed point `offset / (1 − k)`.
    pub fn algebraic_fixed_point(&self) -> f64 {
        self.offset / (1.0 - self.k)
    }

    /// `self` applied after `first`. The result maps `first.source` with
    /// ratio `k₁k₂`; in anchored mode it equals the map built directly from
    /// `first.source` onto `self.target_intersection`.
    pub fn after(&self, first: &HMap) -> Result<HMap> {
        if self.component != first.component || self.dimension != first.dimension || self.mode != first.mode {
            return Err(Error::InvalidArgument("maps belong to different chains".into()));
        }
        Ok(HMap {
            component: self.component,
            dimension: self.dimension,
            k: self.k * first.k,
            offset: self.offset + self.k * first.offset,
            source: first.source,
            target_intersection: self.target_intersection,
            mode: self.mode,
        })
    }
}

fn intersection_of(prev: &CriticalInterval, next: &CriticalInterval) -> Result<(f64, f64)> {
    if prev.empty || !(prev.length() > 0.0) {
        return Err(Error::InvalidArgument(
            "source interval must have positive length".into(),
        ));
    }
    if next.empty {
        return Err(Error::InvalidArgument("target interval is empty".into()));
    }
    prev.intersection(next).ok_or(Error::DisjointIntervals)
}

/// `K = |Γ ∩ Γ'| / |Γ|`. Equals 1 when `Γ' ⊇ Γ`.
pub fn contraction_ratio(prev: &CriticalInterval, next: &CriticalInterval) -> Result<f64> {
    let (lo, hi) = intersection_of(prev, next)?;
    Ok((hi - lo) / (prev.upper - prev.lower))
}

pub fn build_h_map(prev: &CriticalInterval, next: &CriticalInterval, mode: HMapMode) -> Result<HMap> {
    let (lo, hi) = intersection_of(prev, next)?;
    let k = (hi - lo) / (prev.upper - prev.lower);
    if !(k < 1.0) {
        return Err(Error::NotAContraction { k });
    }
    let offset = match mode {
        HMapMode::PaperLiteral => -k * prev.lower,
        HMapMode::Anchored => lo - k * prev.lower,
    };
    let target_intersection = CriticalInterval {
        lower: lo,
        upper: hi,
        component: prev.component,
        dimension: prev.dimension,
        alpha: next.alpha,
        empty: false,
    };
    Ok(HMap {
        component: prev.component,
        dimension: prev.dimension,
        k,
        offset,
        source: *prev,
        target_intersection,
        mode,
    })
}

/// Outcome of Banach iteration on an [`HMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct BanachOutcome {
    pub location: f64,
    pub iterations: usize,
    /// `|x_{n+1} − x_n|` for every step taken.
    pub steps: Vec<f64>,
    /// Every step satisfied `|x_{n+1} − x_n| ≤ K |x_n − x_{n−1}| + slack`.
    pub contraction_certified: bool,
    /// Largest observed `|x_{n+1} − x_n| / |x_n − x_{n−1}|`.
    pub max_observed_ratio: f64,
}

/// Iterates `x ← H(x)` from `start` until a correction smaller than `tol`.
pub fn banach_fixed_point(map: &HMap, start: f64, tol: f64, max_iter: usize) -> Result<BanachOutcome> {
    if !(map.k < 1.0 && map.k >= 0.0) {
        return Err(Error::NotAContraction { k: map.k });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut x = start;
    let mut steps = Vec::new();
    let mut certified = true;
    let mut max_ratio: f64 = 0.0;
    for n in 1..=max_iter {
        let y = map.apply(x);
        let step = (y - x).abs();
        if let Some(&last) = steps.last() {
            if step > map.k * last + CONTRACTION_SLACK {
                certified = false;
            }
            if last > 0.0 {
                max_ratio = max_ratio.max(step / last);
            }
        }
        steps.push(step);
        x = y;
        if step < tol {
            return Ok(BanachOutcome {
                location: x,
                iterations: n,
                steps,
                contraction_certified: certified,
                max_observed_ratio: max_ratio,
            });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter })
}
