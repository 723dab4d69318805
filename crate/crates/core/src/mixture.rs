//! Observations, Gaussian components and the finite mixture built from them.
//!
//! All densities are evaluated in log space and only exponentiated at the
//! API boundary, so points far from every component produce `0.0` rather
//! than `NaN`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};

/// Absolute tolerance on `Σ π_g = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Relative variance floor (fraction of the per-dimension data variance).
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-8;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// `N` observations of `L` dimensions stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    dims: usize,
}

impl Dataset {
    pub fn new(points: Vec<f64>, dims: usize) -> Result<Self> {
        if dims == 0 {
            return Err(Error::InvalidArgument("dataset needs at least one dimension".into()));
        }
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !points.len().is_multiple_of(dims) {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: points.len() % dims,
            });
        }
        if let Some(idx) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: idx / dims,
                column: idx % dims,
            });
        }
        let n = points.len() / dims;
        Ok(Self { points, n, dims })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput)?;
        let dims = first.as_ref().len();
        let mut points = Vec::with_capacity(rows.len() * dims);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: row.len(),
                });
            }
            points.extend_from_slice(row);
        }
        Self::new(points, dims)
    }

    /// One-dimensional dataset from scalar observations.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec(), 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dims..(i + 1) * self.dims]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dims)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    /// Values of one dimension in row order.
    pub fn column(&self, e: usize) -> Vec<f64> {
        self.rows().map(|r| r[e]).collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dims];
        for row in self.rows() {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        acc.iter().map(|a| a / self.n as f64).collect()
    }

    /// Population variance per dimension.
    pub fn variance(&self) -> Vec<f64> {
        let mean = self.mean();
        let mut acc = vec![0.0; self.dims];
        for row in self.rows() {
            for ((a, v), m) in acc.iter_mut().zip(row).zip(&mean) {
                *a += (v - m) * (v - m);
            }
        }
        acc.iter().map(|a| a / self.n as f64).collect()
    }

    /// `(min, max)` per dimension, i.e. the projection of the convex hull.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dims];
        for row in self.rows() {
            for ((lo, hi), &v) in out.iter_mut().zip(row) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        out
    }

    /// Absolute variance floor per dimension: `relative × variance`, falling
    /// back to `relative` itself for constant dimensions.
    pub fn variance_floors(&self, relative: f64) -> Vec<f64> {
        self.variance()
            .into_iter()
            .map(|v| if v > 0.0 { relative * v } else { relative })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Factor {
    /// Lower Cholesky factor, row-major `L × L`.
    lower: Vec<f64>,
    /// `-(L ln 2π + ln det Σ) / 2`, the log density at the mean.
    log_peak: f64,
}

/// One weighted Gaussian component `π_g · N(μ_g, Σ_g)`.
#[derive(Debug, Clone)]
pub struct GaussianComponent {
    weight: f64,
    mean: Vec<f64>,
    covariance: DMatrix<f64>,
    factor: Option<Factor>,
}

impl PartialEq for GaussianComponent {
    fn eq(&self, other: &Self) -> bool {
        self.weight == other.weight && self.mean == other.mean && self.covariance == other.covariance
    }
}

impl GaussianComponent {
    /// Builds a component. Shape is checked here; numerical validity
    /// (positive weight, positive definite covariance) is reported by
    /// [`MixtureModel::validate`].
    pub fn new(weight: f64, mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let dims = mean.len();
        if dims == 0 {
            return Err(Error::InvalidArgument("component mean is empty".into()));
        }
        if covariance.nrows() != dims || covariance.ncols() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: covariance.nrows().max(covariance.ncols()),
            });
        }
        let factor = factorize(&covariance);
        Ok(Self {
            weight,
            mean,
            covariance,
            factor,
        })
    }

    /// Component with diagonal covariance given as variances.
    pub fn diagonal(weight: f64, mean: Vec<f64>, variances: &[f64]) -> Result<Self> {
        if variances.len() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                found: variances.len(),
            });
        }
        let cov = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(variances));
        Self::new(weight, mean, cov)
    }

    pub fn univariate(weight: f64, mean: f64, sigma: f64) -> Result<Self> {
        Self::diagonal(weight, vec![mean], &[sigma * sigma])
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    /// Marginal standard deviation `√Σ_ee`.
    pub fn sigma(&self, e: usize) -> f64 {
        self.covariance[(e, e)].sqrt()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        (0..self.dims()).map(|e| self.sigma(e)).collect()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.factor.is_some()
    }

    pub(crate) fn with_weight(&self, weight: f64) -> Self {
        Self { weight, ..self.clone() }
    }

    fn factor(&self) -> Result<&Factor> {
        self.factor
            .as_ref()
            .ok_or_else(|| Error::InvalidModel("covariance is not positive definite".into()))
    }

    /// `ln N(x | μ, Σ)`, unweighted.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let dims = self.dims();
        if x.len() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: x.len(),
            });
        }
        let factor = self.factor()?;
        // Forward substitution L z = x − μ; the Mahalanobis term is |z|².
        let mut z = vec![0.0; dims];
        let mut maha = 0.0;
        for i in 0..dims {
            let row = &factor.lower[i * dims..i * dims + i + 1];
            let mut s = x[i] - self.mean[i];
            for (j, zj) in z.iter().enumerate().take(i) {
                s -= row[j] * zj;
            }
            z[i] = s / row[i];
            maha += z[i] * z[i];
        }
        Ok(factor.log_peak - 0.5 * maha)
    }

    /// `N(x | μ, Σ)`, unweighted.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.log_density(x).map(f64::exp)
    }

    /// Density at the mean.
    pub fn peak_density(&self) -> Result<f64> {
        Ok(self.factor()?.log_peak.exp())
    }
}

fn factorize(cov: &DMatrix<f64>) -> Option<Factor> {
    if cov.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let dims = cov.nrows();
    let chol = Cholesky::new(cov.clone())?;
    let l = chol.l();
    let mut lower = vec![0.0; dims * dims];
    let mut log_det = 0.0;
    for i in 0..dims {
        for j in 0..=i {
            lower[i * dims + j] = l[(i, j)];
        }
        if !(l[(i, i)] > 0.0) {
            return None;
        }
        log_det += 2.0 * l[(i, i)].ln();
    }
    Some(Factor {
        lower,
        log_peak: -0.5 * (dims as f64 * LN_2PI + log_det),
    })
}

/// `ln Σ exp(v)`, stable for large negative inputs. Returns `-∞` for an
/// empty slice or when every entry is `-∞`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// What a [`Violation`] is about.
#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    NonPositiveWeight {
        weight: f64,
    },
    WeightSum {
        sum: f64,
    },
    NonFiniteParameter,
    Asymmetric,
    NotPositiveDefinite,
    BelowVarianceFloor {
        dimension: usize,
        variance: f64,
        floor: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// `None` for model-level invariants such as the weight sum.
    pub component: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(g) = self.component {
            write!(f, "component {g}: ")?;
        }
        match &self.kind {
            ViolationKind::NonPositiveWeight { weight } => write!(f, "weight {weight} is not positive"),
            ViolationKind::WeightSum { sum } => write!(f, "weights sum to {sum}, not 1"),
            ViolationKind::NonFiniteParameter => write!(f, "non-finite parameter"),
            ViolationKind::Asymmetric => write!(f, "covariance is not symmetric"),
            ViolationKind::NotPositiveDefinite => write!(f, "covariance is not positive definite"),
            ViolationKind::BelowVarianceFloor {
                dimension,
                variance,
                floor,
            } => write!(f, "variance {variance} in dimension {dimension} is below floor {floor}"),
        }
    }
}

/// A finite Gaussian mixture with `G ≥ 1` components of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    components: Vec<GaussianComponent>,
}

impl MixtureModel {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        let dims = components
            .first()
            .ok_or_else(|| Error::InvalidArgument("mixture needs at least one component".into()))?
            .dims();
        if let Some(c) = components.iter().find(|c| c.dims() != dims) {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: c.dims(),
            });
        }
        Ok(Self { components })
    }

    pub fn g_count(&self) -> usize {
        self.components.len()
    }

    pub fn dims(&self) -> usize {
        self.components[0].dims()
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn component(&self, g: usize) -> &GaussianComponent {
        &self.components[g]
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    /// Keeps the components at `keep` (in the given order) and rescales
    /// their weights to sum to one.
    pub fn retain_renormalized(&self, keep: &[usize]) -> Result<Self> {
        let total: f64 = keep.iter().map(|&g| self.components[g].weight).sum();
        if keep.is_empty() || !(total > 0.0) {
            return Err(Error::InvalidArgument(
                "no component with positive weight to keep".into(),
            ));
        }
        Self::new(
            keep.iter()
                .map(|&g| self.components[g].with_weight(self.components[g].weight / total))
                .collect(),
        )
    }

    fn check_dims(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `ln π_g + ln N(x | θ_g)` for every component.
    pub fn weighted_log_densities(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dims(x)?;
        self.components
            .iter()
            .map(|c| Ok(c.weight.ln() + c.log_density(x)?))
            .collect()
    }

    /// `ln f(x | π, θ)`.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        Ok(log_sum_exp(&self.weighted_log_densities(x)?))
    }

    /// Mixture density `f(x | π, θ) = Σ_g π_g φ_g(x | θ_g)`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.log_density(x).map(f64::exp)
    }

    /// Interpretation degree: the largest *unweighted* component density at
    /// `x`, together with the lowest component index attaining it.
    pub fn interpretation_degree(&self, x: &[f64]) -> Result<(f64, usize)> {
        self.check_dims(x)?;
        let mut best = (f64::NEG_INFINITY, 0);
        for (g, c) in self.components.iter().enumerate() {
            let ld = c.log_density(x)?;
            if ld > best.0 {
                best = (ld, g);
            }
        }
        Ok((best.0.exp(), best.1))
    }

    /// Lists every violated model invariant. An empty list means the model
    /// is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (g, c) in self.components.iter().enumerate() {
            let at = |kind| Violation {
                component: Some(g),
                kind,
            };
            let finite = c.weight.is_finite()
                && c.mean.iter().all(|v| v.is_finite())
                && c.covariance.iter().all(|v| v.is_finite());
            if !finite {
                out.push(at(ViolationKind::NonFiniteParameter));
                continue;
            }
            if c.weight <= 0.0 {
                out.push(at(ViolationKind::NonPositiveWeight { weight: c.weight }));
            }
            let cov = &c.covariance;
            let d = c.dims();
            let symmetric = (0..d).all(|i| {
                (0..i).all(|j| {
                    let (a, b) = (cov[(i, j)], cov[(j, i)]);
                    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
                })
            });
            if !symmetric {
                out.push(at(ViolationKind::Asymmetric));
            } else if !c.is_positive_definite() {
                out.push(at(ViolationKind::NotPositiveDefinite));
            }
        }
        let sum: f64 = self.components.iter().map(|c| c.weight).sum();
        if !((sum - 1.0).abs() <= WEIGHT_SUM_TOL) {
            out.push(Violation {
                component: None,
                kind: ViolationKind::WeightSum { sum },
            });
        }
        out
    }

    /// [`validate`](Self::validate) plus the per-dimension variance floor.
    pub fn validate_with_floor(&self, floors: &[f64]) -> Vec<Violation> {
        let mut out = self.validate();
        for (g, c) in self.components.iter().enumerate() {
            if !c.is_positive_definite() {
                continue;
            }
            for (e, &floor) in floors.iter().enumerate().take(c.dims()) {
                let variance = c.covariance[(e, e)];
                if variance < floor {
                    out.push(Violation {
                        component: Some(g),
                        kind: ViolationKind::BelowVarianceFloor {
                            dimension: e,
                            variance,
                            floor,
                        },
                    });
                }
            }
        }
        out
    }
}

/// Peak density of a univariate normal with standard deviation `sigma`.
pub fn normal_peak(sigma: f64) -> f64 {
    1.0 / ((2.0 * PI).sqrt() * sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
        (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
    }

    fn two_component() -> MixtureModel {
        MixtureModel::new(vec![
            GaussianComponent::univariate(0.5, 0.0, 1.0).unwrap(),
            GaussianComponent::univariate(0.5, 2.0, 1.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn standard_normal_at_mean() {
        let m = MixtureModel::new(vec![GaussianComponent::univariate(1.0, 0.0, 1.0).unwrap()]).unwrap();
        assert_relative_eq!(m.density(&[0.0]).unwrap(), 0.398942, epsilon = 1e-6);
        assert_relative_eq!(
            m.density(&[0.0]).unwrap(),
            normal_pdf(0.0, 0.0, 1.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn duplicated_component_equals_single() {
        let one = MixtureModel::new(vec![GaussianComponent::univariate(1.0, 0.3, 1.7).unwrap()]).unwrap();
        let two = MixtureModel::new(vec![
            GaussianComponent::univariate(0.5, 0.3, 1.7).unwrap(),
            GaussianComponent::univariate(0.5, 0.3, 1.7).unwrap(),
        ])
        .unwrap();
        for x in [-3.0, 0.0, 0.3, 5.0] {
            assert_relative_eq!(
                one.density(&[x]).unwrap(),
                two.density(&[x]).unwrap(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn two_component_density_at_half() {
        let expected = 0.5 * normal_pdf(0.5, 0.0, 1.0) + 0.5 * normal_pdf(0.5, 2.0, 1.0);
        let got = two_component().density(&[0.5]).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-13);
        assert_relative_eq!(got, 0.240792, epsilon = 1e-6);
    }

    #[test]
    fn far_point_underflows_to_zero_not_nan() {
        let d = two_component().density(&[1e4]).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let err = two_component().density(&[0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 1, found: 2 }));
        assert!(two_component().interpretation_degree(&[]).is_err());
    }

    #[test]
    fn interpretation_degree_cases() {
        let single = MixtureModel::new(vec![GaussianComponent::univariate(1.0, 1.0, 2.0).unwrap()]).unwrap();
        let (v, g) = single.interpretation_degree(&[0.2]).unwrap();
        assert_eq!(g, 0);
        assert_eq!(v, single.component(0).density(&[0.2]).unwrap());

        let m = two_component();
        let (v, g) = m.interpretation_degree(&[1.0]).unwrap();
        assert_eq!(g, 0);
        assert_relative_eq!(v, normal_pdf(1.0, 0.0, 1.0), max_relative = 1e-14);

        let (v, g) = m.interpretation_degree(&[0.5]).unwrap();
        assert_eq!(g, 0);
        assert_relative_eq!(v, 0.352065, epsilon = 1e-6);
    }

    #[test]
    fn interpretation_degree_ignores_weights() {
        let m = MixtureModel::new(vec![
            GaussianComponent::univariate(0.99, 0.0, 1.0).unwrap(),
            GaussianComponent::univariate(0.01, 0.4, 1.0).unwrap(),
        ])
        .unwrap();
        let (_, g) = m.interpretation_degree(&[0.4]).unwrap();
        assert_eq!(g, 1);
    }

    #[test]
    fn validation_cases() {
        assert!(two_component().validate().is_empty());

        let heavy = MixtureModel::new(vec![
            GaussianComponent::univariate(0.7, 0.0, 1.0).unwrap(),
            GaussianComponent::univariate(0.7, 2.0, 1.0).unwrap(),
        ])
        .unwrap();
        let v = heavy.validate();
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0].kind, ViolationKind::WeightSum { .. }));

        let neg = MixtureModel::new(vec![
            GaussianComponent::diagonal(1.0, vec![0.0, 0.0], &[1.0, -0.5]).unwrap()
        ])
        .unwrap();
        let v = neg.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].component, Some(0));
        assert_eq!(v[0].kind, ViolationKind::NotPositiveDefinite);
        assert!(neg.density(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn asymmetric_and_floor_violations() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.1, 1.0]);
        let m = MixtureModel::new(vec![GaussianComponent::new(1.0, vec![0.0, 0.0], cov).unwrap()]).unwrap();
        assert_eq!(m.validate()[0].kind, ViolationKind::Asymmetric);

        let m = MixtureModel::new(vec![
            GaussianComponent::diagonal(1.0, vec![0.0, 0.0], &[1.0, 1e-10]).unwrap()
        ])
        .unwrap();
        assert!(m.validate().is_empty());
        let v = m.validate_with_floor(&[1e-8, 1e-8]);
        assert_eq!(v.len(), 1);
        assert!(matches!(
            v[0].kind,
            ViolationKind::BelowVarianceFloor { dimension: 1, .. }
        ));
    }

    #[test]
    fn correlated_density_matches_closed_form() {
        // 2D with correlation ρ: closed-form bivariate normal density.
        let (s1, s2, rho) = (1.5_f64, 0.5_f64, 0.6_f64);
        let cov = DMatrix::from_row_slice(2, 2, &[s1 * s1, rho * s1 * s2, rho * s1 * s2, s2 * s2]);
        let c = GaussianComponent::new(1.0, vec![1.0, -1.0], cov).unwrap();
        let (x, y) = (0.2_f64, -0.7_f64);
        let (zx, zy) = ((x - 1.0) / s1, (y + 1.0) / s2);
        let q = (zx * zx - 2.0 * rho * zx * zy + zy * zy) / (1.0 - rho * rho);
        let expected = (-q / 2.0).exp() / (2.0 * PI * s1 * s2 * (1.0 - rho * rho).sqrt());
        assert_relative_eq!(c.density(&[x, y]).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn dataset_shape_checks() {
        assert!(matches!(Dataset::new(vec![], 1), Err(Error::EmptyInput)));
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(matches!(
            Dataset::new(vec![1.0, f64::NAN], 1),
            Err(Error::NonFinite { row: 1, column: 0 })
        ));
        let d = Dataset::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!((d.n(), d.dims()), (2, 2));
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.bounds(), vec![(1.0, 3.0), (2.0, 4.0)]);
        assert_eq!(d.variance(), vec![1.0, 1.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn model_strategy() -> impl Strategy<Value = MixtureModel> {
            prop::collection::vec((0.05f64..1.0, -5.0f64..5.0, 0.2f64..3.0), 1..5).prop_map(|raw| {
                let total: f64 = raw.iter().map(|r| r.0).sum();
                MixtureModel::new(
                    raw.iter()
                        .map(|&(w, m, s)| GaussianComponent::univariate(w / total, m, s).unwrap())
                        .collect(),
                )
                .unwrap()
            })
        }

        proptest! {
            #[test]
            fn density_bounded_by_weighted_peaks(m in model_strategy(), x in -10.0f64..10.0) {
                let bound: f64 = m.components().iter().map(|c| c.weight() * c.peak_density().unwrap()).sum();
                prop_assert!(m.density(&[x]).unwrap() <= bound * (1.0 + 1e-12));
            }

            #[test]
            fn degree_equals_brute_force_max(m in model_strategy(), x in -10.0f64..10.0) {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for (g, c) in m.components().iter().enumerate() {
                    let d = c.density(&[x]).unwrap();
                    if d > best {
                        best = d;
                        arg = g;
                    }
                }
                let (v, g) = m.interpretation_degree(&[x]).unwrap();
                prop_assert_eq!(v, best);
                prop_assert_eq!(g, arg);
            }

            #[test]
            fn permutation_invariance(m in model_strategy(), x in -10.0f64..10.0) {
                let mut rev = m.components().to_vec();
                rev.reverse();
                let r = MixtureModel::new(rev).unwrap();
                let (a, b) = (m.density(&[x]).unwrap(), r.density(&[x]).unwrap());
                prop_assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
                prop_assert_eq!(m.interpretation_degree(&[x]).unwrap().0, r.interpretation_degree(&[x]).unwrap().0);
            }
        }
    }
}
