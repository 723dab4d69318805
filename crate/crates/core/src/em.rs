//! Expectation-maximisation for Gaussian mixtures.
//!
//! Sums over observations are always accumulated in row order, so results
//! are bit-reproducible for a given input.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{log_sum_exp, Dataset, GaussianComponent, MixtureModel, DEFAULT_VARIANCE_FLOOR};
use crate::rng::SeededRng;

/// Effective responsibility mass below which a component counts as collapsed.
pub const COLLAPSE_MASS: f64 = 1e-12;

/// Row-sum tolerance of a [`ResponsibilityMatrix`].
pub const ROW_SUM_TOL: f64 = 1e-10;

/// Which mean is subtracted in the covariance update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceMeanMode {
    /// The mean from before the update, `μ^(t)`.
    Previous,
    /// The freshly updated mean `μ^(t+1)` (standard EM).
    #[default]
    Updated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMethod {
    /// `G` distinct observations drawn with the seeded generator.
    RandomPoints,
    /// Per-dimension quantiles at `(g + ½)/G`; the sample mean when `G = 1`.
    #[default]
    SpreadQuantiles,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub covariance_mean_mode: CovarianceMeanMode,
    /// Relative to the per-dimension data variance.
    pub variance_floor: f64,
    pub seed: u64,
    pub init_method: InitMethod,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            covariance_mean_mode: CovarianceMeanMode::Updated,
            variance_floor: DEFAULT_VARIANCE_FLOOR,
            seed: 0,
            init_method: InitMethod::SpreadQuantiles,
        }
    }
}

impl EmConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.variance_floor > 0.0 && self.variance_floor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "variance floor must be positive, got {}",
                self.variance_floor
            )));
        }
        Ok(())
    }
}

/// Posterior membership probabilities, `N × G`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponsibilityMatrix {
    values: Vec<f64>,
    n: usize,
    g: usize,
}

impl ResponsibilityMatrix {
    /// Checks the row-sum and range invariants.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let g = rows.first().ok_or(Error::EmptyInput)?.as_ref().len();
        let mut values = Vec::with_capacity(rows.len() * g);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != g {
                return Err(Error::DimensionMismatch {
                    expected: g,
                    found: row.len(),
                });
            }
            if row.iter().any(|r| !(0.0..=1.0).contains(r)) {
                return Err(Error::InvalidArgument(format!("row {i} has an entry outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidArgument(format!("row {i} sums to {sum}")));
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            values,
            n: rows.len(),
            g,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g_count(&self) -> usize {
        self.g
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.g..(i + 1) * self.g]
    }

    pub fn get(&self, i: usize, g: usize) -> f64 {
        self.values[i * self.g + g]
    }

    /// `Σ_i r_ig` per component, accumulated in row order.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.g];
        for row in self.values.chunks_exact(self.g) {
            for (a, r) in acc.iter_mut().zip(row) {
                *a += r;
            }
        }
        acc
    }
}

/// E-step: `r_ig = π_g N(X_i | θ_g) / Σ_k π_k N(X_i | θ_k)`, via log-sum-exp.
pub fn responsibilities(data: &Dataset, model: &MixtureModel) -> Result<ResponsibilityMatrix> {
    let g = model.g_count();
    let mut values = Vec::with_capacity(data.n() * g);
    for x in data.rows() {
        let logs = model.weighted_log_densities(x)?;
        let norm = log_sum_exp(&logs);
        if !norm.is_finite() {
            return Err(Error::InvalidModel("no component has positive weight".into()));
        }
        values.extend(logs.iter().map(|l| (l - norm).exp()));
    }
    Ok(ResponsibilityMatrix { values, n: data.n(), g })
}

/// Result of an M-step.
#[derive(Debug, Clone, PartialEq)]
pub struct MStep {
    /// Collapsed components keep their previous mean and covariance and
    /// carry their (negligible) weight; the caller decides whether to drop
    /// them.
    pub model: MixtureModel,
    pub collapsed: Vec<usize>,
}

/// M-step: weighted updates of `π`, `μ` and `Σ` from the responsibilities.
pub fn m_step(data: &Dataset, resp: &ResponsibilityMatrix, prev: &MixtureModel, config: &EmConfig) -> Result<MStep> {
    config.check()?;
    if resp.n() != data.n() {
        return Err(Error::DimensionMismatch {
            expected: data.n(),
            found: resp.n(),
        });
    }
    if resp.g_count() != prev.g_count() {
        return Err(Error::DimensionMismatch {
            expected: prev.g_count(),
            found: resp.g_count(),
        });
    }
    if prev.dims() != data.dims() {
        return Err(Error::DimensionMismatch {
            expected: prev.dims(),
            found: data.dims(),
        });
    }
    let dims = data.dims();
    let n = data.n() as f64;
    let floors = data.variance_floors(config.variance_floor);
    let mass = resp.column_sums();

    let mut components = Vec::with_capacity(prev.g_count());
    let mut collapsed = Vec::new();
    for (g, &nk) in mass.iter().enumerate() {
        let old = prev.component(g);
        if nk < COLLAPSE_MASS {
            collapsed.push(g);
            components.push(GaussianComponent::new(
                nk / n,
                old.mean().to_vec(),
                old.covariance().clone(),
            )?);
            continue;
        }

        let mut mean = vec![0.0; dims];
        for (i, x) in data.rows().enumerate() {
            let r = resp.get(i, g);
            for (m, v) in mean.iter_mut().zip(x) {
                *m += r * v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= nk);

        let center: &[f64] = match config.covariance_mean_mode {
            CovarianceMeanMode::Previous => old.mean(),
            CovarianceMeanMode::Updated => &mean,
        };
        let mut cov = DMatrix::<f64>::zeros(dims, dims);
        let mut diff = vec![0.0; dims];
        for (i, x) in data.rows().enumerate() {
            let r = resp.get(i, g);
            for ((d, v), c) in diff.iter_mut().zip(x).zip(center) {
                *d = v - c;
            }
            for a in 0..dims {
                for b in 0..=a {
                    cov[(a, b)] += r * diff[a] * diff[b];
                }
            }
        }
        for a in 0..dims {
            for b in 0..=a {
                let v = cov[(a, b)] / nk;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        let component = regularized(nk / n, mean, cov, &floors)?;
        components.push(component);
    }
    Ok(MStep {
        model: MixtureModel::new(components)?,
        collapsed,
    })
}

/// Constrained covariance update. With `D = diag(√floor)`, the eigenvalues
/// of `D⁻¹ S D⁻¹` are raised to at least 1 and the result mapped back. This
/// is the maximiser of the component's expected log-likelihood over
/// `{Σ : D⁻¹ Σ D⁻¹ ⪰ I}`, so EM stays monotone, and every diagonal entry
/// ends up at or above its floor.
fn regularized(weight: f64, mean: Vec<f64>, cov: DMatrix<f64>, floors: &[f64]) -> Result<GaussianComponent> {
    let dims = floors.len();
    let scale: Vec<f64> = floors.iter().map(|f| f.sqrt()).collect();
    let scaled = DMatrix::from_fn(dims, dims, |a, b| cov[(a, b)] / (scale[a] * scale[b]));
    let eigen = scaled.clone().symmetric_eigen();
    let constrained = if eigen.eigenvalues.iter().all(|&l| l >= 1.0) {
        cov
    } else {
        let clamped = eigen.eigenvalues.map(|l| l.max(1.0));
        let v = &eigen.eigenvectors;
        let s = v * DMatrix::from_diagonal(&clamped) * v.transpose();
        DMatrix::from_fn(dims, dims, |a, b| {
            let x = if a <= b { s[(a, b)] } else { s[(b, a)] };
            x * scale[a] * scale[b]
        })
    };
    let component = GaussianComponent::new(weight, mean, constrained)?;
    if !component.is_positive_definite() {
        return Err(Error::InvalidModel("covariance cannot be regularized".into()));
    }
    Ok(component)
}

/// `Σ_i ln f(X_i | π, θ)`.
pub fn log_likelihood(data: &Dataset, model: &MixtureModel) -> Result<f64> {
    let mut total = 0.0;
    for x in data.rows() {
        total += model.log_density(x)?;
    }
    Ok(total)
}

/// Starting model with equal weights and the (floored) data variance on
/// every diagonal.
pub fn initialize_model(data: &Dataset, g: usize, config: &EmConfig) -> Result<MixtureModel> {
    config.check()?;
    if g == 0 {
        return Err(Error::InvalidArgument("component count must be at least 1".into()));
    }
    if g > data.n() {
        return Err(Error::InvalidArgument(format!(
            "component count {g} exceeds observation count {}",
            data.n()
        )));
    }
    let floors = data.variance_floors(config.variance_floor);
    let variances: Vec<f64> = data.variance().iter().zip(&floors).map(|(v, f)| v.max(*f)).collect();

    let means: Vec<Vec<f64>> = match config.init_method {
        InitMethod::SpreadQuantiles if g == 1 => vec![data.mean()],
        InitMethod::SpreadQuantiles => {
            let columns: Vec<Vec<f64>> = (0..data.dims())
                .map(|e| {
                    let mut c = data.column(e);
                    c.sort_by(f64::total_cmp);
                    c
                })
                .collect();
            (0..g)
                .map(|k| {
                    let q = (k as f64 + 0.5) / g as f64;
                    columns.iter().map(|c| quantile_sorted(c, q)).collect()
                })
                .collect()
        }
        InitMethod::RandomPoints => {
            let mut rng = SeededRng::new(config.seed);
            let mut order: Vec<usize> = (0..data.n()).collect();
            // Fisher-Yates over the full index range.
            for i in (1..order.len()).rev() {
                let j = rng.index_below(i + 1);
                order.swap(i, j);
            }
            let mut chosen: Vec<usize> = Vec::with_capacity(g);
            for &i in &order {
                if chosen.len() == g {
                    break;
                }
                if chosen.iter().all(|&c| data.row(c) != data.row(i)) {
                    chosen.push(i);
                }
            }
            // Fewer distinct rows than components: reuse in shuffled order.
            for &i in &order {
                if chosen.len() == g {
                    break;
                }
                if !chosen.contains(&i) {
                    chosen.push(i);
                }
            }
            chosen.iter().map(|&i| data.row(i).to_vec()).collect()
        }
    };

    let weight = 1.0 / g as f64;
    MixtureModel::new(
        means
            .into_iter()
            .map(|m| GaussianComponent::diagonal(weight, m, &variances))
            .collect::<Result<_>>()?,
    )
}

/// Linear interpolation between order statistics at position `q (n − 1)`.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmStep {
    pub model: MixtureModel,
    /// Log-likelihood of the updated model.
    pub loglik: f64,
    pub collapsed: Vec<usize>,
}

/// One E-step followed by one M-step.
pub fn em_fit_step(data: &Dataset, model: &MixtureModel, config: &EmConfig) -> Result<EmStep> {
    let resp = responsibilities(data, model)?;
    let MStep { model, collapsed } = m_step(data, &resp, model, config)?;
    let loglik = log_likelihood(data, &model)?;
    Ok(EmStep {
        model,
        loglik,
        collapsed,
    })
}

/// Largest absolute change over weights, means and covariance entries.
/// Models with different component counts compare as infinitely far apart.
pub fn parameter_change(a: &MixtureModel, b: &MixtureModel) -> f64 {
    if a.g_count() != b.g_count() || a.dims() != b.dims() {
        return f64::INFINITY;
    }
    a.components()
        .iter()
        .zip(b.components())
        .map(|(x, y)| {
            let w = (x.weight() - y.weight()).abs();
            let m = x
                .mean()
                .iter()
                .zip(y.mean())
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            let c = x
                .covariance()
                .iter()
                .zip(y.covariance().iter())
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            w.max(m).max(c)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct EmFit {
    pub model: MixtureModel,
    /// Log-likelihood after each step.
    pub loglik: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Plain EM from `start` until the parameter change drops below `tol`.
/// Collapsed components are dropped and the remaining weights renormalised.
pub fn fit_em(data: &Dataset, start: MixtureModel, config: &EmConfig, tol: f64, max_iter: usize) -> Result<EmFit> {
    let mut model = start;
    let mut loglik = Vec::new();
    for it in 1..=max_iter {
        let step = em_fit_step(data, &model, config)?;
        let next = if step.collapsed.is_empty() {
            step.model
        } else {
            let keep: Vec<usize> = (0..step.model.g_count())
                .filter(|g| !step.collapsed.contains(g))
                .collect();
            step.model.retain_renormalized(&keep)?
        };
        loglik.push(step.loglik);
        let change = parameter_change(&model, &next);
        model = next;
        if change < tol {
            return Ok(EmFit {
                model,
                loglik,
                iterations: it,
                converged: true,
            });
        }
    }
    Ok(EmFit {
        model,
        loglik,
        iterations: max_iter,
        converged: false,
    })
}
