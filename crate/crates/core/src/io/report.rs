use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::FixedPointReport;
use crate::mixture::MixtureModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentParams {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Row-major covariance rows.
    pub covariance: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub g: usize,
    pub dims: usize,
    pub components: Vec<ComponentParams>,
}

impl From<&MixtureModel> for ModelReport {
    fn from(model: &MixtureModel) -> Self {
        let components = model
            .components()
            .iter()
            .map(|c| {
                let cov = c.covariance();
                ComponentParams {
                    weight: c.weight(),
                    mean: c.mean().to_vec(),
                    covariance: (0..cov.nrows())
                        .map(|i| (0..cov.ncols()).map(|j| cov[(i, j)]).collect())
                        .collect(),
                }
            })
            .collect();
        Self {
            g: model.g_count(),
            dims: model.dims(),
            components,
        }
    }
}

pub fn write_model(model: &MixtureModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text =
        serde_json::to_string_pretty(&ModelReport::from(model)).map_err(|e| Error::Json { line: 1, source: e })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSummary {
    pub count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Product of all ratios: the contraction of the composed map.
    pub product: f64,
}

impl KSummary {
    pub fn of(ks: &[f64]) -> Self {
        Self {
            count: ks.len(),
            min: ks.iter().copied().reduce(f64::min),
            max: ks.iter().copied().reduce(f64::max),
            product: ks.iter().product(),
        }
    }
}

/// One line of the fixed-point report file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSummary {
    pub component: usize,
    pub location: Vec<f64>,
    /// Per dimension.
    pub k_history: Vec<KSummary>,
    pub iterations: usize,
    pub banach_iterations: Vec<usize>,
    pub certified: bool,
    pub disjoint: bool,
}

impl From<&FixedPointReport> for FixedPointSummary {
    fn from(r: &FixedPointReport) -> Self {
        Self {
            component: r.component,
            location: r.location.clone(),
            k_history: r.per_dimension_k_history.iter().map(|ks| KSummary::of(ks)).collect(),
            iterations: r.iterations_to_converge,
            banach_iterations: r.banach_iterations.clone(),
            certified: r.certified,
            disjoint: r.disjoint,
        }
    }
}

pub fn write_fixed_points(reports: &[FixedPointReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for (i, r) in reports.iter().enumerate() {
        text.push_str(
            &serde_json::to_string(&FixedPointSummary::from(r)).map_err(|e| Error::Json { line: i + 1, source: e })?,
        );
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
