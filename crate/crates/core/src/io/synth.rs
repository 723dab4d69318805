use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::{Dataset, WEIGHT_SUM_TOL};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Per-dimension standard deviation.
    pub sigma: Vec<f64>,
}

/// Gaussian mixture with diagonal covariances to sample from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub components: Vec<SyntheticComponent>,
    pub n: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn dims(&self) -> usize {
        self.components.first().map_or(0, |c| c.mean.len())
    }

    pub fn check(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidArgument(m));
        if self.n == 0 {
            return invalid("sample count must be at least 1".into());
        }
        let dims = self.dims();
        if dims == 0 {
            return invalid("need at least one component with a non-empty mean".into());
        }
        for (g, c) in self.components.iter().enumerate() {
            if c.mean.len() != dims || c.sigma.len() != dims {
                return invalid(format!("component {g} does not have {dims} dimensions"));
            }
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return invalid(format!("component {g} weight must be positive"));
            }
            if c.mean.iter().any(|m| !m.is_finite()) || c.sigma.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                return invalid(format!("component {g} needs finite means and positive sigmas"));
            }
        }
        let sum: f64 = self.components.iter().map(|c| c.weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return invalid(format!("weights sum to {sum}, not 1"));
        }
        Ok(())
    }
}

/// Parses the one-dimensional shorthand `weight:mean:sigma[,…]`.
pub fn parse_component_spec(text: &str) -> Result<Vec<SyntheticComponent>> {
    text.split(',')
        .map(|part| {
            let fields: Vec<&str> = part.trim().split(':').collect();
            if fields.len() != 3 {
                return Err(Error::InvalidArgument(format!(
                    "component {part:?} is not weight:mean:sigma"
                )));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("not a number: {s:?}")))
            };
            Ok(SyntheticComponent {
                weight: num(fields[0])?,
                mean: vec![num(fields[1])?],
                sigma: vec![num(fields[2])?],
            })
        })
        .collect()
}

/// Draws `n` labelled points. For each point one uniform picks the
/// component by cumulative weight, then one standard normal per dimension
/// gives the coordinates.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, Vec<usize>)> {
    spec.check()?;
    let mut rng = SeededRng::new(spec.seed);
    let dims = spec.dims();
    let mut points = Vec::with_capacity(spec.n * dims);
    let mut labels = Vec::with_capacity(spec.n);
    let last = spec.components.len() - 1;
    for _ in 0..spec.n {
        let u = rng.uniform();
        let mut acc = 0.0;
        let mut label = last;
        for (g, c) in spec.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                label = g;
                break;
            }
        }
        let c = &spec.components[label];
        for e in 0..dims {
            points.push(c.mean[e] + c.sigma[e] * rng.standard_normal());
        }
        labels.push(label);
    }
    Ok((Dataset::new(points, dims)?, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(n: usize, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            components: parse_component_spec("0.5:-2:0.7,0.5:2:0.7").unwrap(),
            n,
            seed,
        }
    }

    #[test]
    fn single_point() {
        let spec = SyntheticSpec {
            components: parse_component_spec("1:0:1").unwrap(),
            n: 1,
            seed: 5,
        };
        let (d, labels) = generate_synthetic(&spec).unwrap();
        assert_eq!(d.n(), 1);
        assert!(d.row(0)[0].is_finite());
        assert_eq!(labels, vec![0]);
    }

    #[test]
    fn deterministic() {
        let a = generate_synthetic(&pair(100, 42)).unwrap();
        let b = generate_synthetic(&pair(100, 42)).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&pair(100, 43)).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn label_fraction_near_weight() {
        let (_, labels) = generate_synthetic(&pair(500, 42)).unwrap();
        let frac = labels.iter().filter(|&&l| l == 0).count() as f64 / 500.0;
        assert!((frac - 0.5).abs() <= 0.07, "{frac}");
    }

    #[test]
    fn invalid_specs() {
        assert!(pair(0, 1).check().is_err());
        let mut bad = pair(10, 1);
        bad.components[0].weight = 0.6;
        assert!(bad.check().is_err());
        assert!(parse_component_spec("0.5:1").is_err());
        assert!(parse_component_spec("0.5:x:1").is_err());
        let mut neg = pair(10, 1);
        neg.components[1].sigma[0] = 0.0;
        assert!(neg.check().is_err());
    }

    #[test]
    fn multi_dimensional() {
        let spec = SyntheticSpec {
            components: vec![
                SyntheticComponent {
                    weight: 0.25,
                    mean: vec![0.0, 10.0],
                    sigma: vec![1.0, 0.1],
                },
                SyntheticComponent {
                    weight: 0.75,
                    mean: vec![5.0, -5.0],
                    sigma: vec![0.5, 2.0],
                },
            ],
            n: 50,
            seed: 2,
        };
        let (d, labels) = generate_synthetic(&spec).unwrap();
        assert_eq!((d.n(), d.dims(), labels.len()), (50, 2, 50));
    }
}
