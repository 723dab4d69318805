//! Invariant suites run by `fixpoint verify` and by the acceptance tests.
//!
//! Each suite draws its inputs from a [`SeededRng`], so a seed fully
//! determines the checks performed.

use crate::error::Result;
use crate::framework::{
    banach_fixed_point, critical_interval, interval_shrink_rate, run_framework, AlphaMode, AlphaSchedule,
    FrameworkConfig, FrameworkRun, HMap, ScheduleMode, CONTRACTION_SLACK,
};
use crate::io::{generate_synthetic, SyntheticComponent, SyntheticSpec};
use crate::mixture::{normal_peak, Dataset};
use crate::rng::SeededRng;

/// Absolute slack on the Lipschitz inequality.
pub const LIPSCHITZ_SLACK: f64 = 1e-12;

/// Relative tolerance between the analytic shrink rate and finite differences.
pub const FD_REL_TOL: f64 = 1e-4;

/// Required distance to the cap at the end of a schedule prefix.
pub const CAP_APPROACH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(describe());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Framework runs feeding the K-range, Lipschitz and Banach suites.
    pub runs: usize,
    /// Adds a map with `K = 1` to the Lipschitz suite, which must then fail.
    pub inject_non_contraction: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            runs: 4,
            inject_non_contraction: false,
        }
    }
}

fn component(weight: f64, mean: &[f64], sigma: &[f64]) -> SyntheticComponent {
    SyntheticComponent {
        weight,
        mean: mean.to_vec(),
        sigma: sigma.to_vec(),
    }
}

/// Seeded two-cluster data: one-dimensional for even `index`, two-dimensional
/// for odd.
pub fn verification_data(seed: u64, index: usize) -> Result<Dataset> {
    let components = if index.is_multiple_of(2) {
        vec![component(0.4, &[-3.0], &[1.0]), component(0.6, &[2.5], &[0.8])]
    } else {
        vec![
            component(0.5, &[-2.0, -1.0], &[0.6, 0.9]),
            component(0.5, &[2.0, 1.5], &[0.7, 0.5]),
        ]
    };
    let spec = SyntheticSpec {
        components,
        n: 300,
        seed: seed.wrapping_add(index as u64),
    };
    Ok(generate_synthetic(&spec)?.0)
}

/// `count` default-configuration framework runs on [`verification_data`].
pub fn verification_runs(seed: u64, count: usize) -> Result<Vec<FrameworkRun>> {
    (0..count)
        .map(|i| {
            let data = verification_data(seed, i)?;
            let mut config = FrameworkConfig::default();
            config.em.seed = seed.wrapping_add(i as u64);
            run_framework(&data, 2, &config)
        })
        .collect()
}

/// A translation `x ↦ x + 1` dressed as an H-map, for negative controls.
pub fn non_contraction_fixture() -> HMap {
    let source = crate::framework::CriticalInterval::new(0.0, 1.0, 0.5).expect("valid interval");
    HMap {
        component: 0,
        dimension: 0,
        k: 1.0,
        offset: 1.0,
        source,
        target_intersection: source,
        mode: crate::framework::HMapMode::Anchored,
    }
}

fn random_mu_sigma(rng: &mut SeededRng) -> (f64, f64) {
    (-10.0 + 20.0 * rng.uniform(), 0.1 + 4.9 * rng.uniform())
}

/// Interval lengths strictly decrease and intervals nest along increasing
/// α, in both α modes.
pub fn interval_shrinkage(rng: &mut SeededRng, samples: usize) -> SuiteResult {
    let mut suite = SuiteResult::new("interval shrinkage");
    for _ in 0..samples {
        let (mu, sigma) = random_mu_sigma(rng);
        for mode in [AlphaMode::Density, AlphaMode::Normalized] {
            let top = match mode {
                AlphaMode::Density => normal_peak(sigma),
                AlphaMode::Normalized => 1.0,
            };
            let mut alphas: Vec<f64> = (0..20).map(|_| top * (0.001 + 0.998 * rng.uniform())).collect();
            alphas.sort_by(f64::total_cmp);
            alphas.dedup();
            let intervals: Vec<_> = alphas
                .iter()
                .map(|&a| critical_interval(mu, sigma, a, mode))
                .collect::<Result<_>>()
                .expect("alpha inside the valid range");
            for (w, a) in intervals.windows(2).zip(alphas.windows(2)) {
                suite.check(w[1].length() < w[0].length() && w[0].encloses(&w[1]), || {
                    format!(
                        "{mode:?} mu={mu} sigma={sigma}: alpha {} -> {} gave lengths {} -> {}",
                        a[0],
                        a[1],
                        w[0].length(),
                        w[1].length()
                    )
                });
            }
        }
    }
    suite
}

/// The analytic `∂l/∂α` against a central difference of the interval length.
pub fn finite_difference(rng: &mut SeededRng, samples: usize) -> SuiteResult {
    let mut suite = SuiteResult::new("finite difference");
    for _ in 0..samples {
        let (mu, sigma) = random_mu_sigma(rng);
        let mode = if rng.uniform() < 0.5 {
            AlphaMode::Density
        } else {
            AlphaMode::Normalized
        };
        let top = match mode {
            AlphaMode::Density => normal_peak(sigma),
            AlphaMode::Normalized => 1.0,
        };
        let alpha = top * (0.05 + 0.85 * rng.uniform());
        let h = 1e-5 * alpha;
        let len = |a: f64| critical_interval(mu, sigma, a, mode).map(|iv| iv.length());
        let (Ok(l), Ok(up), Ok(down)) = (len(alpha), len(alpha + h), len(alpha - h)) else {
            suite.check(false, || format!("interval failed at sigma={sigma} alpha={alpha}"));
            continue;
        };
        let numeric = (up - down) / (2.0 * h);
        let analytic = interval_shrink_rate(sigma, alpha, l).unwrap_or(f64::NAN);
        let rel = ((numeric - analytic) / analytic).abs();
        suite.check(analytic < 0.0 && rel <= FD_REL_TOL, || {
            format!("{mode:?} sigma={sigma} alpha={alpha}: analytic {analytic}, numeric {numeric}, rel {rel:e}")
        });
    }
    suite
}

/// Every contraction ratio emitted in the traces lies in `[0, 1)`.
pub fn k_range(runs: &[FrameworkRun]) -> SuiteResult {
    let mut suite = SuiteResult::new("K range");
    for (i, run) in runs.iter().enumerate() {
        for k in run.trace.k_values() {
            suite.check((0.0..1.0).contains(&k), || format!("run {i}: K = {k}"));
        }
        for sm in &run.step_maps {
            let k = sm.map.k;
            suite.check((0.0..1.0).contains(&k), || {
                format!("run {i} step {}: map K = {k}", sm.step)
            });
        }
    }
    suite
}

/// For each map: `K ∈ [0, 1)` and `|H(x₁) − H(x₂)| ≤ K|x₁ − x₂| + 1e-12` on
/// `pairs` random pairs from its source interval.
pub fn lipschitz(maps: &[HMap], rng: &mut SeededRng, pairs: usize) -> SuiteResult {
    let mut suite = SuiteResult::new("Lipschitz sampling");
    for (m, map) in maps.iter().enumerate() {
        suite.check((0.0..1.0).contains(&map.k), || {
            format!(
                "map {m} (component {}, dimension {}): K = {} is not a contraction constant",
                map.component, map.dimension, map.k
            )
        });
        let (lo, len) = (map.source.lower, map.source.length());
        let mut worst: Option<(f64, f64, f64)> = None;
        for _ in 0..pairs {
            let x1 = lo + len * rng.uniform();
            let x2 = lo + len * rng.uniform();
            let excess = (map.apply(x1) - map.apply(x2)).abs() - map.k * (x1 - x2).abs();
            if excess > LIPSCHITZ_SLACK && worst.is_none_or(|w| excess > w.2) {
                worst = Some((x1, x2, excess));
            }
        }
        suite.check(worst.is_none(), || {
            let (x1, x2, e) = worst.unwrap_or_default();
            format!("map {m}: pair ({x1}, {x2}) exceeds K|x1 - x2| by {e:e}")
        });
    }
    suite
}

/// Banach iteration from `starts` random points of each map's source agrees
/// within `2·tol`, with per-step corrections bounded by `Kⁿ|x₁ − x₀| + 1e-12`.
pub fn banach_rate(maps: &[HMap], rng: &mut SeededRng, starts: usize, tol: f64, max_iter: usize) -> SuiteResult {
    let mut suite = SuiteResult::new("Banach rate");
    for (m, map) in maps.iter().enumerate() {
        let mut locations = Vec::with_capacity(starts);
        for _ in 0..starts {
            let x0 = map.source.lower + map.source.length() * rng.uniform();
            match banach_fixed_point(map, x0, tol, max_iter) {
                Ok(out) => {
                    let first = out.steps[0];
                    let mut bound = first;
                    let mut within = true;
                    for s in &out.steps {
                        within &= *s <= bound + CONTRACTION_SLACK;
                        bound *= map.k;
                    }
                    suite.check(within, || format!("map {m} from {x0}: step exceeded the K^n bound"));
                    locations.push(out.location);
                }
                Err(e) => suite.check(false, || format!("map {m} from {x0}: {e}")),
            }
        }
        if let (Some(lo), Some(hi)) = (
            locations.iter().copied().reduce(f64::min),
            locations.iter().copied().reduce(f64::max),
        ) {
            suite.check(hi - lo <= 2.0 * tol, || {
                format!("map {m}: fixed points spread over {:e} > 2 tol", hi - lo)
            });
        }
    }
    suite
}

/// Geometric prefixes start at 0, increase strictly, stay below `C` and end
/// within `1e-6` of it. Additive prefixes start at 0, increase strictly and
/// stay below `C`.
pub fn alpha_sequence(rng: &mut SeededRng, samples: usize, len: usize) -> SuiteResult {
    let mut suite = SuiteResult::new("alpha sequence");
    for _ in 0..samples {
        let cap = 0.05 + 0.95 * rng.uniform();
        let delta = 0.0015 + 0.0015 * rng.uniform();
        let terms = match AlphaSchedule::new(ScheduleMode::Geometric, delta, cap) {
            Ok(s) => s.prefix(len),
            Err(e) => {
                suite.check(false, || format!("geometric delta={delta} cap={cap}: {e}"));
                continue;
            }
        };
        let describe = |what: &str| format!("geometric delta={delta} cap={cap}: {what}");
        suite.check(terms.len() == len, || describe(&format!("only {} terms", terms.len())));
        suite.check(terms.first() == Some(&0.0), || describe("first term is not 0"));
        suite.check(terms.windows(2).all(|w| w[0] < w[1]), || {
            describe("not strictly increasing")
        });
        suite.check(terms.iter().all(|&a| a < cap), || describe("reached the cap"));
        let last = terms.last().copied().unwrap_or(0.0);
        suite.check(cap - last <= CAP_APPROACH_TOL, || {
            describe(&format!("ends {} below the cap", cap - last))
        });

        let step = 0.001 + 0.1 * rng.uniform();
        let terms = AlphaSchedule::new(ScheduleMode::Additive, step, cap)
            .map(|s| s.prefix(len))
            .unwrap_or_default();
        suite.check(
            terms.first() == Some(&0.0) && terms.windows(2).all(|w| w[0] < w[1]) && terms.iter().all(|&a| a < cap),
            || format!("additive step={step} cap={cap}: clause violated"),
        );
    }
    suite
}

/// Runs every suite.
pub fn run_suites(options: &VerifyOptions) -> Result<Vec<SuiteResult>> {
    let mut rng = SeededRng::new(options.seed);
    let runs = verification_runs(options.seed, options.runs)?;
    let mut maps: Vec<HMap> = runs.iter().flat_map(|r| r.step_maps.iter().map(|s| s.map)).collect();
    if options.inject_non_contraction {
        maps.push(non_contraction_fixture());
    }
    let certified: Vec<HMap> = runs.iter().flat_map(certified_chain_maps).collect();
    let banach = FrameworkConfig::default();
    Ok(vec![
        interval_shrinkage(&mut rng, 100),
        finite_difference(&mut rng, 100),
        k_range(&runs),
        lipschitz(&maps, &mut rng, 1000),
        banach_rate(&certified, &mut rng, 10, banach.banach_tol, banach.banach_max_iter),
        alpha_sequence(&mut rng, 20, 10_000),
    ])
}

/// Chain maps of the components whose fixed points were certified.
pub fn certified_chain_maps(run: &FrameworkRun) -> Vec<HMap> {
    run.chain_maps
        .iter()
        .filter(|m| run.reports.iter().any(|r| r.component == m.component && r.certified))
        .copied()
        .collect()
}
