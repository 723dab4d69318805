//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p fixpoint-core --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fixpoint_core::em::{
    em_fit_step, fit_em, initialize_model, parameter_change, responsibilities, CovarianceMeanMode, EmConfig, InitMethod,
};
use fixpoint_core::framework::{
    critical_interval, run_framework, AlphaMode, AlphaSchedule, FrameworkConfig, HMapMode, ScheduleMode,
};
use fixpoint_core::io::{generate_synthetic, parse_component_spec, trace_to_string, SyntheticComponent, SyntheticSpec};
use fixpoint_core::mixture::normal_peak;
use fixpoint_core::rng::SeededRng;
use fixpoint_core::verify::{self, SuiteResult};
use fixpoint_core::Dataset;

const SEED: u64 = 2024;

// Criterion 1.
const GRID_STEP: f64 = 1e-4;
const ORACLE_TRIPLES: usize = 100;
// Criterion 2.
const FD_POINTS: usize = 100;
const FD_REL_TOL: f64 = 1e-4;
// Criterion 3.
const CERT_RUNS: usize = 20;
const LIPSCHITZ_PAIRS: usize = 1000;
const LIPSCHITZ_SLACK: f64 = 1e-12;
// Criterion 4.
const BANACH_STARTS: usize = 10;
const BANACH_TOL: f64 = 1e-12;
const BANACH_MAX_ITER: usize = 100_000;
// Criterion 5.
const CENTER_TOL: f64 = 0.15;
const REFERENCE_EM_TOL: f64 = 1e-10;
// Criterion 6.
const EM_INSTANCES: usize = 100;
const EM_ITERATIONS: usize = 100;
const LOGLIK_SLACK: f64 = 1e-9;
const ROW_SUM_TOL: f64 = 1e-10;
// Criterion 7.
const PREFIX_LEN: usize = 10_000;
const GEOMETRIC_DELTA: f64 = 0.002;
const CAP_APPROACH: f64 = 1e-6;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn from_suites(suites: &[SuiteResult]) -> Self {
        let checks: usize = suites.iter().map(|s| s.checks).sum();
        let failures: Vec<&String> = suites.iter().flat_map(|s| &s.failures).collect();
        Self {
            passed: failures.is_empty() && checks > 0,
            detail: match failures.first() {
                None => format!("{checks} checks"),
                Some(f) => format!("{} of {checks} checks failed, first: {f}", failures.len()),
            },
        }
    }
}

fn criterion(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let in_budget = elapsed <= budget;
    let passed = outcome.passed && in_budget;
    println!(
        "{} [{id}] {name}: {}; {:.2?} (budget {:?}{})",
        if passed { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed,
        budget,
        if in_budget { "" } else { ", exceeded" }
    );
    passed
}

fn density(mu: f64, sigma: f64, x: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

fn endpoint_oracle() -> Outcome {
    let mut rng = SeededRng::new(SEED);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for _ in 0..ORACLE_TRIPLES {
        let mu = -5.0 + 10.0 * rng.uniform();
        let sigma = 0.2 + 2.8 * rng.uniform();
        let alpha = normal_peak(sigma) * (0.01 + 0.98 * rng.uniform());
        let iv = critical_interval(mu, sigma, alpha, AlphaMode::Density).expect("valid triple");
        // Grid from μ − 4σ with an offset so that μ is not a grid point.
        let start = mu - 4.0 * sigma + 0.37 * GRID_STEP;
        let steps = (8.0 * sigma / GRID_STEP) as usize;
        let mut first = None;
        let mut last = None;
        for j in 0..=steps {
            let x = start + j as f64 * GRID_STEP;
            if density(mu, sigma, x) >= alpha {
                first.get_or_insert(x);
                last = Some(x);
            }
        }
        let (Some(lo), Some(hi)) = (first, last) else {
            failures.push(format!("empty scan at mu={mu} sigma={sigma} alpha={alpha}"));
            continue;
        };
        let err = (lo - iv.lower).abs().max((hi - iv.upper).abs());
        worst = worst.max(err);
        if err > GRID_STEP {
            failures.push(format!("mu={mu} sigma={sigma} alpha={alpha}: endpoint error {err:e}"));
        }
    }
    Outcome {
        passed: failures.is_empty(),
        detail: match failures.first() {
            None => format!("{ORACLE_TRIPLES} triples, max endpoint error {worst:.2e} <= {GRID_STEP:e}"),
            Some(f) => format!("{} failures, first: {f}", failures.len()),
        },
    }
}

fn shrinkage() -> Outcome {
    assert_eq!(verify::FD_REL_TOL, FD_REL_TOL);
    let mut rng = SeededRng::new(SEED + 1);
    let suites = [
        verify::interval_shrinkage(&mut rng, FD_POINTS),
        verify::finite_difference(&mut rng, FD_POINTS),
    ];
    Outcome::from_suites(&suites)
}

fn certification(runs: &[fixpoint_core::framework::FrameworkRun]) -> Outcome {
    assert_eq!(verify::LIPSCHITZ_SLACK, LIPSCHITZ_SLACK);
    let maps: Vec<_> = runs.iter().flat_map(|r| r.step_maps.iter().map(|s| s.map)).collect();
    let mut rng = SeededRng::new(SEED + 2);
    let suites = [
        verify::k_range(runs),
        verify::lipschitz(&maps, &mut rng, LIPSCHITZ_PAIRS),
    ];
    let mut out = Outcome::from_suites(&suites);
    out.detail = format!("{} runs, {} maps, {}", runs.len(), maps.len(), out.detail);
    out
}

fn banach(runs: &[fixpoint_core::framework::FrameworkRun]) -> Outcome {
    let maps: Vec<_> = runs.iter().flat_map(verify::certified_chain_maps).collect();
    let mut rng = SeededRng::new(SEED + 3);
    let suite = verify::banach_rate(&maps, &mut rng, BANACH_STARTS, BANACH_TOL, BANACH_MAX_ITER);
    let mut out = Outcome::from_suites(&[suite]);
    out.detail = format!("{} certified maps, {}", maps.len(), out.detail);
    out
}

fn two_cluster_data() -> Dataset {
    let spec = SyntheticSpec {
        components: parse_component_spec("0.5:-2:0.7,0.5:2:0.7").unwrap(),
        n: 500,
        seed: 42,
    };
    generate_synthetic(&spec).unwrap().0
}

fn experiment_config() -> FrameworkConfig {
    FrameworkConfig {
        alpha_mode: AlphaMode::Normalized,
        hmap_mode: HMapMode::Anchored,
        ..Default::default()
    }
}

fn cluster_centers() -> Outcome {
    let data = two_cluster_data();
    let run = run_framework(&data, 2, &experiment_config()).expect("framework run");
    let cfg = EmConfig::default();
    let reference = fit_em(
        &data,
        initialize_model(&data, 2, &cfg).unwrap(),
        &cfg,
        REFERENCE_EM_TOL,
        100_000,
    )
    .expect("reference EM");
    let mut em: Vec<f64> = reference.model.components().iter().map(|c| c.mean()[0]).collect();
    em.sort_by(f64::total_cmp);
    let mut fixed: Vec<f64> = run.reports.iter().map(|r| r.location[0]).collect();
    fixed.sort_by(f64::total_cmp);
    let certified = run.reports.iter().all(|r| r.certified);
    let passed = run.converged
        && certified
        && reference.converged
        && fixed.len() == 2
        && fixed.iter().zip(&em).all(|(f, m)| (f - m).abs() <= CENTER_TOL)
        && em.iter().zip([-2.0, 2.0]).all(|(m, t)| (m - t).abs() <= CENTER_TOL);
    Outcome {
        passed,
        detail: format!("fixed points {fixed:.4?} (certified={certified}), EM means {em:.4?}, tolerance {CENTER_TOL}"),
    }
}

fn random_instance(rng: &mut SeededRng, index: usize) -> (Dataset, usize, EmConfig) {
    let dims = 1 + index % 2;
    let g_true = 1 + rng.index_below(3);
    let raw: Vec<f64> = (0..g_true).map(|_| 0.2 + rng.uniform()).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let head: f64 = weights[..g_true - 1].iter().sum();
    weights[g_true - 1] = 1.0 - head;
    let components = weights
        .iter()
        .map(|&weight| SyntheticComponent {
            weight,
            mean: (0..dims).map(|_| -5.0 + 10.0 * rng.uniform()).collect(),
            sigma: (0..dims).map(|_| 0.3 + 1.7 * rng.uniform()).collect(),
        })
        .collect();
    let spec = SyntheticSpec {
        components,
        n: 60 + rng.index_below(200),
        seed: rng.next_u64(),
    };
    let (data, _) = generate_synthetic(&spec).expect("valid random spec");
    let config = EmConfig {
        covariance_mean_mode: CovarianceMeanMode::Updated,
        seed: index as u64,
        init_method: if index.is_multiple_of(3) {
            InitMethod::RandomPoints
        } else {
            InitMethod::SpreadQuantiles
        },
        ..EmConfig::default()
    };
    (data, 1 + rng.index_below(3), config)
}

fn em_sanity() -> Outcome {
    let mut rng = SeededRng::new(SEED + 4);
    let mut failures = Vec::new();
    let mut iterations = 0;
    let mut worst_drop: f64 = 0.0;
    let mut worst_row: f64 = 0.0;
    for index in 0..EM_INSTANCES {
        let (data, g, config) = random_instance(&mut rng, index);
        let mut model = initialize_model(&data, g, &config).expect("initialisation");
        let mut previous = f64::NEG_INFINITY;
        for it in 0..EM_ITERATIONS {
            let resp = responsibilities(&data, &model).expect("responsibilities");
            for i in 0..resp.n() {
                let err = (resp.row(i).iter().sum::<f64>() - 1.0).abs();
                worst_row = worst_row.max(err);
                if err > ROW_SUM_TOL {
                    failures.push(format!("instance {index} iteration {it}: row {i} sums off by {err:e}"));
                }
            }
            let step = em_fit_step(&data, &model, &config).expect("EM step");
            iterations += 1;
            worst_drop = worst_drop.max(previous - step.loglik);
            if step.loglik < previous - LOGLIK_SLACK {
                failures.push(format!(
                    "instance {index} iteration {it}: loglik {previous} -> {}",
                    step.loglik
                ));
            }
            previous = step.loglik;
            let change = parameter_change(&model, &step.model);
            model = step.model;
            if change < 1e-12 {
                break;
            }
        }
    }
    Outcome {
        passed: failures.is_empty(),
        detail: match failures.first() {
            None => format!(
                "{EM_INSTANCES} instances, {iterations} iterations, largest loglik decrease {worst_drop:.1e}, \
                 largest row-sum error {worst_row:.1e}"
            ),
            Some(f) => format!("{} failures, first: {f}", failures.len()),
        },
    }
}

fn schedule_prefixes() -> Outcome {
    let mut failures = Vec::new();
    let caps = [1.0, 0.999, 0.5, 0.1];
    for cap in caps {
        let terms = AlphaSchedule::new(ScheduleMode::Geometric, GEOMETRIC_DELTA, cap)
            .expect("valid schedule")
            .prefix(PREFIX_LEN);
        let last = terms.last().copied().unwrap_or(f64::NAN);
        let clauses = [
            ("length", terms.len() == PREFIX_LEN),
            ("first term 0", terms[0] == 0.0),
            ("strictly increasing", terms.windows(2).all(|w| w[0] < w[1])),
            ("bounded by C", terms.iter().all(|&a| a < cap)),
            ("approaches C", cap - last <= CAP_APPROACH),
        ];
        for (what, ok) in clauses {
            if !ok {
                failures.push(format!("C={cap}: {what} (last term {last})"));
            }
        }
    }
    Outcome {
        passed: failures.is_empty(),
        detail: match failures.first() {
            None => format!("caps {caps:?}, delta {GEOMETRIC_DELTA}, length {PREFIX_LEN}"),
            Some(f) => format!("{} failures, first: {f}", failures.len()),
        },
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let bytes: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let run = run_framework(&two_cluster_data(), 2, &experiment_config()).expect("framework run");
            let path = dir.path().join(format!("trace{i}.jsonl"));
            std::fs::write(&path, trace_to_string(&run.trace).unwrap()).unwrap();
            std::fs::read(&path).unwrap()
        })
        .collect();
    Outcome {
        passed: bytes[0] == bytes[1] && !bytes[0].is_empty(),
        detail: format!(
            "two traces of {} bytes, identical={}",
            bytes[0].len(),
            bytes[0] == bytes[1]
        ),
    }
}

fn main() -> ExitCode {
    let total = Instant::now();
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= criterion(
        1,
        "critical interval endpoints vs 1e-4 grid scan",
        secs(5),
        endpoint_oracle,
    );
    ok &= criterion(2, "interval shrinkage and finite-difference rate", secs(2), shrinkage);

    let mut runs = Vec::new();
    ok &= criterion(3, "K in [0, 1) and Lipschitz sampling over 20 runs", secs(10), || {
        runs = verify::verification_runs(SEED, CERT_RUNS).expect("verification runs");
        certification(&runs)
    });
    ok &= criterion(4, "Banach uniqueness and rate on certified maps", secs(5), || {
        banach(&runs)
    });
    ok &= criterion(5, "fixed points match EM cluster centers", secs(5), cluster_centers);
    ok &= criterion(
        6,
        "EM log-likelihood monotone, responsibilities normalised",
        secs(30),
        em_sanity,
    );
    ok &= criterion(7, "geometric schedule prefixes", secs(1), schedule_prefixes);
    ok &= criterion(8, "byte-identical traces", secs(10), determinism);

    let elapsed = total.elapsed();
    let in_budget = elapsed <= secs(60);
    println!(
        "{} full suite in {elapsed:.2?} (budget 60s)",
        if ok && in_budget { "PASS" } else { "FAIL" }
    );
    if ok && in_budget {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
