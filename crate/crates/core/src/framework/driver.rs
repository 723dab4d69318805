//! The clustering loop: EM updates interleaved with a growing α threshold,
//! per-component critical boxes, contraction maps between consecutive boxes
//! and fixed-point extraction once the boxes stop shrinking.

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::em::{em_fit_step, initialize_model, log_likelihood, EmConfig};
use crate::error::{Error, Result};
use crate::framework::hmap::{banach_fixed_point, build_h_map, contraction_ratio, HMap, HMapMode};
use crate::framework::interval::{critical_interval, has_interior, AlphaMode, CriticalBox, INTERIOR_TOL};
use crate::framework::schedule::{AlphaSchedule, ScheduleMode};
use crate::framework::trace::{
    ComponentFlags, ComponentRecord, DropReason, DroppedRecord, FrameworkTrace, TraceMeta, TraceRecord, TRACE_SCHEMA,
    TRACE_VERSION,
};
use crate::mixture::{normal_peak, Dataset, MixtureModel};

/// Components lighter than this are removed from the mixture.
pub const DROP_WEIGHT: f64 = 1e-6;

/// Density-mode cap as a fraction of the smallest marginal peak density.
pub const DENSITY_CAP_FRACTION: f64 = 0.95;

/// Default diameter tolerance relative to the data range per dimension.
pub const TOL_DIAM_RELATIVE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameworkConfig {
    pub em: EmConfig,
    pub schedule_mode: ScheduleMode,
    pub delta_alpha: f64,
    /// Schedule cap in normalized mode. Density mode recomputes it every
    /// iteration from the current component spreads.
    pub cap: f64,
    pub alpha_mode: AlphaMode,
    pub hmap_mode: HMapMode,
    /// Absolute tolerance on per-dimension box length changes. `None` uses
    /// [`TOL_DIAM_RELATIVE`] times the data range of each dimension.
    pub tol_diam: Option<f64>,
    pub banach_tol: f64,
    pub banach_max_iter: usize,
    pub max_iter: usize,
}

impl Default for FrameworkConfig {
    fn default() -> Self {
        Self {
            em: EmConfig::default(),
            schedule_mode: ScheduleMode::Geometric,
            delta_alpha: 0.1,
            cap: 0.999,
            alpha_mode: AlphaMode::Normalized,
            hmap_mode: HMapMode::Anchored,
            tol_diam: None,
            banach_tol: 1e-12,
            banach_max_iter: 100_000,
            max_iter: 1000,
        }
    }
}

impl FrameworkConfig {
    pub fn check(&self) -> Result<()> {
        self.em.check()?;
        AlphaSchedule::new(self.schedule_mode, self.delta_alpha, self.cap)?;
        if self.alpha_mode == AlphaMode::Normalized && self.cap > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "normalized cap must lie in (0, 1], got {}",
                self.cap
            )));
        }
        if let Some(t) = self.tol_diam {
            if !(t > 0.0) {
                return Err(Error::InvalidArgument(format!("tol_diam must be positive, got {t}")));
            }
        }
        if !(self.banach_tol > 0.0) {
            return Err(Error::InvalidArgument("banach tolerance must be positive".into()));
        }
        if self.max_iter == 0 || self.banach_max_iter == 0 {
            return Err(Error::InvalidArgument("iteration limits must be positive".into()));
        }
        Ok(())
    }

    fn diam_tolerances(&self, data: &Dataset) -> Vec<f64> {
        data.bounds()
            .iter()
            .map(|&(lo, hi)| match self.tol_diam {
                Some(t) => t,
                None if hi > lo => TOL_DIAM_RELATIVE * (hi - lo),
                None => TOL_DIAM_RELATIVE,
            })
            .collect()
    }
}

/// Certified cluster center of one surviving component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub component: usize,
    pub location: Vec<f64>,
    pub per_dimension_k_history: Vec<Vec<f64>>,
    /// Framework step at which the component stopped contracting.
    pub iterations_to_converge: usize,
    /// Banach iterations spent per dimension (0 where no map exists).
    pub banach_iterations: Vec<usize>,
    pub certified: bool,
    pub disjoint: bool,
}

/// An H-map together with the framework step that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMap {
    pub step: usize,
    pub map: HMap,
}

#[derive(Debug, Clone)]
pub struct FrameworkRun {
    pub model: MixtureModel,
    pub trace: FrameworkTrace,
    pub reports: Vec<FixedPointReport>,
    /// Every per-step map, in step then component then dimension order.
    pub step_maps: Vec<StepMap>,
    /// Per surviving component and dimension, the composition of all its
    /// step maps. These are the maps whose fixed points are reported.
    pub chain_maps: Vec<HMap>,
    pub converged: bool,
    pub schedule_exhausted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TrackState {
    Active,
    Converged(usize),
    Halted(usize),
}

struct Track {
    id: usize,
    region: CriticalBox,
    chain: Vec<Option<HMap>>,
    k_history: Vec<Vec<f64>>,
    disjoint_at: Vec<Option<f64>>,
    state: TrackState,
}

impl Track {
    fn record(&self, model: &MixtureModel, pos: usize, k: Vec<Option<f64>>, contracted: bool) -> ComponentRecord {
        let c = model.component(pos);
        ComponentRecord {
            component: self.id,
            weight: c.weight(),
            mean: c.mean().to_vec(),
            sigma: c.sigmas(),
            region: self.region.intervals.iter().map(|iv| [iv.lower, iv.upper]).collect(),
            k,
            flags: ComponentFlags {
                active: self.state == TrackState::Active,
                converged: matches!(self.state, TrackState::Converged(_)),
                disjoint: matches!(self.state, TrackState::Halted(_)),
                contracted,
            },
        }
    }
}

fn density_cap(model: &MixtureModel, keep: &[usize]) -> f64 {
    let min_peak = keep
        .iter()
        .flat_map(|&g| {
            let c = model.component(g);
            (0..c.dims()).map(move |e| normal_peak(c.sigma(e)))
        })
        .fold(f64::INFINITY, f64::min);
    DENSITY_CAP_FRACTION * min_peak
}

/// Runs the fixed-point clustering loop from a `g0`-component start.
///
/// Stops when no component is still contracting, when the α schedule is
/// exhausted, or after `max_iter` iterations (`converged = false`). If every
/// component is dropped the partial trace is returned inside
/// [`Error::AllComponentsDropped`].
pub fn run_framework(data: &Dataset, g0: usize, config: &FrameworkConfig) -> Result<FrameworkRun> {
    config.check()?;
    let dims = data.dims();
    let tol = config.diam_tolerances(data);
    let mut model = initialize_model(data, g0, &config.em)?;
    let all: Vec<usize> = (0..g0).collect();
    let initial_cap = match config.alpha_mode {
        AlphaMode::Normalized => config.cap,
        AlphaMode::Density => density_cap(&model, &all),
    };
    let mut schedule = AlphaSchedule::new(config.schedule_mode, config.delta_alpha, initial_cap)?;

    let hull = data.bounds();
    let mut tracks = (0..g0)
        .map(|g| {
            let region = CriticalBox::from_bounds(g, &hull, 0.0)?;
            let state = if has_interior(&region) {
                TrackState::Active
            } else {
                TrackState::Converged(0)
            };
            Ok(Track {
                id: g,
                region,
                chain: vec![None; dims],
                k_history: vec![Vec::new(); dims],
                disjoint_at: vec![None; dims],
                state,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut trace = FrameworkTrace {
        meta: TraceMeta {
            schema: TRACE_SCHEMA.to_string(),
            version: TRACE_VERSION,
            rng: crate::rng::ALGORITHM.to_string(),
            seed: config.em.seed,
            g0,
            n: data.n(),
            dims,
            config: config.clone(),
        },
        records: Vec::new(),
    };
    let all_settled = |tracks: &[Track]| tracks.iter().all(|t| t.state != TrackState::Active);
    trace.records.push(TraceRecord {
        step: 0,
        alpha: 0.0,
        cap: initial_cap,
        loglik: log_likelihood(data, &model)?,
        components: tracks
            .iter()
            .enumerate()
            .map(|(pos, t)| t.record(&model, pos, vec![None; dims], false))
            .collect(),
        dropped: Vec::new(),
        converged: all_settled(&tracks),
        schedule_exhausted: false,
    });

    let mut step_maps = Vec::new();
    let mut converged = all_settled(&tracks);
    let mut exhausted = false;
    let mut step = 0;

    while !converged && step < config.max_iter {
        let em = em_fit_step(data, &model, &config.em)?;
        let mut dropped = Vec::new();
        for pos in 0..tracks.len() {
            if em.collapsed.contains(&pos) {
                dropped.push((pos, DropReason::Collapsed));
            } else if em.model.component(pos).weight() < DROP_WEIGHT {
                dropped.push((pos, DropReason::LowWeight));
            }
        }
        let survivors: Vec<usize> = (0..tracks.len())
            .filter(|p| !dropped.iter().any(|(d, _)| d == p))
            .collect();
        if survivors.is_empty() {
            return Err(Error::AllComponentsDropped {
                step: step + 1,
                trace: Box::new(trace),
            });
        }

        let cap = match config.alpha_mode {
            AlphaMode::Normalized => config.cap,
            AlphaMode::Density => density_cap(&em.model, &survivors),
        };
        schedule = match schedule.with_cap(cap).next() {
            Ok(s) => s,
            Err(Error::ScheduleExhausted) => {
                exhausted = true;
                break;
            }
            Err(e) => return Err(e),
        };
        step += 1;
        let alpha = schedule.current();

        let mut ks = vec![vec![None; dims]; tracks.len()];
        let mut contracted = vec![false; tracks.len()];
        for &pos in &survivors {
            let track = &mut tracks[pos];
            if track.state != TrackState::Active {
                continue;
            }
            let comp = em.model.component(pos);
            let next = (0..dims)
                .map(|e| {
                    Ok(critical_interval(comp.mean()[e], comp.sigma(e), alpha, config.alpha_mode)?.at(track.id, e))
                })
                .collect::<Result<Vec<_>>>()?;
            if next.iter().any(|iv| iv.empty) {
                dropped.push((pos, DropReason::EmptyBox));
                continue;
            }

            let mut halted = false;
            let mut intervals = Vec::with_capacity(dims);
            for (e, next_iv) in next.iter().enumerate() {
                let prev = track.region.intervals[e];
                let mut kept = prev;
                kept.alpha = alpha;
                if prev.length() <= INTERIOR_TOL {
                    intervals.push(kept);
                    continue;
                }
                match contraction_ratio(&prev, next_iv) {
                    Err(Error::DisjointIntervals) => {
                        track.disjoint_at[e] = Some(next_iv.midpoint());
                        halted = true;
                        intervals.push(kept);
                    }
                    Err(e) => return Err(e),
                    Ok(k) if k < 1.0 => {
                        let map = build_h_map(&prev, next_iv, config.hmap_mode)?;
                        track.chain[e] = Some(match &track.chain[e] {
                            Some(chain) => map.after(chain)?,
                            None => map,
                        });
                        track.k_history[e].push(map.k);
                        ks[pos][e] = Some(map.k);
                        contracted[pos] = true;
                        step_maps.push(StepMap { step, map });
                        intervals.push(map.target_intersection);
                    }
                    Ok(_) => intervals.push(kept),
                }
            }
            let region = CriticalBox::new(track.id, intervals)?;
            let settled = region
                .lengths()
                .iter()
                .zip(track.region.lengths())
                .zip(&tol)
                .all(|((new, old), t)| (new - old).abs() < *t);
            let interior = has_interior(&region);
            track.region = region;
            track.state = if halted {
                TrackState::Halted(step)
            } else if (contracted[pos] && settled) || !interior {
                TrackState::Converged(step)
            } else {
                TrackState::Active
            };
        }

        let dropped_records: Vec<DroppedRecord> = dropped
            .iter()
            .map(|&(pos, reason)| DroppedRecord {
                component: tracks[pos].id,
                reason,
            })
            .collect();
        let keep: Vec<usize> = (0..tracks.len())
            .filter(|p| !dropped.iter().any(|(d, _)| d == p))
            .collect();
        if keep.is_empty() {
            return Err(Error::AllComponentsDropped {
                step,
                trace: Box::new(trace),
            });
        }
        model = if keep.len() == tracks.len() {
            em.model
        } else {
            em.model.retain_renormalized(&keep)?
        };
        let mut remaining = Vec::with_capacity(keep.len());
        let mut remaining_ks = Vec::with_capacity(keep.len());
        let mut remaining_contracted = Vec::with_capacity(keep.len());
        for (pos, track) in tracks.into_iter().enumerate() {
            if keep.contains(&pos) {
                remaining.push(track);
                remaining_ks.push(std::mem::take(&mut ks[pos]));
                remaining_contracted.push(contracted[pos]);
            }
        }
        tracks = remaining;
        if !dropped_records.is_empty() {
            debug!("step {step}: dropped {:?}", dropped_records);
        }

        converged = all_settled(&tracks);
        let loglik = if dropped_records.is_empty() {
            em.loglik
        } else {
            log_likelihood(data, &model)?
        };
        trace.records.push(TraceRecord {
            step,
            alpha,
            cap,
            loglik,
            components: tracks
                .iter()
                .enumerate()
                .map(|(pos, t)| t.record(&model, pos, remaining_ks[pos].clone(), remaining_contracted[pos]))
                .collect(),
            dropped: dropped_records,
            converged,
            schedule_exhausted: false,
        });
        debug!(
            "step {step}: alpha={alpha:.6} loglik={loglik:.6} active={}",
            tracks.iter().filter(|t| t.state == TrackState::Active).count()
        );
    }

    if exhausted {
        converged = true;
        if let Some(last) = trace.records.last_mut() {
            last.schedule_exhausted = true;
            last.converged = true;
        }
    }

    let mut reports = Vec::with_capacity(tracks.len());
    let mut chain_maps = Vec::new();
    for track in &tracks {
        let mut location = Vec::with_capacity(dims);
        let mut banach_iterations = Vec::with_capacity(dims);
        // A component cut off by the iteration limit has no settled region.
        let mut certified = exhausted || track.state != TrackState::Active;
        for e in 0..dims {
            let iv = track.region.intervals[e];
            if let Some(x) = track.disjoint_at[e] {
                location.push(x);
                banach_iterations.push(0);
                certified = false;
            } else if let Some(chain) = track.chain[e] {
                chain_maps.push(chain);
                match banach_fixed_point(
                    &chain,
                    chain.source.midpoint(),
                    config.banach_tol,
                    config.banach_max_iter,
                ) {
                    Ok(out) => {
                        let slack = 10.0 * config.banach_tol + 1e-12 * out.location.abs().max(1.0);
                        certified &= out.contraction_certified && iv.contains(out.location, slack);
                        location.push(out.location);
                        banach_iterations.push(out.iterations);
                    }
                    Err(Error::NoConvergence { iterations }) => {
                        location.push(chain.algebraic_fixed_point());
                        banach_iterations.push(iterations);
                        certified = false;
                    }
                    Err(e) => return Err(e),
                }
            } else {
                // No map was ever built: only a single-point region pins
                // down its fixed point.
                location.push(iv.midpoint());
                banach_iterations.push(0);
                certified &= iv.length() <= INTERIOR_TOL;
            }
        }
        let iterations_to_converge = match track.state {
            TrackState::Converged(s) | TrackState::Halted(s) => s,
            TrackState::Active => step,
        };
        reports.push(FixedPointReport {
            component: track.id,
            location,
            per_dimension_k_history: track.k_history.clone(),
            iterations_to_converge,
            banach_iterations,
            certified,
            disjoint: matches!(track.state, TrackState::Halted(_)),
        });
    }
    info!(
        "framework finished after {step} steps: converged={converged} exhausted={exhausted} components={}",
        model.g_count()
    );

    Ok(FrameworkRun {
        model,
        trace,
        reports,
        step_maps,
        chain_maps,
        converged,
        schedule_exhausted: exhausted,
    })
}
