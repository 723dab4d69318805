//! Per-iteration record of a framework run, in the shape written to disk.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::driver::FrameworkConfig;

pub const TRACE_SCHEMA: &str = "fixpoint-trace";
pub const TRACE_VERSION: u32 = 1;

/// First line of a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub schema: String,
    pub version: u32,
    pub rng: String,
    pub seed: u64,
    pub g0: usize,
    pub n: usize,
    pub dims: usize,
    pub config: FrameworkConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComponentFlags {
    /// Still contracting.
    pub active: bool,
    /// Stopped by the diameter rule or by losing its interior.
    pub converged: bool,
    /// Stopped because consecutive intervals did not intersect.
    pub disjoint: bool,
    /// Contracted in at least one dimension during this step.
    pub contracted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    /// Index in the initial model; stable across drops.
    pub component: usize,
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Marginal standard deviations.
    pub sigma: Vec<f64>,
    /// Critical box as `[lower, upper]` per dimension.
    #[serde(rename = "box")]
    pub region: Vec<[f64; 2]>,
    /// Contraction ratio per dimension; `null` where no map was built.
    pub k: Vec<Option<f64>>,
    pub flags: ComponentFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Collapsed,
    LowWeight,
    EmptyBox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedRecord {
    pub component: usize,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub alpha: f64,
    pub cap: f64,
    pub loglik: f64,
    pub components: Vec<ComponentRecord>,
    pub dropped: Vec<DroppedRecord>,
    pub converged: bool,
    pub schedule_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameworkTrace {
    pub meta: TraceMeta,
    pub records: Vec<TraceRecord>,
}

impl FrameworkTrace {
    /// Strictly increasing α and contiguous step indices from 0.
    pub fn check_invariants(&self) -> Result<()> {
        for (i, r) in self.records.iter().enumerate() {
            if r.step != i {
                return Err(Error::InvalidArgument(format!("record {i} has step {}", r.step)));
            }
        }
        for w in self.records.windows(2) {
            if !(w[0].alpha < w[1].alpha) {
                return Err(Error::InvalidArgument(format!(
                    "alpha not increasing at step {}: {} -> {}",
                    w[1].step, w[0].alpha, w[1].alpha
                )));
            }
        }
        Ok(())
    }

    /// Every contraction ratio recorded in the trace.
    pub fn k_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.records
            .iter()
            .flat_map(|r| r.components.iter())
            .flat_map(|c| c.k.iter().flatten().copied())
    }
}
