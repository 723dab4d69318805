//! α-critical regions, contraction maps and the clustering driver built on
//! them.

pub mod driver;
pub mod hmap;
pub mod interval;
pub mod schedule;
pub mod trace;

pub use driver::{run_framework, FixedPointReport, FrameworkConfig, FrameworkRun, StepMap};
pub use hmap::{banach_fixed_point, build_h_map, contraction_ratio, BanachOutcome, HMap, HMapMode, CONTRACTION_SLACK};
pub use interval::{
    critical_box, critical_interval, has_interior, interval_shrink_rate, AlphaMode, CriticalBox, CriticalInterval,
};
pub use schedule::{next_alpha, AlphaSchedule, ScheduleMode};
pub use trace::{ComponentRecord, FrameworkTrace, TraceMeta, TraceRecord};
