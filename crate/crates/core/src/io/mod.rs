//! File formats and synthetic data.

mod csv_input;
mod csv_output;
mod report;
mod synth;
mod trace_file;

pub use csv_input::{load_csv, parse_csv};
pub use csv_output::{dataset_to_csv, write_csv, write_labels};
pub use report::{write_fixed_points, write_model, FixedPointSummary, KSummary, ModelReport};
pub use synth::{generate_synthetic, parse_component_spec, SyntheticComponent, SyntheticSpec};
pub use trace_file::{read_trace, trace_to_string, write_trace};
