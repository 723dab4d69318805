//! Model-based clustering in which cluster centers are the fixed points of
//! contraction maps between shrinking superlevel regions of a Gaussian
//! mixture fitted by EM.
//!
//! * [`mixture`]: datasets, Gaussian components, mixture densities.
//! * [`em`]: responsibilities, M-step, log-likelihood, initialisation.
//! * [`framework`]: α schedules, critical intervals and boxes, H-maps,
//!   Banach iteration and the [`run_framework`] driver.
//! * [`io`]: CSV input, seeded synthetic data, trace and report files.
//! * [`verify`]: runnable invariant suites.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod em;
pub mod error;
pub mod framework;
pub mod io;
pub mod mixture;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use framework::run_framework;
pub use mixture::{Dataset, GaussianComponent, MixtureModel};
