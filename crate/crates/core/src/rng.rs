//! The seeded generator behind synthetic datasets and random initialisation.
//!
//! Algorithm `pcg64-xsl-rr/v1`:
//!
//! * core generator: PCG XSL-RR 128/64 (`rand_pcg::Pcg64`) constructed with
//!   `state = seed as u128` and the fixed stream [`STREAM`];
//! * uniform: `((next_u64 >> 11) + 0.5) · 2⁻⁵³`, strictly inside `(0, 1)`;
//! * standard normal: inverse-transform of one uniform through the normal
//!   quantile function (no pairing, no rejection);
//! * index below `n`: `⌊uniform · n⌋`.
//!
//! Every draw consumes exactly one `u64`, so sequences are easy to reproduce
//! in other languages.

use rand_core::Rng;
use rand_pcg::Pcg64;
use statrs::distribution::{ContinuousCDF, Normal};

pub const ALGORITHM: &str = "pcg64-xsl-rr/v1";

/// Stream selector (increment) for the 128-bit LCG.
pub const STREAM: u128 = 0x0a02_bdbf_7bb3_c0a7_ac28_fa16_a64a_bf96;

const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: Pcg64,
    normal: Normal,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Pcg64::new(u128::from(seed), STREAM),
            normal: Normal::standard(),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * TWO_POW_NEG_53
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u = self.uniform();
        self.normal.inverse_cdf(u)
    }

    pub fn index_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }
}
