use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleMode {
    /// `α' = α + Δα`; stops once the cap would be reached.
    Additive,
    /// `α' = C − (C − α)(1 − Δα)`, which approaches `C` from below.
    #[default]
    Geometric,
}

/// A strictly increasing threshold sequence starting at zero and bounded
/// by a cap `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSchedule {
    mode: ScheduleMode,
    delta: f64,
    cap: f64,
    current: f64,
    step_index: usize,
}

impl AlphaSchedule {
    pub fn new(mode: ScheduleMode, delta: f64, cap: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step size must be positive, got {delta}"
            )));
        }
        if mode == ScheduleMode::Geometric && delta >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "geometric step size must lie in (0, 1), got {delta}"
            )));
        }
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::InvalidArgument(format!("cap must be positive, got {cap}")));
        }
        Ok(Self {
            mode,
            delta,
            cap,
            current: 0.0,
            step_index: 0,
        })
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Same position in the sequence under a different cap.
    pub fn with_cap(&self, cap: f64) -> Self {
        Self { cap, ..*self }
    }

    /// The following term. Fails with [`Error::ScheduleExhausted`] when the
    /// next term would reach the cap or would not be strictly larger in
    /// floating point.
    pub fn next(&self) -> Result<Self> {
        if !(self.current < self.cap) {
            return Err(Error::ScheduleExhausted);
        }
        let next = match self.mode {
            ScheduleMode::Additive => self.current + self.delta,
            ScheduleMode::Geometric => self.cap - (self.cap - self.current) * (1.0 - self.delta),
        };
        if !(next > self.current && next < self.cap) {
            return Err(Error::ScheduleExhausted);
        }
        Ok(Self {
            current: next,
            step_index: self.step_index + 1,
            ..*self
        })
    }

    /// Up to `len` terms starting from the current one; shorter if the
    /// schedule exhausts.
    pub fn prefix(&self, len: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(len);
        let mut s = *self;
        while out.len() < len {
            out.push(s.current);
            match s.next() {
                Ok(n) => s = n,
                Err(_) => break,
            }
        }
        out
    }
}

pub fn next_alpha(schedule: &AlphaSchedule) -> Result<AlphaSchedule> {
    schedule.next()
}
