use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of intervals per protocol duration.
pub const DEFAULT_INTERVALS: usize = 4096;

/// Uniform time grid over `[start, end]` with `intervals + 1` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub intervals: usize,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, intervals: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || end <= start {
            return Err(Error::Contract(format!(
                "grid needs start < end, got [{start}, {end}]"
            )));
        }
        if intervals == 0 {
            return Err(Error::Contract("grid needs at least one interval".into()));
        }
        Ok(Self {
            start,
            end,
            intervals,
        })
    }

    /// `[0, total_time]` with [`DEFAULT_INTERVALS`].
    pub fn over(total_time: f64) -> Result<Self> {
        Self::new(0.0, total_time, DEFAULT_INTERVALS)
    }

    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / self.intervals as f64
    }

    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// i-th grid point; the last point is exactly `end`.
    pub fn point(&self, i: usize) -> f64 {
        if i == self.intervals {
            self.end
        } else {
            self.start + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}
