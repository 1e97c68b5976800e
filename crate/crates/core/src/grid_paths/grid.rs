use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `0 = t_0 < t_1 < … < t_K = T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

/// Builds a uniform grid with `steps` intervals on `[0, horizon]`.
pub fn make_grid(horizon: f64, steps: usize) -> Result<TimeGrid> {
    TimeGrid::new(horizon, steps)
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "step count must be at least 2, got {steps}"
            )));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn n_nodes(&self) -> usize {
        self.steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Node `t_i`; the last node is `T` exactly.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i >= self.steps {
            self.horizon
        } else {
            self.horizon * i as f64 / self.steps as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.node(i)).collect()
    }

    /// Index of the first node `t_i >= t`, or `steps + 1` when `t > T`.
    ///
    /// This is the snapping rule used for random times: a node belongs to
    /// "after τ" iff its index is at least `snap_up(τ)`.
    pub fn snap_up(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        if t > self.horizon {
            return self.steps + 1;
        }
        let mut i = ((t / self.horizon) * self.steps as f64).ceil() as usize;
        i = i.min(self.steps);
        while i > 0 && self.node(i - 1) >= t {
            i -= 1;
        }
        while i < self.steps && self.node(i) < t {
            i += 1;
        }
        i
    }

    /// Index of the node equal to `t` up to a relative `1e-9` slack.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = t / self.horizon * self.steps as f64;
        let i = x.round();
        if i < 0.0 || i > self.steps as f64 {
            return None;
        }
        let i = i as usize;
        ((self.node(i) - t).abs() <= 1e-9 * self.horizon).then_some(i)
    }

    /// Grid keeping every `stride`-th node.
    pub fn coarsen(&self, stride: usize) -> Result<TimeGrid> {
        if stride == 0 || self.steps % stride != 0 {
            return Err(Error::InvalidGrid(format!(
                "stride {stride} does not divide {} steps",
                self.steps
            )));
        }
        TimeGrid::new(self.horizon, self.steps / stride)
    }
}
