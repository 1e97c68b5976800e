use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_paths::{GridProcess, PathEnsemble};

/// Deterministic integrand `m(s) = level + slope · s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub level: f64,
    #[serde(default)]
    pub slope: f64,
}

impl Profile {
    pub const UNIT: Profile = Profile {
        level: 1.0,
        slope: 0.0,
    };

    #[inline]
    pub fn at(&self, s: f64) -> f64 {
        self.level + self.slope * s
    }
}

/// `M = Σ_c w_c ∫ m(s) dW^c_s` for a deterministic profile `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalMartingale {
    pub weights: Vec<f64>,
    pub profile: Profile,
}

impl LocalMartingale {
    /// `M = W^c`.
    pub fn brownian(comp: usize) -> Self {
        let mut weights = vec![0.0; comp + 1];
        weights[comp] = 1.0;
        Self {
            weights,
            profile: Profile::UNIT,
        }
    }

    /// `M = ∫ m dW^1`.
    pub fn integral(profile: Profile) -> Self {
        Self {
            weights: vec![1.0],
            profile,
        }
    }

    /// Number of driver components `M` reads.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Volatility of `M` against `W^c` at time `t`.
    #[inline]
    pub fn vol(&self, comp: usize, t: f64) -> f64 {
        self.weights.get(comp).copied().unwrap_or(0.0) * self.profile.at(t)
    }

    /// Rate of `⟨M, M⟩`.
    pub fn bracket_rate(&self, t: f64) -> f64 {
        let m = self.profile.at(t);
        self.weights.iter().map(|w| w * w).sum::<f64>() * m * m
    }

    fn single_unit_component(&self) -> Option<usize> {
        if self.profile != Profile::UNIT {
            return None;
        }
        let mut hit = None;
        for (c, &w) in self.weights.iter().enumerate() {
            match w {
                0.0 => {}
                1.0 if hit.is_none() => hit = Some(c),
                _ => return None,
            }
        }
        hit
    }

    /// `M` along every path, by left-point sums.
    pub fn path_values(&self, ensemble: &PathEnsemble) -> Result<GridProcess> {
        if self.weights.is_empty() {
            return Err(Error::InvalidArgument("local martingale needs at least one weight".into()));
        }
        if ensemble.dim() < self.dim() {
            return Err(Error::DriverDimension {
                needed: self.dim(),
                available: ensemble.dim(),
            });
        }
        if let Some(c) = self.single_unit_component() {
            return ensemble.component(c);
        }
        let grid = *ensemble.grid();
        Ok(GridProcess::from_path_fn(grid, ensemble.n_paths(), |p, row| {
            row[0] = 0.0;
            for i in 0..grid.steps() {
                let m = self.profile.at(grid.node(i));
                let (a, b) = (ensemble.state(p, i), ensemble.state(p, i + 1));
                let dw: f64 = self
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(c, w)| w * (b[c] - a[c]))
                    .sum();
                row[i + 1] = row[i] + m * dw;
            }
        }))
    }
}
