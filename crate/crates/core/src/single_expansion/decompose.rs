use rayon::prelude::*;

use super::jeulin_yor::{jy_increment, BracketMethod, TRUNCATION_LEVEL};
use super::local_martingale::LocalMartingale;
use crate::error::{Error, Result};
use crate::grid_paths::{GridProcess, PathEnsemble};
use crate::time_models::{z_martingale_part, SingleTimeModel, TimeSample};

/// Caller-supplied after-τ drift density `g(t, W_t, ξ)` against `d⟨M, W⟩`.
pub type PluggedDrift<'a> = &'a (dyn Fn(f64, &[f64], &TimeSample) -> f64 + Sync);

/// Which expanded filtration the after-τ drift is computed for.
#[derive(Clone, Copy)]
pub enum DriftMode<'a> {
    /// Progressive expansion with τ.
    Plain,
    /// Progressive expansion with `(τ, X)`.
    Marked,
    /// After-τ drift from a user-supplied `g`.
    Plugged(PluggedDrift<'a>),
}

impl std::fmt::Debug for DriftMode<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DriftMode::Plain => write!(f, "Plain"),
            DriftMode::Marked => write!(f, "Marked"),
            DriftMode::Plugged(_) => write!(f, "Plugged(..)"),
        }
    }
}

/// Per-path decomposition `M = martingale_part + drift_before + drift_after`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub original: GridProcess,
    pub martingale_part: GridProcess,
    pub drift_before: GridProcess,
    pub drift_after: GridProcess,
    /// Random times, `n_times` per path.
    pub taus: Vec<f64>,
    pub n_times: usize,
    /// Paths whose drift was frozen after `Z` hit the truncation level.
    pub truncated: Vec<bool>,
}

impl Decomposition {
    pub(crate) fn assemble(
        original: GridProcess,
        drift_before: GridProcess,
        drift_after: GridProcess,
        taus: Vec<f64>,
        n_times: usize,
        truncated: Vec<bool>,
    ) -> Result<Self> {
        let total = drift_before.zip_with(&drift_after, |b, a| b + a)?;
        let martingale_part = original.zip_with(&total, |m, d| m - d)?;
        Ok(Self {
            original,
            martingale_part,
            drift_before,
            drift_after,
            taus,
            n_times,
            truncated,
        })
    }

    pub fn n_paths(&self) -> usize {
        self.original.n_paths()
    }

    pub fn tau(&self, path: usize) -> &[f64] {
        &self.taus[path * self.n_times..(path + 1) * self.n_times]
    }

    /// Total drift `drift_before + drift_after`.
    pub fn drift(&self) -> GridProcess {
        self.drift_before
            .zip_with(&self.drift_after, |b, a| b + a)
            .expect("drifts share a shape")
    }

    /// `max |original − (martingale_part + drift_before + drift_after)|`.
    pub fn additivity_residual(&self) -> f64 {
        let n = self.original.values().len();
        (0..n)
            .into_par_iter()
            .map(|k| {
                let d = self.drift_before.values()[k] + self.drift_after.values()[k];
                (self.original.values()[k] - (self.martingale_part.values()[k] + d)).abs()
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn truncation_fraction(&self) -> f64 {
        self.truncated.iter().filter(|t| **t).count() as f64 / self.truncated.len().max(1) as f64
    }

    /// Checks, for a single time, that `drift_before` is constant from the
    /// node of τ on and `drift_after` vanishes up to and including it.
    pub fn localization_holds(&self) -> bool {
        if self.n_times != 1 {
            return false;
        }
        let grid = *self.original.grid();
        (0..self.n_paths()).into_par_iter().all(|p| {
            let k = grid.snap_up(self.taus[p]).min(grid.steps());
            let b = self.drift_before.path(p);
            let a = self.drift_after.path(p);
            b[k..].iter().all(|v| *v == b[k]) && a[..=k].iter().all(|v| *v == 0.0)
        })
    }
}

/// Full decomposition of `M` in the progressive expansion with one time.
pub fn decompose_single(
    m: &LocalMartingale,
    model: &SingleTimeModel,
    ensemble: &PathEnsemble,
    samples: &[TimeSample],
    mode: DriftMode<'_>,
    bracket: BracketMethod,
) -> Result<Decomposition> {
    if matches!(mode, DriftMode::Marked) && !model.is_marked() {
        return Err(Error::UnmarkedModel);
    }
    model.check_time(ensemble.grid().horizon())?;
    if samples.len() != ensemble.n_paths() {
        return Err(Error::ShapeMismatch(format!(
            "{} time samples for {} paths",
            samples.len(),
            ensemble.n_paths()
        )));
    }
    let original = m.path_values(ensemble)?;
    let mu = match bracket {
        BracketMethod::ClosedForm => None,
        BracketMethod::Realized => Some(z_martingale_part(&(*model).into(), ensemble)?),
    };
    let grid = *ensemble.grid();
    let dt = grid.dt();
    let width = grid.n_nodes();
    let n_paths = ensemble.n_paths();
    let mut before = vec![0.0; n_paths * width];
    let mut after = vec![0.0; n_paths * width];
    let mut truncated = vec![false; n_paths];
    before
        .par_chunks_mut(width)
        .zip(after.par_chunks_mut(width))
        .zip(truncated.par_iter_mut())
        .enumerate()
        .for_each(|(p, ((row_b, row_a), flag))| {
            let s = &samples[p];
            let tau_idx = grid.snap_up(s.tau);
            let (mut acc_b, mut acc_a) = (0.0, 0.0);
            for i in 0..grid.steps() {
                if !*flag {
                    let t = grid.node(i);
                    let state = ensemble.state(p, i);
                    let vol = m.vol(0, t);
                    if i < tau_idx {
                        let z = model.azema(t, state);
                        if z < TRUNCATION_LEVEL {
                            *flag = true;
                        } else {
                            let d = match &mu {
                                None => vol * model.azema_vol(t, state) * dt,
                                Some(mu) => {
                                    let (mp, up) = (original.path(p), mu.path(p));
                                    (mp[i + 1] - mp[i]) * (up[i + 1] - up[i])
                                }
                            };
                            acc_b += jy_increment(d, z);
                        }
                    } else {
                        let k = match mode {
                            DriftMode::Plain => model.slope(t, state, s, false),
                            DriftMode::Marked => model.slope(t, state, s, true),
                            DriftMode::Plugged(g) => g(t, state, s),
                        };
                        acc_a += k * vol * dt;
                    }
                }
                row_b[i + 1] = acc_b;
                row_a[i + 1] = acc_a;
            }
        });
    let taus = samples.iter().map(|s| s.tau).collect();
    Decomposition::assemble(
        original,
        GridProcess::new(grid, n_paths, before)?,
        GridProcess::new(grid, n_paths, after)?,
        taus,
        1,
        truncated,
    )
}
