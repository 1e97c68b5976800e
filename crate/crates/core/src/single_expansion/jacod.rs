use super::local_martingale::LocalMartingale;
use crate::error::{Error, Result};
use crate::grid_paths::{GridProcess, PathEnsemble};
use crate::time_models::{SingleTimeModel, TimeSample};

/// `∫_{t∧τ}^t k_s(τ) d⟨M, W⟩_s`, i.e. increments `k_{t_i}(τ) · vol^M_{t_i} · Δ`
/// over steps with `t_i ≥ τ`.
///
/// `marked` evaluates the slope at `(τ, X)`.
pub fn jacod_after_drift(
    m: &LocalMartingale,
    model: &SingleTimeModel,
    ensemble: &PathEnsemble,
    samples: &[TimeSample],
    marked: bool,
) -> Result<GridProcess> {
    if marked && !model.is_marked() {
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
    let grid = *ensemble.grid();
    let dt = grid.dt();
    Ok(GridProcess::from_path_fn(grid, ensemble.n_paths(), |p, row| {
        let s = &samples[p];
        let tau_idx = grid.snap_up(s.tau);
        row[0] = 0.0;
        for i in 0..grid.steps() {
            row[i + 1] = row[i];
            if i >= tau_idx {
                let t = grid.node(i);
                let k = model.slope(t, ensemble.state(p, i), s, marked);
                row[i + 1] += k * m.vol(0, t) * dt;
            }
        }
    }))
}
