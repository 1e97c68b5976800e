use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::local_martingale::LocalMartingale;
use crate::error::{Error, Result};
use crate::grid_paths::{covariation, GridProcess, PathEnsemble};
use crate::time_models::{azema_process, z_martingale_part, SingleTimeModel, TimeSample};

/// Lower clamp applied to `Z_{s−}` before dividing.
pub const Z_FLOOR: f64 = 1e-10;

/// A path's drift is frozen once `Z` falls below this level before τ.
pub const TRUNCATION_LEVEL: f64 = 1e-6;

/// How `d⟨M, μ⟩` is evaluated on a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketMethod {
    /// `Σ_c vol^M_c · ∂_c Z · Δ` from the closed-form dynamics of `Z`.
    #[default]
    ClosedForm,
    /// Grid covariation `ΔM · Δμ`.
    Realized,
}

/// Everything the before-τ drift consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct JyIngredients {
    pub z: GridProcess,
    pub mu: GridProcess,
    /// Dual predictable projection of `ΔM_τ`; zero for continuous `M`.
    pub j: GridProcess,
    pub bracket: GridProcess,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JyDrift {
    pub drift: GridProcess,
    pub truncated: Vec<bool>,
}

#[inline]
pub(crate) fn jy_increment(bracket_inc: f64, z: f64) -> f64 {
    bracket_inc / z.max(Z_FLOOR)
}

pub fn jy_ingredients(
    m: &LocalMartingale,
    model: &SingleTimeModel,
    ensemble: &PathEnsemble,
    method: BracketMethod,
) -> Result<JyIngredients> {
    let rt = (*model).into();
    let z = azema_process(&rt, ensemble)?;
    let mu = z_martingale_part(&rt, ensemble)?;
    let grid = *ensemble.grid();
    let j = GridProcess::zeros(grid, ensemble.n_paths());
    let bracket = match method {
        BracketMethod::ClosedForm => {
            let dt = grid.dt();
            GridProcess::from_path_fn(grid, ensemble.n_paths(), |p, row| {
                row[0] = 0.0;
                for i in 0..grid.steps() {
                    let t = grid.node(i);
                    let d = m.vol(0, t) * model.azema_vol(t, ensemble.state(p, i)) * dt;
                    row[i + 1] = row[i] + d;
                }
            })
        }
        BracketMethod::Realized => covariation(&m.path_values(ensemble)?, &mu)?,
    };
    Ok(JyIngredients { z, mu, j, bracket })
}

/// `∫_0^{t∧τ} (d⟨M,μ⟩_s + dJ_s) / Z_{s−}` with left-point `Z`, frozen after τ.
///
/// Steps from node `i` count as before τ iff `t_i < τ`.
pub fn jeulin_yor_drift(
    m_values: &GridProcess,
    ingredients: &JyIngredients,
    samples: &[TimeSample],
) -> Result<JyDrift> {
    let JyIngredients { z, j, bracket, .. } = ingredients;
    m_values.ensure_same_shape(z)?;
    m_values.ensure_same_shape(j)?;
    m_values.ensure_same_shape(bracket)?;
    if samples.len() != m_values.n_paths() {
        return Err(Error::ShapeMismatch(format!(
            "{} time samples for {} paths",
            samples.len(),
            m_values.n_paths()
        )));
    }
    let grid = *m_values.grid();
    let width = grid.n_nodes();
    let mut values = vec![0.0; m_values.n_paths() * width];
    let mut truncated = vec![false; m_values.n_paths()];
    values
        .par_chunks_mut(width)
        .zip(truncated.par_iter_mut())
        .enumerate()
        .for_each(|(p, (row, flag))| {
            let tau_idx = grid.snap_up(samples[p].tau);
            let (zp, jp, bp) = (z.path(p), j.path(p), bracket.path(p));
            let mut acc = 0.0;
            for i in 0..grid.steps() {
                if i < tau_idx && !*flag {
                    if zp[i] < TRUNCATION_LEVEL {
                        *flag = true;
                    } else {
                        acc += jy_increment((bp[i + 1] - bp[i]) + (jp[i + 1] - jp[i]), zp[i]);
                    }
                }
                row[i + 1] = acc;
            }
        });
    Ok(JyDrift {
        drift: GridProcess::new(grid, m_values.n_paths(), values)?,
        truncated,
    })
}
