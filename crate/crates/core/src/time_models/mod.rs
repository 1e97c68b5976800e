//! Random-time models with closed-form conditional laws.
//!
//! Each model supplies what the decomposition formulas consume: sampling
//! jointly with the driver, the conditional density `p_t(u)` w.r.t. the law
//! of τ, its volatility `q_t(u)` and slope `k_t(u) = q_t(u)/p_t(u)`, and the
//! Azéma supermartingale `Z_t = P(τ > t | F_t)` with its driver volatility.

mod bridge;
mod family;
mod independent;
mod marked;

pub use bridge::{BridgeLognormal, HORIZON_FRACTION, QUADRATURE_SIGMAS};
pub use family::{DriverFamily, FamilySample};
pub use independent::{CoxDeterministic, IndependentTime, TimeLaw};
pub use marked::{MarkLaw, MarkedBridge};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_paths::{path_rng, GridProcess, PathEnsemble, StreamDomain};

/// `p_t(u)`, `q_t(u)` and `k_t(u)` at one point.
///
/// Whenever `p > 0`, `q = k · p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEval {
    pub p: f64,
    pub q: f64,
    pub k: f64,
}

impl DensityEval {
    pub const ZERO: DensityEval = DensityEval {
        p: 0.0,
        q: 0.0,
        k: 0.0,
    };

    /// Density of a time independent of the driver.
    pub const FLAT: DensityEval = DensityEval {
        p: 1.0,
        q: 0.0,
        k: 0.0,
    };
}

/// One draw of `τ` and, for marked models, its mark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSample {
    pub tau: f64,
    pub mark: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Independent,
    CoxDeterministic,
    BridgeLognormal,
    IndependentDriverFamily,
    MarkedBridge,
}

/// Models of a single random time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingleTimeModel {
    Independent(IndependentTime),
    CoxDeterministic(CoxDeterministic),
    BridgeLognormal(BridgeLognormal),
    MarkedBridge(MarkedBridge),
}

impl SingleTimeModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            SingleTimeModel::Independent(_) => ModelKind::Independent,
            SingleTimeModel::CoxDeterministic(_) => ModelKind::CoxDeterministic,
            SingleTimeModel::BridgeLognormal(_) => ModelKind::BridgeLognormal,
            SingleTimeModel::MarkedBridge(_) => ModelKind::MarkedBridge,
        }
    }

    pub fn driver_dim(&self) -> usize {
        1
    }

    pub fn time_limit(&self) -> f64 {
        match self {
            SingleTimeModel::Independent(_) | SingleTimeModel::CoxDeterministic(_) => f64::INFINITY,
            SingleTimeModel::BridgeLognormal(b) => b.time_limit(),
            SingleTimeModel::MarkedBridge(m) => m.time_limit(),
        }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if t < 0.0 || t > self.time_limit() {
            return Err(Error::HorizonBreach {
                t,
                limit: self.time_limit(),
            });
        }
        Ok(())
    }

    pub fn is_marked(&self) -> bool {
        matches!(self, SingleTimeModel::MarkedBridge(_))
    }

    /// The underlying bridge, for models built on one.
    pub fn bridge(&self) -> Option<&BridgeLognormal> {
        match self {
            SingleTimeModel::BridgeLognormal(b) => Some(b),
            SingleTimeModel::MarkedBridge(m) => Some(m.bridge()),
            _ => None,
        }
    }

    /// Draws `(τ, X)` given the driver value at the horizon.
    pub fn sample<R: rand::Rng + ?Sized>(&self, horizon: f64, w_end: f64, rng: &mut R) -> TimeSample {
        match self {
            SingleTimeModel::Independent(m) => TimeSample {
                tau: m.sample(rng),
                mark: None,
            },
            SingleTimeModel::CoxDeterministic(m) => TimeSample {
                tau: m.sample(rng),
                mark: None,
            },
            SingleTimeModel::BridgeLognormal(b) => TimeSample {
                tau: b.extend_to_anchor(horizon, w_end, rng).exp(),
                mark: None,
            },
            SingleTimeModel::MarkedBridge(m) => {
                let (tau, x) = m.sample(horizon, w_end, rng);
                TimeSample { tau, mark: Some(x) }
            }
        }
    }

    /// Conditional density of τ w.r.t. its law (marks integrated out).
    pub fn density(&self, t: f64, state: &[f64], u: f64) -> Result<DensityEval> {
        self.check_time(t)?;
        Ok(match self {
            SingleTimeModel::Independent(_) | SingleTimeModel::CoxDeterministic(_) => {
                DensityEval::FLAT
            }
            SingleTimeModel::BridgeLognormal(b) => b.eta_density(t, state[0], u),
            SingleTimeModel::MarkedBridge(m) => m.bridge().eta_density(t, state[0], u),
        })
    }

    /// Joint density of `(τ, X)` w.r.t. their law.
    pub fn joint_density(&self, t: f64, state: &[f64], u: f64, x: f64) -> Result<DensityEval> {
        self.check_time(t)?;
        match self {
            SingleTimeModel::MarkedBridge(m) => Ok(m.eta_density(t, state[0], u, x)),
            _ => Err(Error::UnmarkedModel),
        }
    }

    /// Lebesgue-density version of [`Self::density`], for bridge models.
    pub fn lebesgue_density(&self, t: f64, state: &[f64], u: f64) -> Result<DensityEval> {
        self.check_time(t)?;
        self.bridge()
            .map(|b| b.lebesgue_density(t, state[0], u))
            .ok_or(Error::Unsupported("Lebesgue density"))
    }

    #[inline]
    pub fn azema(&self, t: f64, state: &[f64]) -> f64 {
        match self {
            SingleTimeModel::Independent(m) => m.azema(t),
            SingleTimeModel::CoxDeterministic(m) => m.azema(t),
            SingleTimeModel::BridgeLognormal(b) => b.azema(t, state[0]),
            SingleTimeModel::MarkedBridge(m) => m.bridge().azema(t, state[0]),
        }
    }

    /// `∂Z_t / ∂W_t`.
    #[inline]
    pub fn azema_vol(&self, t: f64, state: &[f64]) -> f64 {
        self.bridge().map_or(0.0, |b| b.azema_vol(t, state[0]))
    }

    /// `E[Z_{t1} | F_{t0}]` from the one-step transition.
    #[inline]
    pub fn azema_step_mean(&self, t0: f64, t1: f64, state: &[f64]) -> f64 {
        match self.bridge() {
            Some(b) => b.azema_step_mean(t0, t1, state[0]),
            None => self.azema(t1, state),
        }
    }

    /// Jacod slope at the realized `ξ`: `k_t(τ)`, or `k_t(τ, X)` when `marked`.
    #[inline]
    pub fn slope(&self, t: f64, state: &[f64], sample: &TimeSample, marked: bool) -> f64 {
        match self {
            SingleTimeModel::Independent(_) | SingleTimeModel::CoxDeterministic(_) => 0.0,
            SingleTimeModel::BridgeLognormal(b) => b.slope(t, state[0], sample.tau),
            SingleTimeModel::MarkedBridge(m) => match (marked, sample.mark) {
                (true, Some(x)) => m.slope(t, state[0], sample.tau, x),
                _ => m.bridge().slope(t, state[0], sample.tau),
            },
        }
    }
}

/// Every model in the catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RandomTimeModel {
    Single(SingleTimeModel),
    Family(DriverFamily),
}

impl RandomTimeModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            RandomTimeModel::Single(m) => m.kind(),
            RandomTimeModel::Family(_) => ModelKind::IndependentDriverFamily,
        }
    }

    pub fn driver_dim(&self) -> usize {
        match self {
            RandomTimeModel::Single(m) => m.driver_dim(),
            RandomTimeModel::Family(f) => f.driver_dim(),
        }
    }

    pub fn time_limit(&self) -> f64 {
        match self {
            RandomTimeModel::Single(m) => m.time_limit(),
            RandomTimeModel::Family(f) => f.time_limit(),
        }
    }

    /// Azéma supermartingale of τ, or of `min_i τ_i` for a family.
    #[inline]
    pub fn azema(&self, t: f64, state: &[f64]) -> f64 {
        match self {
            RandomTimeModel::Single(m) => m.azema(t, state),
            RandomTimeModel::Family(f) => f.z_subset(t, state, crate::multi_expansion::Subset::EMPTY),
        }
    }

    #[inline]
    pub fn azema_step_mean(&self, t0: f64, t1: f64, state: &[f64]) -> f64 {
        match self {
            RandomTimeModel::Single(m) => m.azema_step_mean(t0, t1, state),
            RandomTimeModel::Family(f) => {
                f.z_subset_step_mean(t0, t1, state, crate::multi_expansion::Subset::EMPTY)
            }
        }
    }
}

impl From<SingleTimeModel> for RandomTimeModel {
    fn from(m: SingleTimeModel) -> Self {
        RandomTimeModel::Single(m)
    }
}

impl From<DriverFamily> for RandomTimeModel {
    fn from(f: DriverFamily) -> Self {
        RandomTimeModel::Family(f)
    }
}

fn check_ensemble(model: &RandomTimeModel, ensemble: &PathEnsemble) -> Result<()> {
    if ensemble.dim() < model.driver_dim() {
        return Err(Error::DriverDimension {
            needed: model.driver_dim(),
            available: ensemble.dim(),
        });
    }
    let horizon = ensemble.grid().horizon();
    if horizon > model.time_limit() {
        return Err(Error::HorizonBreach {
            t: horizon,
            limit: model.time_limit(),
        });
    }
    Ok(())
}

/// Draws τ for every path, jointly with the driver.
///
/// Path `p` uses the time-sampling stream of its global index under `aux_seed`.
pub fn sample_times(
    model: &SingleTimeModel,
    ensemble: &PathEnsemble,
    aux_seed: u64,
) -> Result<Vec<TimeSample>> {
    check_ensemble(&(*model).into(), ensemble)?;
    let grid = ensemble.grid();
    let last = grid.steps();
    Ok((0..ensemble.n_paths())
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(aux_seed, StreamDomain::TimeSampling, ensemble.global_index(p));
            model.sample(grid.horizon(), ensemble.value(p, last, 0), &mut rng)
        })
        .collect())
}

/// Draws the whole vector of times for every path.
pub fn sample_family(
    family: &DriverFamily,
    ensemble: &PathEnsemble,
    aux_seed: u64,
) -> Result<Vec<FamilySample>> {
    check_ensemble(&(*family).into(), ensemble)?;
    let grid = ensemble.grid();
    let last = grid.steps();
    Ok((0..ensemble.n_paths())
        .into_par_iter()
        .map(|p| {
            let mut rng = path_rng(aux_seed, StreamDomain::TimeSampling, ensemble.global_index(p));
            family.sample(grid.horizon(), ensemble.state(p, last), &mut rng)
        })
        .collect())
}

/// `p_t(u)`, `q_t(u)`, `k_t(u)` for a single-time model.
pub fn conditional_density(
    model: &SingleTimeModel,
    t: f64,
    state: &[f64],
    u: f64,
) -> Result<DensityEval> {
    model.density(t, state, u)
}

/// `Z_t = P(τ > t | F_t)`.
pub fn azema_z(model: &RandomTimeModel, t: f64, state: &[f64]) -> Result<f64> {
    if t < 0.0 || t > model.time_limit() {
        return Err(Error::HorizonBreach {
            t,
            limit: model.time_limit(),
        });
    }
    Ok(model.azema(t, state))
}

/// `Z` along every path of the ensemble.
pub fn azema_process(model: &RandomTimeModel, ensemble: &PathEnsemble) -> Result<GridProcess> {
    check_ensemble(model, ensemble)?;
    let grid = *ensemble.grid();
    Ok(GridProcess::from_path_fn(grid, ensemble.n_paths(), |p, row| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = model.azema(grid.node(i), ensemble.state(p, i));
        }
    }))
}

/// Martingale part `μ` of `Z`.
///
/// Increments are `ΔZ_i − E[ΔZ_i | F_{t_i}]`, the conditional mean taken from
/// the model's one-step transition.
pub fn z_martingale_part(model: &RandomTimeModel, ensemble: &PathEnsemble) -> Result<GridProcess> {
    check_ensemble(model, ensemble)?;
    let grid = *ensemble.grid();
    Ok(GridProcess::from_path_fn(grid, ensemble.n_paths(), |p, row| {
        row[0] = 0.0;
        let mut z_prev = model.azema(0.0, ensemble.state(p, 0));
        for i in 0..grid.steps() {
            let (t0, t1) = (grid.node(i), grid.node(i + 1));
            let expected = model.azema_step_mean(t0, t1, ensemble.state(p, i));
            let z_next = model.azema(t1, ensemble.state(p, i + 1));
            row[i + 1] = row[i] + (z_next - expected);
            z_prev = z_next;
        }
        let _ = z_prev;
    }))
}
