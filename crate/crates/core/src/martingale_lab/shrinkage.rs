use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_paths::{GridProcess, PathEnsemble, TimeGrid};
use crate::single_expansion::{Profile, Z_FLOOR};
use crate::time_models::{BridgeLognormal, TimeSample};

/// The two expressions of the before-τ drift of `M = ∫ m dW`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShrinkageReport {
    /// `∫_0^{t∧τ} (1/Z_{s−}) (∫_s^∞ q_s(u) du) m_s ds`.
    #[serde(skip)]
    pub lhs: GridProcess,
    /// `∫_0^{t∧τ} d⟨M, Z⟩_s / Z_{s−}`.
    #[serde(skip)]
    pub rhs: GridProcess,
    /// `sup_t |lhs − rhs|`, per path.
    pub path_discrepancy: Vec<f64>,
    pub sup_discrepancy: f64,
    /// `max |∫_0^∞ q_t(u) du|` over the grid nodes and a state lattice.
    pub q_integral_max: f64,
}

/// States on which the zero-integral claim is checked.
pub fn state_lattice(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| -3.0 + 6.0 * k as f64 / (n.max(2) - 1) as f64)
        .collect()
}

/// `max |∫_0^∞ q_t(u) du|` over `t` in `times` and `w` in `states`.
pub fn q_integral_max(bridge: &BridgeLognormal, times: &[f64], states: &[f64]) -> Result<f64> {
    for &t in times {
        bridge.check_time(t)?;
    }
    Ok(times
        .par_iter()
        .map(|&t| {
            states
                .iter()
                .map(|&w| bridge.lebesgue_q_mass_above(t, w, 0.0).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max))
}

fn stopped_drift<F>(grid: TimeGrid, ensemble: &PathEnsemble, samples: &[TimeSample], inc: F) -> GridProcess
where
    F: Fn(usize, usize, f64) -> f64 + Sync,
{
    GridProcess::from_path_fn(grid, ensemble.n_paths(), |p, row| {
        let tau_idx = grid.snap_up(samples[p].tau);
        row[0] = 0.0;
        for i in 0..grid.steps() {
            row[i + 1] = row[i];
            if i < tau_idx {
                row[i + 1] += inc(p, i, grid.node(i));
            }
        }
    })
}

fn sup_gap(a: &GridProcess, b: &GridProcess) -> Vec<f64> {
    a.rows()
        .zip(b.rows())
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
        .collect()
}

fn check_inputs(bridge: &BridgeLognormal, ensemble: &PathEnsemble, samples: &[TimeSample]) -> Result<()> {
    bridge.check_time(ensemble.grid().horizon())?;
    if samples.len() != ensemble.n_paths() {
        return Err(Error::ShapeMismatch("one time sample per path required".into()));
    }
    Ok(())
}

/// `∫_0^{t∧τ} (1/Z_{s−}) (∫_s^∞ q_s(u) du) m_s ds` with the inner integral by quadrature.
pub fn shrinkage_lhs(
    bridge: &BridgeLognormal,
    m: Profile,
    ensemble: &PathEnsemble,
    samples: &[TimeSample],
) -> Result<GridProcess> {
    check_inputs(bridge, ensemble, samples)?;
    let grid = *ensemble.grid();
    let dt = grid.dt();
    Ok(stopped_drift(grid, ensemble, samples, |p, i, t| {
        let w = ensemble.value(p, i, 0);
        let q_tail = bridge.lebesgue_q_mass_above(t, w, t);
        q_tail / bridge.azema(t, w).max(Z_FLOOR) * m.at(t) * dt
    }))
}

/// Compares both sides of the shrinkage identity path by path.
pub fn shrinkage_check(
    bridge: &BridgeLognormal,
    m: Profile,
    ensemble: &PathEnsemble,
    samples: &[TimeSample],
) -> Result<ShrinkageReport> {
    let lhs = shrinkage_lhs(bridge, m, ensemble, samples)?;
    let grid = *ensemble.grid();
    let dt = grid.dt();
    let rhs = stopped_drift(grid, ensemble, samples, |p, i, t| {
        let w = ensemble.value(p, i, 0);
        m.at(t) * bridge.azema_vol(t, w) * dt / bridge.azema(t, w).max(Z_FLOOR)
    });
    let path_discrepancy = sup_gap(&lhs, &rhs);
    let sup_discrepancy = path_discrepancy.iter().copied().fold(0.0, f64::max);
    let q_integral_max = q_integral_max(bridge, &grid.nodes(), &state_lattice(21))?;
    Ok(ShrinkageReport {
        lhs,
        rhs,
        path_discrepancy,
        sup_discrepancy,
        q_integral_max,
    })
}

/// Per-path `sup_t |lhs − J|`, where `J` is the Jacod drift `∫ k_s(τ) m_s ds`
/// stopped at τ instead of the Jeulin–Yor drift.
pub fn shrinkage_negative_control(
    bridge: &BridgeLognormal,
    m: Profile,
    ensemble: &PathEnsemble,
    samples: &[TimeSample],
) -> Result<Vec<f64>> {
    let lhs = shrinkage_lhs(bridge, m, ensemble, samples)?;
    let grid = *ensemble.grid();
    let dt = grid.dt();
    let jacod = stopped_drift(grid, ensemble, samples, |p, i, t| {
        bridge.slope(t, ensemble.value(p, i, 0), samples[p].tau) * m.at(t) * dt
    });
    Ok(sup_gap(&lhs, &jacod))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_paths::{make_grid, simulate_brownian};
    use crate::time_models::{sample_times, SingleTimeModel};

    #[test]
    fn null_profile_gives_zero_on_both_sides() {
        let b = BridgeLognormal::new(2.0).unwrap();
        let g = make_grid(1.0, 20).unwrap();
        let e = simulate_brownian(g, 1, 20, 4).unwrap();
        let s = sample_times(&SingleTimeModel::BridgeLognormal(b), &e, 5).unwrap();
        let r = shrinkage_check(&b, Profile { level: 0.0, slope: 0.0 }, &e, &s).unwrap();
        assert!(r.lhs.values().iter().all(|v| *v == 0.0));
        assert!(r.rhs.values().iter().all(|v| *v == 0.0));
        assert_eq!(r.sup_discrepancy, 0.0);
    }

    #[test]
    fn both_sides_agree_for_unit_profile() {
        let b = BridgeLognormal::new(2.0).unwrap();
        let g = make_grid(1.0, 20).unwrap();
        let e = simulate_brownian(g, 1, 50, 4).unwrap();
        let s = sample_times(&SingleTimeModel::BridgeLognormal(b), &e, 5).unwrap();
        let r = shrinkage_check(&b, Profile::UNIT, &e, &s).unwrap();
        assert!(r.sup_discrepancy < 1e-6, "{}", r.sup_discrepancy);
        assert!(r.q_integral_max < 1e-6);
    }

    #[test]
    fn lattice_spans_three_sigmas() {
        let l = state_lattice(21);
        assert_eq!(l.first(), Some(&-3.0));
        assert_eq!(l.last(), Some(&3.0));
    }
}
