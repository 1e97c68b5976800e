use serde::{Deserialize, Serialize};

use super::features::progressive_features;
use super::test::{martingale_test, quarter_pairs, TestReport};
use crate::error::{Error, Result};
use crate::grid_paths::{GridProcess, PathEnsemble};
use crate::numeric::inverse_mills;
use crate::time_models::{BridgeLognormal, SingleTimeModel, TimeSample};

/// Integrands `a` for which both projections are available in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "integrand", rename_all = "kebab-case")]
pub enum LemmaIntegrand {
    /// `a ≡ c`.
    Constant { value: f64 },
    /// `a_s = k_s(τ) 1{τ ≤ s}`, adapted to the expanded filtration.
    SlopeAfterTau,
    /// `a_s = k_s(τ) 1{τ > s}`, not adapted before τ.
    SlopeBeforeTau,
}

/// `E[ln τ | W_t = w, τ > t]`, a truncated-normal mean.
fn truncated_log_mean(bridge: &BridgeLognormal, t: f64, w: f64) -> f64 {
    if t <= 0.0 {
        return w;
    }
    let sd = (bridge.anchor() - t).sqrt();
    let alpha = (t.ln() - w) / sd;
    w + sd * inverse_mills(-alpha)
}

/// `M_t = E(∫_0^t a_s ds | G_t) − ∫_0^t E(a_s | G_s) ds` on the grid, with
/// left-point sums and closed-form projections onto the progressive expansion.
pub fn projection_lemma_process(
    integrand: LemmaIntegrand,
    bridge: &BridgeLognormal,
    ensemble: &PathEnsemble,
    samples: &[TimeSample],
) -> Result<GridProcess> {
    let grid = *ensemble.grid();
    bridge.check_time(grid.horizon())?;
    if samples.len() != ensemble.n_paths() {
        return Err(Error::ShapeMismatch("one time sample per path required".into()));
    }
    let dt = grid.dt();
    let a0 = bridge.anchor();
    Ok(GridProcess::from_path_fn(grid, ensemble.n_paths(), |p, row| {
        let tau = samples[p].tau;
        let tau_idx = grid.snap_up(tau);
        let w = |i: usize| ensemble.value(p, i, 0);
        match integrand {
            LemmaIntegrand::Constant { value } => {
                let (mut full, mut running) = (0.0, 0.0);
                row[0] = 0.0;
                for i in 0..grid.steps() {
                    full += value * dt;
                    running += value * dt;
                    row[i + 1] = full - running;
                }
            }
            LemmaIntegrand::SlopeAfterTau => {
                let (mut full, mut running) = (0.0, 0.0);
                row[0] = 0.0;
                for i in 0..grid.steps() {
                    if i >= tau_idx {
                        let a = bridge.slope(grid.node(i), w(i), tau) * dt;
                        full += a;
                        running += a;
                    }
                    row[i + 1] = full - running;
                }
            }
            LemmaIntegrand::SlopeBeforeTau => {
                let y = tau.ln();
                // Σ Δ/(T0 − t_i) and Σ W_i Δ/(T0 − t_i) over i < j
                let (mut h, mut g) = (0.0, 0.0);
                let mut known = 0.0;
                let mut running = 0.0;
                row[0] = 0.0;
                for j in 1..grid.n_nodes() {
                    let i = j - 1;
                    let ti = grid.node(i);
                    let v = a0 - ti;
                    h += dt / v;
                    g += w(i) * dt / v;
                    if i < tau_idx {
                        known += (y - w(i)) / v * dt;
                        running += (truncated_log_mean(bridge, ti, w(i)) - w(i)) / v * dt;
                    }
                    let full = if j >= tau_idx {
                        known
                    } else {
                        truncated_log_mean(bridge, grid.node(j), w(j)) * h - g
                    };
                    row[j] = full - running;
                }
            }
        }
    }))
}

/// Builds the lemma's process for `integrand` and tests it for the
/// martingale property in the progressive expansion.
pub fn conditional_increment_lemma_check(
    integrand: LemmaIntegrand,
    bridge: &BridgeLognormal,
    ensemble: &PathEnsemble,
    samples: &[TimeSample],
    stride: usize,
) -> Result<(GridProcess, TestReport)> {
    let m = projection_lemma_process(integrand, bridge, ensemble, samples)?;
    let model = SingleTimeModel::BridgeLognormal(*bridge);
    let features = progressive_features(ensemble, &model, samples, false, stride)?;
    let report = martingale_test(
        &m.restrict(stride)?,
        &features,
        &quarter_pairs(ensemble.grid().horizon()),
    )?;
    Ok((m, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_paths::{make_grid, simulate_brownian};
    use crate::numeric::gauss_legendre_128;
    use crate::time_models::sample_times;

    #[test]
    fn truncated_mean_matches_quadrature() {
        let b = BridgeLognormal::new(2.0).unwrap();
        let (t, w) = (0.7f64, -0.2f64);
        let lo = t.ln();
        let num = gauss_legendre_128().integrate(lo, w + 10.0, |y| y * b.log_density(t, w, y));
        let den = gauss_legendre_128().integrate(lo, w + 10.0, |y| b.log_density(t, w, y));
        assert!((num / den - truncated_log_mean(&b, t, w)).abs() < 1e-10);
    }

    #[test]
    fn trivial_integrands_give_zero() {
        let b = BridgeLognormal::new(2.0).unwrap();
        let g = make_grid(1.0, 40).unwrap();
        let e = simulate_brownian(g, 1, 100, 1).unwrap();
        let s = sample_times(&SingleTimeModel::BridgeLognormal(b), &e, 2).unwrap();
        for a in [LemmaIntegrand::Constant { value: 1.7 }, LemmaIntegrand::SlopeAfterTau] {
            let m = projection_lemma_process(a, &b, &e, &s).unwrap();
            assert!(m.values().iter().all(|v| *v == 0.0));
        }
        let m = projection_lemma_process(LemmaIntegrand::SlopeBeforeTau, &b, &e, &s).unwrap();
        assert!(m.is_finite());
        assert!(m.values().iter().any(|v| *v != 0.0));
    }
}
