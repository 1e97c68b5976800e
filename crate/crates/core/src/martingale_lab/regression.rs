use rayon::prelude::*;

use super::test::{TestReport, TestStat};
use crate::error::{Error, Result};
use crate::grid_paths::PathEnsemble;
use crate::numeric::pairwise_sum;
use crate::time_models::BridgeLognormal;

/// OLS of `y` on `(1, x − x̄)` with heteroskedasticity-robust (HC0) standard
/// errors. Returns `[(coef, se)]`, with the slope omitted when `x` is constant.
pub fn ols_hc0(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len() as f64;
    let x_bar = pairwise_sum(x) / n;
    let xc: Vec<f64> = x.iter().map(|v| v - x_bar).collect();
    let sxx = pairwise_sum(&xc.iter().map(|v| v * v).collect::<Vec<_>>());
    let b0 = pairwise_sum(y) / n;
    if !(sxx > 0.0) {
        let e2: Vec<f64> = y.iter().map(|v| (v - b0) * (v - b0)).collect();
        return vec![(b0, (pairwise_sum(&e2)).sqrt() / n)];
    }
    let sxy = pairwise_sum(&xc.iter().zip(y).map(|(a, b)| a * b).collect::<Vec<_>>());
    let b1 = sxy / sxx;
    // centered design: X'X = diag(n, sxx)
    let e2: Vec<f64> = xc
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - b0 - b1 * a;
            e * e
        })
        .collect();
    let e2x2: Vec<f64> = e2.iter().zip(&xc).map(|(e, a)| e * a * a).collect();
    let se0 = pairwise_sum(&e2).sqrt() / n;
    let se1 = pairwise_sum(&e2x2).sqrt() / sxx;
    vec![(b0, se0), (b1, se1)]
}

/// Regresses `p_t(u) − p_s(u)` on `(1, W_s)` for every pair and every `u`.
///
/// Both coefficients vanish when `p(u)` is a martingale.
pub fn density_martingale_regression(
    bridge: &BridgeLognormal,
    ensemble: &PathEnsemble,
    us: &[f64],
    pairs: &[(f64, f64)],
) -> Result<TestReport> {
    let grid = ensemble.grid();
    bridge.check_time(grid.horizon())?;
    let mut stats = Vec::new();
    let mut skipped = Vec::new();
    let mut names = Vec::new();
    for &u in us {
        names.push(format!("intercept u={u:.6}"));
        names.push(format!("W u={u:.6}"));
    }
    for &(s, t) in pairs {
        let (i, j) = match (grid.index_of(s), grid.index_of(t)) {
            (Some(i), Some(j)) if i < j => (i, j),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "pair ({s}, {t}) is not an increasing pair of grid nodes"
                )))
            }
        };
        let x: Vec<f64> = (0..ensemble.n_paths()).map(|p| ensemble.value(p, i, 0)).collect();
        for (k, &u) in us.iter().enumerate() {
            let y: Vec<f64> = (0..ensemble.n_paths())
                .into_par_iter()
                .map(|p| {
                    bridge.eta_density(t, ensemble.value(p, j, 0), u).p
                        - bridge.eta_density(s, ensemble.value(p, i, 0), u).p
                })
                .collect();
            let coefs = ols_hc0(&x, &y);
            if coefs.len() == 1 {
                skipped.push(format!("{} at s={s}: zero variance", names[2 * k + 1]));
            }
            for (c, (b, se)) in coefs.into_iter().enumerate() {
                stats.push(TestStat {
                    s,
                    t,
                    feature: names[2 * k + c].clone(),
                    mean: b,
                    se,
                    z: b / se,
                });
            }
        }
    }
    Ok(TestReport::from_stats(ensemble.n_paths(), names, stats, skipped))
}
