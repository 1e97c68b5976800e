use super::process::GridProcess;
use crate::error::Result;

/// Left-point Itô sum `Σ_{i<j} h_{t_i} (X_{t_{i+1}} − X_{t_i})`.
pub fn ito_integrate(integrand: &GridProcess, integrator: &GridProcess) -> Result<GridProcess> {
    integrand.ensure_same_shape(integrator)?;
    let steps = integrand.grid().steps();
    Ok(GridProcess::from_path_fn(
        *integrand.grid(),
        integrand.n_paths(),
        |p, row| {
            let h = integrand.path(p);
            let x = integrator.path(p);
            row[0] = 0.0;
            for i in 0..steps {
                row[i + 1] = row[i] + h[i] * (x[i + 1] - x[i]);
            }
        },
    ))
}

/// Realized covariation `Σ_{i<j} ΔX_i ΔY_i`.
pub fn covariation(x: &GridProcess, y: &GridProcess) -> Result<GridProcess> {
    x.ensure_same_shape(y)?;
    let steps = x.grid().steps();
    Ok(GridProcess::from_path_fn(*x.grid(), x.n_paths(), |p, row| {
        let a = x.path(p);
        let b = y.path(p);
        row[0] = 0.0;
        for i in 0..steps {
            row[i + 1] = row[i] + (a[i + 1] - a[i]) * (b[i + 1] - b[i]);
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_paths::{make_grid, simulate_brownian};

    #[test]
    fn unit_integrand_returns_integrator() {
        let g = make_grid(1.0, 32).unwrap();
        let w = simulate_brownian(g, 1, 20, 3).unwrap().component(0).unwrap();
        let one = w.map(|_| 1.0);
        let out = ito_integrate(&one, &w).unwrap();
        for (a, b) in out.values().iter().zip(w.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let zero = ito_integrate(&w.map(|_| 0.0), &w).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let g = make_grid(1.0, 8).unwrap();
        let h = make_grid(1.0, 16).unwrap();
        let a = GridProcess::zeros(g, 3);
        let b = GridProcess::zeros(h, 3);
        let c = GridProcess::zeros(g, 4);
        assert!(ito_integrate(&a, &b).is_err());
        assert!(covariation(&a, &c).is_err());
    }

    #[test]
    fn deterministic_smooth_covariation_vanishes_like_dt() {
        // Y = sin(t) has covariation Σ (Δsin)^2 ≈ Δ·∫cos² → O(Δ).
        let mut last = f64::INFINITY;
        for k in [50usize, 100, 200, 400] {
            let g = make_grid(1.0, k).unwrap();
            let y = GridProcess::from_path_fn(g, 1, |_, row| {
                for (i, v) in row.iter_mut().enumerate() {
                    *v = g.node(i).sin();
                }
            });
            let c = covariation(&y, &y).unwrap().terminal()[0];
            assert!(c < last);
            assert!(c <= 1.0 * g.dt());
            last = c;
        }
    }
}
