use super::subsets::Subset;
use crate::error::{Error, Result};
use crate::numeric::GaussLegendre;
use crate::time_models::DriverFamily;

/// Largest number of coordinates integrated out by the quadrature routes.
pub const MAX_QUADRATURE_DIMS: usize = 3;

/// `p^I_t(u_I)`, the joint density with the coordinates outside `I`
/// integrated out; `u_sub` lists `u_i` for `i ∈ I` in ascending order.
///
/// The family's joint density factorizes, so this is a product of
/// per-component densities over `I`.
pub fn marginal_density(
    family: &DriverFamily,
    t: f64,
    state: &[f64],
    subset: Subset,
    u_sub: &[f64],
) -> Result<f64> {
    check_subset_args(family, t, state, subset, u_sub)?;
    Ok(family.marginal_density(t, state, subset, u_sub))
}

/// [`marginal_density`] computed by integrating the joint density over the
/// absent coordinates with a tensor Gauss–Legendre rule in log coordinates.
pub fn marginal_density_quadrature(
    family: &DriverFamily,
    t: f64,
    state: &[f64],
    subset: Subset,
    u_sub: &[f64],
) -> Result<f64> {
    check_subset_args(family, t, state, subset, u_sub)?;
    let mut u = vec![0.0; family.n_times()];
    for (c, &x) in subset.indices().zip(u_sub) {
        u[c] = x;
    }
    let absent: Vec<usize> = subset.complement(family.n_times()).indices().collect();
    integrate_absent(family, t, state, &absent, None, Subset::full(family.n_times()), &mut u)
}

/// `Z^I_t = P(ρ_I > t | F_t ∨ σ(τ_I))`.
pub fn z_subset(family: &DriverFamily, t: f64, state: &[f64], subset: Subset) -> Result<f64> {
    family.check_time(t)?;
    check_state(family, state)?;
    Ok(family.z_subset(t, state, subset))
}

/// [`z_subset`] as `∫_{(t,∞)^{|−I|}} p_t(u_{−I}) η(du_{−I})` by tensor quadrature.
pub fn z_subset_quadrature(
    family: &DriverFamily,
    t: f64,
    state: &[f64],
    subset: Subset,
) -> Result<f64> {
    family.check_time(t)?;
    check_state(family, state)?;
    let complement = subset.complement(family.n_times());
    let absent: Vec<usize> = complement.indices().collect();
    let mut u = vec![0.0; family.n_times()];
    let lower = (t > 0.0).then(|| t.ln());
    integrate_absent(family, t, state, &absent, lower, complement, &mut u)
}

fn check_state(family: &DriverFamily, state: &[f64]) -> Result<()> {
    if state.len() < family.driver_dim() {
        return Err(Error::DriverDimension {
            needed: family.driver_dim(),
            available: state.len(),
        });
    }
    Ok(())
}

fn check_subset_args(
    family: &DriverFamily,
    t: f64,
    state: &[f64],
    subset: Subset,
    u_sub: &[f64],
) -> Result<()> {
    family.check_time(t)?;
    check_state(family, state)?;
    if subset.bits() >> family.n_times() != 0 {
        return Err(Error::InvalidArgument(format!(
            "subset {subset} is not inside {{1..{}}}",
            family.n_times()
        )));
    }
    if u_sub.len() != subset.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} values for a subset of size {}",
            u_sub.len(),
            subset.len()
        )));
    }
    Ok(())
}

fn rule_for(dims: usize) -> GaussLegendre {
    match dims {
        0..=2 => GaussLegendre::new(128),
        _ => GaussLegendre::new(64),
    }
}

/// Integrates the η-density of the coordinates in `density_of` over the
/// `absent` ones, each restricted to `ln u > lower` when given.
fn integrate_absent(
    family: &DriverFamily,
    t: f64,
    state: &[f64],
    absent: &[usize],
    lower: Option<f64>,
    density_of: Subset,
    u: &mut [f64],
) -> Result<f64> {
    if absent.len() > MAX_QUADRATURE_DIMS {
        return Err(Error::Unsupported("quadrature over more than three coordinates"));
    }
    let rule = rule_for(absent.len());
    let bridge = *family.component();
    let mut limits = Vec::with_capacity(absent.len());
    for &c in absent {
        let (mut lo, hi) = bridge.log_window(t, state[c]);
        if let Some(l) = lower {
            lo = lo.max(l);
        }
        limits.push((lo, hi));
    }
    fn recurse(
        depth: usize,
        absent: &[usize],
        limits: &[(f64, f64)],
        rule: &GaussLegendre,
        u: &mut [f64],
        eval: &dyn Fn(&[f64]) -> f64,
    ) -> f64 {
        if depth == absent.len() {
            return eval(u);
        }
        let (lo, hi) = limits[depth];
        if lo >= hi {
            return 0.0;
        }
        let mut acc = 0.0;
        for (y, w) in rule.scaled(lo, hi) {
            u[absent[depth]] = y.exp();
            acc += w * recurse(depth + 1, absent, limits, rule, u, eval);
        }
        acc
    }
    let eval = |u: &[f64]| {
        let u_sub: Vec<f64> = density_of.indices().map(|c| u[c]).collect();
        let mut v = family.marginal_density(t, state, density_of, &u_sub);
        for &c in absent {
            // η(du) in log coordinates
            v *= bridge.log_density(0.0, 0.0, u[c].ln());
        }
        v
    };
    Ok(recurse(0, absent, &limits, &rule, u, &eval))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize) -> DriverFamily {
        DriverFamily::new(n, 2.0, false).unwrap()
    }

    #[test]
    fn marginal_reductions() {
        let f = fam(3);
        let state = [0.3, -0.2, 0.5];
        let b = *f.component();
        let one = marginal_density(&f, 0.7, &state, Subset::from_indices(&[0]), &[1.4]).unwrap();
        assert_eq!(one, b.eta_density(0.7, 0.3, 1.4).p);
        let u = [1.4, 0.6, 2.2];
        let full = marginal_density(&f, 0.7, &state, Subset::full(3), &u).unwrap();
        assert!((full - f.joint_density(0.7, &state, &u)).abs() < 1e-15);
        assert_eq!(marginal_density(&f, 0.7, &state, Subset::EMPTY, &[]).unwrap(), 1.0);
    }

    #[test]
    fn marginal_quadrature_agrees_with_factorization() {
        let f = fam(3);
        let state = [0.3, -0.2, 0.5];
        let s = Subset::from_indices(&[1]);
        let closed = marginal_density(&f, 0.9, &state, s, &[0.8]).unwrap();
        let quad = marginal_density_quadrature(&f, 0.9, &state, s, &[0.8]).unwrap();
        assert!((closed - quad).abs() < 1e-6, "{closed} vs {quad}");
        let empty = marginal_density_quadrature(&f, 0.9, &state, Subset::EMPTY, &[]).unwrap();
        assert!((empty - 1.0).abs() < 1e-6);
    }

    #[test]
    fn z_subset_examples() {
        let f = fam(2);
        assert_eq!(z_subset(&f, 1.0, &[0.4, 0.0], Subset::full(2)).unwrap(), 1.0);
        let z = z_subset(&f, 1.0, &[0.4, 0.0], Subset::from_indices(&[0])).unwrap();
        assert!((z - 0.5).abs() < 1e-15);
        assert!(z_subset(&f, 1.85, &[0.0, 0.0], Subset::EMPTY).is_err());
    }

    #[test]
    fn z_empty_matches_two_dimensional_quadrature() {
        let f = fam(2);
        for &(t, a, b) in &[(0.2, 0.0, 0.0), (0.8, -0.4, 0.7), (1.5, 1.0, -0.3)] {
            let closed = z_subset(&f, t, &[a, b], Subset::EMPTY).unwrap();
            let quad = z_subset_quadrature(&f, t, &[a, b], Subset::EMPTY).unwrap();
            assert!((closed - quad).abs() < 1e-6, "t={t}: {closed} vs {quad}");
        }
    }

    #[test]
    fn every_subset_matches_quadrature() {
        let f = fam(3);
        let state = [0.3, -0.6, 1.1];
        for subset in Subset::all(3) {
            let closed = z_subset(&f, 0.7, &state, subset).unwrap();
            let quad = z_subset_quadrature(&f, 0.7, &state, subset).unwrap();
            assert!((closed - quad).abs() < 1e-6, "{subset}: {closed} vs {quad}");
        }
    }

    #[test]
    fn quadrature_dimension_limit() {
        let f = fam(4);
        assert!(matches!(
            z_subset_quadrature(&f, 0.5, &[0.0; 4], Subset::EMPTY),
            Err(Error::Unsupported(_))
        ));
    }
}
