//! `n` times `τ_i = exp(W^i_{T0})` driven by independent components.
//!
//! The joint conditional density factorizes over components, so every subset
//! quantity (`p^I`, `Z^I`, the slopes of `p^I`) is a product of bridge closed
//! forms.

use rand::Rng;

use super::bridge::BridgeLognormal;
use super::DensityEval;
use crate::error::{Error, Result};
use crate::multi_expansion::{Subset, MAX_TIMES};

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySample {
    pub taus: Vec<f64>,
    pub marks: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverFamily {
    n: usize,
    component: BridgeLognormal,
    marked: bool,
}

impl DriverFamily {
    /// `marked` attaches independent ±1 marks to every time.
    pub fn new(n: usize, anchor: f64, marked: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("family needs at least one time".into()));
        }
        if n > MAX_TIMES {
            return Err(Error::TooManyTimes(n));
        }
        Ok(Self {
            n,
            component: BridgeLognormal::new(anchor)?,
            marked,
        })
    }

    pub fn n_times(&self) -> usize {
        self.n
    }

    pub fn driver_dim(&self) -> usize {
        self.n
    }

    pub fn anchor(&self) -> f64 {
        self.component.anchor()
    }

    pub fn is_marked(&self) -> bool {
        self.marked
    }

    pub fn component(&self) -> &BridgeLognormal {
        &self.component
    }

    pub fn time_limit(&self) -> f64 {
        self.component.time_limit()
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        self.component.check_time(t)
    }

    /// Joint density of the whole vector w.r.t. its law.
    pub fn joint_density(&self, t: f64, state: &[f64], u: &[f64]) -> f64 {
        (0..self.n)
            .map(|c| self.component.eta_density(t, state[c], u[c]).p)
            .product()
    }

    /// Marginal density `p^I_t(u_I)`; `u_sub` lists `u_i` for `i ∈ I` ascending.
    pub fn marginal_density(&self, t: f64, state: &[f64], subset: Subset, u_sub: &[f64]) -> f64 {
        subset
            .indices()
            .zip(u_sub)
            .map(|(c, &u)| self.component.eta_density(t, state[c], u).p)
            .product()
    }

    /// Density of `τ_c` alone, with its slope against `W^c`.
    pub fn component_density(&self, c: usize, t: f64, state: &[f64], u: f64) -> DensityEval {
        self.component.eta_density(t, state[c], u)
    }

    /// `Z^I_t = P(ρ_I > t | F_t ∨ σ(τ_I))`; conditioning on `τ_I` drops out
    /// under independence.
    pub fn z_subset(&self, t: f64, state: &[f64], subset: Subset) -> f64 {
        let mut z = 1.0;
        for c in subset.complement(self.n).indices() {
            z *= self.component.azema(t, state[c]);
        }
        z
    }

    /// `∂_{w_comp} Z^I_t`.
    pub fn z_subset_vol(&self, t: f64, state: &[f64], subset: Subset, comp: usize) -> f64 {
        if subset.contains(comp) || comp >= self.n {
            return 0.0;
        }
        let mut z = self.component.azema_vol(t, state[comp]);
        for c in subset.complement(self.n).indices() {
            if c != comp {
                z *= self.component.azema(t, state[c]);
            }
        }
        z
    }

    /// `E[Z^I_{t1} | state at t0]`, a product of one-step bridge means.
    pub fn z_subset_step_mean(&self, t0: f64, t1: f64, state: &[f64], subset: Subset) -> f64 {
        let mut z = 1.0;
        for c in subset.complement(self.n).indices() {
            z *= self.component.azema_step_mean(t0, t1, state[c]);
        }
        z
    }

    /// Slope of `p^I` at `τ_I` against driver component `comp`.
    pub fn subset_slope(
        &self,
        t: f64,
        state: &[f64],
        subset: Subset,
        taus: &[f64],
        comp: usize,
    ) -> f64 {
        if subset.contains(comp) {
            self.component.slope(t, state[comp], taus[comp])
        } else {
            0.0
        }
    }

    /// Draws all times (and marks) given the driver state at the horizon.
    pub fn sample<R: Rng + ?Sized>(&self, horizon: f64, w_end: &[f64], rng: &mut R) -> FamilySample {
        let taus = (0..self.n)
            .map(|c| self.component.extend_to_anchor(horizon, w_end[c], rng).exp())
            .collect();
        let marks = self.marked.then(|| {
            (0..self.n)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect()
        });
        FamilySample { taus, marks }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_quantities_reduce_to_components() {
        let f = DriverFamily::new(3, 2.0, false).unwrap();
        let state = [0.2, -0.1, 0.4];
        let b = f.component();
        let full = Subset::full(3);
        assert_eq!(f.z_subset(1.0, &state, full), 1.0);
        let only_second = Subset::from_indices(&[0, 2]);
        assert_eq!(f.z_subset(1.0, &state, only_second), b.azema(1.0, -0.1));
        assert_eq!(f.z_subset_vol(1.0, &state, only_second, 0), 0.0);
        assert_eq!(f.z_subset_vol(1.0, &state, only_second, 1), b.azema_vol(1.0, -0.1));
    }

    #[test]
    fn z_subset_vol_matches_finite_difference() {
        let f = DriverFamily::new(3, 2.0, false).unwrap();
        let h = 1e-6;
        let state = [0.2, -0.1, 0.4];
        for comp in 0..3 {
            let mut up = state;
            let mut dn = state;
            up[comp] += h;
            dn[comp] -= h;
            let fd = (f.z_subset(0.8, &up, Subset::EMPTY) - f.z_subset(0.8, &dn, Subset::EMPTY)) / (2.0 * h);
            assert!((fd - f.z_subset_vol(0.8, &state, Subset::EMPTY, comp)).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_oversized_families() {
        assert!(matches!(DriverFamily::new(11, 2.0, false), Err(Error::TooManyTimes(11))));
        assert!(DriverFamily::new(0, 2.0, false).is_err());
    }
}
