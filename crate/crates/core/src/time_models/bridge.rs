//! τ = exp(W_{T0}) with the driver observed on `[0, t]`.
//!
//! Given `F_t`, `ln τ ~ N(W_t, T0 − t)`, so every conditional quantity is a
//! Gaussian closed form in the state `w = W_t`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::DensityEval;
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre_128, norm_cdf, norm_pdf};

/// Fraction of the anchor up to which Jacod's criterion is used.
pub const HORIZON_FRACTION: f64 = 0.9;

/// Half-width, in conditional standard deviations, of quadrature windows.
pub const QUADRATURE_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeLognormal {
    anchor: f64,
}

impl BridgeLognormal {
    pub fn new(anchor: f64) -> Result<Self> {
        if !(anchor.is_finite() && anchor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bridge anchor must be positive, got {anchor}"
            )));
        }
        Ok(Self { anchor })
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn time_limit(&self) -> f64 {
        HORIZON_FRACTION * self.anchor
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if t > self.time_limit() || t < 0.0 {
            return Err(Error::HorizonBreach {
                t,
                limit: self.time_limit(),
            });
        }
        Ok(())
    }

    #[inline]
    fn remaining(&self, t: f64) -> f64 {
        self.anchor - t
    }

    /// Conditional law of `ln τ` given `W_t = w`: `(mean, variance)`.
    #[inline]
    pub fn log_law(&self, t: f64, w: f64) -> (f64, f64) {
        (w, self.remaining(t))
    }

    /// Lebesgue density of `ln τ` at `y` given `W_t = w`.
    #[inline]
    pub fn log_density(&self, t: f64, w: f64, y: f64) -> f64 {
        let v = self.remaining(t);
        let sd = v.sqrt();
        norm_pdf((y - w) / sd) / sd
    }

    /// Jacod slope `k_t(u) = ∂_w ln p_t(u) = (ln u − w)/(T0 − t)`.
    #[inline]
    pub fn slope(&self, t: f64, w: f64, u: f64) -> f64 {
        (u.ln() - w) / self.remaining(t)
    }

    /// Density of τ with respect to its own law (so `p_0 ≡ 1`).
    pub fn eta_density(&self, t: f64, w: f64, u: f64) -> DensityEval {
        if !(u > 0.0) {
            return DensityEval::ZERO;
        }
        let y = u.ln();
        let v = self.remaining(t);
        let a = self.anchor;
        // p = f_t / f_0 in log coordinates; the 1/u Jacobians cancel.
        let p = (a / v).sqrt() * (-(y - w) * (y - w) / (2.0 * v) + y * y / (2.0 * a)).exp();
        let k = (y - w) / v;
        DensityEval { p, q: k * p, k }
    }

    /// Lebesgue density of τ in `u` (integrates to 1 over `du`).
    pub fn lebesgue_density(&self, t: f64, w: f64, u: f64) -> DensityEval {
        if !(u > 0.0) {
            return DensityEval::ZERO;
        }
        let y = u.ln();
        let p = self.log_density(t, w, y) / u;
        let k = (y - w) / self.remaining(t);
        DensityEval { p, q: k * p, k }
    }

    /// Azéma supermartingale `Z_t = P(τ > t | F_t) = P(W_{T0} > ln t | W_t = w)`.
    #[inline]
    pub fn azema(&self, t: f64, w: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        norm_cdf((w - t.ln()) / self.remaining(t).sqrt())
    }

    /// `∂_w Z_t`, the volatility of `Z` against the driver.
    #[inline]
    pub fn azema_vol(&self, t: f64, w: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let sd = self.remaining(t).sqrt();
        norm_pdf((w - t.ln()) / sd) / sd
    }

    /// `E[Z_{t1} | W_{t0} = w]`.
    ///
    /// Averaging `Φ((W_{t1} − ln t1)/√(T0 − t1))` over the Gaussian step
    /// widens the denominator to `√(T0 − t0)`.
    #[inline]
    pub fn azema_step_mean(&self, t0: f64, t1: f64, w: f64) -> f64 {
        if t1 <= 0.0 {
            return 1.0;
        }
        norm_cdf((w - t1.ln()) / self.remaining(t0).sqrt())
    }

    /// Draws `W_{T0}` given `W_T = w_end`.
    pub fn extend_to_anchor<R: Rng + ?Sized>(&self, horizon: f64, w_end: f64, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        w_end + (self.anchor - horizon).max(0.0).sqrt() * z
    }

    /// Quadrature window in log coordinates around the conditional mean.
    pub fn log_window(&self, t: f64, w: f64) -> (f64, f64) {
        let sd = self.remaining(t).sqrt();
        (w - QUADRATURE_SIGMAS * sd, w + QUADRATURE_SIGMAS * sd)
    }

    /// `∫ p_t(u) η(du)` over `u > lower` by 128-point Gauss–Legendre in `ln u`.
    pub fn eta_mass_above(&self, t: f64, w: f64, lower: f64) -> f64 {
        let (mut lo, hi) = self.log_window(t, w);
        if lower > 0.0 {
            lo = lo.max(lower.ln());
        }
        gauss_legendre_128().integrate(lo, hi, |y| {
            // η(du) in log coordinates is the N(0, T0) density.
            self.eta_density(t, w, y.exp()).p * self.log_density(0.0, 0.0, y)
        })
    }

    /// `∫_{u > lower} q_t(u) du` for the Lebesgue-density convention.
    pub fn lebesgue_q_mass_above(&self, t: f64, w: f64, lower: f64) -> f64 {
        let (mut lo, hi) = self.log_window(t, w);
        if lower > 0.0 {
            lo = lo.max(lower.ln());
        }
        gauss_legendre_128().integrate(lo, hi, |y| {
            let u = y.exp();
            // du = u dy
            self.lebesgue_density(t, w, u).q * u
        })
    }

    /// `∫_{u > lower} k_t(u) p_t(u) du` with `p` the Lebesgue density.
    pub fn lebesgue_kp_mass_above(&self, t: f64, w: f64, lower: f64) -> f64 {
        let (mut lo, hi) = self.log_window(t, w);
        if lower > 0.0 {
            lo = lo.max(lower.ln());
        }
        gauss_legendre_128().integrate(lo, hi, |y| {
            let d = self.lebesgue_density(t, w, y.exp());
            d.k * d.p * y.exp()
        })
    }
}
