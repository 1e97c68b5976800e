//! Bridge time carrying a ±1 mark, for the `(τ, X)` expansion.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::bridge::{BridgeLognormal, HORIZON_FRACTION};
use super::DensityEval;
use crate::error::{Error, Result};
use crate::numeric::{inverse_mills, norm_cdf};

/// How the mark `X ∈ {−1, +1}` is generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MarkLaw {
    /// Fair coin independent of everything else.
    Rademacher,
    /// `X = sign(W_{T0}) = sign(ln τ)`, a function of τ.
    AnchorSign,
    /// `X = sign(W_{at})` for a fixed `at` strictly between the horizon and
    /// the anchor; carries information about the driver beyond τ.
    IntermediateSign { at: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkedBridge {
    bridge: BridgeLognormal,
    mark: MarkLaw,
}

#[inline]
fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl MarkedBridge {
    pub fn new(bridge: BridgeLognormal, mark: MarkLaw) -> Result<Self> {
        if let MarkLaw::IntermediateSign { at } = mark {
            if !(at > 0.0 && at < bridge.anchor()) {
                return Err(Error::InvalidArgument(format!(
                    "mark time {at} must lie in (0, anchor = {})",
                    bridge.anchor()
                )));
            }
        }
        Ok(Self { bridge, mark })
    }

    pub fn bridge(&self) -> &BridgeLognormal {
        &self.bridge
    }

    pub fn mark_law(&self) -> MarkLaw {
        self.mark
    }

    pub fn time_limit(&self) -> f64 {
        match self.mark {
            MarkLaw::IntermediateSign { at } => HORIZON_FRACTION * at,
            _ => self.bridge.time_limit(),
        }
    }

    /// Draws `(τ, X)` given the driver value `w_end` at the horizon.
    pub fn sample<R: Rng + ?Sized>(&self, horizon: f64, w_end: f64, rng: &mut R) -> (f64, f64) {
        match self.mark {
            MarkLaw::Rademacher => {
                let w_anchor = self.bridge.extend_to_anchor(horizon, w_end, rng);
                let x = if rng.random::<bool>() { 1.0 } else { -1.0 };
                (w_anchor.exp(), x)
            }
            MarkLaw::AnchorSign => {
                let w_anchor = self.bridge.extend_to_anchor(horizon, w_end, rng);
                (w_anchor.exp(), sign(w_anchor))
            }
            MarkLaw::IntermediateSign { at } => {
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                let w_at = w_end + (at - horizon).max(0.0).sqrt() * z1;
                let w_anchor = w_at + (self.bridge.anchor() - at).sqrt() * z2;
                (w_anchor.exp(), sign(w_at))
            }
        }
    }

    /// Conditional law of `W_at` given `W_t = w` and `W_{T0} = y`: `(mean, sd)`.
    fn mark_driver_law(&self, at: f64, t: f64, w: f64, y: f64) -> (f64, f64) {
        let a = self.bridge.anchor();
        let v = a - t;
        let mean = w + (at - t) / v * (y - w);
        let var = (at - t) * (a - at) / v;
        (mean, var.sqrt())
    }

    /// `P(X = x | F_t, ln τ = y)`.
    fn mark_likelihood(&self, t: f64, w: f64, y: f64, x: f64) -> f64 {
        match self.mark {
            MarkLaw::Rademacher => 0.5,
            MarkLaw::AnchorSign => {
                if sign(y) == x {
                    1.0
                } else {
                    0.0
                }
            }
            MarkLaw::IntermediateSign { at } => {
                let (m, s) = self.mark_driver_law(at, t, w, y);
                norm_cdf(x * m / s)
            }
        }
    }

    /// Joint density of `(τ, X)` w.r.t. their law, with slope and volatility.
    pub fn eta_density(&self, t: f64, w: f64, u: f64, x: f64) -> DensityEval {
        let base = self.bridge.eta_density(t, w, u);
        if base.p == 0.0 {
            return DensityEval::ZERO;
        }
        let y = u.ln();
        let now = self.mark_likelihood(t, w, y, x);
        let prior = self.mark_likelihood(0.0, 0.0, y, x);
        if now == 0.0 || prior == 0.0 {
            return DensityEval::ZERO;
        }
        let p = base.p * now / prior;
        let k = self.slope(t, w, u, x);
        DensityEval { p, q: k * p, k }
    }

    /// Jacod slope `∂_w ln p_t(u, x)` of the joint density.
    pub fn slope(&self, t: f64, w: f64, u: f64, x: f64) -> f64 {
        let base = self.bridge.slope(t, w, u);
        match self.mark {
            MarkLaw::Rademacher | MarkLaw::AnchorSign => base,
            MarkLaw::IntermediateSign { at } => {
                let y = u.ln();
                let a = self.bridge.anchor();
                let (m, s) = self.mark_driver_law(at, t, w, y);
                let dm_dw = (a - at) / (a - t);
                base + x * inverse_mills(x * m / s) * dm_dw / s
            }
        }
    }
}
