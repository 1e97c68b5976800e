//! Random times independent of the driver: the null-drift controls.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of a time independent of the driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeLaw {
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
}

impl TimeLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TimeLaw::Exponential { rate } => rate.is_finite() && rate > 0.0,
            TimeLaw::Weibull { shape, scale } => {
                shape.is_finite() && shape > 0.0 && scale.is_finite() && scale > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid time law {self:?}")))
        }
    }

    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match *self {
            TimeLaw::Exponential { rate } => (-rate * t).exp(),
            TimeLaw::Weibull { shape, scale } => (-(t / scale).powf(shape)).exp(),
        }
    }

    /// Inverse survival function, `S^{-1}(v)` for `v ∈ (0, 1]`.
    pub fn inverse_survival(&self, v: f64) -> f64 {
        let e = -v.ln();
        match *self {
            TimeLaw::Exponential { rate } => e / rate,
            TimeLaw::Weibull { shape, scale } => scale * e.powf(1.0 / shape),
        }
    }
}

/// τ independent of the driver with a given law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependentTime {
    law: TimeLaw,
}

impl IndependentTime {
    pub fn new(law: TimeLaw) -> Result<Self> {
        law.validate()?;
        Ok(Self { law })
    }

    pub fn law(&self) -> TimeLaw {
        self.law
    }

    pub fn azema(&self, t: f64) -> f64 {
        self.law.survival(t)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // 1 - U lies in (0, 1], so the logarithm is finite.
        let v = 1.0 - rng.random::<f64>();
        self.law.inverse_survival(v)
    }
}

/// Default time with a deterministic hazard rate `λ`.
///
/// Sampled as the first time the cumulative hazard `Λ(t) = λt` exceeds an
/// independent unit exponential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoxDeterministic {
    intensity: f64,
}

impl CoxDeterministic {
    pub fn new(intensity: f64) -> Result<Self> {
        if !(intensity.is_finite() && intensity > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "hazard intensity must be positive, got {intensity}"
            )));
        }
        Ok(Self { intensity })
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn cumulative_hazard(&self, t: f64) -> f64 {
        self.intensity * t.max(0.0)
    }

    pub fn azema(&self, t: f64) -> f64 {
        (-self.cumulative_hazard(t)).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let threshold = -(1.0 - rng.random::<f64>()).ln();
        threshold / self.intensity
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cox_survival_value() {
        let m = CoxDeterministic::new(1.0).unwrap();
        assert!((m.azema(0.5) - (-0.5f64).exp()).abs() < 1e-16);
        assert!((m.azema(0.5) - 0.6065306597126334).abs() < 1e-15);
        assert_eq!(m.azema(0.0), 1.0);
    }

    #[test]
    fn weibull_inverse_roundtrip() {
        let law = TimeLaw::Weibull {
            shape: 1.7,
            scale: 0.8,
        };
        for v in [0.1, 0.5, 0.93] {
            assert!((law.survival(law.inverse_survival(v)) - v).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(IndependentTime::new(TimeLaw::Exponential { rate: 0.0 }).is_err());
        assert!(CoxDeterministic::new(-1.0).is_err());
    }
}
