//! Decomposition of a continuous local martingale in the progressive
//! expansion with one random time, or with a marked time `(τ, X)`.
//!
//! Before τ the drift is the Jeulin–Yor compensator `∫ d⟨M,μ⟩ / Z_{s−}`;
//! after τ it is the Jacod density drift `∫ k_s(τ) d⟨M,W⟩_s`.

mod decompose;
mod jacod;
mod jeulin_yor;
mod local_martingale;

pub use decompose::{decompose_single, Decomposition, DriftMode, PluggedDrift};
pub use jacod::jacod_after_drift;
pub use jeulin_yor::{
    jeulin_yor_drift, jy_ingredients, BracketMethod, JyDrift, JyIngredients, TRUNCATION_LEVEL,
    Z_FLOOR,
};
pub(crate) use jeulin_yor::jy_increment;
pub use local_martingale::{LocalMartingale, Profile};

#[cfg(test)]
mod tests;
