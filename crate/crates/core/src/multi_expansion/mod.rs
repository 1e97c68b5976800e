//! Progressive expansion with `n` unordered random times.
//!
//! For each index set `I`, `σ_I` is the largest time in `I` and `ρ_I` the
//! smallest time outside it. On the active window `[σ_I, ρ_I)` the expanded
//! filtration agrees with `F` initially enlarged by `τ_I`, so the drift is
//! assembled window by window.

mod density;
mod drift;
mod subsets;

pub use density::{
    marginal_density, marginal_density_quadrature, z_subset, z_subset_quadrature,
    MAX_QUADRATURE_DIMS,
};
pub use drift::{
    active_windows, gluing_residual, mark_at_rho, multi_drift, n_process, snapped_nodes,
    telescope_residual, NodeWindow,
};
pub use subsets::{subset_quantities, subset_window_nodes, Subset, SubsetWindow, MAX_TIMES};

#[cfg(test)]
mod tests;
