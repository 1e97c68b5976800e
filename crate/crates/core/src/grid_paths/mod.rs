//! Time grids, reproducible Brownian ensembles and left-point stochastic
//! calculus on the grid.

mod calculus;
mod ensemble;
mod grid;
mod process;
mod rng;

pub use calculus::{covariation, ito_integrate};
pub use ensemble::{simulate_brownian, simulate_brownian_block, PathEnsemble};
pub use grid::{make_grid, TimeGrid};
pub use process::GridProcess;
pub use rng::{path_rng, StreamDomain};
