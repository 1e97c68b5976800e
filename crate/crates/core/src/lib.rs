//! Monte Carlo laboratory for semimartingale decompositions under
//! progressive expansions of a Brownian filtration.
//!
//! * [`grid_paths`]: grids, reproducible Brownian ensembles, grid calculus.
//! * [`time_models`]: random times with closed-form conditional laws.
//! * [`single_expansion`]: decomposition with one time or one marked time.
//! * [`multi_expansion`]: decomposition with several unordered times.
//! * [`martingale_lab`]: statistical martingale tests and identity checks.

pub mod error;
pub mod grid_paths;
pub mod martingale_lab;
pub mod multi_expansion;
pub mod numeric;
pub mod single_expansion;
pub mod time_models;

pub use error::{Error, Result};
pub use grid_paths::{make_grid, simulate_brownian, GridProcess, PathEnsemble, TimeGrid};
pub use single_expansion::{decompose_single, Decomposition, DriftMode, LocalMartingale, Profile};
pub use time_models::{DriverFamily, RandomTimeModel, SingleTimeModel, TimeSample};
