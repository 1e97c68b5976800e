//! Small numerical kernels shared by the models and the test harness.

mod normal;
mod quadrature;
mod sum;

pub use normal::{inverse_mills, norm_cdf, norm_pdf, norm_sf};
pub use quadrature::{gauss_legendre_128, GaussLegendre};
pub use sum::{mean_and_se, pairwise_sum};
