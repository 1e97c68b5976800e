//! Statistical and identity checks for the decompositions.
//!
//! The martingale test regresses increments `N_t − N_s` on test functions
//! measurable at `s`; a process is accepted as a martingale when every
//! `|z| < 4` and rejected when some `|z| > 10`.

mod features;
mod lemma;
mod regression;
mod shrinkage;
mod test;

pub use features::{driver_features, family_features, progressive_features, quarter_stride};
pub use lemma::{conditional_increment_lemma_check, projection_lemma_process, LemmaIntegrand};
pub use regression::{density_martingale_regression, ols_hc0};
pub use shrinkage::{
    q_integral_max, shrinkage_check, shrinkage_lhs, shrinkage_negative_control, state_lattice,
    ShrinkageReport,
};
pub use test::{
    martingale_test, quarter_pairs, Feature, MartingaleAccumulator, TestReport, TestStat, Verdict,
    Z_FAIL, Z_PASS,
};

/// Default block size for streaming ensembles through a test.
pub const DEFAULT_CHUNK: usize = 8192;

/// Splits `total` paths into consecutive `(offset, len)` blocks.
pub fn chunks(total: usize, chunk: usize) -> impl Iterator<Item = (u64, usize)> {
    let chunk = chunk.max(1);
    (0..total.div_ceil(chunk)).map(move |k| {
        let off = k * chunk;
        (off as u64, chunk.min(total - off))
    })
}
