use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_paths::{GridProcess, TimeGrid};
use crate::numeric::mean_and_se;

/// `|z|` below which a statistic passes.
pub const Z_PASS: f64 = 4.0;
/// `|z|` above which a statistic fails.
pub const Z_FAIL: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_max_abs_z(z: f64) -> Verdict {
        if z < Z_PASS {
            Verdict::Pass
        } else if z > Z_FAIL {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }
}

/// A test function evaluated on the test grid; only its values at the left
/// end of each pair are used.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub name: String,
    pub values: GridProcess,
}

impl Feature {
    pub fn new(name: impl Into<String>, values: GridProcess) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestStat {
    pub s: f64,
    pub t: f64,
    pub feature: String,
    pub mean: f64,
    pub se: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub n_paths: usize,
    pub features: Vec<String>,
    pub stats: Vec<TestStat>,
    /// Statistics not computed, with the reason.
    pub skipped: Vec<String>,
    pub max_abs_z: f64,
    pub verdict: Verdict,
}

impl TestReport {
    pub(crate) fn from_stats(
        n_paths: usize,
        features: Vec<String>,
        stats: Vec<TestStat>,
        skipped: Vec<String>,
    ) -> Self {
        let max_abs_z = stats.iter().map(|s| s.z.abs()).fold(0.0, f64::max);
        Self {
            n_paths,
            features,
            stats,
            skipped,
            max_abs_z,
            verdict: Verdict::from_max_abs_z(max_abs_z),
        }
    }

    /// Largest `|z|` over the pairs ending at time `t`.
    pub fn max_abs_z_ending_at(&self, t: f64) -> f64 {
        self.stats
            .iter()
            .filter(|s| s.t == t)
            .map(|s| s.z.abs())
            .fold(0.0, f64::max)
    }

    pub fn stat(&self, s: f64, feature: &str) -> Option<&TestStat> {
        self.stats.iter().find(|x| x.s == s && x.feature == feature)
    }
}

/// `(0, T/4), (T/4, T/2), (T/2, 3T/4), (3T/4, T)`.
pub fn quarter_pairs(horizon: f64) -> Vec<(f64, f64)> {
    (0..4)
        .map(|k| (horizon * k as f64 / 4.0, horizon * (k + 1) as f64 / 4.0))
        .collect()
}

fn pair_indices(grid: &TimeGrid, pairs: &[(f64, f64)]) -> Result<Vec<(usize, usize)>> {
    pairs
        .iter()
        .map(|&(s, t)| match (grid.index_of(s), grid.index_of(t)) {
            (Some(i), Some(j)) if i < j => Ok((i, j)),
            _ => Err(Error::InvalidArgument(format!(
                "pair ({s}, {t}) is not an increasing pair of grid nodes"
            ))),
        })
        .collect()
}

/// Collects `f_s · (N_t − N_s)` path by path, possibly over several blocks.
///
/// Blocks must be pushed in path order; statistics are then identical to a
/// single pass over all paths.
#[derive(Debug, Clone)]
pub struct MartingaleAccumulator {
    pairs: Vec<(f64, f64)>,
    features: Vec<String>,
    products: Vec<Vec<f64>>,
    nonzero: Vec<bool>,
    n_paths: usize,
}

impl MartingaleAccumulator {
    pub fn new(pairs: &[(f64, f64)]) -> Self {
        Self {
            pairs: pairs.to_vec(),
            features: Vec::new(),
            products: Vec::new(),
            nonzero: Vec::new(),
            n_paths: 0,
        }
    }

    pub fn push(&mut self, n: &GridProcess, features: &[Feature]) -> Result<()> {
        let names: Vec<String> = features.iter().map(|f| f.name.clone()).collect();
        if self.features.is_empty() {
            self.features = names;
            let slots = self.features.len() * self.pairs.len();
            self.products = vec![Vec::new(); slots];
            self.nonzero = vec![false; slots];
        } else if self.features != names {
            return Err(Error::InvalidArgument("feature menu changed between blocks".into()));
        }
        for f in features {
            n.ensure_same_shape(&f.values)?;
        }
        let idx = pair_indices(n.grid(), &self.pairs)?;
        for (fi, f) in features.iter().enumerate() {
            for (pi, &(i, j)) in idx.iter().enumerate() {
                let slot = fi * self.pairs.len() + pi;
                let out = &mut self.products[slot];
                for p in 0..n.n_paths() {
                    let fs = f.values.value(p, i);
                    self.nonzero[slot] |= fs != 0.0;
                    out.push(fs * (n.value(p, j) - n.value(p, i)));
                }
            }
        }
        self.n_paths += n.n_paths();
        Ok(())
    }

    pub fn finish(self) -> TestReport {
        let mut stats = Vec::new();
        let mut skipped = Vec::new();
        for (pi, &(s, t)) in self.pairs.iter().enumerate() {
            for (fi, name) in self.features.iter().enumerate() {
                let slot = fi * self.pairs.len() + pi;
                let (mean, se) = mean_and_se(&self.products[slot]);
                if !self.nonzero[slot] || !(se > 0.0) {
                    skipped.push(format!("{name} at s={s}: zero variance"));
                    continue;
                }
                stats.push(TestStat {
                    s,
                    t,
                    feature: name.clone(),
                    mean,
                    se,
                    z: mean / se,
                });
            }
        }
        TestReport::from_stats(self.n_paths, self.features, stats, skipped)
    }
}

/// Increment-regression martingale test: for each pair `(s, t)` and feature
/// `f`, `z = mean(f_s (N_t − N_s)) / SE`.
///
/// Features must be measurable at `s` in the tested filtration; the menus in
/// this module are built that way.
pub fn martingale_test(
    n: &GridProcess,
    features: &[Feature],
    pairs: &[(f64, f64)],
) -> Result<TestReport> {
    let mut acc = MartingaleAccumulator::new(pairs);
    acc.push(n, features)?;
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_paths::{make_grid, simulate_brownian};

    #[test]
    fn verdict_thresholds() {
        assert_eq!(Verdict::from_max_abs_z(3.9), Verdict::Pass);
        assert_eq!(Verdict::from_max_abs_z(7.0), Verdict::Inconclusive);
        assert_eq!(Verdict::from_max_abs_z(10.5), Verdict::Fail);
    }

    #[test]
    fn deterministic_drift_is_detected() {
        let g = make_grid(1.0, 8).unwrap();
        let e = simulate_brownian(g, 1, 20_000, 2).unwrap();
        let w = e.component(0).unwrap();
        let one = Feature::new("1", w.map(|_| 1.0));
        let drifted = GridProcess::from_path_fn(g, 20_000, |p, row| {
            for (i, v) in row.iter_mut().enumerate() {
                *v = w.value(p, i) + g.node(i);
            }
        });
        let pairs = quarter_pairs(1.0);
        let ok = martingale_test(&w, &[one.clone(), Feature::new("W", w.clone())], &pairs).unwrap();
        assert_eq!(ok.verdict, Verdict::Pass);
        assert_eq!(ok.skipped.len(), 1, "W_0 = 0 has no variance");
        let bad = martingale_test(&drifted, &[one], &pairs).unwrap();
        // z ≈ (t − s) / sqrt((t − s) / n) = 0.25 · sqrt(4 n)
        let expected = (0.25f64 * 20_000.0).sqrt();
        assert!((bad.stats[3].z - expected).abs() < 5.0);
        assert_eq!(bad.verdict, Verdict::Fail);
    }

    #[test]
    fn blocks_match_single_pass() {
        let g = make_grid(1.0, 4).unwrap();
        let e = simulate_brownian(g, 1, 100, 3).unwrap();
        let w = e.component(0).unwrap();
        let f = Feature::new("W", w.clone());
        let whole = martingale_test(&w, &[f], &quarter_pairs(1.0)).unwrap();
        let mut acc = MartingaleAccumulator::new(&quarter_pairs(1.0));
        for (off, len) in [(0usize, 40usize), (40, 60)] {
            let vals: Vec<f64> = w.values()[off * 5..(off + len) * 5].to_vec();
            let part = GridProcess::new(g, len, vals).unwrap();
            acc.push(&part, &[Feature::new("W", part.clone())]).unwrap();
        }
        assert_eq!(acc.finish(), whole);
    }

    #[test]
    fn pairs_must_be_nodes() {
        let g = make_grid(1.0, 4).unwrap();
        let w = GridProcess::zeros(g, 3);
        assert!(martingale_test(&w, &[], &[(0.0, 0.3)]).is_err());
    }
}
