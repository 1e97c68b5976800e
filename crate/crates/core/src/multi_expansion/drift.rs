use rayon::prelude::*;

use super::subsets::{subset_window_nodes, Subset};
use crate::error::{Error, Result};
use crate::grid_paths::{GridProcess, PathEnsemble, TimeGrid};
use crate::single_expansion::{jy_increment, Decomposition, LocalMartingale, TRUNCATION_LEVEL};
use crate::time_models::{DriverFamily, FamilySample};

/// Non-empty active window `[σ_I, ρ_I)` of a subset, in node indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeWindow {
    pub subset: Subset,
    pub start: usize,
    /// Exclusive end; `usize::MAX` when `ρ_I = ∞`.
    pub end: usize,
}

/// Snapped node index of every time, by the "first node `≥ τ`" rule.
pub fn snapped_nodes(grid: &TimeGrid, taus: &[f64]) -> Vec<usize> {
    taus.iter().map(|&t| grid.snap_up(t)).collect()
}

/// Active windows with at least one node, found by enumerating all `2^n`
/// subsets, ordered by start.
pub fn active_windows(nodes: &[usize]) -> Vec<NodeWindow> {
    let mut out: Vec<NodeWindow> = Subset::all(nodes.len())
        .filter_map(|subset| {
            let (start, end) = subset_window_nodes(nodes, subset);
            (start < end).then_some(NodeWindow { subset, start, end })
        })
        .collect();
    out.sort_by_key(|w| (w.start, w.subset.len()));
    out
}

/// `max |Σ_I 1{σ_I≤ρ_I}(M_{t∧ρ_I} − M_{t∧σ_I}) − (M_t − M_0)|` over nodes
/// and paths, with times snapped to the grid; `taus` holds `n` per path.
pub fn telescope_residual(m: &GridProcess, taus: &[f64], n: usize) -> Result<f64> {
    check_times(m.n_paths(), taus.len(), n)?;
    let grid = *m.grid();
    Ok((0..m.n_paths())
        .into_par_iter()
        .map(|p| {
            let nodes = snapped_nodes(&grid, &taus[p * n..(p + 1) * n]);
            let x = m.path(p);
            let mut worst = 0.0f64;
            for j in 0..grid.n_nodes() {
                let mut sum = 0.0;
                for subset in Subset::all(n) {
                    let (s, r) = subset_window_nodes(&nodes, subset);
                    if s <= r {
                        sum += x[j.min(r)] - x[j.min(s)];
                    }
                }
                worst = worst.max((sum - (x[j] - x[0])).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max))
}

/// Window process `N_t = X_{t∧ρ_I} − X_{t∧σ_I}` on node indices.
fn window_value(x: &[f64], start: usize, end: usize, j: usize) -> f64 {
    x[j.min(end)] - x[j.min(start)]
}

/// Largest violation of `N_{t∧T} = N_{t∧T'}` with `T' = (σ_I∨T)∧(ρ_I∨c)`,
/// over active subsets, stopping nodes `T` and nodes `t`.
pub fn gluing_residual(x: &GridProcess, taus: &[f64], n: usize, c: f64) -> Result<f64> {
    check_times(x.n_paths(), taus.len(), n)?;
    let grid = *x.grid();
    let c_idx = grid.snap_up(c);
    Ok((0..x.n_paths())
        .into_par_iter()
        .map(|p| {
            let nodes = snapped_nodes(&grid, &taus[p * n..(p + 1) * n]);
            let row = x.path(p);
            let mut worst = 0.0f64;
            for subset in Subset::all(n) {
                let (s, r) = subset_window_nodes(&nodes, subset);
                if s > r {
                    continue;
                }
                for stop in 0..grid.n_nodes() {
                    let glued = s.max(stop).min(r.max(c_idx));
                    for j in 0..grid.n_nodes() {
                        let a = window_value(row, s, r, j.min(stop));
                        let b = window_value(row, s, r, j.min(glued));
                        worst = worst.max((a - b).abs());
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max))
}

fn check_times(n_paths: usize, len: usize, n: usize) -> Result<()> {
    if n == 0 || n > super::MAX_TIMES {
        return Err(Error::TooManyTimes(n));
    }
    if len != n_paths * n {
        return Err(Error::ShapeMismatch(format!(
            "{len} times for {n_paths} paths x {n}"
        )));
    }
    Ok(())
}

/// Drift of `M` in the progressive expansion with all times of the family.
///
/// On each active window `[σ_I, ρ_I)` the increment is the `𝔾^I` Jacod drift
/// (slope of `p^I` at `τ_I`) plus the Jeulin–Yor term `d⟨M, μ^I⟩ / Z^I`.
/// The Jeulin–Yor parts accumulate in `drift_before`, the Jacod parts in
/// `drift_after`. Independent marks carry no information about the driver,
/// so marked families yield the same drift.
pub fn multi_drift(
    m: &LocalMartingale,
    family: &DriverFamily,
    ensemble: &PathEnsemble,
    samples: &[FamilySample],
) -> Result<Decomposition> {
    let n = family.n_times();
    if n > super::MAX_TIMES {
        return Err(Error::TooManyTimes(n));
    }
    family.check_time(ensemble.grid().horizon())?;
    if ensemble.dim() < family.driver_dim() {
        return Err(Error::DriverDimension {
            needed: family.driver_dim(),
            available: ensemble.dim(),
        });
    }
    if samples.len() != ensemble.n_paths() || samples.iter().any(|s| s.taus.len() != n) {
        return Err(Error::ShapeMismatch("family samples do not match the ensemble".into()));
    }
    let original = m.path_values(ensemble)?;
    let grid = *ensemble.grid();
    let dt = grid.dt();
    let width = grid.n_nodes();
    let n_paths = ensemble.n_paths();
    let mut before = vec![0.0; n_paths * width];
    let mut after = vec![0.0; n_paths * width];
    let mut truncated = vec![false; n_paths];
    before
        .par_chunks_mut(width)
        .zip(after.par_chunks_mut(width))
        .zip(truncated.par_iter_mut())
        .enumerate()
        .for_each(|(p, ((row_b, row_a), flag))| {
            let taus = &samples[p].taus;
            let windows = active_windows(&snapped_nodes(&grid, taus));
            let full = Subset::full(n);
            let (mut acc_b, mut acc_a) = (0.0, 0.0);
            for i in 0..grid.steps() {
                if !*flag {
                    let t = grid.node(i);
                    let state = ensemble.state(p, i);
                    for w in windows.iter().filter(|w| w.start <= i && i < w.end) {
                        let subset = w.subset;
                        if subset != full {
                            let z = family.z_subset(t, state, subset);
                            if z < TRUNCATION_LEVEL {
                                *flag = true;
                                break;
                            }
                            let mut d = 0.0;
                            for c in 0..n {
                                d += m.vol(c, t) * family.z_subset_vol(t, state, subset, c) * dt;
                            }
                            acc_b += jy_increment(d, z);
                        }
                        if !subset.is_empty() {
                            let mut a = 0.0;
                            for c in subset.indices() {
                                a += family.subset_slope(t, state, subset, taus, c) * m.vol(c, t) * dt;
                            }
                            acc_a += a;
                        }
                    }
                }
                row_b[i + 1] = acc_b;
                row_a[i + 1] = acc_a;
            }
        });
    let taus = samples.iter().flat_map(|s| s.taus.iter().copied()).collect();
    Decomposition::assemble(
        original,
        GridProcess::new(grid, n_paths, before)?,
        GridProcess::new(grid, n_paths, after)?,
        taus,
        n,
        truncated,
    )
}

/// `N^n_t = Σ_i X_i 1{τ_i ≤ t}` on the grid.
pub fn n_process(grid: &TimeGrid, samples: &[FamilySample]) -> Result<GridProcess> {
    if samples.iter().any(|s| s.marks.is_none()) {
        return Err(Error::UnmarkedModel);
    }
    Ok(GridProcess::from_path_fn(*grid, samples.len(), |p, row| {
        let s = &samples[p];
        let marks = s.marks.as_ref().expect("checked above");
        for (j, v) in row.iter_mut().enumerate() {
            let t = grid.node(j);
            *v = s
                .taus
                .iter()
                .zip(marks)
                .filter(|(tau, _)| **tau <= t)
                .map(|(_, x)| *x)
                .sum();
        }
    }))
}

/// `Y_I = X_{i*}` with `τ_{i*} = ρ_I`, the first time outside `I`; `None`
/// when `I` is the full set.
pub fn mark_at_rho(taus: &[f64], marks: &[f64], subset: Subset) -> Option<f64> {
    taus.iter()
        .enumerate()
        .filter(|(i, _)| !subset.contains(*i))
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| marks[i])
}
