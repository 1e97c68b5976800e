//! Feature menus: test functions measurable in a given filtration.

use super::test::Feature;
use crate::error::{Error, Result};
use crate::grid_paths::{GridProcess, PathEnsemble, TimeGrid};
use crate::multi_expansion::Subset;
use crate::time_models::{DriverFamily, FamilySample, SingleTimeModel, TimeSample};

/// Stride that keeps only the quarter nodes of `grid`, or 1 when `K` is not
/// a multiple of 4.
pub fn quarter_stride(grid: &TimeGrid) -> usize {
    if grid.steps() % 4 == 0 {
        grid.steps() / 4
    } else {
        1
    }
}

fn on_coarse<F>(grid: &TimeGrid, stride: usize, n_paths: usize, f: F) -> Result<GridProcess>
where
    F: Fn(usize, usize, f64) -> f64 + Sync,
{
    let coarse = grid.coarsen(stride)?;
    Ok(GridProcess::from_path_fn(coarse, n_paths, |p, row| {
        for (j, v) in row.iter_mut().enumerate() {
            let fine = j * stride;
            *v = f(p, fine, grid.node(fine));
        }
    }))
}

/// `1` and `W^c_s` for `c < dim`: the driver filtration.
pub fn driver_features(ensemble: &PathEnsemble, dim: usize, stride: usize) -> Result<Vec<Feature>> {
    if dim > ensemble.dim() {
        return Err(Error::DriverDimension {
            needed: dim,
            available: ensemble.dim(),
        });
    }
    let grid = ensemble.grid();
    let n = ensemble.n_paths();
    let mut out = vec![Feature::new("1", on_coarse(grid, stride, n, |_, _, _| 1.0)?)];
    for c in 0..dim {
        let name = if dim == 1 { "W".to_string() } else { format!("W{}", c + 1) };
        out.push(Feature::new(
            name,
            on_coarse(grid, stride, n, |p, i, _| ensemble.value(p, i, c))?,
        ));
    }
    Ok(out)
}

/// Driver features plus `1{τ≤s}`, `τ∧s`, `Z_s`, and `X·1{τ≤s}` when `marked`.
pub fn progressive_features(
    ensemble: &PathEnsemble,
    model: &SingleTimeModel,
    samples: &[TimeSample],
    marked: bool,
    stride: usize,
) -> Result<Vec<Feature>> {
    if samples.len() != ensemble.n_paths() {
        return Err(Error::ShapeMismatch("one time sample per path required".into()));
    }
    if marked && samples.iter().any(|s| s.mark.is_none()) {
        return Err(Error::UnmarkedModel);
    }
    let grid = ensemble.grid();
    let n = ensemble.n_paths();
    let mut out = driver_features(ensemble, 1, stride)?;
    let ind = |p: usize, t: f64| if samples[p].tau <= t { 1.0 } else { 0.0 };
    out.push(Feature::new("1{tau<=s}", on_coarse(grid, stride, n, |p, _, t| ind(p, t))?));
    out.push(Feature::new(
        "tau^s",
        on_coarse(grid, stride, n, |p, _, t| samples[p].tau.min(t))?,
    ));
    out.push(Feature::new(
        "Z",
        on_coarse(grid, stride, n, |p, i, t| model.azema(t, ensemble.state(p, i)))?,
    ));
    if marked {
        out.push(Feature::new(
            "X*1{tau<=s}",
            on_coarse(grid, stride, n, |p, _, t| {
                samples[p].mark.unwrap_or(0.0) * ind(p, t)
            })?,
        ));
    }
    Ok(out)
}

/// Driver features, `1{τ_i≤s}` and `τ_i∧s` per time, `Z^∅_s`, and the marked
/// counting process when marks are present.
pub fn family_features(
    ensemble: &PathEnsemble,
    family: &DriverFamily,
    samples: &[FamilySample],
    stride: usize,
) -> Result<Vec<Feature>> {
    if samples.len() != ensemble.n_paths() {
        return Err(Error::ShapeMismatch("one family sample per path required".into()));
    }
    let grid = ensemble.grid();
    let n = ensemble.n_paths();
    let mut out = driver_features(ensemble, family.driver_dim(), stride)?;
    for i in 0..family.n_times() {
        out.push(Feature::new(
            format!("1{{tau{}<=s}}", i + 1),
            on_coarse(grid, stride, n, |p, _, t| {
                if samples[p].taus[i] <= t {
                    1.0
                } else {
                    0.0
                }
            })?,
        ));
        out.push(Feature::new(
            format!("tau{}^s", i + 1),
            on_coarse(grid, stride, n, |p, _, t| samples[p].taus[i].min(t))?,
        ));
    }
    out.push(Feature::new(
        "Z_empty",
        on_coarse(grid, stride, n, |p, i, t| {
            family.z_subset(t, ensemble.state(p, i), Subset::EMPTY)
        })?,
    ));
    if samples.iter().all(|s| s.marks.is_some()) {
        out.push(Feature::new(
            "N",
            on_coarse(grid, stride, n, |p, _, t| {
                let s = &samples[p];
                let marks = s.marks.as_ref().expect("checked");
                s.taus
                    .iter()
                    .zip(marks)
                    .filter(|(tau, _)| **tau <= t)
                    .map(|(_, x)| *x)
                    .sum()
            })?,
        ));
    }
    Ok(out)
}
