use rayon::prelude::*;

use super::grid::TimeGrid;
use crate::error::{Error, Result};

/// A real-valued process sampled on a grid, one row per path.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProcess {
    grid: TimeGrid,
    n_paths: usize,
    values: Vec<f64>,
}

impl GridProcess {
    pub fn new(grid: TimeGrid, n_paths: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_paths * grid.n_nodes() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} paths x {} nodes",
                values.len(),
                n_paths,
                grid.n_nodes()
            )));
        }
        Ok(Self {
            grid,
            n_paths,
            values,
        })
    }

    pub fn zeros(grid: TimeGrid, n_paths: usize) -> Self {
        Self {
            grid,
            n_paths,
            values: vec![0.0; n_paths * grid.n_nodes()],
        }
    }

    /// Fills each path row in parallel; `fill(p, row)` writes node values.
    pub fn from_path_fn<F>(grid: TimeGrid, n_paths: usize, fill: F) -> Self
    where
        F: Fn(usize, &mut [f64]) + Sync,
    {
        let mut out = Self::zeros(grid, n_paths);
        let width = grid.n_nodes();
        out.values
            .par_chunks_mut(width)
            .enumerate()
            .for_each(|(p, row)| fill(p, row));
        out
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, path: usize, node: usize) -> f64 {
        self.values[path * self.grid.n_nodes() + node]
    }

    #[inline]
    pub fn path(&self, path: usize) -> &[f64] {
        let w = self.grid.n_nodes();
        &self.values[path * w..(path + 1) * w]
    }

    pub fn path_mut(&mut self, path: usize) -> &mut [f64] {
        let w = self.grid.n_nodes();
        &mut self.values[path * w..(path + 1) * w]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.grid.n_nodes())
    }

    /// Values of all paths at one node.
    pub fn column(&self, node: usize) -> Vec<f64> {
        self.rows().map(|r| r[node]).collect()
    }

    pub fn terminal(&self) -> Vec<f64> {
        self.column(self.grid.steps())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_same_shape(&self, other: &GridProcess) -> Result<()> {
        if self.grid != other.grid || self.n_paths != other.n_paths {
            return Err(Error::ShapeMismatch(format!(
                "({} paths, {} steps) vs ({} paths, {} steps)",
                self.n_paths,
                self.grid.steps(),
                other.n_paths,
                other.grid.steps()
            )));
        }
        Ok(())
    }

    /// Pointwise combination of two processes of the same shape.
    pub fn zip_with<F>(&self, other: &GridProcess, f: F) -> Result<GridProcess>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        self.ensure_same_shape(other)?;
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(GridProcess {
            grid: self.grid,
            n_paths: self.n_paths,
            values,
        })
    }

    pub fn map<F>(&self, f: F) -> GridProcess
    where
        F: Fn(f64) -> f64 + Sync,
    {
        GridProcess {
            grid: self.grid,
            n_paths: self.n_paths,
            values: self.values.par_iter().map(|v| f(*v)).collect(),
        }
    }

    /// Keeps every `stride`-th node, e.g. to retain only test nodes.
    pub fn restrict(&self, stride: usize) -> Result<GridProcess> {
        let coarse = self.grid.coarsen(stride)?;
        let mut values = Vec::with_capacity(self.n_paths * coarse.n_nodes());
        for row in self.rows() {
            values.extend(row.iter().step_by(stride).copied());
        }
        GridProcess::new(coarse, self.n_paths, values)
    }

    /// Stacks path blocks that share a grid.
    pub fn concat(parts: &[GridProcess]) -> Result<GridProcess> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
        let mut values = Vec::new();
        let mut n_paths = 0;
        for part in parts {
            if part.grid != first.grid {
                return Err(Error::ShapeMismatch("blocks on different grids".into()));
            }
            values.extend_from_slice(&part.values);
            n_paths += part.n_paths;
        }
        GridProcess::new(first.grid, n_paths, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_paths::make_grid;

    #[test]
    fn restrict_and_concat() {
        let g = make_grid(1.0, 4).unwrap();
        let a = GridProcess::from_path_fn(g, 2, |p, row| {
            for (i, v) in row.iter_mut().enumerate() {
                *v = (10 * p + i) as f64;
            }
        });
        let r = a.restrict(2).unwrap();
        assert_eq!(r.path(1), &[10.0, 12.0, 14.0]);
        let c = GridProcess::concat(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(c.n_paths(), 4);
        assert_eq!(c.path(3), a.path(1));
        assert!(GridProcess::new(g, 3, vec![0.0; 5]).is_err());
    }
}
