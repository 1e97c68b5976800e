use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::grid::TimeGrid;
use super::process::GridProcess;
use super::rng::{path_rng, StreamDomain};
use crate::error::{Error, Result};

/// Dense block of `d`-dimensional driver paths, laid out `[path][node][component]`.
///
/// Path `p` of the block is global path `stream_offset + p`; its numbers come
/// from that global index only.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    grid: TimeGrid,
    dim: usize,
    n_paths: usize,
    seed: u64,
    stream_offset: u64,
    values: Vec<f64>,
}

/// Independent standard Brownian motions started at 0.
pub fn simulate_brownian(
    grid: TimeGrid,
    dim: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    simulate_brownian_block(grid, dim, n_paths, seed, 0)
}

/// Like [`simulate_brownian`] for global paths `stream_offset..stream_offset + n_paths`.
pub fn simulate_brownian_block(
    grid: TimeGrid,
    dim: usize,
    n_paths: usize,
    seed: u64,
    stream_offset: u64,
) -> Result<PathEnsemble> {
    if dim == 0 {
        return Err(Error::InvalidArgument("driver dimension must be >= 1".into()));
    }
    if n_paths == 0 {
        return Err(Error::InvalidArgument("path count must be >= 1".into()));
    }
    let width = grid.n_nodes() * dim;
    let sd = grid.dt().sqrt();
    let mut values = vec![0.0; n_paths * width];
    values
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(p, row)| {
            let mut rng = path_rng(seed, StreamDomain::Driver, stream_offset + p as u64);
            for i in 0..grid.steps() {
                for c in 0..dim {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    row[(i + 1) * dim + c] = row[i * dim + c] + sd * z;
                }
            }
        });
    Ok(PathEnsemble {
        grid,
        dim,
        n_paths,
        seed,
        stream_offset,
        values,
    })
}

impl PathEnsemble {
    /// Wraps externally produced driver values.
    pub fn from_values(
        grid: TimeGrid,
        dim: usize,
        n_paths: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 || values.len() != n_paths * grid.n_nodes() * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {n_paths} paths x {} nodes x {dim} components",
                values.len(),
                grid.n_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite driver value".into()));
        }
        Ok(Self {
            grid,
            dim,
            n_paths,
            seed: 0,
            stream_offset: 0,
            values,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_offset(&self) -> u64 {
        self.stream_offset
    }

    /// Global index of block path `p`.
    pub fn global_index(&self, p: usize) -> u64 {
        self.stream_offset + p as u64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, path: usize, node: usize, comp: usize) -> f64 {
        self.values[(path * self.grid.n_nodes() + node) * self.dim + comp]
    }

    /// Whole path `p`, node-major.
    #[inline]
    pub fn path(&self, path: usize) -> &[f64] {
        let w = self.grid.n_nodes() * self.dim;
        &self.values[path * w..(path + 1) * w]
    }

    /// Driver state `(W^1_t, …, W^d_t)` at one node.
    #[inline]
    pub fn state(&self, path: usize, node: usize) -> &[f64] {
        let start = (path * self.grid.n_nodes() + node) * self.dim;
        &self.values[start..start + self.dim]
    }

    /// Keeps every `stride`-th node of every path.
    pub fn restrict(&self, stride: usize) -> Result<PathEnsemble> {
        let coarse = self.grid.coarsen(stride)?;
        let mut values = Vec::with_capacity(self.n_paths * coarse.n_nodes() * self.dim);
        for p in 0..self.n_paths {
            for j in 0..coarse.n_nodes() {
                values.extend_from_slice(self.state(p, j * stride));
            }
        }
        Ok(PathEnsemble {
            grid: coarse,
            values,
            ..*self
        })
    }

    /// Stacks consecutive blocks of one ensemble.
    pub fn concat(parts: &[PathEnsemble]) -> Result<PathEnsemble> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
        let mut values = Vec::new();
        let mut n_paths = 0;
        for part in parts {
            if part.grid != first.grid || part.dim != first.dim {
                return Err(Error::ShapeMismatch("blocks with different shapes".into()));
            }
            values.extend_from_slice(&part.values);
            n_paths += part.n_paths;
        }
        Ok(PathEnsemble {
            n_paths,
            values,
            ..*first
        })
    }

    pub fn component(&self, comp: usize) -> Result<GridProcess> {
        if comp >= self.dim {
            return Err(Error::DriverDimension {
                needed: comp + 1,
                available: self.dim,
            });
        }
        let dim = self.dim;
        let nodes = self.grid.n_nodes();
        Ok(GridProcess::from_path_fn(self.grid, self.n_paths, |p, row| {
            let src = self.path(p);
            for i in 0..nodes {
                row[i] = src[i * dim + comp];
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_paths::make_grid;

    #[test]
    fn starts_at_zero_and_is_finite() {
        let g = make_grid(1.0, 16).unwrap();
        let e = simulate_brownian(g, 3, 50, 11).unwrap();
        for p in 0..50 {
            assert_eq!(e.state(p, 0), &[0.0, 0.0, 0.0]);
        }
        assert!(e.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn blocks_reproduce_the_full_ensemble() {
        let g = make_grid(1.0, 8).unwrap();
        let full = simulate_brownian(g, 2, 10, 5).unwrap();
        let tail = simulate_brownian_block(g, 2, 4, 5, 6).unwrap();
        for p in 0..4 {
            assert_eq!(tail.path(p), full.path(6 + p));
        }
    }

    #[test]
    fn restrict_and_concat_blocks() {
        let g = make_grid(1.0, 8).unwrap();
        let full = simulate_brownian(g, 2, 6, 5).unwrap();
        let a = simulate_brownian_block(g, 2, 2, 5, 0).unwrap();
        let b = simulate_brownian_block(g, 2, 4, 5, 2).unwrap();
        let joined = PathEnsemble::concat(&[a, b]).unwrap();
        assert_eq!(joined.values(), full.values());
        let coarse = full.restrict(4).unwrap();
        assert_eq!(coarse.grid().n_nodes(), 3);
        assert_eq!(coarse.state(5, 2), full.state(5, 8));
    }

    #[test]
    fn rejects_empty() {
        let g = make_grid(1.0, 8).unwrap();
        assert!(simulate_brownian(g, 0, 10, 1).is_err());
        assert!(simulate_brownian(g, 1, 0, 1).is_err());
    }
}
