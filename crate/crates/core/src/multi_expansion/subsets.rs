use std::fmt;

/// Index set `I ⊂ {0, …, n−1}` stored as a bitmask (`n ≤ 10`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(u32);

/// Largest family size handled by explicit subset enumeration.
pub const MAX_TIMES: usize = 10;

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_bits(bits: u32) -> Self {
        Subset(bits)
    }

    pub fn full(n: usize) -> Self {
        Subset(((1u64 << n) - 1) as u32)
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        Subset(indices.iter().fold(0, |acc, &i| acc | (1 << i)))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn complement(self, n: usize) -> Subset {
        Subset(!self.0 & Subset::full(n).0)
    }

    /// Member indices in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |i| self.0 & (1 << i) != 0)
    }

    /// All `2^n` subsets of `{0, …, n−1}`.
    pub fn all(n: usize) -> impl Iterator<Item = Subset> {
        (0..(1u32 << n)).map(Subset)
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.indices().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// `σ_I = max_{i∈I} τ_i` (0 for `I = ∅`), `ρ_I = min_{j∉I} τ_j` (+∞ for the
/// full set), and whether the window `[σ_I, ρ_I)` is active (`σ_I ≤ ρ_I`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetWindow {
    pub sigma: f64,
    pub rho: f64,
    pub active: bool,
}

pub fn subset_quantities(taus: &[f64], subset: Subset) -> SubsetWindow {
    let mut sigma = 0.0f64;
    let mut rho = f64::INFINITY;
    for (i, &t) in taus.iter().enumerate() {
        if subset.contains(i) {
            sigma = sigma.max(t);
        } else {
            rho = rho.min(t);
        }
    }
    SubsetWindow {
        sigma,
        rho,
        active: sigma <= rho,
    }
}

/// Same as [`subset_quantities`] on snapped node indices; `usize::MAX` is +∞.
pub fn subset_window_nodes(nodes: &[usize], subset: Subset) -> (usize, usize) {
    let mut sigma = 0usize;
    let mut rho = usize::MAX;
    for (i, &k) in nodes.iter().enumerate() {
        if subset.contains(i) {
            sigma = sigma.max(k);
        } else {
            rho = rho.min(k);
        }
    }
    (sigma, rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_time_examples() {
        let taus = [0.3, 0.7];
        let w = subset_quantities(&taus, Subset::EMPTY);
        assert_eq!((w.sigma, w.rho, w.active), (0.0, 0.3, true));
        // I = {2} in one-based notation
        let w = subset_quantities(&taus, Subset::from_indices(&[1]));
        assert_eq!((w.sigma, w.rho, w.active), (0.7, 0.3, false));
        let w = subset_quantities(&taus, Subset::full(2));
        assert_eq!((w.sigma, w.rho, w.active), (0.7, f64::INFINITY, true));
    }

    #[test]
    fn set_operations() {
        let s = Subset::from_indices(&[0, 2]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.complement(4), Subset::from_indices(&[1, 3]));
        assert_eq!(s.indices().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(Subset::all(3).count(), 8);
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(Subset::full(10).len(), 10);
    }
}
