//! Evaluation metrics: interference links, zero-interference rate, hop
//! distances and Gromov four-point hyperbolicity.

use std::collections::VecDeque;

use rand::Rng;
use thiserror::Error;

use crate::csp::{Allocation, CspError};
use crate::net::NetworkGraph;

/// Largest graph accepted by [`DeltaMode::Exact`].
pub const EXACT_DELTA_MAX_N: usize = 80;
/// Default quadruple budget for [`DeltaMode::Sampled`].
pub const DEFAULT_DELTA_SAMPLES: usize = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("exact hyperbolicity is limited to {max} stations, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("rate over an empty record set")]
    Empty,
    #[error(transparent)]
    Csp(#[from] CspError),
}

/// Edges whose endpoints share a pool.
pub fn interference_links(g: &NetworkGraph, a: &Allocation) -> Result<usize, CspError> {
    if a.n() != g.n() {
        return Err(CspError::SizeMismatch { expected: g.n(), got: a.n() });
    }
    let pools = a.full_pools()?;
    Ok(g.edges().filter(|&(i, j, _)| pools[i] == pools[j]).count())
}

/// Percentage of entries equal to zero.
pub fn zero_interference_rate(conflicts: &[usize]) -> Result<f64, MetricsError> {
    if conflicts.is_empty() {
        return Err(MetricsError::Empty);
    }
    let zeros = conflicts.iter().filter(|&&c| c == 0).count();
    Ok(100.0 * zeros as f64 / conflicts.len() as f64)
}

/// All-pairs hop counts; `None` marks unreachable pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<u32>,
}

const UNREACHABLE: u32 = u32::MAX;

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        let d = self.dist[i * self.n + j];
        (d != UNREACHABLE).then_some(d)
    }

    #[inline]
    fn raw(&self, i: usize, j: usize) -> u32 {
        self.dist[i * self.n + j]
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> u32 {
        self.dist.iter().copied().filter(|&d| d != UNREACHABLE).max().unwrap_or(0)
    }
}

/// Breadth-first search from every station.
pub fn all_pairs_hops(g: &NetworkGraph) -> DistanceMatrix {
    let n = g.n();
    let mut dist = vec![UNREACHABLE; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if row[v] == UNREACHABLE {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    DistanceMatrix { n, dist }
}

/// Connected components, each sorted, ordered by smallest member.
pub fn components(g: &NetworkGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut k = 0;
        while k < comp.len() {
            for &v in g.neighbors(comp[k]) {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                }
            }
            k += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Hop diameter of the largest component (ties: the first one).
pub fn largest_component_diameter(g: &NetworkGraph) -> u32 {
    let d = all_pairs_hops(g);
    let comps = components(g);
    let Some(big) = comps.iter().max_by_key(|c| (c.len(), std::cmp::Reverse(c[0]))) else {
        return 0;
    };
    let mut diam = 0;
    for &i in big {
        for &j in big {
            diam = diam.max(d.raw(i, j));
        }
    }
    diam
}

pub enum DeltaMode<'a, R: Rng + ?Sized> {
    Exact,
    /// `k` quadruples drawn uniformly from components with at least four
    /// stations, a component being picked with probability proportional to
    /// its number of quadruples.
    Sampled(usize, &'a mut R),
}

/// Four-point value of one quadruple, in hops.
pub fn four_point(d: &DistanceMatrix, x: usize, y: usize, z: usize, w: usize) -> f64 {
    let mut s = [
        d.raw(x, y) + d.raw(z, w),
        d.raw(x, z) + d.raw(y, w),
        d.raw(x, w) + d.raw(y, z),
    ];
    s.sort_unstable();
    (s[2] - s[1]) as f64 / 2.0
}

fn choose4(m: usize) -> u128 {
    if m < 4 {
        return 0;
    }
    let m = m as u128;
    m * (m - 1) * (m - 2) * (m - 3) / 24
}

/// Gromov four-point hyperbolicity. Only quadruples inside one connected
/// component are considered; the result is the maximum over components.
pub fn delta_hyperbolicity<R: Rng + ?Sized>(g: &NetworkGraph, mode: DeltaMode<'_, R>) -> Result<f64, MetricsError> {
    if matches!(mode, DeltaMode::Exact) && g.n() > EXACT_DELTA_MAX_N {
        return Err(MetricsError::TooLarge { n: g.n(), max: EXACT_DELTA_MAX_N });
    }
    let d = all_pairs_hops(g);
    let comps: Vec<Vec<usize>> = components(g).into_iter().filter(|c| c.len() >= 4).collect();
    let mut best: f64 = 0.0;
    match mode {
        DeltaMode::Exact => {
            for c in &comps {
                let m = c.len();
                for a in 0..m {
                    for b in a + 1..m {
                        for e in b + 1..m {
                            for f in e + 1..m {
                                best = best.max(four_point(&d, c[a], c[b], c[e], c[f]));
                            }
                        }
                    }
                }
            }
        }
        DeltaMode::Sampled(k, rng) => {
            let weights: Vec<u128> = comps.iter().map(|c| choose4(c.len())).collect();
            let total: u128 = weights.iter().sum();
            if total == 0 {
                return Ok(0.0);
            }
            for _ in 0..k {
                let mut t = rng.random_range(0..total);
                let mut ci = 0;
                while t >= weights[ci] {
                    t -= weights[ci];
                    ci += 1;
                }
                let c = &comps[ci];
                let picks = rand::seq::index::sample(rng, c.len(), 4);
                let q: Vec<usize> = picks.iter().map(|p| c[p]).collect();
                best = best.max(four_point(&d, q[0], q[1], q[2], q[3]));
            }
        }
    }
    Ok(best)
}
