use rand::seq::SliceRandom;
use rand::Rng;

use crate::csp::{Allocation, Provenance};
use crate::decimate::min_conflict_pool;
use crate::net::NetworkGraph;

/// Service order of the greedy colorers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GreedyOrder {
    /// Maximum neighbors first: descending degree, ties by index.
    StaticDegree,
    /// Progressive MNF: descending count of still-unserved neighbors,
    /// recomputed after every assignment, ties by index.
    ProgressiveDegree,
    /// Uniformly random permutation.
    Random,
}

/// Station order for the orders that do not depend on the assignment
/// progress. `ProgressiveDegree` falls back to the static order here.
pub fn greedy_order(g: &NetworkGraph, order: GreedyOrder) -> Vec<usize> {
    let mut stations: Vec<usize> = (0..g.n()).collect();
    if order != GreedyOrder::Random {
        stations.sort_by_key(|&i| (std::cmp::Reverse(g.degree(i)), i));
    }
    stations
}

/// Serve stations one at a time; each takes the smallest pool unused by its
/// already-served neighbors, or the least-conflicting pool if every pool is
/// taken.
pub fn greedy_allocate<R: Rng + ?Sized>(g: &NetworkGraph, q: usize, order: GreedyOrder, rng: &mut R) -> Allocation {
    assert!(q >= 1, "pool count must be >= 1");
    let n = g.n();
    let mut alloc = Allocation::new(n);
    let serve = |alloc: &mut Allocation, i: usize| {
        let p = min_conflict_pool(g.neighbors(i), alloc, q);
        alloc.assign(i, p, Provenance::Baseline);
    };
    match order {
        GreedyOrder::StaticDegree => {
            for i in greedy_order(g, order) {
                serve(&mut alloc, i);
            }
        }
        GreedyOrder::Random => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            for i in perm {
                serve(&mut alloc, i);
            }
        }
        GreedyOrder::ProgressiveDegree => {
            let mut residual: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
            let mut served = vec![false; n];
            for _ in 0..n {
                let i = (0..n)
                    .filter(|&i| !served[i])
                    .max_by_key(|&i| (residual[i], std::cmp::Reverse(i)))
                    .expect("an unserved station remains");
                serve(&mut alloc, i);
                served[i] = true;
                for &j in g.neighbors(i) {
                    residual[j] -= 1;
                }
            }
        }
    }
    alloc
}
