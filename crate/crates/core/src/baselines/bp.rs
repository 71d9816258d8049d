//! Sum-product belief propagation with single-variable decimation.
//!
//! The message on edge `(c, x)` is `delta = prod_{y in c, y != x} P(y falsifies
//! its literal in c)`, i.e. the probability that every other variable of `c`
//! leaves the clause to `x`. A clause then weighs the value of `x` that
//! violates its literal by `1 - delta` and the satisfying value by 1.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::csp::{build_csp, Allocation, CspError, FactorGraph, Provenance, VarId};
use crate::decimate::{min_conflict_pool, Decimation, SolveStats};
use crate::net::NetworkGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpParams {
    pub epsilon: f64,
    pub max_sweeps: usize,
    /// Weight of the previous message in each update.
    pub damping: f64,
}

impl Default for BpParams {
    fn default() -> Self {
        Self { epsilon: 1e-3, max_sweeps: 10, damping: 0.5 }
    }
}

struct Messages {
    clause_edges: Vec<Vec<usize>>,
    var_edges: Vec<Vec<usize>>,
    var: Vec<usize>,
    clause: Vec<usize>,
    negated: Vec<bool>,
    delta: Vec<f64>,
}

impl Messages {
    fn new<R: Rng + ?Sized>(fg: &FactorGraph, rng: &mut R) -> Self {
        let mut m = Self {
            clause_edges: vec![Vec::new(); fg.built_clause_count()],
            var_edges: vec![Vec::new(); fg.built_var_count()],
            var: Vec::new(),
            clause: Vec::new(),
            negated: Vec::new(),
            delta: Vec::new(),
        };
        for c in fg.live_clause_ids() {
            for l in fg.clause_literals(c) {
                let e = m.var.len();
                let k = fg.index(l.var);
                m.var.push(k);
                m.clause.push(c);
                m.negated.push(l.negated);
                m.delta.push(rng.random::<f64>());
                m.clause_edges[c].push(e);
                m.var_edges[k].push(e);
            }
        }
        m
    }

    /// Unnormalized weights of `x = 0` and `x = 1` from every clause of the
    /// variable except `skip`.
    fn weights(&self, k: usize, skip: Option<usize>) -> (f64, f64) {
        let (mut w0, mut w1) = (1.0, 1.0);
        for &e in &self.var_edges[k] {
            if Some(e) == skip {
                continue;
            }
            // literal is false when x equals `negated`
            if self.negated[e] {
                w1 *= 1.0 - self.delta[e];
            } else {
                w0 *= 1.0 - self.delta[e];
            }
        }
        (w0, w1)
    }

    fn falsify_prob(&self, e: usize) -> f64 {
        let (w0, w1) = self.weights(self.var[e], Some(e));
        let total = w0 + w1;
        if total <= 0.0 {
            return 0.5;
        }
        if self.negated[e] {
            w1 / total
        } else {
            w0 / total
        }
    }

    fn update(&mut self, e: usize, damping: f64) -> f64 {
        let c = self.clause[e];
        let fresh: f64 = self.clause_edges[c].iter().filter(|&&f| f != e).map(|&f| self.falsify_prob(f)).product();
        let new = (damping * self.delta[e] + (1.0 - damping) * fresh).clamp(0.0, 1.0);
        let change = (new - self.delta[e]).abs();
        self.delta[e] = new;
        change
    }
}

/// Run BP on the live factor graph and return `P(x = 1)` for every live
/// variable together with whether the messages converged.
pub fn bp_marginals<R: Rng + ?Sized>(fg: &FactorGraph, params: &BpParams, rng: &mut R) -> (Vec<(VarId, f64)>, bool, usize) {
    let mut m = Messages::new(fg, rng);
    let mut order: Vec<usize> = (0..m.delta.len()).collect();
    let mut converged = order.is_empty();
    let mut sweeps = 0;
    while !converged && sweeps < params.max_sweeps {
        order.shuffle(rng);
        let mut change: f64 = 0.0;
        for &e in &order {
            change = change.max(m.update(e, params.damping));
        }
        sweeps += 1;
        converged = change <= params.epsilon;
    }
    let marginals = fg
        .live_vars()
        .map(|v| {
            let (w0, w1) = m.weights(fg.index(v), None);
            let total = w0 + w1;
            (v, if total > 0.0 { w1 / total } else { 0.5 })
        })
        .collect();
    (marginals, converged, sweeps)
}

/// Belief-propagation decimation. Each round fixes the most polarized
/// variable to its likelier value and assigns stations left with a single
/// pool. The first time a station runs out of pools the run stops; every
/// station still open then takes its least-conflicting pool in index order.
pub fn bp_allocate<R: Rng + ?Sized>(
    g: &NetworkGraph,
    q: usize,
    params: &BpParams,
    rng: &mut R,
) -> Result<(Allocation, SolveStats), CspError> {
    let mut d = Decimation::new(build_csp(g, q)?);
    let mut conflicted = Vec::new();
    while conflicted.is_empty() && !d.fg.all_fixed() {
        let (marginals, converged, sweeps) = bp_marginals(&d.fg, params, rng);
        d.stats.survey_runs += 1;
        d.stats.survey_sweeps += sweeps;
        if !converged {
            d.stats.non_converged_runs += 1;
        }
        let mut best: Option<(VarId, f64)> = None;
        for (v, p) in marginals {
            let pol = (p - 0.5).abs();
            if best.is_none_or(|(_, bp)| pol > (bp - 0.5).abs()) {
                best = Some((v, p));
            }
        }
        let (v, p) = best.expect("live variables remain");
        d.stats.decimation_steps += 1;
        conflicted = d.apply(v, p >= 0.5, Provenance::Baseline);
    }
    if !conflicted.is_empty() {
        d.stats.stopped_early = true;
        d.stats.contradictions += conflicted.len();
        for i in 0..g.n() {
            if d.alloc.pool(i).is_none() {
                let p = min_conflict_pool(g.neighbors(i), &d.alloc, q);
                d.alloc.assign(i, p, Provenance::MinConflict);
            }
        }
    }
    Ok(d.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::interference_links;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(g: &NetworkGraph, q: usize, seed: u64) -> (Allocation, SolveStats) {
        bp_allocate(g, q, &BpParams::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn single_edge_is_solved() {
        let g = NetworkGraph::from_edges(2, &[(0, 1)]).unwrap();
        for seed in 0..10 {
            let (a, stats) = run(&g, 2, seed);
            assert_eq!(interference_links(&g, &a).unwrap(), 0);
            assert!(!stats.stopped_early);
        }
    }

    #[test]
    fn triangle_two_pools_stops() {
        let g = NetworkGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let (a, stats) = run(&g, 2, 1);
        assert!(stats.stopped_early);
        assert!(a.is_full());
        assert!(interference_links(&g, &a).unwrap() >= 1);
    }

    #[test]
    fn isolated_stations_are_free() {
        let g = NetworkGraph::new(4);
        let (a, stats) = run(&g, 3, 2);
        assert_eq!(interference_links(&g, &a).unwrap(), 0);
        assert!(!stats.stopped_early);
    }

    #[test]
    fn marginals_are_probabilities() {
        let g = NetworkGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let fg = build_csp(&g, 3).unwrap();
        let (m, _, _) = bp_marginals(&fg, &BpParams::default(), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(m.len(), 15);
        assert!(m.iter().all(|(_, p)| (0.0..=1.0).contains(p)));
    }
}
