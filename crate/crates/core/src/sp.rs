//! Survey Propagation on the channel-assignment factor graph and the
//! decimation allocator built on top of it.
//!
//! A survey `eta(c -> x)` is the probability that clause `c` warns variable
//! `x` to take the value satisfying `c`. The variable-to-clause message is the
//! cavity triplet `(pi_u, pi_s, pi_star)` computed from the surveys `x`
//! receives from its *other* clauses, split by whether they want the same
//! literal sign as `c` (`s`) or the opposite one (`u`):
//!
//! ```text
//! P_s = prod_{b in same}(1 - eta_b)      P_u = prod_{b in opposite}(1 - eta_b)
//! pi_u = (1 - P_u) P_s     pi_s = (1 - P_s) P_u     pi_star = P_s P_u
//! eta(c -> x) = prod_{y in c, y != x} pi_u(y) / (pi_u(y) + pi_s(y) + pi_star(y))
//! ```

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{greedy_order, GreedyOrder};
use crate::csp::{build_csp, Allocation, ClauseId, CspError, FactorGraph, Provenance, VarId};
use crate::decimate::{Decimation, SolveStats};
use crate::net::NetworkGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpError {
    #[error("bias table is empty")]
    EmptyTable,
    #[error("invalid SP parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Csp(#[from] CspError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpParams {
    /// Convergence threshold on the survey change between sweeps.
    pub epsilon: f64,
    /// Sweeps per survey run.
    pub t_sp_max: usize,
    /// Decimation iterations; `None` means stations times pools.
    pub t_max: Option<usize>,
    /// Consecutive non-convergent runs before a random assignment.
    pub t_prime_max: usize,
    /// Surveys at or below this count as zero.
    pub eta_zero_tol: f64,
}

impl Default for SpParams {
    fn default() -> Self {
        Self { epsilon: 1e-3, t_sp_max: 10, t_max: None, t_prime_max: 5, eta_zero_tol: 1e-3 }
    }
}

impl SpParams {
    pub fn validate(&self) -> Result<(), SpError> {
        if !(self.epsilon > 0.0) {
            return Err(SpError::InvalidParam(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if self.t_sp_max == 0 || self.t_prime_max == 0 || self.t_max == Some(0) {
            return Err(SpError::InvalidParam("iteration limits must be >= 1".into()));
        }
        if !(self.eta_zero_tol >= 0.0) {
            return Err(SpError::InvalidParam("eta_zero_tol must be >= 0".into()));
        }
        Ok(())
    }
}

/// Directed clause/variable edges of a factor-graph snapshot.
#[derive(Debug, Clone)]
struct EdgeIndex {
    clause: Vec<ClauseId>,
    var: Vec<usize>,
    negated: Vec<bool>,
    clause_edges: Vec<Vec<usize>>,
    var_edges: Vec<Vec<usize>>,
}

impl EdgeIndex {
    fn new(fg: &FactorGraph) -> Self {
        let mut idx = Self {
            clause: Vec::new(),
            var: Vec::new(),
            negated: Vec::new(),
            clause_edges: vec![Vec::new(); fg.built_clause_count()],
            var_edges: vec![Vec::new(); fg.built_var_count()],
        };
        for c in fg.live_clause_ids() {
            for lit in fg.clause_literals(c) {
                let e = idx.clause.len();
                let k = fg.index(lit.var);
                idx.clause.push(c);
                idx.var.push(k);
                idx.negated.push(lit.negated);
                idx.clause_edges[c].push(e);
                idx.var_edges[k].push(e);
            }
        }
        idx
    }

    fn len(&self) -> usize {
        self.clause.len()
    }

    fn find(&self, c: ClauseId, k: usize) -> Option<usize> {
        self.clause_edges.get(c)?.iter().copied().find(|&e| self.var[e] == k)
    }
}

/// Surveys on every live edge of a factor graph.
#[derive(Debug, Clone)]
pub struct SurveyState {
    index: EdgeIndex,
    eta: Vec<f64>,
    /// Sweeps performed.
    pub iterations: usize,
    pub converged: bool,
}

impl SurveyState {
    /// Every survey set to `value`.
    pub fn uniform(fg: &FactorGraph, value: f64) -> Self {
        let index = EdgeIndex::new(fg);
        let eta = vec![value.clamp(0.0, 1.0); index.len()];
        Self { index, eta, iterations: 0, converged: false }
    }

    /// Surveys drawn uniformly from `[0, 1]`.
    pub fn random<R: Rng + ?Sized>(fg: &FactorGraph, rng: &mut R) -> Self {
        let index = EdgeIndex::new(fg);
        let eta = (0..index.len()).map(|_| rng.random::<f64>()).collect();
        Self { index, eta, iterations: 0, converged: false }
    }

    pub fn edge_count(&self) -> usize {
        self.eta.len()
    }

    pub fn eta(&self, fg: &FactorGraph, c: ClauseId, v: VarId) -> Option<f64> {
        self.index.find(c, fg.index(v)).map(|e| self.eta[e])
    }

    /// Overwrite one survey; returns `false` if `(c, v)` is not an edge.
    pub fn set_eta(&mut self, fg: &FactorGraph, c: ClauseId, v: VarId, value: f64) -> bool {
        match self.index.find(c, fg.index(v)) {
            Some(e) => {
                self.eta[e] = value;
                true
            }
            None => false,
        }
    }

    pub fn etas(&self) -> &[f64] {
        &self.eta
    }

    pub fn max_eta(&self) -> f64 {
        self.eta.iter().copied().fold(0.0, f64::max)
    }

    /// Products of `1 - eta` over the edges of variable `k` other than
    /// `skip`, split into (same sign as `negated`, opposite sign).
    fn cavity_products(&self, k: usize, skip: Option<usize>, negated: bool) -> (f64, f64) {
        let mut same = 1.0;
        let mut opposite = 1.0;
        for &e in &self.index.var_edges[k] {
            if Some(e) == skip {
                continue;
            }
            if self.index.negated[e] == negated {
                same *= 1.0 - self.eta[e];
            } else {
                opposite *= 1.0 - self.eta[e];
            }
        }
        (same, opposite)
    }

    fn triplet_on_edge(&self, e: usize) -> (f64, f64, f64) {
        let (p_s, p_u) = self.cavity_products(self.index.var[e], Some(e), self.index.negated[e]);
        let t = ((1.0 - p_u) * p_s, (1.0 - p_s) * p_u, p_s * p_u);
        debug_assert!([t.0, t.1, t.2].iter().all(|x| (0.0..=1.0).contains(x)));
        t
    }

    fn eta_on_edge(&self, e: usize) -> f64 {
        let c = self.index.clause[e];
        let mut eta = 1.0;
        for &f in &self.index.clause_edges[c] {
            if f == e {
                continue;
            }
            let (u, s, star) = self.triplet_on_edge(f);
            let total = u + s + star;
            // a variable with an all-zero triplet sends no warning
            let factor = if total > 0.0 { u / total } else { 0.0 };
            eta *= factor;
            if eta == 0.0 {
                break;
            }
        }
        let eta = eta.clamp(0.0, 1.0);
        debug_assert!((0.0..=1.0).contains(&eta));
        eta
    }

    fn sweep<R: Rng + ?Sized>(&mut self, order: &mut [usize], rng: &mut R) -> f64 {
        order.shuffle(rng);
        let mut max_change: f64 = 0.0;
        for &e in order.iter() {
            let new = self.eta_on_edge(e);
            max_change = max_change.max((new - self.eta[e]).abs());
            self.eta[e] = new;
        }
        max_change
    }
}

/// Cavity triplet `(pi_u, pi_s, pi_star)` sent from `v` to clause `c`.
/// Panics if `v` does not occur in `c`.
pub fn pi_triplet(fg: &FactorGraph, state: &SurveyState, v: VarId, c: ClauseId) -> (f64, f64, f64) {
    let e = state.index.find(c, fg.index(v)).expect("variable does not occur in clause");
    state.triplet_on_edge(e)
}

/// Fresh survey from clause `c` to `v` given the current state.
/// Panics if `v` does not occur in `c`.
pub fn eta_update(fg: &FactorGraph, state: &SurveyState, c: ClauseId, v: VarId) -> f64 {
    let e = state.index.find(c, fg.index(v)).expect("variable does not occur in clause");
    state.eta_on_edge(e)
}

#[derive(Debug, Clone)]
pub enum SurveyOutcome {
    Converged(SurveyState),
    NotConverged(SurveyState),
}

impl SurveyOutcome {
    pub fn state(&self) -> &SurveyState {
        match self {
            Self::Converged(s) | Self::NotConverged(s) => s,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Self::Converged(_))
    }
}

/// Random initialization followed by asynchronous sweeps in a fresh random
/// edge order until no survey moves by more than `epsilon`, or `t_sp_max`
/// sweeps have run.
pub fn run_surveys<R: Rng + ?Sized>(fg: &FactorGraph, params: &SpParams, rng: &mut R) -> SurveyOutcome {
    let mut state = SurveyState::random(fg, rng);
    if state.edge_count() == 0 {
        state.converged = true;
        return SurveyOutcome::Converged(state);
    }
    continue_surveys(state, params, rng)
}

/// Sweep an existing state (used by `run_surveys` and by tests that need a
/// prescribed starting point).
pub fn continue_surveys<R: Rng + ?Sized>(mut state: SurveyState, params: &SpParams, rng: &mut R) -> SurveyOutcome {
    let mut order: Vec<usize> = (0..state.edge_count()).collect();
    for _ in 0..params.t_sp_max {
        let change = state.sweep(&mut order, rng);
        state.iterations += 1;
        if change <= params.epsilon {
            state.converged = true;
            return SurveyOutcome::Converged(state);
        }
    }
    SurveyOutcome::NotConverged(state)
}

/// Per-variable polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bias {
    pub w_plus: f64,
    pub w_minus: f64,
    pub pi_plus: f64,
    pub pi_minus: f64,
    pub pi_zero: f64,
}

impl Bias {
    pub fn difference(&self) -> f64 {
        (self.w_plus - self.w_minus).abs()
    }
}

/// Biases of the live variables, ordered by [`VarId`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BiasTable {
    pub entries: Vec<(VarId, Bias)>,
}

impl BiasTable {
    pub fn get(&self, v: VarId) -> Option<&Bias> {
        self.entries.binary_search_by_key(&v, |(k, _)| *k).ok().map(|i| &self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `pi_plus` from the positive-literal side, `pi_minus` from the negative
/// side, `pi_zero` over every adjacent clause; `W` normalized by their sum
/// (0/0 gives zero biases).
pub fn biases(fg: &FactorGraph, state: &SurveyState) -> BiasTable {
    let mut entries = Vec::with_capacity(fg.live_var_count());
    for v in fg.live_vars() {
        let k = fg.index(v);
        // "same" relative to a positive literal is the alpha side
        let (p_pos, p_neg) = state.cavity_products(k, None, false);
        let pi_plus = (1.0 - p_pos) * p_neg;
        let pi_minus = (1.0 - p_neg) * p_pos;
        let pi_zero = p_pos * p_neg;
        let total = pi_plus + pi_minus + pi_zero;
        let (w_plus, w_minus) = if total > 0.0 { (pi_plus / total, pi_minus / total) } else { (0.0, 0.0) };
        entries.push((v, Bias { w_plus, w_minus, pi_plus, pi_minus, pi_zero }));
    }
    BiasTable { entries }
}

/// Variable with the largest `|W+ - W-|`; smallest [`VarId`] on ties.
pub fn max_bias_var(table: &BiasTable) -> Result<VarId, SpError> {
    let mut best: Option<(VarId, f64)> = None;
    for &(v, b) in &table.entries {
        let d = b.difference();
        match best {
            Some((bv, bd)) if d < bd || (d == bd && v > bv) => {}
            _ => best = Some((v, d)),
        }
    }
    best.map(|(v, _)| v).ok_or(SpError::EmptyTable)
}

/// Unassigned station with the most unassigned neighbors, uniformly among
/// ties, given a random admissible pool.
fn random_max_degree_step<R: Rng + ?Sized>(d: &mut Decimation, rng: &mut R) {
    let live_degree = |i: usize| d.fg.neighbors(i).iter().filter(|&&j| d.alloc.pool(j).is_none()).count();
    let open: Vec<usize> = d.alloc.unassigned().collect();
    let Some(top) = open.iter().map(|&i| live_degree(i)).max() else {
        return;
    };
    let candidates: Vec<usize> = open.into_iter().filter(|&i| live_degree(i) == top).collect();
    let station = candidates[rng.random_range(0..candidates.len())];
    let opts = d.fg.live_options(station);
    if opts.is_empty() {
        d.repair(vec![station]);
        d.cascade();
        return;
    }
    let pool = opts[rng.random_range(0..opts.len())];
    d.commit(VarId::new(station, pool), true, Provenance::Restart);
}

/// Survey-guided decimation allocator.
///
/// Each round runs the surveys on the live factor graph. A converged,
/// non-trivial fixed point sets the most polarized variable to 1 and propagates
/// the consequences (neighbors lose the pool, stations with a single option
/// left are assigned). A trivial fixed point hands the rest of the network to
/// the maximum-neighbors-first greedy. After `t_prime_max` consecutive
/// non-convergent runs a random station of maximum residual degree gets a
/// random admissible pool. Stations that run out of pools take their
/// least-conflicting pool, so the result is always a full allocation.
pub fn sp_allocate<R: Rng + ?Sized>(
    g: &NetworkGraph,
    q: usize,
    params: &SpParams,
    rng: &mut R,
) -> Result<(Allocation, SolveStats), SpError> {
    params.validate()?;
    let mut d = Decimation::new(build_csp(g, q)?);
    d.cascade();
    let t_max = params.t_max.unwrap_or(g.n() * q).max(1);
    let mut failures = 0usize;
    while !d.fg.all_fixed() {
        if d.stats.decimation_steps >= t_max {
            complete_greedy(g, &mut d);
            break;
        }
        let outcome = run_surveys(&d.fg, params, rng);
        d.stats.survey_runs += 1;
        d.stats.survey_sweeps += outcome.state().iterations;
        match outcome {
            SurveyOutcome::Converged(state) => {
                failures = 0;
                if state.max_eta() <= params.eta_zero_tol {
                    complete_greedy(g, &mut d);
                    break;
                }
                let table = biases(&d.fg, &state);
                let v = max_bias_var(&table)?;
                d.stats.decimation_steps += 1;
                d.commit(v, true, Provenance::SpBias);
            }
            SurveyOutcome::NotConverged(_) => {
                d.stats.non_converged_runs += 1;
                failures += 1;
                if failures >= params.t_prime_max {
                    failures = 0;
                    d.stats.restarts += 1;
                    random_max_degree_step(&mut d, rng);
                }
            }
        }
    }
    // stations whose variables all went to zero without an emptied clause
    // cannot exist; anything left unassigned here is a bookkeeping bug
    debug_assert!(d.alloc.is_full(), "decimation ended with unassigned stations");
    Ok(d.finish())
}

fn complete_greedy(g: &NetworkGraph, d: &mut Decimation) {
    d.stats.fallback_used = true;
    let order = greedy_order(g, GreedyOrder::StaticDegree);
    d.complete_in_order(&order, Provenance::GreedyFallback);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{build_csp, ClauseKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph(n: usize, edges: &[(usize, usize)]) -> NetworkGraph {
        NetworkGraph::from_edges(n, edges).unwrap()
    }

    fn beta_clause(fg: &FactorGraph, edge: (usize, usize), pool: usize) -> ClauseId {
        fg.live_clause_ids()
            .find(|&c| fg.clause_kind(c) == ClauseKind::Beta { edge, pool })
            .unwrap()
    }

    #[test]
    fn triplet_of_isolated_variable() {
        let fg = build_csp(&graph(1, &[]), 2).unwrap();
        let state = SurveyState::random(&fg, &mut ChaCha8Rng::seed_from_u64(0));
        let alpha = fg.alpha_clause(0);
        assert_eq!(pi_triplet(&fg, &state, VarId::new(0, 1), alpha), (0.0, 0.0, 1.0));
        assert_eq!(eta_update(&fg, &state, alpha, VarId::new(0, 0)), 0.0);
    }

    #[test]
    fn zero_surveys_give_indifferent_triplets() {
        let fg = build_csp(&graph(3, &[(0, 1), (1, 2), (0, 2)]), 3).unwrap();
        let state = SurveyState::uniform(&fg, 0.0);
        for c in fg.live_clause_ids() {
            for l in fg.clause_literals(c) {
                assert_eq!(pi_triplet(&fg, &state, l.var, c), (0.0, 0.0, 1.0));
            }
        }
    }

    #[test]
    fn single_opposite_warning() {
        // x(0,0) on a single edge: alpha_0 (positive) and beta (negative).
        // The triplet towards alpha sees only the beta survey, which is opposite.
        let fg = build_csp(&graph(2, &[(0, 1)]), 2).unwrap();
        let mut state = SurveyState::uniform(&fg, 0.0);
        let beta = beta_clause(&fg, (0, 1), 0);
        assert!(state.set_eta(&fg, beta, VarId::new(0, 0), 1.0));
        let alpha = fg.alpha_clause(0);
        assert_eq!(pi_triplet(&fg, &state, VarId::new(0, 0), alpha), (1.0, 0.0, 0.0));
    }

    #[test]
    fn eta_examples() {
        // single literal clause: empty product
        let mut fg = build_csp(&graph(2, &[(0, 1)]), 2).unwrap();
        fg.fix_variable(VarId::new(0, 0), true).unwrap();
        let state = SurveyState::uniform(&fg, 0.3);
        let alpha1 = fg.alpha_clause(1);
        assert_eq!(fg.clause_literals(alpha1).len(), 1);
        assert_eq!(eta_update(&fg, &state, alpha1, VarId::new(1, 1)), 1.0);

        // beta clause whose other variable sends (1, 0, 0): alpha warns x(1,0)
        // to be 1 and x(1,0) has no other beta
        let fg = build_csp(&graph(2, &[(0, 1)]), 2).unwrap();
        let mut state = SurveyState::uniform(&fg, 0.0);
        state.set_eta(&fg, fg.alpha_clause(1), VarId::new(1, 0), 1.0);
        let beta = beta_clause(&fg, (0, 1), 0);
        assert_eq!(pi_triplet(&fg, &state, VarId::new(1, 0), beta), (1.0, 0.0, 0.0));
        assert_eq!(eta_update(&fg, &state, beta, VarId::new(0, 0)), 1.0);
    }

    #[test]
    fn empty_graph_converges_immediately() {
        let fg = build_csp(&graph(0, &[]), 2).unwrap();
        let out = run_surveys(&fg, &SpParams::default(), &mut ChaCha8Rng::seed_from_u64(1));
        assert!(out.is_converged());
        assert_eq!(out.state().iterations, 0);
    }

    #[test]
    fn isolated_stations_reach_zero_fixed_point() {
        let fg = build_csp(&graph(4, &[]), 3).unwrap();
        for seed in 0..20 {
            let out = run_surveys(&fg, &SpParams::default(), &mut ChaCha8Rng::seed_from_u64(seed));
            assert!(out.is_converged());
            assert!(out.state().etas().iter().all(|&e| e == 0.0));
        }
    }

    #[test]
    fn single_edge_converges_for_most_seeds() {
        let fg = build_csp(&graph(2, &[(0, 1)]), 2).unwrap();
        let ok = (0..100)
            .filter(|&s| run_surveys(&fg, &SpParams::default(), &mut ChaCha8Rng::seed_from_u64(s)).is_converged())
            .count();
        assert!(ok >= 99, "{ok}/100 converged");
    }

    #[test]
    fn surveys_are_seed_deterministic() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]);
        let fg = build_csp(&g, 3).unwrap();
        let a = run_surveys(&fg, &SpParams::default(), &mut ChaCha8Rng::seed_from_u64(7));
        let b = run_surveys(&fg, &SpParams::default(), &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a.state().etas(), b.state().etas());
        assert_eq!(a.is_converged(), b.is_converged());
    }

    #[test]
    fn bias_examples() {
        let fg = build_csp(&graph(3, &[(0, 1), (1, 2)]), 2).unwrap();
        let table = biases(&fg, &SurveyState::uniform(&fg, 0.0));
        assert_eq!(table.len(), 6);
        for (_, b) in &table.entries {
            assert_eq!((b.pi_plus, b.pi_minus, b.pi_zero, b.w_plus, b.w_minus), (0.0, 0.0, 1.0, 0.0, 0.0));
        }

        let fg = build_csp(&graph(1, &[]), 2).unwrap();
        let mut state = SurveyState::uniform(&fg, 0.0);
        state.set_eta(&fg, fg.alpha_clause(0), VarId::new(0, 0), 1.0);
        let b = *biases(&fg, &state).get(VarId::new(0, 0)).unwrap();
        assert_eq!((b.w_plus, b.w_minus), (1.0, 0.0));

        // same product on both sides
        let fg = build_csp(&graph(2, &[(0, 1)]), 2).unwrap();
        let state = SurveyState::uniform(&fg, 0.4);
        let b = *biases(&fg, &state).get(VarId::new(0, 0)).unwrap();
        assert_eq!(b.w_plus, b.w_minus);
    }

    #[test]
    fn max_bias_selection() {
        let bias = |p: f64, m: f64| Bias { w_plus: p, w_minus: m, pi_plus: 0.0, pi_minus: 0.0, pi_zero: 0.0 };
        let t = BiasTable { entries: vec![(VarId::new(0, 0), bias(0.9, 0.1)), (VarId::new(0, 1), bias(0.6, 0.4))] };
        assert_eq!(max_bias_var(&t).unwrap(), VarId::new(0, 0));
        let t = BiasTable { entries: vec![(VarId::new(1, 0), bias(0.5, 0.5)), (VarId::new(0, 2), bias(0.5, 0.5))] };
        assert_eq!(max_bias_var(&t).unwrap(), VarId::new(0, 2));
        let t = BiasTable { entries: vec![(VarId::new(3, 1), bias(0.2, 0.0))] };
        assert_eq!(max_bias_var(&t).unwrap(), VarId::new(3, 1));
        assert_eq!(max_bias_var(&BiasTable::default()), Err(SpError::EmptyTable));
    }

    fn solve(g: &NetworkGraph, q: usize, seed: u64) -> (Allocation, SolveStats) {
        sp_allocate(g, q, &SpParams::default(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn isolated_stations_use_greedy_fallback() {
        let g = graph(3, &[]);
        let (a, stats) = solve(&g, 2, 0);
        assert!(stats.fallback_used);
        assert_eq!(build_csp(&g, 2).unwrap().cost(&a).unwrap(), 0);
        assert_eq!(a.provenance(0), Some(Provenance::GreedyFallback));
    }

    #[test]
    fn small_satisfiable_instances() {
        for seed in 0..20 {
            let g = graph(2, &[(0, 1)]);
            let (a, _) = solve(&g, 2, seed);
            assert_eq!(build_csp(&g, 2).unwrap().cost(&a).unwrap(), 0);
            let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
            let (a, _) = solve(&g, 3, seed);
            assert_eq!(build_csp(&g, 3).unwrap().cost(&a).unwrap(), 0);
        }
    }

    #[test]
    fn unsatisfiable_instance_still_gets_full_allocation() {
        let g = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let (a, _) = solve(&g, 2, 3);
        assert!(a.is_full());
        assert!(build_csp(&g, 2).unwrap().cost(&a).unwrap() >= 2);
    }

    #[test]
    fn rejects_bad_params() {
        let g = graph(2, &[(0, 1)]);
        let bad = SpParams { epsilon: 0.0, ..SpParams::default() };
        assert!(sp_allocate(&g, 2, &bad, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        assert!(matches!(
            sp_allocate(&g, 0, &SpParams::default(), &mut ChaCha8Rng::seed_from_u64(0)),
            Err(SpError::Csp(CspError::NoPools))
        ));
    }
}
