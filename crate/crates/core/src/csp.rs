//! Channel assignment as a satisfiability problem.
//!
//! Variable `x(i,q)` says station `i` holds pool `q`. Each station carries
//! one clause `(x(i,1) | ... | x(i,Q))` and every interference edge `(i,j)`
//! carries one clause `(!x(i,q) | !x(j,q))` per pool. The factor graph keeps
//! the live (undecided) part of that formula and simplifies it as variables
//! get fixed during decimation.

use std::fmt::Write as _;

use thiserror::Error;

use crate::net::NetworkGraph;

/// Upper bound on `Q^n` accepted by [`brute_force_min_cost`].
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CspError {
    #[error("pool count must be >= 1")]
    NoPools,
    #[error("variable {0} is already fixed")]
    NotLive(VarId),
    #[error("decimation emptied {} clause(s); stations {stations:?} have no admissible pool", emptied.len())]
    Contradiction { stations: Vec<usize>, emptied: Vec<ClauseKind> },
    #[error("station {0} has no pool assigned")]
    PartialAllocation(usize),
    #[error("allocation covers {got} stations, graph has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("pool {pool} out of range for Q={q}")]
    PoolOutOfRange { pool: usize, q: usize },
    #[error("instance too large for exhaustive search: {q}^{n} assignments")]
    TooLarge { n: usize, q: usize },
    #[error("factor graph has no variables")]
    EmptyVariableSet,
}

/// Variable `x(station, pool)`; both indices 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    pub station: usize,
    pub pool: usize,
}

impl VarId {
    pub fn new(station: usize, pool: usize) -> Self {
        Self { station, pool }
    }
}

impl std::fmt::Display for VarId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "x({},{})", self.station, self.pool + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClauseKind {
    /// Station must get at least one pool.
    Alpha { station: usize },
    /// Endpoints of `edge` must not share `pool`.
    Beta { edge: (usize, usize), pool: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub var: VarId,
    pub negated: bool,
}

impl Literal {
    /// Truth value of the literal when its variable takes `value`.
    pub fn eval(&self, value: bool) -> bool {
        value != self.negated
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub kind: ClauseKind,
    pub literals: Vec<Literal>,
}

pub type ClauseId = usize;

/// Where a station's pool came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Chosen by the survey biases.
    SpBias,
    /// Only one admissible pool was left.
    Forced,
    /// Completed by the greedy heuristic after a trivial survey fixed point.
    GreedyFallback,
    /// Picked at random after repeated survey non-convergence.
    Restart,
    /// No admissible pool left; least-conflicting pool taken.
    MinConflict,
    /// Produced by a reference allocator.
    Baseline,
}

/// Station to pool map, possibly partial while a solver is running.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pools: Vec<Option<usize>>,
    provenance: Vec<Option<Provenance>>,
}

impl Allocation {
    pub fn new(n: usize) -> Self {
        Self { pools: vec![None; n], provenance: vec![None; n] }
    }

    /// Full allocation from a pool vector, tagged as [`Provenance::Baseline`].
    pub fn from_pools(pools: &[usize]) -> Self {
        let mut a = Self::new(pools.len());
        for (i, &p) in pools.iter().enumerate() {
            a.assign(i, p, Provenance::Baseline);
        }
        a
    }

    pub fn assign(&mut self, station: usize, pool: usize, how: Provenance) {
        self.pools[station] = Some(pool);
        self.provenance[station] = Some(how);
    }

    pub fn n(&self) -> usize {
        self.pools.len()
    }

    pub fn pool(&self, station: usize) -> Option<usize> {
        self.pools[station]
    }

    pub fn provenance(&self, station: usize) -> Option<Provenance> {
        self.provenance[station]
    }

    pub fn is_full(&self) -> bool {
        self.pools.iter().all(Option::is_some)
    }

    pub fn unassigned(&self) -> impl Iterator<Item = usize> + '_ {
        self.pools.iter().enumerate().filter(|(_, p)| p.is_none()).map(|(i, _)| i)
    }

    /// Pools of a full allocation.
    pub fn full_pools(&self) -> Result<Vec<usize>, CspError> {
        self.pools
            .iter()
            .enumerate()
            .map(|(i, p)| p.ok_or(CspError::PartialAllocation(i)))
            .collect()
    }

    /// `station,pool` CSV with a header; pools are written 1-based.
    pub fn to_csv(&self) -> Result<String, CspError> {
        let pools = self.full_pools()?;
        let mut out = String::from("station,pool\n");
        for (i, p) in pools.iter().enumerate() {
            let _ = writeln!(out, "{i},{}", p + 1);
        }
        Ok(out)
    }
}

/// Live factor graph of the channel assignment formula.
#[derive(Debug, Clone)]
pub struct FactorGraph {
    n: usize,
    q: usize,
    edge_count: usize,
    neighbors: Vec<Vec<usize>>,
    origin: Vec<Clause>,
    literals: Vec<Vec<Literal>>,
    live: Vec<bool>,
    live_clauses: usize,
    var_adj: Vec<Vec<ClauseId>>,
    fixed: Vec<Option<bool>>,
    live_vars: usize,
    alpha_of: Vec<ClauseId>,
    falsified: Vec<ClauseId>,
}

/// Build the formula for `g` with `q_pools` pools.
pub fn build_csp(g: &NetworkGraph, q_pools: usize) -> Result<FactorGraph, CspError> {
    FactorGraph::build(g, q_pools)
}

impl FactorGraph {
    pub fn build(g: &NetworkGraph, q: usize) -> Result<Self, CspError> {
        if q == 0 {
            return Err(CspError::NoPools);
        }
        let n = g.n();
        let mut origin = Vec::with_capacity(n + q * g.edge_count());
        let mut alpha_of = Vec::with_capacity(n);
        for i in 0..n {
            alpha_of.push(origin.len());
            origin.push(Clause {
                kind: ClauseKind::Alpha { station: i },
                literals: (0..q).map(|p| Literal { var: VarId::new(i, p), negated: false }).collect(),
            });
        }
        for (i, j, _) in g.edges() {
            for p in 0..q {
                origin.push(Clause {
                    kind: ClauseKind::Beta { edge: (i, j), pool: p },
                    literals: vec![
                        Literal { var: VarId::new(i, p), negated: true },
                        Literal { var: VarId::new(j, p), negated: true },
                    ],
                });
            }
        }
        let mut var_adj = vec![Vec::new(); n * q];
        for (c, clause) in origin.iter().enumerate() {
            for lit in &clause.literals {
                var_adj[lit.var.station * q + lit.var.pool].push(c);
            }
        }
        let literals = origin.iter().map(|c| c.literals.clone()).collect();
        Ok(Self {
            n,
            q,
            edge_count: g.edge_count(),
            neighbors: (0..n).map(|i| g.neighbors(i).to_vec()).collect(),
            live: vec![true; origin.len()],
            live_clauses: origin.len(),
            literals,
            origin,
            var_adj,
            fixed: vec![None; n * q],
            live_vars: n * q,
            alpha_of,
            falsified: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn origin_edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, station: usize) -> &[usize] {
        &self.neighbors[station]
    }

    /// `|X|` at build time.
    pub fn built_var_count(&self) -> usize {
        self.n * self.q
    }

    /// `|Gamma|` at build time.
    pub fn built_clause_count(&self) -> usize {
        self.origin.len()
    }

    pub fn live_var_count(&self) -> usize {
        self.live_vars
    }

    pub fn live_clause_count(&self) -> usize {
        self.live_clauses
    }

    pub fn all_fixed(&self) -> bool {
        self.live_vars == 0
    }

    pub fn index(&self, v: VarId) -> usize {
        v.station * self.q + v.pool
    }

    pub fn var(&self, idx: usize) -> VarId {
        VarId::new(idx / self.q, idx % self.q)
    }

    pub fn is_live(&self, v: VarId) -> bool {
        self.fixed[self.index(v)].is_none()
    }

    pub fn fixed_value(&self, v: VarId) -> Option<bool> {
        self.fixed[self.index(v)]
    }

    pub fn live_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.fixed.len()).filter(|&k| self.fixed[k].is_none()).map(|k| self.var(k))
    }

    pub fn live_clause_ids(&self) -> impl Iterator<Item = ClauseId> + '_ {
        (0..self.live.len()).filter(|&c| self.live[c])
    }

    pub fn is_clause_live(&self, c: ClauseId) -> bool {
        self.live[c]
    }

    pub fn clause_kind(&self, c: ClauseId) -> ClauseKind {
        self.origin[c].kind
    }

    /// Remaining literals of clause `c` (empty once the clause is gone).
    pub fn clause_literals(&self, c: ClauseId) -> &[Literal] {
        &self.literals[c]
    }

    /// Live clauses containing `v`.
    pub fn var_clauses(&self, v: VarId) -> &[ClauseId] {
        &self.var_adj[self.index(v)]
    }

    /// Clause set at build time.
    pub fn original_clauses(&self) -> &[Clause] {
        &self.origin
    }

    /// Clauses emptied by decimation so far.
    pub fn falsified(&self) -> &[ClauseId] {
        &self.falsified
    }

    pub fn alpha_clause(&self, station: usize) -> ClauseId {
        self.alpha_of[station]
    }

    /// Pools still admissible for `station` (empty once it is decided).
    pub fn live_options(&self, station: usize) -> Vec<usize> {
        let c = self.alpha_of[station];
        if !self.live[c] {
            return Vec::new();
        }
        self.literals[c].iter().map(|l| l.var.pool).collect()
    }

    /// Whether the station's alpha clause has been satisfied or emptied.
    pub fn is_station_settled(&self, station: usize) -> bool {
        !self.live[self.alpha_of[station]]
    }

    /// `|Gamma| / |X|` at build time.
    pub fn theta(&self) -> Result<f64, CspError> {
        if self.built_var_count() == 0 {
            return Err(CspError::EmptyVariableSet);
        }
        Ok(self.built_clause_count() as f64 / self.built_var_count() as f64)
    }

    fn check_allocation(&self, a: &Allocation) -> Result<Vec<usize>, CspError> {
        if a.n() != self.n {
            return Err(CspError::SizeMismatch { expected: self.n, got: a.n() });
        }
        let pools = a.full_pools()?;
        if let Some(&pool) = pools.iter().find(|&&p| p >= self.q) {
            return Err(CspError::PoolOutOfRange { pool, q: self.q });
        }
        Ok(pools)
    }

    fn violated(literals: &[Literal], pools: &[usize]) -> bool {
        !literals.iter().any(|l| l.eval(pools[l.var.station] == l.var.pool))
    }

    /// Number of unsatisfied clauses of the original formula under `a`.
    pub fn cost(&self, a: &Allocation) -> Result<usize, CspError> {
        let pools = self.check_allocation(a)?;
        Ok(self.origin.iter().filter(|c| Self::violated(&c.literals, &pools)).count())
    }

    /// Unsatisfied live clauses under `a`, ignoring what decimation already
    /// decided.
    pub fn residual_cost(&self, a: &Allocation) -> Result<usize, CspError> {
        let pools = self.check_allocation(a)?;
        Ok(self
            .live_clause_ids()
            .filter(|&c| Self::violated(&self.literals[c], &pools))
            .count())
    }

    pub fn is_zero_interference(&self, a: &Allocation) -> Result<bool, CspError> {
        Ok(self.cost(a)? == 0)
    }

    fn kill_clause(&mut self, c: ClauseId, skip_var: usize) {
        self.live[c] = false;
        self.live_clauses -= 1;
        let lits = std::mem::take(&mut self.literals[c]);
        for l in &lits {
            let k = l.var.station * self.q + l.var.pool;
            if k != skip_var {
                self.var_adj[k].retain(|&x| x != c);
            }
        }
    }

    fn assign(&mut self, k: usize, value: bool, fixed: &mut Vec<(VarId, bool)>, emptied: &mut Vec<ClauseId>) {
        debug_assert!(self.fixed[k].is_none());
        self.fixed[k] = Some(value);
        self.live_vars -= 1;
        let v = self.var(k);
        fixed.push((v, value));
        for c in std::mem::take(&mut self.var_adj[k]) {
            let pos = self.literals[c]
                .iter()
                .position(|l| l.var == v)
                .expect("adjacency mirrors clause literals");
            if self.literals[c][pos].eval(value) {
                self.kill_clause(c, k);
            } else {
                self.literals[c].remove(pos);
                if self.literals[c].is_empty() {
                    self.live[c] = false;
                    self.live_clauses -= 1;
                    self.falsified.push(c);
                    emptied.push(c);
                }
            }
        }
    }

    fn finish(&self, fixed: Vec<(VarId, bool)>, emptied: Vec<ClauseId>) -> Result<Vec<(VarId, bool)>, CspError> {
        if emptied.is_empty() {
            return Ok(fixed);
        }
        let kinds: Vec<ClauseKind> = emptied.iter().map(|&c| self.origin[c].kind).collect();
        let mut stations: Vec<usize> = kinds
            .iter()
            .flat_map(|k| match *k {
                ClauseKind::Alpha { station } => vec![station],
                ClauseKind::Beta { edge: (i, j), .. } => vec![i, j],
            })
            .collect();
        stations.sort_unstable();
        stations.dedup();
        Err(CspError::Contradiction { stations, emptied: kinds })
    }

    /// Fix `v` to `value` and simplify.
    ///
    /// Setting `x(i,q) = 1` also sets `x(i,r) = 0` for every other pool and
    /// `x(j,q) = 0` for every neighbor `j`. Satisfied clauses leave the graph,
    /// falsified literals leave their clauses. Returns every variable fixed by
    /// the call.
    ///
    /// On [`CspError::Contradiction`] the simplification has still been fully
    /// applied: the emptied clauses are recorded in [`Self::falsified`] and the
    /// graph stays consistent, so the caller may keep decimating.
    pub fn fix_variable(&mut self, v: VarId, value: bool) -> Result<Vec<(VarId, bool)>, CspError> {
        if v.station >= self.n || v.pool >= self.q {
            return Err(CspError::PoolOutOfRange { pool: v.pool, q: self.q });
        }
        let k = self.index(v);
        if self.fixed[k].is_some() {
            return Err(CspError::NotLive(v));
        }
        let mut fixed = Vec::new();
        let mut emptied = Vec::new();
        self.assign(k, value, &mut fixed, &mut emptied);
        if value {
            for r in 0..self.q {
                let kr = v.station * self.q + r;
                if self.fixed[kr].is_none() {
                    self.assign(kr, false, &mut fixed, &mut emptied);
                }
            }
            self.block_neighbors(v.station, v.pool, &mut fixed, &mut emptied);
        }
        self.finish(fixed, emptied)
    }

    fn block_neighbors(&mut self, station: usize, pool: usize, fixed: &mut Vec<(VarId, bool)>, emptied: &mut Vec<ClauseId>) {
        for idx in 0..self.neighbors[station].len() {
            let j = self.neighbors[station][idx];
            let kj = j * self.q + pool;
            if self.fixed[kj].is_none() {
                self.assign(kj, false, fixed, emptied);
            }
        }
    }

    /// Forbid `pool` at every neighbor of `station`. Used when a station is
    /// given a pool outside the formula (a conflict resolution), so that the
    /// rest of the graph still sees the pool as taken.
    pub fn exclude_pool_around(&mut self, station: usize, pool: usize) -> Result<Vec<(VarId, bool)>, CspError> {
        let mut fixed = Vec::new();
        let mut emptied = Vec::new();
        // the station's own variables are moot once it has a pool
        for r in 0..self.q {
            let k = station * self.q + r;
            if self.fixed[k].is_none() {
                self.assign(k, r == pool, &mut fixed, &mut emptied);
            }
        }
        self.block_neighbors(station, pool, &mut fixed, &mut emptied);
        self.finish(fixed, emptied)
    }

    /// Stations whose alpha clause has exactly one literal left.
    pub fn one_option_stations(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| {
                let c = self.alpha_of[i];
                self.live[c] && self.literals[c].len() == 1
            })
            .collect()
    }

    /// Structural self-check used by tests: adjacency is the exact inverse of
    /// the live literal lists and no live clause mentions a fixed variable.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut count = 0;
        for c in 0..self.literals.len() {
            if !self.live[c] {
                if !self.literals[c].is_empty() {
                    return Err(format!("dead clause {c} still holds literals"));
                }
                continue;
            }
            count += 1;
            if self.literals[c].is_empty() {
                return Err(format!("live clause {c} is empty"));
            }
            for l in &self.literals[c] {
                let k = self.index(l.var);
                if self.fixed[k].is_some() {
                    return Err(format!("clause {c} references fixed {}", l.var));
                }
                if !self.var_adj[k].contains(&c) {
                    return Err(format!("adjacency of {} misses clause {c}", l.var));
                }
            }
        }
        if count != self.live_clauses {
            return Err("live clause counter out of sync".into());
        }
        for (k, adj) in self.var_adj.iter().enumerate() {
            if self.fixed[k].is_some() && !adj.is_empty() {
                return Err(format!("fixed {} keeps adjacency", self.var(k)));
            }
            for &c in adj {
                if !self.live[c] || !self.literals[c].iter().any(|l| self.index(l.var) == k) {
                    return Err(format!("adjacency of {} lists foreign clause {c}", self.var(k)));
                }
            }
        }
        if self.fixed.iter().filter(|f| f.is_none()).count() != self.live_vars {
            return Err("live variable counter out of sync".into());
        }
        Ok(())
    }
}

/// Exhaustive minimum of the cost over one-pool-per-station assignments.
/// Assignments are enumerated lexicographically (station 0 most significant),
/// so the first minimizer found is returned.
pub fn brute_force_min_cost(g: &NetworkGraph, q: usize) -> Result<(Allocation, usize), CspError> {
    if q == 0 {
        return Err(CspError::NoPools);
    }
    let n = g.n();
    let total = (q as u64).checked_pow(n as u32).filter(|&t| t <= BRUTE_FORCE_LIMIT);
    let total = total.ok_or(CspError::TooLarge { n, q })?;
    let edges: Vec<(usize, usize)> = g.edges().map(|(i, j, _)| (i, j)).collect();
    let mut pools = vec![0usize; n];
    let mut best = (usize::MAX, pools.clone());
    for _ in 0..total {
        // one clause per monochromatic edge; alpha clauses always hold here
        let cost = edges.iter().filter(|&&(i, j)| pools[i] == pools[j]).count();
        if cost < best.0 {
            best = (cost, pools.clone());
            if cost == 0 {
                break;
            }
        }
        for slot in pools.iter_mut().rev() {
            *slot += 1;
            if *slot < q {
                break;
            }
            *slot = 0;
        }
    }
    Ok((Allocation::from_pools(&best.1), best.0))
}
