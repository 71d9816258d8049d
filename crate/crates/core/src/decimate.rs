//! Bookkeeping shared by the decimation solvers: fixing variables on the
//! factor graph while mirroring decisions into an [`Allocation`], the
//! one-option cascade, and min-conflict repair of stations left without an
//! admissible pool.

use crate::csp::{Allocation, CspError, FactorGraph, Provenance, VarId};

/// Counters reported by every solver run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Variables fixed from message-passing biases.
    pub decimation_steps: usize,
    /// Calls to the message-passing routine.
    pub survey_runs: usize,
    /// Sweeps summed over all runs.
    pub survey_sweeps: usize,
    pub non_converged_runs: usize,
    /// Random max-degree assignments after repeated non-convergence.
    pub restarts: usize,
    /// The greedy heuristic completed the allocation.
    pub fallback_used: bool,
    /// Stations that ran out of admissible pools.
    pub contradictions: usize,
    /// Stations assigned because a single pool was left.
    pub forced: usize,
    /// Belief propagation hit a forced shared pool and stopped.
    pub stopped_early: bool,
}

/// Pool with the fewest already-assigned neighbors using it; smallest index
/// on ties.
pub fn min_conflict_pool(neighbors: &[usize], alloc: &Allocation, q: usize) -> usize {
    let mut counts = vec![0usize; q];
    for &j in neighbors {
        if let Some(p) = alloc.pool(j) {
            counts[p] += 1;
        }
    }
    (0..q).min_by_key(|&p| (counts[p], p)).unwrap_or(0)
}

/// Factor graph plus the allocation it is producing.
#[derive(Debug, Clone)]
pub struct Decimation {
    pub fg: FactorGraph,
    pub alloc: Allocation,
    pub stats: SolveStats,
}

impl Decimation {
    pub fn new(fg: FactorGraph) -> Self {
        let n = fg.n();
        Self { fg, alloc: Allocation::new(n), stats: SolveStats::default() }
    }

    pub fn q(&self) -> usize {
        self.fg.q()
    }

    /// Fix one variable and return the stations left without any pool.
    pub fn apply(&mut self, v: VarId, value: bool, how: Provenance) -> Vec<usize> {
        let result = self.fg.fix_variable(v, value);
        if value && !matches!(result, Err(CspError::NotLive(_))) {
            self.alloc.assign(v.station, v.pool, how);
        }
        match result {
            Ok(_) => Vec::new(),
            Err(CspError::Contradiction { stations, .. }) => {
                stations.into_iter().filter(|&s| self.alloc.pool(s).is_none()).collect()
            }
            Err(e) => panic!("decimation on a settled variable: {e}"),
        }
    }

    /// Give each conflicted station its least-conflicting pool and forbid that
    /// pool around it, repeating for any station this in turn empties.
    pub fn repair(&mut self, mut pending: Vec<usize>) {
        while let Some(s) = pending.pop() {
            if self.alloc.pool(s).is_some() {
                continue;
            }
            let pool = min_conflict_pool(self.fg.neighbors(s), &self.alloc, self.q());
            self.alloc.assign(s, pool, Provenance::MinConflict);
            self.stats.contradictions += 1;
            if let Err(CspError::Contradiction { stations, .. }) = self.fg.exclude_pool_around(s, pool) {
                pending.extend(stations.into_iter().filter(|&x| self.alloc.pool(x).is_none()));
            }
        }
    }

    /// Assign every station that has exactly one admissible pool left, until
    /// no such station remains.
    pub fn cascade(&mut self) {
        loop {
            let singles = self.fg.one_option_stations();
            if singles.is_empty() {
                return;
            }
            for i in singles {
                let opts = self.fg.live_options(i);
                if opts.len() != 1 {
                    continue;
                }
                self.stats.forced += 1;
                let conflicted = self.apply(VarId::new(i, opts[0]), true, Provenance::Forced);
                self.repair(conflicted);
            }
        }
    }

    /// Like [`Self::cascade`] but stops at the first station left without
    /// a pool and returns the conflicted stations instead of repairing them.
    pub fn cascade_until_conflict(&mut self) -> Vec<usize> {
        loop {
            let singles = self.fg.one_option_stations();
            if singles.is_empty() {
                return Vec::new();
            }
            for i in singles {
                let opts = self.fg.live_options(i);
                if opts.len() != 1 {
                    continue;
                }
                self.stats.forced += 1;
                let conflicted = self.apply(VarId::new(i, opts[0]), true, Provenance::Forced);
                if !conflicted.is_empty() {
                    return conflicted;
                }
            }
        }
    }

    /// Fix, repair and cascade.
    pub fn commit(&mut self, v: VarId, value: bool, how: Provenance) {
        let conflicted = self.apply(v, value, how);
        self.repair(conflicted);
        self.cascade();
    }

    /// Complete every unassigned station, visiting them in `order`: smallest
    /// admissible pool if one is left, otherwise the least-conflicting pool.
    /// Each choice is propagated through the factor graph before the next
    /// station is served.
    pub fn complete_in_order(&mut self, order: &[usize], how: Provenance) {
        for &i in order {
            if self.alloc.pool(i).is_some() {
                continue;
            }
            match self.fg.live_options(i).first() {
                Some(&p) => self.commit(VarId::new(i, p), true, how),
                None => self.repair(vec![i]),
            }
        }
    }

    pub fn finish(self) -> (Allocation, SolveStats) {
        debug_assert!(self.alloc.is_full());
        (self.alloc, self.stats)
    }
}
