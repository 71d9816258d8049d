//! Reference allocators: the greedy colorers and a belief-propagation
//! decimation solver.

mod bp;
mod greedy;

pub use bp::{bp_allocate, bp_marginals, BpParams};
pub use greedy::{greedy_allocate, greedy_order, GreedyOrder};
