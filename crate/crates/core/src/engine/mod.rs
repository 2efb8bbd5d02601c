//! Decision procedures over normal-form bundles and their counter machines.

mod cover;
mod explore;
mod finite;
mod invariant;
mod ob;
mod reach;
mod reduce;
mod search;

pub use cover::{coverability_filter, CoverTarget, Coverability};
pub use explore::{explore_fifo, ExploreLimits, FifoExploration, Tracking};
pub use finite::{decide_boundedness, decide_termination};
pub use invariant::linearly_unreachable;
pub use ob::{ob_bundle, ob_decide, suffixed_specs, ObQuery};
pub use reach::{
    decide_control_state, decide_deadlock, decide_rational_reachability, decide_reachability, deadlock_candidates,
    membership_in_ta, translate_target,
};
pub use reduce::{
    apply_reduction, counter_reachable, decide_reduced, duplicate_counters, ReduceError, Reduced, ReducedTarget, Reduction,
    ReductionInput,
};
pub use search::{bfs, BfsEnd, BfsLimits, Flow, SearchGraph};

use alloc::vec::Vec;
use core::cell::OnceCell;

use crate::counterize::{build_counter_machine, CounterIndexing};
use crate::model::{run_transitions, CounterAction, CounterMachine, FifoAction, FifoConfig};
use crate::normalize::NormalFormBundle;

/// Runs a pure function over a slice, possibly in parallel. Results must be
/// returned in input order so that exploration stays deterministic.
pub trait Executor: Sync {
    fn map<T: Sync, U: Send, F: Fn(&T) -> U + Sync>(&self, items: &[T], f: F) -> Vec<U>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T: Sync, U: Send, F: Fn(&T) -> U + Sync>(&self, items: &[T], f: F) -> Vec<U> {
        items.iter().map(f).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineOptions {
    /// Depth of the fallback search when exhaustive search is not possible.
    pub max_depth: u32,
    /// Optional cap on the number of letters per channel in fallback search.
    pub channel_bound: Option<u32>,
    /// Maximal number of configurations explored by one search.
    pub state_budget: usize,
    /// Maximal number of nodes of the coverability graph.
    pub cover_budget: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { max_depth: 48, channel_bound: None, state_budget: 4_000_000, cover_budget: 200_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// The target cannot match any valid configuration.
    Trivial,
    /// The complete reachable set was explored.
    Exhaustive,
    /// Depth- or size-limited search.
    BoundedSearch,
    /// Over-approximation by the coverability graph.
    Coverability,
    /// A linear invariant separates the target from the start.
    Invariant,
    /// A run reaching a configuration that dominates an earlier one.
    SelfCovering,
    /// A cycle in the finite reachability graph.
    Cycle,
    /// Reduction to another problem.
    Reduction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bound {
    pub depth: u32,
    pub states: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Bundle transitions along the run.
    pub transitions: Vec<usize>,
    /// Bundle actions along the run.
    pub trace: Vec<FifoAction>,
    /// Original machine actions along the run.
    pub original: Vec<FifoAction>,
    /// Counter actions along the run.
    pub counter: Vec<CounterAction>,
    /// For self-covering runs, the length of the prefix before the loop.
    pub split: Option<usize>,
    /// Final bundle configuration.
    pub end: FifoConfig,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub answer: Answer,
    pub witness: Option<Witness>,
    pub method: Method,
    pub bound: Option<Bound>,
}

impl Verdict {
    pub fn no(method: Method) -> Self {
        Verdict { answer: Answer::No, witness: None, method, bound: None }
    }
}

/// A bundle with its counter machine and cached analysis results.
pub struct Analysis<'a> {
    pub bundle: &'a NormalFormBundle,
    pub counters: CounterMachine,
    pub index: CounterIndexing,
    pub options: EngineOptions,
    boundedness: OnceCell<Verdict>,
}

impl<'a> Analysis<'a> {
    pub fn new(bundle: &'a NormalFormBundle, options: EngineOptions) -> Self {
        let (counters, index) = build_counter_machine(bundle);
        Analysis { bundle, counters, index, options, boundedness: OnceCell::new() }
    }

    pub fn boundedness<E: Executor>(&self, exec: &E) -> &Verdict {
        self.boundedness.get_or_init(|| decide_boundedness(self, exec))
    }

    /// Builds a witness from a bundle transition path.
    pub fn witness(&self, tids: Vec<usize>, split: Option<usize>) -> Witness {
        let m = &self.bundle.machine;
        let trace: Vec<FifoAction> = tids.iter().map(|&t| m.transitions()[t].action).collect();
        let counter = tids.iter().map(|&t| self.counters.transitions()[t].action.clone()).collect();
        let end = run_transitions(m, &m.initial_config(), &tids).expect("search paths are runs of the bundle");
        Witness { original: self.bundle.lift_transitions(&tids), transitions: tids, trace, counter, split, end }
    }
}
