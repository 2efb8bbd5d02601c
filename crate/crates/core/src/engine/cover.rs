//! Sound over-approximation of counter reachability.
//!
//! First the control graph is pruned to transitions that lie between the
//! initial state and some target state; decrements of counters that are
//! never incremented in the pruned graph are dropped, and pruning repeats.
//! Then a coverability graph with ω-acceleration runs on what is left.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::model::{CounterMachine, CounterOp, StateId};

const OMEGA: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverTarget {
    pub states: Vec<StateId>,
    pub valuation: Vec<u64>,
    /// Match the valuation exactly instead of covering it.
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coverability {
    /// No run reaches any target.
    Unreachable,
    /// Some target may be reachable.
    Maybe,
}

fn prune(cm: &CounterMachine, targets: &[CoverTarget]) -> (Vec<bool>, Vec<bool>, Vec<bool>) {
    let n = cm.num_states();
    let ts = cm.transitions();
    let mut enabled = vec![true; ts.len()];
    let mut is_target = vec![false; n];
    for t in targets {
        for s in &t.states {
            is_target[s.index()] = true;
        }
    }
    loop {
        let mut fwd = vec![false; n];
        fwd[cm.init().index()] = true;
        let mut stack = vec![cm.init()];
        while let Some(s) = stack.pop() {
            for (tid, t) in cm.outgoing(s) {
                if enabled[tid] && !fwd[t.dst.index()] {
                    fwd[t.dst.index()] = true;
                    stack.push(t.dst);
                }
            }
        }
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (tid, t) in ts.iter().enumerate() {
            if enabled[tid] {
                rev[t.dst.index()].push(tid);
            }
        }
        let mut bwd = is_target.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&s| bwd[s]).collect();
        while let Some(s) = stack.pop() {
            for &tid in &rev[s] {
                let p = ts[tid].src.index();
                if !bwd[p] {
                    bwd[p] = true;
                    stack.push(p);
                }
            }
        }
        let mut has_inc = vec![false; cm.num_counters()];
        for (tid, t) in ts.iter().enumerate() {
            enabled[tid] = enabled[tid] && fwd[t.src.index()] && bwd[t.dst.index()];
            if enabled[tid] {
                if let CounterOp::Inc(x) = t.action.op {
                    has_inc[x.index()] = true;
                }
            }
        }
        let mut changed = false;
        for (tid, t) in ts.iter().enumerate() {
            if let CounterOp::Dec(x) = t.action.op {
                if enabled[tid] && !has_inc[x.index()] {
                    enabled[tid] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            let live: Vec<bool> = (0..n).map(|s| fwd[s] && bwd[s]).collect();
            return (enabled, live, has_inc);
        }
    }
}

fn matches(q: StateId, v: &[u64], t: &CoverTarget) -> bool {
    t.states.contains(&q)
        && v.iter().zip(&t.valuation).all(|(&x, &y)| x == OMEGA || if t.exact { x == y } else { x >= y })
}

/// `Unreachable` is a proof that no target configuration is reachable.
pub fn coverability_filter(cm: &CounterMachine, targets: &[CoverTarget], budget: usize) -> Coverability {
    let (enabled, live, has_inc) = prune(cm, targets);
    let feasible: Vec<CoverTarget> = targets
        .iter()
        .filter_map(|t| {
            let states: Vec<StateId> = t.states.iter().copied().filter(|s| live[s.index()]).collect();
            let ok = !states.is_empty() && t.valuation.iter().enumerate().all(|(x, &v)| v == 0 || has_inc[x]);
            ok.then(|| CoverTarget { states, ..t.clone() })
        })
        .collect();
    if feasible.is_empty() {
        return Coverability::Unreachable;
    }

    let mut keys: Vec<(StateId, Vec<u64>)> = vec![(cm.init(), vec![0; cm.num_counters()])];
    let mut parent: Vec<Option<u32>> = vec![None];
    let mut index: HashMap<(StateId, Vec<u64>), u32> = HashMap::new();
    index.insert(keys[0].clone(), 0);
    if feasible.iter().any(|t| matches(keys[0].0, &keys[0].1, t)) {
        return Coverability::Maybe;
    }
    let mut queue = alloc::collections::VecDeque::from([0u32]);
    while let Some(n) = queue.pop_front() {
        let (q, v) = keys[n as usize].clone();
        for (tid, t) in cm.outgoing(q) {
            if !enabled[tid] {
                continue;
            }
            let mut w = v.clone();
            if t.action.zero.iter().any(|z| w[z.index()] != 0 && w[z.index()] != OMEGA) {
                continue;
            }
            for z in &t.action.zero {
                w[z.index()] = 0;
            }
            match t.action.op {
                CounterOp::Inc(x) => {
                    if w[x.index()] != OMEGA {
                        w[x.index()] += 1;
                    }
                }
                CounterOp::Dec(x) => match w[x.index()] {
                    0 => continue,
                    OMEGA => {}
                    _ => w[x.index()] -= 1,
                },
            }
            // accelerate against dominated ancestors
            let mut cur = Some(n);
            while let Some(a) = cur {
                let (qa, va) = &keys[a as usize];
                if *qa == t.dst && va.iter().zip(&w).all(|(x, y)| *y == OMEGA || (*x != OMEGA && x <= y)) {
                    for (x, y) in va.iter().zip(w.iter_mut()) {
                        if x < y {
                            *y = OMEGA;
                        }
                    }
                }
                cur = parent[a as usize];
            }
            let key = (t.dst, w);
            if index.contains_key(&key) {
                continue;
            }
            if feasible.iter().any(|tg| matches(key.0, &key.1, tg)) {
                return Coverability::Maybe;
            }
            if keys.len() >= budget {
                return Coverability::Maybe;
            }
            let id = keys.len() as u32;
            index.insert(key.clone(), id);
            keys.push(key);
            parent.push(Some(n));
            queue.push_back(id);
        }
    }
    Coverability::Unreachable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CounterAction, CounterId, CounterTransition};
    use alloc::string::ToString;

    fn machine(ts: &[(u32, CounterOp, &[u32], u32)], states: usize, counters: usize) -> CounterMachine {
        CounterMachine::new(
            (0..states).map(|i| alloc::format!("s{i}")).collect(),
            (0..counters).map(|i| alloc::format!("x{i}")).collect(),
            ts.iter()
                .map(|&(s, op, z, d)| CounterTransition {
                    src: StateId(s),
                    action: CounterAction { op, zero: z.iter().map(|&c| CounterId(c)).collect() },
                    dst: StateId(d),
                })
                .collect(),
            StateId(0),
        )
    }

    #[test]
    fn zero_test_pins_counter() {
        // s0: inc x loop; s0 -(dec y, zero x)-> s1; s0 inc y loop
        let x = CounterId(0);
        let y = CounterId(1);
        let cm = machine(
            &[(0, CounterOp::Inc(x), &[], 0), (0, CounterOp::Inc(y), &[], 0), (0, CounterOp::Dec(y), &[0], 1)],
            2,
            2,
        );
        let t = CoverTarget { states: vec![StateId(1)], valuation: vec![1, 0], exact: false };
        assert_eq!(coverability_filter(&cm, &[t], 1000), Coverability::Unreachable);
        let t = CoverTarget { states: vec![StateId(1)], valuation: vec![0, 3], exact: false };
        assert_eq!(coverability_filter(&cm, &[t], 1000), Coverability::Maybe);
    }

    #[test]
    fn never_incremented_counter_blocks_decrements() {
        let x = CounterId(0);
        let cm = machine(&[(0, CounterOp::Dec(x), &[], 1)], 2, 1);
        let t = CoverTarget { states: vec![StateId(1)], valuation: vec![0], exact: true };
        assert_eq!(coverability_filter(&cm, &[t], 1000), Coverability::Unreachable);
        assert_eq!(cm.state_name(StateId(1)), "s1".to_string());
    }
}
