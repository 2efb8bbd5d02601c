//! Boundedness and termination of counter machines built from bundles.
//!
//! Both searches run breadth-first over counter configurations with global
//! deduplication. A new configuration that dominates a same-state ancestor on
//! its discovery path witnesses an unbounded (hence non-terminating) run;
//! when nothing dominates, the reachable set is finite and exhaustion
//! decides, with a cycle check for termination.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::search::{bfs, BfsEnd, BfsLimits, Flow, SearchGraph};
use super::{Analysis, Answer, Bound, Executor, Method, Verdict};
use crate::model::{apply_counter_action, CounterMachine};

pub(crate) type CounterKey = Box<[u32]>;

/// Successors of `[state, valuation..]` keys.
pub(crate) fn counter_successors(cm: &CounterMachine, key: &[u32]) -> Vec<(u32, CounterKey)> {
    let mut out = Vec::new();
    let mut v: Vec<u64> = key[1..].iter().map(|&x| x as u64).collect();
    for (tid, t) in cm.outgoing(crate::model::StateId(key[0])) {
        let saved = v.clone();
        if apply_counter_action(&mut v, &t.action).is_ok() {
            let mut k = Vec::with_capacity(key.len());
            k.push(t.dst.0);
            k.extend(v.iter().map(|&x| x as u32));
            out.push((tid as u32, k.into_boxed_slice()));
        }
        v = saved;
    }
    out
}

fn dominated_ancestor(g: &SearchGraph<CounterKey>, n: u32) -> Option<u32> {
    let k = &g.keys[n as usize];
    g.ancestors(n).find(|&a| {
        let ka = &g.keys[a as usize];
        ka[0] == k[0] && ka[1..].iter().zip(&k[1..]).all(|(x, y)| x <= y)
    })
}

fn search<E: Executor>(an: &Analysis<'_>, exec: &E, record: bool) -> (SearchGraph<CounterKey>, BfsEnd, Option<u32>) {
    let cm = &an.counters;
    let init = {
        let mut k = vec![cm.init().0];
        k.extend(core::iter::repeat_n(0, cm.num_counters()));
        k.into_boxed_slice()
    };
    let mut found = None;
    let (g, end) = bfs(
        exec,
        init,
        BfsLimits { max_depth: None, max_states: Some(an.options.state_budget) },
        record,
        |k: &CounterKey| counter_successors(cm, k),
        |g, n| match dominated_ancestor(g, n) {
            Some(a) => {
                found = Some(a);
                Flow::Stop
            }
            None => Flow::Continue,
        },
    );
    (g, end, found)
}

fn bound_of(g: &SearchGraph<CounterKey>) -> Option<Bound> {
    Some(Bound { depth: g.depth.iter().copied().max().unwrap_or(0), states: g.len() })
}

/// Yes = bounded, No = unbounded with a self-covering witness.
pub fn decide_boundedness<E: Executor>(an: &Analysis<'_>, exec: &E) -> Verdict {
    let (g, end, anc) = search(an, exec, false);
    conclude(an, &g, end, anc, |_| None)
}

/// Yes = terminating, No = an infinite run exists, witnessed by a
/// self-covering run or a lasso.
pub fn decide_termination<E: Executor>(an: &Analysis<'_>, exec: &E) -> Verdict {
    let (g, end, anc) = search(an, exec, true);
    conclude(an, &g, end, anc, find_cycle)
}

fn conclude(
    an: &Analysis<'_>,
    g: &SearchGraph<CounterKey>,
    end: BfsEnd,
    anc: Option<u32>,
    cycle: impl Fn(&SearchGraph<CounterKey>) -> Option<(Vec<usize>, Vec<usize>)>,
) -> Verdict {
    let bound = bound_of(g);
    match end {
        BfsEnd::Stopped(n) => {
            let a = anc.expect("stopped on domination");
            let mut tids = g.path_to(a);
            let split = tids.len();
            tids.extend(g.path_between(a, n).expect("ancestor"));
            Verdict {
                answer: Answer::No,
                witness: Some(an.witness(tids, Some(split))),
                method: Method::SelfCovering,
                bound,
            }
        }
        BfsEnd::Exhausted => match cycle(g) {
            Some((stem, lp)) => {
                let split = stem.len();
                let mut tids = stem;
                tids.extend(lp);
                Verdict { answer: Answer::No, witness: Some(an.witness(tids, Some(split))), method: Method::Cycle, bound }
            }
            None => Verdict { answer: Answer::Yes, witness: None, method: Method::Exhaustive, bound },
        },
        BfsEnd::DepthLimit | BfsEnd::StateLimit => {
            Verdict { answer: Answer::Unknown, witness: None, method: Method::BoundedSearch, bound }
        }
    }
}

/// A reachable cycle as (path to its first node, cycle transitions).
fn find_cycle(g: &SearchGraph<CounterKey>) -> Option<(Vec<usize>, Vec<usize>)> {
    let edges = g.edges.as_ref()?;
    let n = g.len();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; n];
    let mut stack: Vec<(u32, usize)> = vec![(0, 0)];
    let mut via: Vec<usize> = Vec::new();
    color[0] = 1;
    while let Some(&mut (u, ref mut i)) = stack.last_mut() {
        if let Some(&(t, w)) = edges[u as usize].get(*i) {
            *i += 1;
            match color[w as usize] {
                0 => {
                    color[w as usize] = 1;
                    stack.push((w, 0));
                    via.push(t as usize);
                }
                1 => {
                    let pos = stack.iter().position(|&(x, _)| x == w).unwrap();
                    let stem: Vec<usize> = via[..pos].to_vec();
                    let mut lp: Vec<usize> = via[pos..].to_vec();
                    lp.push(t as usize);
                    return Some((stem, lp));
                }
                _ => {}
            }
        } else {
            color[u as usize] = 2;
            stack.pop();
            via.pop();
        }
    }
    None
}
