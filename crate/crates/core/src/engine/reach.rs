//! Reachability questions answered on the counter machine while tracking
//! the last letter sent on each channel, so that counter values decode back
//! to unique channel contents.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::invariant::linearly_unreachable;
use super::cover::{coverability_filter, CoverTarget, Coverability};
use super::search::{bfs, BfsEnd, BfsLimits, Flow};
use super::{Analysis, Answer, Bound, Executor, Method, Verdict};
use crate::counterize::{contents_to_valuation, pairs_of, valuation_to_contents, CounterIndexing, LastSent};
use crate::model::{apply_counter_action, ChannelId, CounterMachine, CounterTransition, Direction, FifoConfig, FifoMachine, LetterId, StateId};
use crate::normalize::NormalFormBundle;
use crate::relation::RationalRelation;

/// Key layout: `[state, counters.., last-sent+1 per channel]`.
type Key = Box<[u32]>;

struct Layout {
    counters: usize,
    channels: usize,
}

impl Layout {
    fn state(&self, k: &[u32]) -> StateId {
        StateId(k[0])
    }
    fn valuation(&self, k: &[u32]) -> Vec<u64> {
        k[1..1 + self.counters].iter().map(|&x| x as u64).collect()
    }
    fn last_sent(&self, k: &[u32]) -> LastSent {
        k[1 + self.counters..1 + self.counters + self.channels]
            .iter()
            .map(|&x| x.checked_sub(1).map(LetterId))
            .collect()
    }
}

struct Parts<'a> {
    counters: &'a CounterMachine,
    machine: &'a FifoMachine,
    index: &'a CounterIndexing,
}

fn successors(p: &Parts<'_>, bound: Option<u32>, k: &[u32]) -> Vec<(u32, Key)> {
    let lay = Layout { counters: p.counters.num_counters(), channels: p.machine.num_channels() };
    let m = p.machine;
    let mut out = Vec::new();
    for (tid, t) in p.counters.outgoing(lay.state(k)) {
        let mut v = lay.valuation(k);
        if apply_counter_action(&mut v, &t.action).is_err() {
            continue;
        }
        let ft = &m.transitions()[tid];
        let c = ft.action.channel;
        if let Some(b) = bound {
            let used: u64 = p.index.counters[c.index()].iter().map(|x| v[x.index()]).sum();
            if used > b as u64 {
                continue;
            }
        }
        let mut nk: Vec<u32> = Vec::with_capacity(k.len());
        nk.push(t.dst.0);
        nk.extend(v.iter().map(|&x| x as u32));
        nk.extend_from_slice(&k[1 + lay.counters..]);
        if ft.action.dir == Direction::Send {
            nk[1 + lay.counters + c.index()] = ft.action.letter.0 + 1;
        }
        out.push((tid as u32, nk.into_boxed_slice()));
    }
    out
}

/// A coverability target over bundle states, optionally restricted to some
/// last-sent vectors.
struct Goal {
    states: Vec<StateId>,
    lasts: Option<Vec<LastSent>>,
    valuation: Vec<u64>,
    exact: bool,
}

/// The counter machine with the last-sent vector folded into the control
/// state. Counter values alone cannot tell `ab` from `a` in a channel; the
/// refined states can.
fn refine(an: &Analysis<'_>) -> (CounterMachine, Vec<(StateId, LastSent)>) {
    let m = &an.bundle.machine;
    let start = (an.counters.init(), vec![None; m.num_channels()]);
    let mut ids: HashMap<(StateId, LastSent), u32> = HashMap::new();
    let mut states = vec![start.clone()];
    ids.insert(start, 0);
    let mut transitions = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let (q, a) = states[i].clone();
        for (tid, t) in an.counters.outgoing(q) {
            let ft = &m.transitions()[tid];
            let mut b = a.clone();
            if ft.action.dir == Direction::Send {
                b[ft.action.channel.index()] = Some(ft.action.letter);
            }
            let key = (t.dst, b);
            let dst = *ids.entry(key.clone()).or_insert_with(|| {
                states.push(key);
                (states.len() - 1) as u32
            });
            transitions.push(CounterTransition { src: StateId(i as u32), action: t.action.clone(), dst: StateId(dst) });
        }
        i += 1;
    }
    let names = vec![String::new(); states.len()];
    let counters = an.counters.counter_names().to_vec();
    (CounterMachine::new(names, counters, transitions, StateId(0)), states)
}

fn unreachable_by_coverability(an: &Analysis<'_>, goals: &[Goal]) -> bool {
    let (cm, states) = refine(an);
    let cover: Vec<CoverTarget> = goals
        .iter()
        .map(|g| CoverTarget {
            states: states
                .iter()
                .enumerate()
                .filter(|(_, (q, a))| g.states.contains(q) && g.lasts.as_ref().is_none_or(|ls| ls.contains(a)))
                .map(|(j, _)| StateId(j as u32))
                .collect(),
            valuation: g.valuation.clone(),
            exact: g.exact,
        })
        .collect();
    coverability_filter(&cm, &cover, an.options.cover_budget) == Coverability::Unreachable
}

/// Searches counter configurations for one satisfying `pred`. Exhaustive
/// when the machine is known to be bounded, depth-limited otherwise.
fn drive<E: Executor>(
    an: &Analysis<'_>,
    exec: &E,
    goals: Vec<Goal>,
    pred: impl Fn(StateId, &[u64], &LastSent) -> bool,
) -> Verdict {
    if unreachable_by_coverability(an, &goals) {
        return Verdict::no(Method::Coverability);
    }
    let bounded = an.boundedness(exec).answer == Answer::Yes;
    let (limits, bound) = if bounded {
        (BfsLimits { max_depth: None, max_states: Some(an.options.state_budget) }, None)
    } else {
        (
            BfsLimits { max_depth: Some(an.options.max_depth), max_states: Some(an.options.state_budget) },
            an.options.channel_bound,
        )
    };
    let lay = Layout { counters: an.counters.num_counters(), channels: an.bundle.machine.num_channels() };
    let parts = Parts { counters: &an.counters, machine: &an.bundle.machine, index: &an.index };
    let mut init = vec![an.counters.init().0];
    init.extend(core::iter::repeat_n(0, lay.counters + lay.channels));
    let (g, end) = bfs(
        exec,
        init.into_boxed_slice(),
        limits,
        false,
        |k: &Key| successors(&parts, bound, k),
        |g, n| {
            let k = &g.keys[n as usize];
            if pred(lay.state(k), &lay.valuation(k), &lay.last_sent(k)) {
                Flow::Stop
            } else {
                Flow::Continue
            }
        },
    );
    let stats = Some(Bound { depth: g.depth.iter().copied().max().unwrap_or(0), states: g.len() });
    match end {
        BfsEnd::Stopped(n) => Verdict {
            answer: Answer::Yes,
            witness: Some(an.witness(g.path_to(n), None)),
            method: if bounded { Method::Exhaustive } else { Method::BoundedSearch },
            bound: stats,
        },
        BfsEnd::Exhausted if bound.is_none() => {
            Verdict { answer: Answer::No, witness: None, method: Method::Exhaustive, bound: stats }
        }
        _ => Verdict { answer: Answer::Unknown, witness: None, method: Method::BoundedSearch, bound: stats },
    }
}

/// Is some configuration of `targets` (over the bundle alphabet) reachable
/// by a run whose projections are complete bounded-language words?
pub fn decide_reachability<E: Executor>(an: &Analysis<'_>, exec: &E, targets: &[FifoConfig]) -> Verdict {
    let mut prepared: Vec<(StateId, Vec<u64>, Vec<LastSent>)> = Vec::new();
    let mut separated = false;
    for t in targets {
        if !an.bundle.is_accepting(t.state) {
            continue;
        }
        if linearly_unreachable(&an.bundle.machine, t) {
            separated = true;
            continue;
        }
        let pairs = pairs_of(&t.contents, &an.index);
        if pairs.is_empty() {
            continue;
        }
        prepared.push((t.state, contents_to_valuation(&t.contents, &an.index), pairs));
    }
    if prepared.is_empty() {
        return Verdict::no(if separated { Method::Invariant } else { Method::Trivial });
    }
    let cover = prepared
        .iter()
        .map(|(q, v, pairs)| Goal { states: vec![*q], lasts: Some(pairs.clone()), valuation: v.clone(), exact: true })
        .collect();
    drive(an, exec, cover, |q, v, a| prepared.iter().any(|(tq, tv, pairs)| *tq == q && tv == v && pairs.contains(a)))
}

/// Bundle configurations over original state `target.state` whose contents
/// map onto the original contents.
pub fn translate_target(bundle: &NormalFormBundle, target: &FifoConfig) -> Vec<FifoConfig> {
    let pre = bundle.contents_preimages(&target.contents);
    let mut out = Vec::new();
    for q in bundle.states_over(target.state) {
        for w in &pre {
            out.push(FifoConfig { state: q, contents: w.clone() });
        }
    }
    out
}

fn accepting(an: &Analysis<'_>, states: &[StateId]) -> Vec<StateId> {
    states.iter().copied().filter(|&q| an.bundle.is_accepting(q)).collect()
}

/// Is some `(q, w)` with `q` in `states` and `w` in `rel` reachable?
pub fn decide_rational_reachability<E: Executor>(
    an: &Analysis<'_>,
    exec: &E,
    states: &[StateId],
    rel: &RationalRelation,
) -> Verdict {
    let states = accepting(an, states);
    if states.is_empty() {
        return Verdict::no(Method::Trivial);
    }
    let zero = vec![0; an.counters.num_counters()];
    let cover = vec![Goal { states: states.clone(), lasts: None, valuation: zero, exact: false }];
    drive(an, exec, cover, |q, v, a| states.contains(&q) && membership_in_ta(&an.index, v, a, rel))
}

/// Is some state of `states` reachable with complete projections?
pub fn decide_control_state<E: Executor>(an: &Analysis<'_>, exec: &E, states: &[StateId]) -> Verdict {
    let states = accepting(an, states);
    if states.is_empty() {
        return Verdict::no(Method::Trivial);
    }
    let zero = vec![0; an.counters.num_counters()];
    let cover = vec![Goal { states: states.clone(), lasts: None, valuation: zero, exact: false }];
    drive(an, exec, cover, |q, _, _| states.contains(&q))
}

/// Bundle states whose outgoing transitions are all receives.
pub fn deadlock_candidates(an: &Analysis<'_>) -> Vec<StateId> {
    let m = &an.bundle.machine;
    (0..m.num_states() as u32)
        .map(StateId)
        .filter(|&q| m.outgoing(q).all(|(_, t)| t.action.dir == Direction::Receive))
        .collect()
}

/// Is a configuration with no enabled transition reachable?
pub fn decide_deadlock<E: Executor>(an: &Analysis<'_>, exec: &E) -> Verdict {
    let cands = accepting(an, &deadlock_candidates(an));
    if cands.is_empty() {
        return Verdict::no(Method::Trivial);
    }
    let m = &an.bundle.machine;
    // receivable letters per candidate
    let receivable: Vec<BTreeSet<LetterId>> =
        cands.iter().map(|&q| m.outgoing(q).map(|(_, t)| t.action.letter).collect()).collect();
    let zero = vec![0; an.counters.num_counters()];
    let cover = vec![Goal { states: cands.clone(), lasts: None, valuation: zero, exact: false }];
    drive(an, exec, cover, |q, v, a| {
        let Some(i) = cands.iter().position(|&c| c == q) else { return false };
        let Some(w) = valuation_to_contents(v, a, &an.index) else { return false };
        w.iter().all(|word| word.first().is_none_or(|h| !receivable[i].contains(h)))
    })
}

/// Whether the unique good contents for `v` and `a` exists and lies in
/// `rel`, decided by a search over the relation automaton and per-channel
/// good-word automata under the letter budgets of `v`.
pub fn membership_in_ta(idx: &CounterIndexing, v: &[u64], a: &LastSent, rel: &RationalRelation) -> bool {
    let nch = idx.counters.len();
    // per channel: factor-automaton state and 0 = empty, 1 = ends with a, 2 = other
    type Node = (u32, Vec<u32>, Vec<u8>, Vec<u64>);
    let start_infix: Vec<u32> = idx.infix.iter().map(|d| d.init()).collect();
    let mut seen: hashbrown::HashSet<Node> = hashbrown::HashSet::new();
    let mut stack: Vec<Node> =
        rel.nfa.initial.iter().map(|&s| (s, start_infix.clone(), vec![0u8; nch], v.to_vec())).collect();
    while let Some(node) = stack.pop() {
        if !seen.insert(node.clone()) {
            continue;
        }
        let (r, inf, flags, budget) = &node;
        let done = rel.nfa.finals[*r as usize]
            && budget.iter().all(|&b| b == 0)
            && (0..nch).all(|c| idx.infix[c].is_final(inf[c]) && flags[c] != 2);
        if done {
            return true;
        }
        for &t in &rel.nfa.eps[*r as usize] {
            stack.push((t, inf.clone(), flags.clone(), budget.clone()));
        }
        'edge: for &(sym, t) in &rel.nfa.trans[*r as usize] {
            let mut inf2 = inf.clone();
            let mut flags2 = flags.clone();
            let mut budget2 = budget.clone();
            for (c, comp) in rel.letters[sym as usize].iter().enumerate() {
                let Some(l) = comp else { continue };
                if a[c].is_none() || idx.word_of[l.index()].0 != ChannelId(c as u32) {
                    continue 'edge;
                }
                let x = idx.counter_of(*l).index();
                if budget2[x] == 0 {
                    continue 'edge;
                }
                budget2[x] -= 1;
                match idx.infix[c].step(inf2[c], idx.local(*l)) {
                    Some(s) => inf2[c] = s,
                    None => continue 'edge,
                }
                flags2[c] = if Some(*l) == a[c] { 1 } else { 2 };
            }
            stack.push((t, inf2, flags2, budget2));
        }
    }
    false
}
