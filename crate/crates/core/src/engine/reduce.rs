//! Reductions between problems. Each one builds a new artifact and a target
//! whose answer equals the answer of the original question, so that the
//! direct procedures can be cross-checked against plain search.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

use super::finite::counter_successors;
use super::search::{bfs, BfsEnd, BfsLimits, Flow};
use super::reach::{decide_control_state, decide_deadlock, decide_reachability, translate_target};
use super::{Analysis, Answer, EngineOptions, Executor, Method, Verdict};
use crate::bounded::{validate_bounded_spec, BoundedError, BoundedLangSpec, Strictness, ValidatedSpec};
use crate::counterize::build_counter_machine;
use crate::model::{
    ChannelId, CounterAction, CounterConfig, CounterId, CounterMachine, CounterOp, CounterTransition, Direction,
    FifoConfig, FifoMachine, FifoMachineBuilder, ModelError, StateId,
};
use crate::normalize::{normalize_machine, NormalizeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reduction {
    /// Configuration reachability to control-state reachability.
    ReachToCsr,
    /// Control-state reachability to configuration reachability.
    CsrToReach,
    /// Configuration reachability to deadlock.
    ReachToDeadlock,
    /// Unboundedness to counter reachability.
    BoundedToReach,
    /// Non-termination to counter reachability.
    TermToReach,
}

impl Reduction {
    pub const ALL: [Reduction; 5] = [
        Reduction::ReachToCsr,
        Reduction::CsrToReach,
        Reduction::ReachToDeadlock,
        Reduction::BoundedToReach,
        Reduction::TermToReach,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Reduction::ReachToCsr => "reach-to-csr",
            Reduction::CsrToReach => "csr-to-reach",
            Reduction::ReachToDeadlock => "reach-to-deadlock",
            Reduction::BoundedToReach => "bounded-to-reach",
            Reduction::TermToReach => "term-to-reach",
        }
    }

    pub fn from_name(s: &str) -> Option<Reduction> {
        Reduction::ALL.into_iter().find(|r| r.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("reduction `{0}` needs a target configuration")]
    MissingTarget(&'static str),
    #[error("reduction `{0}` needs a target control state")]
    MissingState(&'static str),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bounded(#[from] BoundedError),
}

/// What the reduced artifact must be asked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReducedTarget {
    ControlState(StateId),
    Config(FifoConfig),
    Deadlock,
}

#[derive(Clone, Debug)]
pub enum Reduced {
    Fifo { machine: FifoMachine, specs: Vec<ValidatedSpec>, target: ReducedTarget },
    /// The answer is yes iff one of `targets` is reachable.
    Counter { machine: CounterMachine, targets: Vec<CounterConfig> },
}

/// Inputs of a reduction. `target` is over the machine's own letters.
#[derive(Clone, Copy, Debug)]
pub struct ReductionInput<'a> {
    pub machine: &'a FifoMachine,
    pub specs: &'a [ValidatedSpec],
    pub target: Option<&'a FifoConfig>,
    pub state: Option<StateId>,
}

pub fn apply_reduction(kind: Reduction, input: ReductionInput<'_>) -> Result<Reduced, ReduceError> {
    let name = kind.name();
    match kind {
        Reduction::ReachToCsr => {
            let t = input.target.ok_or(ReduceError::MissingTarget(name))?;
            let (machine, specs, end) = flush_path(input.machine, input.specs, t, false)?;
            Ok(Reduced::Fifo { machine, specs, target: ReducedTarget::ControlState(end) })
        }
        Reduction::ReachToDeadlock => {
            let t = input.target.ok_or(ReduceError::MissingTarget(name))?;
            let (machine, specs, _) = flush_path(input.machine, input.specs, t, true)?;
            Ok(Reduced::Fifo { machine, specs, target: ReducedTarget::Deadlock })
        }
        Reduction::CsrToReach => {
            let q = input.state.ok_or(ReduceError::MissingState(name))?;
            let m = input.machine;
            let mut b = copy_machine(m, |_| None)?;
            for c in 0..m.num_channels() {
                let cid = ChannelId(c as u32);
                for &l in m.alphabet(cid) {
                    b.add_named(m.state_name(q), m.channel_name(cid), Direction::Receive, m.letter_name(l), m.state_name(q))?;
                }
            }
            let machine = b.build()?;
            let target = FifoConfig { state: q, contents: vec![Vec::new(); m.num_channels()] };
            Ok(Reduced::Fifo { machine, specs: input.specs.to_vec(), target: ReducedTarget::Config(target) })
        }
        Reduction::BoundedToReach | Reduction::TermToReach => {
            let bundle = normalize_machine(input.machine, input.specs)?;
            let (cm, _) = build_counter_machine(&bundle);
            Ok(duplicate_counters(&cm, kind == Reduction::BoundedToReach))
        }
    }
}

fn marker_name(m: &FifoMachine, channel: &str) -> String {
    let mut name = format!("${channel}");
    while m.letter_id(&name).is_some() {
        name.push('\'');
    }
    name
}

fn fresh_state(m: &FifoMachine, base: &str) -> String {
    let mut name = base.to_string();
    while m.state_id(&name).is_some() {
        name.push('\'');
    }
    name
}

/// Copies states, channels (with optional extra letter per channel), init
/// and transitions. Letter ids may shift; transitions are re-added by name.
fn copy_machine(
    m: &FifoMachine,
    extra: impl Fn(ChannelId) -> Option<String>,
) -> Result<FifoMachineBuilder, ModelError> {
    let mut b = FifoMachineBuilder::new();
    for s in m.state_names() {
        b.add_state(s)?;
    }
    for c in 0..m.num_channels() {
        let cid = ChannelId(c as u32);
        let mut alph: Vec<String> = m.alphabet(cid).iter().map(|&l| m.letter_name(l).to_string()).collect();
        alph.extend(extra(cid));
        b.add_channel(m.channel_name(cid), &alph)?;
    }
    b.set_init(m.init());
    for t in m.transitions() {
        let c = m.channel_name(t.action.channel);
        b.add_named(m.state_name(t.src), c, t.action.dir, m.letter_name(t.action.letter), m.state_name(t.dst))?;
    }
    Ok(b)
}

/// Spec whose language is `L·$` over the alphabet extended by `$`.
fn marked_spec(v: &ValidatedSpec, marker: &str) -> Result<ValidatedSpec, BoundedError> {
    let s = &v.spec;
    let n = s.alphabet.len();
    let mut alphabet = s.alphabet.clone();
    alphabet.push(marker.to_string());
    let mut tuple = s.tuple.clone();
    tuple.push(vec![n as u32]);
    let language = s.language.widen(n + 1).concat_word(&[n as u32]);
    let spec = BoundedLangSpec { channel: s.channel.clone(), alphabet, tuple, language };
    validate_bounded_spec(&spec, Strictness::Relaxed)
}

/// From the target state, sends a marker on every channel, then receives
/// the target contents and the marker channel by channel, ending in a
/// fresh state. With `deadlock`, adds a channel whose marker can be sent
/// from every other state, so that only the end state can deadlock.
fn flush_path(
    m: &FifoMachine,
    specs: &[ValidatedSpec],
    target: &FifoConfig,
    deadlock: bool,
) -> Result<(FifoMachine, Vec<ValidatedSpec>, StateId), ReduceError> {
    let markers: Vec<String> =
        (0..m.num_channels()).map(|c| marker_name(m, m.channel_name(ChannelId(c as u32)))).collect();
    let mut b = copy_machine(m, |c| Some(markers[c.index()].clone()))?;
    let mut specs: Vec<ValidatedSpec> =
        specs.iter().zip(&markers).map(|(v, mk)| marked_spec(v, mk)).collect::<Result<_, _>>()?;
    let mut path: Vec<(&str, Direction, String)> = Vec::new();
    for (c, mk) in markers.iter().enumerate() {
        path.push((m.channel_name(ChannelId(c as u32)), Direction::Send, mk.clone()));
    }
    for (c, mk) in markers.iter().enumerate() {
        let cname = m.channel_name(ChannelId(c as u32));
        for &l in &target.contents[c] {
            path.push((cname, Direction::Receive, m.letter_name(l).to_string()));
        }
        path.push((cname, Direction::Receive, mk.clone()));
    }
    let end_name = fresh_state(m, "end");
    let mut cur = m.state_name(target.state).to_string();
    for (i, (c, dir, l)) in path.iter().enumerate() {
        let dst = if i + 1 == path.len() { end_name.clone() } else { fresh_state(m, &format!("flush{}", i + 1)) };
        b.add_named(&cur, c, *dir, l, &dst)?;
        cur = dst;
    }
    if deadlock {
        let mut dname = String::from("dl");
        while m.channel_id(&dname).is_some() {
            dname.push('\'');
        }
        let mk = marker_name(m, &dname);
        b.add_channel(&dname, &[mk.as_str()])?;
        let names: Vec<String> = b.clone().build()?.state_names().to_vec();
        for s in names.iter().filter(|s| **s != end_name) {
            b.add_named(s, &dname, Direction::Send, &mk, s)?;
        }
        let spec = BoundedLangSpec::parse(&dname, core::slice::from_ref(&mk), &[mk.as_str()], &format!("{mk}*"))?;
        specs.push(validate_bounded_spec(&spec, Strictness::Strict)?);
    }
    let machine = b.build()?;
    let end = machine.state_id(&end_name).expect("added above");
    Ok((machine, specs, end))
}

/// Doubles the counters of `cm`. A first phase applies every operation to
/// both copies; at some state the second copy alone runs a nonempty loop
/// back to that state; a drain state then decrements both copies in tandem
/// or the second copy alone. Unboundedness is a drained valuation with the
/// first copy empty and the second a unit vector; non-termination is the
/// all-zero valuation.
pub fn duplicate_counters(cm: &CounterMachine, strict: bool) -> Reduced {
    let n = cm.num_counters();
    let x1 = |x: CounterId| CounterId(x.0);
    let x2 = |x: CounterId| CounterId(x.0 + n as u32);
    let with = |op: CounterOp, f: &dyn Fn(CounterId) -> CounterId| match op {
        CounterOp::Inc(x) => CounterOp::Inc(f(x)),
        CounterOp::Dec(x) => CounterOp::Dec(f(x)),
    };
    let mut counters: Vec<String> = Vec::new();
    for i in 0..n {
        counters.push(format!("{}.1", cm.counter_name(CounterId(i as u32))));
    }
    for i in 0..n {
        counters.push(format!("{}.2", cm.counter_name(CounterId(i as u32))));
    }
    let mut states: Vec<String> = cm.state_names().iter().map(|s| format!("1:{s}")).collect();
    let mut ts: Vec<CounterTransition> = Vec::new();
    let add_state = |states: &mut Vec<String>, name: String| {
        states.push(name);
        StateId(states.len() as u32 - 1)
    };
    let reach = add_state(&mut states, "reach".to_string());
    for (tid, t) in cm.transitions().iter().enumerate() {
        let mid = add_state(&mut states, format!("1:{}>{tid}", cm.state_name(t.src)));
        let mut z: Vec<CounterId> = t.action.zero.iter().map(|&x| x1(x)).collect();
        z.extend(t.action.zero.iter().map(|&x| x2(x)));
        ts.push(CounterTransition { src: t.src, action: CounterAction { op: with(t.action.op, &x1), zero: z }, dst: mid });
        ts.push(CounterTransition { src: mid, action: CounterAction { op: with(t.action.op, &x2), zero: vec![] }, dst: t.dst });
    }
    // second phase, created on demand from the switch transitions
    let second = |t: &CounterTransition| CounterAction {
        op: with(t.action.op, &x2),
        zero: t.action.zero.iter().map(|&x| x2(x)).collect(),
    };
    let mut phase2: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut queue: Vec<(StateId, StateId)> = Vec::new();
    let mut node = |states: &mut Vec<String>, queue: &mut Vec<(StateId, StateId)>, s: StateId, q: StateId| {
        *phase2.entry((s, q)).or_insert_with(|| {
            queue.push((s, q));
            add_state(states, format!("2:{}:{}", cm.state_name(s), cm.state_name(q)))
        })
    };
    for t in cm.transitions() {
        let d = node(&mut states, &mut queue, t.src, t.dst);
        ts.push(CounterTransition { src: t.src, action: second(t), dst: d });
        if t.dst == t.src {
            ts.push(CounterTransition { src: t.src, action: second(t), dst: reach });
        }
    }
    while let Some((s, q)) = queue.pop() {
        let here = node(&mut states, &mut queue, s, q);
        for (_, t) in cm.outgoing(q) {
            let d = node(&mut states, &mut queue, s, t.dst);
            ts.push(CounterTransition { src: here, action: second(t), dst: d });
            if t.dst == s {
                ts.push(CounterTransition { src: here, action: second(t), dst: reach });
            }
        }
    }
    for i in 0..n as u32 {
        let x = CounterId(i);
        let mid = add_state(&mut states, format!("drain{i}"));
        ts.push(CounterTransition { src: reach, action: CounterAction { op: CounterOp::Dec(x1(x)), zero: vec![] }, dst: mid });
        ts.push(CounterTransition { src: mid, action: CounterAction { op: CounterOp::Dec(x2(x)), zero: vec![] }, dst: reach });
        ts.push(CounterTransition { src: reach, action: CounterAction { op: CounterOp::Dec(x2(x)), zero: vec![] }, dst: reach });
    }
    let machine = CounterMachine::new(states, counters, ts, cm.init());
    let targets = if strict {
        (0..n)
            .map(|i| {
                let mut v = vec![0; 2 * n];
                v[n + i] = 1;
                CounterConfig { state: reach, valuation: v }
            })
            .collect()
    } else {
        vec![CounterConfig { state: reach, valuation: vec![0; 2 * n] }]
    };
    Reduced::Counter { machine, targets }
}

/// Answers the question a reduced artifact encodes. For the unboundedness
/// and non-termination reductions, `Yes` means unbounded or non-terminating.
pub fn decide_reduced<E: Executor>(reduced: &Reduced, options: EngineOptions, exec: &E) -> Result<Verdict, NormalizeError> {
    match reduced {
        Reduced::Fifo { machine, specs, target } => {
            let bundle = normalize_machine(machine, specs)?;
            let an = Analysis::new(&bundle, options);
            Ok(match target {
                ReducedTarget::ControlState(q) => decide_control_state(&an, exec, &bundle.states_over(*q)),
                ReducedTarget::Config(t) => decide_reachability(&an, exec, &translate_target(&bundle, t)),
                ReducedTarget::Deadlock => decide_deadlock(&an, exec),
            })
        }
        Reduced::Counter { machine, targets } => {
            let answer = counter_reachable(machine, targets, exec, options.state_budget);
            Ok(Verdict { answer, witness: None, method: Method::Reduction, bound: None })
        }
    }
}

/// Plain breadth-first counter reachability, exact when the search space
/// is exhausted within `budget` configurations.
pub fn counter_reachable<E: Executor>(
    cm: &CounterMachine,
    targets: &[CounterConfig],
    exec: &E,
    budget: usize,
) -> Answer {
    let mut init = vec![cm.init().0];
    init.extend(core::iter::repeat_n(0, cm.num_counters()));
    let hit = |k: &[u32]| {
        targets.iter().any(|t| {
            t.state.0 == k[0] && t.valuation.iter().zip(&k[1..]).all(|(&a, &b)| a == b as u64)
        })
    };
    let (_, end) = bfs(
        exec,
        init.into_boxed_slice(),
        BfsLimits { max_depth: None, max_states: Some(budget) },
        false,
        |k: &Box<[u32]>| counter_successors(cm, k),
        |g, n| if hit(&g.keys[n as usize]) { Flow::Stop } else { Flow::Continue },
    );
    match end {
        BfsEnd::Stopped(_) => Answer::Yes,
        BfsEnd::Exhausted => Answer::No,
        _ => Answer::Unknown,
    }
}
