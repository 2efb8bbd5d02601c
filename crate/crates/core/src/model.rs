//! FIFO machines, counter machines and their one-step semantics.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LetterId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CounterId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}
impl ChannelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}
impl LetterId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}
impl CounterId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Send,
    Receive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FifoAction {
    pub dir: Direction,
    pub channel: ChannelId,
    pub letter: LetterId,
}

impl FifoAction {
    pub fn send(channel: ChannelId, letter: LetterId) -> Self {
        FifoAction { dir: Direction::Send, channel, letter }
    }
    pub fn receive(channel: ChannelId, letter: LetterId) -> Self {
        FifoAction { dir: Direction::Receive, channel, letter }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FifoTransition {
    pub src: StateId,
    pub action: FifoAction,
    pub dst: StateId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Letter {
    pub name: String,
    pub channel: ChannelId,
}

/// Per-channel contents, indexed by channel.
pub type Contents = Vec<Vec<LetterId>>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FifoConfig {
    pub state: StateId,
    pub contents: Contents,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate channel `{0}`")]
    DuplicateChannel(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("letter `{letter}` is not in the alphabet of channel `{channel}`")]
    UnknownLetter { letter: String, channel: String },
    #[error("letter `{0}` appears in more than one channel alphabet")]
    AlphabetOverlap(String),
    #[error("machine has no initial state")]
    NoInit,
}

/// A FIFO machine. States, channels and letters are interned: ids index the
/// name tables. Letter ids are global across channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FifoMachine {
    states: Vec<String>,
    state_index: BTreeMap<String, StateId>,
    channels: Vec<String>,
    channel_index: BTreeMap<String, ChannelId>,
    letters: Vec<Letter>,
    letter_index: BTreeMap<String, LetterId>,
    channel_letters: Vec<Vec<LetterId>>,
    transitions: Vec<FifoTransition>,
    outgoing: Vec<Vec<u32>>,
    init: StateId,
}

#[derive(Clone, Debug, Default)]
pub struct FifoMachineBuilder {
    states: Vec<String>,
    state_index: BTreeMap<String, StateId>,
    channels: Vec<String>,
    channel_index: BTreeMap<String, ChannelId>,
    letters: Vec<Letter>,
    letter_index: BTreeMap<String, LetterId>,
    channel_letters: Vec<Vec<LetterId>>,
    transitions: Vec<FifoTransition>,
    init: Option<StateId>,
}

impl FifoMachineBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self, name: &str) -> Result<StateId, ModelError> {
        if self.state_index.contains_key(name) {
            return Err(ModelError::DuplicateState(name.to_string()));
        }
        Ok(self.state(name))
    }

    /// Returns the id of `name`, creating the state if needed.
    pub fn state(&mut self, name: &str) -> StateId {
        if let Some(&id) = self.state_index.get(name) {
            return id;
        }
        let id = StateId(self.states.len() as u32);
        self.states.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        id
    }

    pub fn add_channel<S: AsRef<str>>(&mut self, name: &str, alphabet: &[S]) -> Result<ChannelId, ModelError> {
        if self.channel_index.contains_key(name) {
            return Err(ModelError::DuplicateChannel(name.to_string()));
        }
        let id = ChannelId(self.channels.len() as u32);
        self.channels.push(name.to_string());
        self.channel_index.insert(name.to_string(), id);
        let mut own = Vec::new();
        for l in alphabet {
            let l = l.as_ref();
            if self.letter_index.contains_key(l) {
                return Err(ModelError::AlphabetOverlap(l.to_string()));
            }
            let lid = LetterId(self.letters.len() as u32);
            self.letters.push(Letter { name: l.to_string(), channel: id });
            self.letter_index.insert(l.to_string(), lid);
            own.push(lid);
        }
        self.channel_letters.push(own);
        Ok(id)
    }

    pub fn set_init(&mut self, state: StateId) {
        self.init = Some(state);
    }

    pub fn channel_id(&self, name: &str) -> Option<ChannelId> {
        self.channel_index.get(name).copied()
    }

    pub fn letter_id(&self, name: &str) -> Option<LetterId> {
        self.letter_index.get(name).copied()
    }

    pub fn add_transition(&mut self, src: StateId, action: FifoAction, dst: StateId) {
        self.transitions.push(FifoTransition { src, action, dst });
    }

    /// Adds a transition given by names, creating the states on demand.
    pub fn add_named(
        &mut self,
        src: &str,
        channel: &str,
        dir: Direction,
        letter: &str,
        dst: &str,
    ) -> Result<(), ModelError> {
        let c = self
            .channel_id(channel)
            .ok_or_else(|| ModelError::UnknownChannel(channel.to_string()))?;
        let l = self.letter_id(letter).filter(|l| self.letters[l.index()].channel == c).ok_or_else(|| {
            ModelError::UnknownLetter { letter: letter.to_string(), channel: channel.to_string() }
        })?;
        let s = self.state(src);
        let d = self.state(dst);
        self.add_transition(s, FifoAction { dir, channel: c, letter: l }, d);
        Ok(())
    }

    pub fn build(self) -> Result<FifoMachine, ModelError> {
        let init = self.init.ok_or(ModelError::NoInit)?;
        let mut outgoing = alloc::vec![Vec::new(); self.states.len()];
        for (i, t) in self.transitions.iter().enumerate() {
            outgoing[t.src.index()].push(i as u32);
        }
        Ok(FifoMachine {
            states: self.states,
            state_index: self.state_index,
            channels: self.channels,
            channel_index: self.channel_index,
            letters: self.letters,
            letter_index: self.letter_index,
            channel_letters: self.channel_letters,
            transitions: self.transitions,
            outgoing,
            init,
        })
    }
}

impl FifoMachine {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }
    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }
    pub fn num_letters(&self) -> usize {
        self.letters.len()
    }
    pub fn init(&self) -> StateId {
        self.init
    }
    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.index()]
    }
    pub fn state_names(&self) -> &[String] {
        &self.states
    }
    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_index.get(name).copied()
    }
    pub fn channel_name(&self, c: ChannelId) -> &str {
        &self.channels[c.index()]
    }
    pub fn channel_names(&self) -> &[String] {
        &self.channels
    }
    pub fn channel_id(&self, name: &str) -> Option<ChannelId> {
        self.channel_index.get(name).copied()
    }
    pub fn letter(&self, l: LetterId) -> &Letter {
        &self.letters[l.index()]
    }
    pub fn letter_name(&self, l: LetterId) -> &str {
        &self.letters[l.index()].name
    }
    pub fn letter_id(&self, name: &str) -> Option<LetterId> {
        self.letter_index.get(name).copied()
    }
    pub fn alphabet(&self, c: ChannelId) -> &[LetterId] {
        &self.channel_letters[c.index()]
    }
    /// Position of `l` inside its channel alphabet.
    pub fn local_index(&self, l: LetterId) -> usize {
        let c = self.letters[l.index()].channel;
        self.channel_letters[c.index()].iter().position(|&x| x == l).expect("letter belongs to its channel")
    }
    pub fn transitions(&self) -> &[FifoTransition] {
        &self.transitions
    }
    pub fn outgoing(&self, s: StateId) -> impl Iterator<Item = (usize, &FifoTransition)> {
        self.outgoing[s.index()].iter().map(move |&i| (i as usize, &self.transitions[i as usize]))
    }

    pub fn initial_config(&self) -> FifoConfig {
        FifoConfig { state: self.init, contents: alloc::vec![Vec::new(); self.channels.len()] }
    }

    pub fn action_name(&self, a: &FifoAction) -> String {
        let op = match a.dir {
            Direction::Send => '!',
            Direction::Receive => '?',
        };
        let mut s = String::from(self.channel_name(a.channel));
        s.push(op);
        s.push_str(self.letter_name(a.letter));
        s
    }

    pub fn word_name(&self, w: &[LetterId]) -> String {
        let mut s = String::new();
        for &l in w {
            s.push_str(self.letter_name(l));
        }
        s
    }

    pub fn display_config<'a>(&'a self, c: &'a FifoConfig) -> ConfigDisplay<'a> {
        ConfigDisplay { machine: self, config: c }
    }
}

pub struct ConfigDisplay<'a> {
    machine: &'a FifoMachine,
    config: &'a FifoConfig,
}

impl fmt::Display for ConfigDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.machine.state_name(self.config.state))?;
        for (c, w) in self.config.contents.iter().enumerate() {
            write!(f, ", {}=", self.machine.channel_name(ChannelId(c as u32)))?;
            if w.is_empty() {
                f.write_str("eps")?;
            }
            for (i, &l) in w.iter().enumerate() {
                if i > 0 {
                    f.write_str(".")?;
                }
                f.write_str(self.machine.letter_name(l))?;
            }
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("no transition with this label from the current state")]
    NoSuchTransition,
    #[error("receive does not match the channel head")]
    ReceiveMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("step {index} failed: {kind}")]
pub struct RunError {
    pub index: usize,
    pub kind: StepError,
}

/// Applies the effect of `action` on channel contents, without looking at
/// control states.
pub fn apply_action(contents: &mut Contents, action: &FifoAction) -> Result<(), StepError> {
    let w = &mut contents[action.channel.index()];
    match action.dir {
        Direction::Send => {
            w.push(action.letter);
            Ok(())
        }
        Direction::Receive => {
            if w.first() == Some(&action.letter) {
                w.remove(0);
                Ok(())
            } else {
                Err(StepError::ReceiveMismatch)
            }
        }
    }
}

/// Fires transition `tid`; fails if its source is not the current state or
/// the receive does not match.
pub fn fire(m: &FifoMachine, config: &FifoConfig, tid: usize) -> Result<FifoConfig, StepError> {
    let t = &m.transitions[tid];
    if t.src != config.state {
        return Err(StepError::NoSuchTransition);
    }
    let mut contents = config.contents.clone();
    apply_action(&mut contents, &t.action)?;
    Ok(FifoConfig { state: t.dst, contents })
}

/// One step along the first transition (in id order) labelled `action`.
pub fn fifo_step(m: &FifoMachine, config: &FifoConfig, action: &FifoAction) -> Result<FifoConfig, StepError> {
    let mut matched = false;
    for (tid, t) in m.outgoing(config.state) {
        if t.action == *action {
            matched = true;
            if let Ok(next) = fire(m, config, tid) {
                return Ok(next);
            }
        }
    }
    Err(if matched { StepError::ReceiveMismatch } else { StepError::NoSuchTransition })
}

/// Runs an action trace. Nondeterministic choices are resolved by keeping
/// every reachable configuration; the result is the first one found in
/// transition-id order.
pub fn run_trace(m: &FifoMachine, start: &FifoConfig, trace: &[FifoAction]) -> Result<FifoConfig, RunError> {
    let mut layer: Vec<FifoConfig> = alloc::vec![start.clone()];
    for (index, action) in trace.iter().enumerate() {
        let mut next: Vec<FifoConfig> = Vec::new();
        let mut matched = false;
        for c in &layer {
            for (tid, t) in m.outgoing(c.state) {
                if t.action != *action {
                    continue;
                }
                matched = true;
                if let Ok(n) = fire(m, c, tid) {
                    if !next.contains(&n) {
                        next.push(n);
                    }
                }
            }
        }
        if next.is_empty() {
            let kind = if matched { StepError::ReceiveMismatch } else { StepError::NoSuchTransition };
            return Err(RunError { index, kind });
        }
        layer = next;
    }
    Ok(layer.swap_remove(0))
}

/// Runs a sequence of transition ids.
pub fn run_transitions(m: &FifoMachine, start: &FifoConfig, tids: &[usize]) -> Result<FifoConfig, RunError> {
    let mut c = start.clone();
    for (index, &tid) in tids.iter().enumerate() {
        c = fire(m, &c, tid).map_err(|kind| RunError { index, kind })?;
    }
    Ok(c)
}

/// Letters of `trace` on `channel` in direction `dir`.
pub fn project(trace: &[FifoAction], channel: ChannelId, dir: Direction) -> Vec<LetterId> {
    trace.iter().filter(|a| a.channel == channel && a.dir == dir).map(|a| a.letter).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CounterOp {
    Inc(CounterId),
    Dec(CounterId),
}

impl CounterOp {
    pub fn counter(self) -> CounterId {
        match self {
            CounterOp::Inc(x) | CounterOp::Dec(x) => x,
        }
    }
}

/// An operation together with the set of counters tested for zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CounterAction {
    pub op: CounterOp,
    pub zero: Vec<CounterId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterTransition {
    pub src: StateId,
    pub action: CounterAction,
    pub dst: StateId,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CounterConfig {
    pub state: StateId,
    pub valuation: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterMachine {
    states: Vec<String>,
    counters: Vec<String>,
    transitions: Vec<CounterTransition>,
    outgoing: Vec<Vec<u32>>,
    init: StateId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CounterStepError {
    #[error("no transition with this label from the current state")]
    NoSuchTransition,
    #[error("zero test failed on counter {}", .counter.0)]
    ZeroTestFailed { counter: CounterId },
    #[error("decrement of counter {} at zero", .counter.0)]
    DecrementOnZero { counter: CounterId },
}

impl CounterMachine {
    pub fn new(
        states: Vec<String>,
        counters: Vec<String>,
        mut transitions: Vec<CounterTransition>,
        init: StateId,
    ) -> Self {
        let mut outgoing = alloc::vec![Vec::new(); states.len()];
        for (i, t) in transitions.iter_mut().enumerate() {
            t.action.zero.sort();
            t.action.zero.dedup();
            outgoing[t.src.index()].push(i as u32);
        }
        CounterMachine { states, counters, transitions, outgoing, init }
    }
    pub fn num_states(&self) -> usize {
        self.states.len()
    }
    pub fn num_counters(&self) -> usize {
        self.counters.len()
    }
    pub fn init(&self) -> StateId {
        self.init
    }
    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.index()]
    }
    pub fn state_names(&self) -> &[String] {
        &self.states
    }
    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(|i| StateId(i as u32))
    }
    pub fn counter_name(&self, x: CounterId) -> &str {
        &self.counters[x.index()]
    }
    pub fn counter_names(&self) -> &[String] {
        &self.counters
    }
    pub fn counter_id(&self, name: &str) -> Option<CounterId> {
        self.counters.iter().position(|s| s == name).map(|i| CounterId(i as u32))
    }
    pub fn transitions(&self) -> &[CounterTransition] {
        &self.transitions
    }
    pub fn outgoing(&self, s: StateId) -> impl Iterator<Item = (usize, &CounterTransition)> {
        self.outgoing[s.index()].iter().map(move |&i| (i as usize, &self.transitions[i as usize]))
    }
    pub fn initial_config(&self) -> CounterConfig {
        CounterConfig { state: self.init, valuation: alloc::vec![0; self.counters.len()] }
    }
}

/// Checks zero tests, then applies the operation to a valuation.
pub fn apply_counter_action(valuation: &mut [u64], action: &CounterAction) -> Result<(), CounterStepError> {
    for &z in &action.zero {
        if valuation[z.index()] != 0 {
            return Err(CounterStepError::ZeroTestFailed { counter: z });
        }
    }
    match action.op {
        CounterOp::Inc(x) => valuation[x.index()] += 1,
        CounterOp::Dec(x) => {
            let v = &mut valuation[x.index()];
            if *v == 0 {
                return Err(CounterStepError::DecrementOnZero { counter: x });
            }
            *v -= 1;
        }
    }
    Ok(())
}

pub fn counter_step(
    m: &CounterMachine,
    config: &CounterConfig,
    action: &CounterAction,
) -> Result<CounterConfig, CounterStepError> {
    let mut err = CounterStepError::NoSuchTransition;
    for (_, t) in m.outgoing(config.state) {
        if t.action != *action {
            continue;
        }
        let mut v = config.valuation.clone();
        match apply_counter_action(&mut v, action) {
            Ok(()) => return Ok(CounterConfig { state: t.dst, valuation: v }),
            Err(e) => err = e,
        }
    }
    Err(err)
}

pub fn counter_fire(m: &CounterMachine, config: &CounterConfig, tid: usize) -> Result<CounterConfig, CounterStepError> {
    let t = &m.transitions[tid];
    if t.src != config.state {
        return Err(CounterStepError::NoSuchTransition);
    }
    let mut v = config.valuation.clone();
    apply_counter_action(&mut v, &t.action)?;
    Ok(CounterConfig { state: t.dst, valuation: v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_channel() -> FifoMachine {
        let mut b = FifoMachineBuilder::new();
        b.add_channel("c1", &["a", "b"]).unwrap();
        b.add_channel("c2", &["e"]).unwrap();
        let q = b.state("q");
        b.set_init(q);
        b.add_named("q", "c1", Direction::Send, "a", "q").unwrap();
        b.add_named("q", "c1", Direction::Receive, "a", "q").unwrap();
        b.build().unwrap()
    }

    #[test]
    fn send_appends_and_receive_pops() {
        let m = two_channel();
        let a = m.letter_id("a").unwrap();
        let c1 = m.channel_id("c1").unwrap();
        let s = fifo_step(&m, &m.initial_config(), &FifoAction::send(c1, a)).unwrap();
        assert_eq!(s.contents, vec![vec![a], vec![]]);
        let r = fifo_step(&m, &s, &FifoAction::receive(c1, a)).unwrap();
        assert_eq!(r.contents, vec![vec![], vec![]]);
    }

    #[test]
    fn receive_on_empty_channel_fails() {
        let m = two_channel();
        let a = m.letter_id("a").unwrap();
        let c1 = m.channel_id("c1").unwrap();
        let err = fifo_step(&m, &m.initial_config(), &FifoAction::receive(c1, a)).unwrap_err();
        assert_eq!(err, StepError::ReceiveMismatch);
        let b = m.letter_id("b").unwrap();
        let err = fifo_step(&m, &m.initial_config(), &FifoAction::send(c1, b)).unwrap_err();
        assert_eq!(err, StepError::NoSuchTransition);
    }

    #[test]
    fn overlapping_alphabets_rejected() {
        let mut b = FifoMachineBuilder::new();
        b.add_channel("c1", &["a"]).unwrap();
        assert_eq!(b.add_channel("c2", &["a"]), Err(ModelError::AlphabetOverlap("a".into())));
    }

    #[test]
    fn run_trace_reports_failing_index() {
        let m = two_channel();
        let a = m.letter_id("a").unwrap();
        let c1 = m.channel_id("c1").unwrap();
        let tr = [FifoAction::send(c1, a), FifoAction::receive(c1, a), FifoAction::receive(c1, a)];
        let err = run_trace(&m, &m.initial_config(), &tr).unwrap_err();
        assert_eq!(err.index, 2);
    }

    #[test]
    fn zero_test_checked_before_decrement() {
        let x = CounterId(0);
        let y = CounterId(1);
        let m = CounterMachine::new(
            vec!["p".into()],
            vec!["x".into(), "y".into()],
            vec![CounterTransition {
                src: StateId(0),
                action: CounterAction { op: CounterOp::Dec(y), zero: vec![x] },
                dst: StateId(0),
            }],
            StateId(0),
        );
        let cfg = CounterConfig { state: StateId(0), valuation: vec![1, 1] };
        let act = CounterAction { op: CounterOp::Dec(y), zero: vec![x] };
        assert_eq!(counter_step(&m, &cfg, &act), Err(CounterStepError::ZeroTestFailed { counter: x }));
        let cfg = CounterConfig { state: StateId(0), valuation: vec![0, 0] };
        assert_eq!(counter_step(&m, &cfg, &act), Err(CounterStepError::DecrementOnZero { counter: y }));
        let cfg = CounterConfig { state: StateId(0), valuation: vec![0, 2] };
        assert_eq!(counter_step(&m, &cfg, &act).unwrap().valuation, vec![0, 1]);
    }

    #[test]
    fn projection_filters_channel_and_direction() {
        let m = two_channel();
        let a = m.letter_id("a").unwrap();
        let c1 = m.channel_id("c1").unwrap();
        let tr = [FifoAction::send(c1, a), FifoAction::receive(c1, a), FifoAction::send(c1, a)];
        assert_eq!(project(&tr, c1, Direction::Send), vec![a, a]);
        assert_eq!(project(&tr, c1, Direction::Receive), vec![a]);
    }
}
