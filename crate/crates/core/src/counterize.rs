//! Counter machines from normal-form bundles: one counter per tuple word,
//! sends increment, receives decrement after testing earlier words for zero.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::automata::Dfa;
use crate::model::{
    ChannelId, Contents, CounterAction, CounterId, CounterMachine, CounterOp, CounterTransition, Direction, FifoAction,
    LetterId,
};
use crate::normalize::NormalFormBundle;

/// Last letter sent per channel; `None` stands for "no letter yet".
pub type LastSent = Vec<Option<LetterId>>;

/// Maps bundle letters to counters and back.
#[derive(Clone, Debug)]
pub struct CounterIndexing {
    /// Channel and tuple-word index of each bundle letter.
    pub word_of: Vec<(ChannelId, usize)>,
    /// Counter of each tuple word, per channel.
    pub counters: Vec<Vec<CounterId>>,
    /// Channel of each counter.
    pub counter_channel: Vec<ChannelId>,
    /// Bundle letters of each channel, in alphabet order.
    pub channel_letters: Vec<Vec<LetterId>>,
    /// Factor automaton of each channel language, over local symbols.
    pub infix: Vec<Dfa>,
    local: Vec<u32>,
}

impl CounterIndexing {
    pub fn new(bundle: &NormalFormBundle) -> Self {
        let m = &bundle.machine;
        let mut word_of = vec![(ChannelId(0), 0); m.num_letters()];
        let mut local = vec![0u32; m.num_letters()];
        let mut counters = Vec::new();
        let mut counter_channel = Vec::new();
        let mut channel_letters = Vec::new();
        let mut infix = Vec::new();
        for (c, v) in bundle.specs.iter().enumerate() {
            let cid = ChannelId(c as u32);
            let alph = m.alphabet(cid).to_vec();
            for (i, &l) in alph.iter().enumerate() {
                local[l.index()] = i as u32;
            }
            let mut cs = Vec::new();
            for (i, w) in v.spec.tuple.iter().enumerate() {
                for &s in w {
                    word_of[alph[s as usize].index()] = (cid, i);
                }
                cs.push(CounterId(counter_channel.len() as u32));
                counter_channel.push(cid);
            }
            counters.push(cs);
            channel_letters.push(alph);
            infix.push(v.spec.language.infix_closure());
        }
        CounterIndexing { word_of, counters, counter_channel, channel_letters, infix, local }
    }

    pub fn num_counters(&self) -> usize {
        self.counter_channel.len()
    }

    pub fn counter_of(&self, l: LetterId) -> CounterId {
        let (c, i) = self.word_of[l.index()];
        self.counters[c.index()][i]
    }

    pub fn local(&self, l: LetterId) -> u32 {
        self.local[l.index()]
    }

    /// Counter action simulating a FIFO action.
    pub fn image(&self, a: &FifoAction) -> CounterAction {
        let (c, i) = self.word_of[a.letter.index()];
        let x = self.counters[c.index()][i];
        match a.dir {
            Direction::Send => CounterAction { op: CounterOp::Inc(x), zero: Vec::new() },
            Direction::Receive => {
                CounterAction { op: CounterOp::Dec(x), zero: self.counters[c.index()][..i].to_vec() }
            }
        }
    }

    fn in_infix(&self, c: usize, w: &[LetterId]) -> bool {
        let syms: Vec<u32> = w.iter().map(|&l| self.local(l)).collect();
        self.infix[c].accepts(&syms)
    }
}

pub fn counter_name(word: usize, channel: &str, suffixed: bool) -> String {
    if suffixed {
        format!("x{}_{}", word + 1, channel)
    } else {
        format!("x{}", word + 1)
    }
}

/// Counter machine with the same control states as the bundle; transition
/// `i` simulates bundle transition `i`.
pub fn build_counter_machine(bundle: &NormalFormBundle) -> (CounterMachine, CounterIndexing) {
    let idx = CounterIndexing::new(bundle);
    let m = &bundle.machine;
    let suffixed = m.num_channels() > 1;
    let mut names = Vec::new();
    for (c, v) in bundle.specs.iter().enumerate() {
        for i in 0..v.spec.tuple.len() {
            names.push(counter_name(i, m.channel_name(ChannelId(c as u32)), suffixed));
        }
    }
    let transitions = m
        .transitions()
        .iter()
        .map(|t| CounterTransition { src: t.src, action: idx.image(&t.action), dst: t.dst })
        .collect();
    let cm = CounterMachine::new(m.state_names().to_vec(), names, transitions, m.init());
    (cm, idx)
}

/// Number of letters of each tuple word present in the channels.
pub fn contents_to_valuation(w: &Contents, idx: &CounterIndexing) -> Vec<u64> {
    let mut v = vec![0u64; idx.num_counters()];
    for word in w {
        for &l in word {
            v[idx.counter_of(l).index()] += 1;
        }
    }
    v
}

/// A word is good for `a` when it is a factor of the channel language and
/// is empty or ends with `a`.
pub fn is_good(idx: &CounterIndexing, c: ChannelId, a: Option<LetterId>, w: &[LetterId]) -> bool {
    idx.in_infix(c.index(), w) && (w.is_empty() || (a.is_some() && w.last().copied() == a))
}

/// Last-sent vectors for which every channel word is good.
pub fn pairs_of(w: &Contents, idx: &CounterIndexing) -> Vec<LastSent> {
    let mut combos: Vec<LastSent> = vec![Vec::new()];
    for (c, word) in w.iter().enumerate() {
        let options: Vec<Option<LetterId>> = if word.is_empty() {
            let mut o: Vec<Option<LetterId>> = idx.channel_letters[c].iter().map(|&l| Some(l)).collect();
            o.push(None);
            o
        } else if idx.in_infix(c, word) {
            vec![word.last().copied()]
        } else {
            Vec::new()
        };
        let mut next = Vec::new();
        for p in &combos {
            for o in &options {
                let mut p2 = p.clone();
                p2.push(*o);
                next.push(p2);
            }
        }
        combos = next;
    }
    combos
}

/// The unique good contents with the given letter counts, if any.
///
/// Panics if two different contents match: that would contradict the
/// uniqueness of decoding for distinct-letter bounded languages.
pub fn valuation_to_contents(v: &[u64], a: &LastSent, idx: &CounterIndexing) -> Option<Contents> {
    let mut out = Vec::with_capacity(a.len());
    for c in 0..idx.counters.len() {
        out.push(decode_channel(v, c, a[c], idx)?);
    }
    Some(out)
}

/// Decodes one channel.
pub fn decode_channel(v: &[u64], c: usize, a: Option<LetterId>, idx: &CounterIndexing) -> Option<Vec<LetterId>> {
    let budget: Vec<u64> = idx.counters[c].iter().map(|x| v[x.index()]).collect();
    let total: u64 = budget.iter().sum();
    if total == 0 {
        return Some(Vec::new());
    }
    let a = a?;
    if idx.word_of[a.index()].0.index() != c {
        return None;
    }
    let mut found: Vec<Vec<LetterId>> = Vec::new();
    let mut cur = Vec::with_capacity(total as usize);
    let mut budget = budget;
    let dfa = &idx.infix[c];
    decode_search(idx, c, dfa, dfa.init(), &mut budget, total as usize, a, &mut cur, &mut found);
    assert!(
        found.len() <= 1,
        "two distinct contents decode the same counter values on channel {c}: uniqueness violated"
    );
    found.pop()
}

#[allow(clippy::too_many_arguments)]
fn decode_search(
    idx: &CounterIndexing,
    c: usize,
    dfa: &Dfa,
    s: u32,
    budget: &mut [u64],
    total: usize,
    last: LetterId,
    cur: &mut Vec<LetterId>,
    found: &mut Vec<Vec<LetterId>>,
) {
    if found.len() > 1 {
        return;
    }
    if cur.len() == total {
        if dfa.is_final(s) && cur.last() == Some(&last) {
            found.push(cur.clone());
        }
        return;
    }
    for (sym, t) in dfa.successors(s) {
        let l = idx.channel_letters[c][sym as usize];
        let w = idx.word_of[l.index()].1;
        if budget[w] == 0 {
            continue;
        }
        if cur.len() + 1 == total && l != last {
            continue;
        }
        budget[w] -= 1;
        cur.push(l);
        decode_search(idx, c, dfa, t, budget, total, last, cur, found);
        cur.pop();
        budget[w] += 1;
    }
}

pub fn trace_image(sigma: &[FifoAction], idx: &CounterIndexing) -> Vec<CounterAction> {
    sigma.iter().map(|a| idx.image(a)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preimage {
    Unique(Vec<FifoAction>),
    Undefined,
    Ambiguous,
}

/// The unique valid-prefix FIFO trace whose counter image is `tau`.
pub fn trace_preimage(tau: &[CounterAction], bundle: &NormalFormBundle, idx: &CounterIndexing) -> Preimage {
    let m = &bundle.machine;
    let mut partial: Vec<(Vec<u32>, Vec<FifoAction>)> = vec![(bundle.valid.initial(), Vec::new())];
    for act in tau {
        let x = act.op.counter();
        let c = idx.counter_channel[x.index()];
        let word = idx.counters[c.index()].iter().position(|&y| y == x).unwrap();
        let dir = match act.op {
            CounterOp::Inc(_) => Direction::Send,
            CounterOp::Dec(_) => Direction::Receive,
        };
        let expected_zero: &[CounterId] = match dir {
            Direction::Send => &[],
            Direction::Receive => &idx.counters[c.index()][..word],
        };
        if act.zero.as_slice() != expected_zero {
            return Preimage::Undefined;
        }
        let mut next = Vec::new();
        for (state, sigma) in &partial {
            for &l in m.alphabet(c) {
                if idx.word_of[l.index()].1 != word {
                    continue;
                }
                if let Some(ns) = bundle.valid.step(state, c.index(), dir, idx.local(l)) {
                    let mut s2 = sigma.clone();
                    s2.push(FifoAction { dir, channel: c, letter: l });
                    next.push((ns, s2));
                }
            }
        }
        if next.is_empty() {
            return Preimage::Undefined;
        }
        if next.len() > 64 {
            return Preimage::Ambiguous;
        }
        partial = next;
    }
    match partial.len() {
        1 => Preimage::Unique(partial.pop().unwrap().1),
        0 => Preimage::Undefined,
        _ => Preimage::Ambiguous,
    }
}

/// Whether no counter is touched after it has been tested for zero.
pub fn is_zero_restricted(tau: &[CounterAction]) -> bool {
    let mut tested: Vec<CounterId> = Vec::new();
    for a in tau {
        tested.extend_from_slice(&a.zero);
        if tested.contains(&a.op.counter()) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounded::{validate_bounded_spec, BoundedLangSpec, Strictness};
    use crate::model::{FifoMachineBuilder, StateId};
    use crate::normalize::normalize_machine;
    use alloc::string::ToString;

    /// A single-state machine sending and receiving everything, so that the
    /// bundle carries the language untouched.
    fn bundle_for(letters: &[&str], tuple: &[&str], lang: &str) -> NormalFormBundle {
        let mut b = FifoMachineBuilder::new();
        b.add_channel("c", letters).unwrap();
        let q = b.state("q");
        b.set_init(q);
        for l in letters {
            b.add_named("q", "c", Direction::Send, l, "q").unwrap();
            b.add_named("q", "c", Direction::Receive, l, "q").unwrap();
        }
        let m = b.build().unwrap();
        let alph: Vec<String> = letters.iter().map(|s| s.to_string()).collect();
        let s = BoundedLangSpec::parse("c", &alph, tuple, lang).unwrap();
        let v = validate_bounded_spec(&s, Strictness::Strict).unwrap();
        normalize_machine(&m, &[v]).unwrap()
    }

    fn letters(bundle: &NormalFormBundle, names: &[&str]) -> Vec<LetterId> {
        names.iter().map(|n| bundle.machine.letter_id(n).unwrap()).collect()
    }

    #[test]
    fn decoding_examples() {
        // tuple (a1a2a3, a4) in distinct form already
        let bundle = bundle_for(&["p", "q", "r", "s"], &["pqr", "s"], "(pqr)*s*");
        let (_, idx) = build_counter_machine(&bundle);
        let l = |n: &str| bundle.machine.letter_id(n).unwrap();
        assert_eq!(valuation_to_contents(&[4, 0], &vec![Some(l("a2"))], &idx), Some(vec![letters(&bundle, &["a2", "a3", "a1", "a2"])]));
        assert_eq!(valuation_to_contents(&[2, 1], &vec![Some(l("a4"))], &idx), Some(vec![letters(&bundle, &["a2", "a3", "a4"])]));
        assert_eq!(valuation_to_contents(&[3, 1], &vec![Some(l("a3"))], &idx), None);
        assert_eq!(pairs_of(&vec![letters(&bundle, &["a2", "a3"])], &idx), vec![vec![Some(l("a3"))]]);
        let empty = pairs_of(&vec![Vec::new()], &idx);
        assert_eq!(empty.len(), 5);
        assert!(empty.contains(&vec![None]));
    }

    #[test]
    fn receive_tests_earlier_words() {
        let bundle = bundle_for(&["a", "b"], &["ab", "b"], "(ab)*bb*");
        let (cm, idx) = build_counter_machine(&bundle);
        assert_eq!(cm.counter_names(), ["x1", "x2"]);
        let a3 = bundle.machine.letter_id("a3").unwrap();
        let act = idx.image(&FifoAction::receive(ChannelId(0), a3));
        assert_eq!(act.op, CounterOp::Dec(CounterId(1)));
        assert_eq!(act.zero, vec![CounterId(0)]);
        // contents a2 a3 a3 gives (1, 2)
        let w = vec![letters(&bundle, &["a2", "a3", "a3"])];
        assert_eq!(contents_to_valuation(&w, &idx), vec![1, 2]);
        assert_eq!(cm.init(), StateId(0));
    }

    #[test]
    fn preimage_inverts_image() {
        let bundle = bundle_for(&["a", "b"], &["ab", "b"], "(ab)*bb*");
        let (_, idx) = build_counter_machine(&bundle);
        let l = letters(&bundle, &["a1", "a2", "a3"]);
        let c = ChannelId(0);
        let sigma = vec![FifoAction::send(c, l[0]), FifoAction::send(c, l[1]), FifoAction::receive(c, l[0])];
        let tau = trace_image(&sigma, &idx);
        assert_eq!(trace_preimage(&tau, &bundle, &idx), Preimage::Unique(sigma));
        assert!(is_zero_restricted(&tau));
    }

    #[test]
    fn zero_restriction_detects_reuse() {
        let x = CounterId(0);
        let y = CounterId(1);
        let tau = vec![
            CounterAction { op: CounterOp::Dec(y), zero: vec![x] },
            CounterAction { op: CounterOp::Inc(x), zero: vec![] },
        ];
        assert!(!is_zero_restricted(&tau));
    }
}
