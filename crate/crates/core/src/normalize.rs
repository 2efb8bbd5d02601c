//! Normal form: distinct-letter relabelling of a machine, synchronised with
//! the valid-sequence automaton and trimmed.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use thiserror::Error;

use crate::automata::Dfa;
use crate::bounded::{
    build_valid_automaton, distinct_letterize, BoundedError, BoundedLangSpec, ChannelHom, ValidAutomaton,
    ValidatedSpec,
};
use crate::model::{
    ChannelId, Contents, Direction, FifoAction, FifoMachine, FifoMachineBuilder, LetterId, ModelError, StateId,
};
use crate::relation::RationalRelation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundMode {
    /// Sends follow the bounded languages.
    Input,
    /// Receives follow the bounded languages.
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("expected {expected} bounded-language specs, one per channel, got {got}")]
    SpecCount { expected: usize, got: usize },
    #[error("spec for channel `{spec}` does not match machine channel `{channel}` or its alphabet")]
    SpecMismatch { channel: String, spec: String },
    #[error(transparent)]
    Bounded(#[from] BoundedError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A normalized machine together with everything needed to translate
/// queries and witnesses back to the original machine.
#[derive(Clone, Debug)]
pub struct NormalFormBundle {
    pub mode: BoundMode,
    pub original: FifoMachine,
    pub original_specs: Vec<ValidatedSpec>,
    /// Distinct-letter specs; their alphabets are the bundle channel
    /// alphabets, in order.
    pub specs: Vec<ValidatedSpec>,
    pub homs: Vec<ChannelHom>,
    pub machine: FifoMachine,
    /// Original control state and valid-automaton state of each bundle state.
    pub product_states: Vec<(StateId, Vec<u32>)>,
    pub valid: ValidAutomaton,
    /// Original transition behind each bundle transition.
    pub origin: Vec<usize>,
}

impl NormalFormBundle {
    pub fn offsets(&self) -> Vec<u32> {
        let mut off = Vec::new();
        let mut k = 0u32;
        for c in 0..self.machine.num_channels() {
            off.push(k);
            k += self.machine.alphabet(ChannelId(c as u32)).len() as u32;
        }
        off
    }

    /// Whether runs ending in `q` have complete bounded-language projections.
    pub fn is_accepting(&self, q: StateId) -> bool {
        self.valid.is_final(&self.product_states[q.index()].1)
    }

    /// Bundle states whose original component is `q`.
    pub fn states_over(&self, q: StateId) -> Vec<StateId> {
        (0..self.product_states.len())
            .filter(|&i| self.product_states[i].0 == q)
            .map(|i| StateId(i as u32))
            .collect()
    }

    /// Original letter behind a bundle letter; `None` for a wildcard.
    pub fn original_letter(&self, l: LetterId) -> Option<LetterId> {
        let c = self.machine.letter(l).channel;
        let local = self.machine.local_index(l);
        self.homs[c.index()].image[local].map(|o| self.original.alphabet(c)[o as usize])
    }

    /// Bundle letters mapped onto original letter `l`.
    pub fn preimage_letters(&self, l: LetterId) -> Vec<LetterId> {
        let c = self.original.letter(l).channel;
        let local = self.original.local_index(l) as u32;
        self.homs[c.index()].preimage(local).map(|s| self.machine.alphabet(c)[s as usize]).collect()
    }

    /// Preimages of original contents that are factors of the channel
    /// languages.
    pub fn contents_preimages(&self, w: &Contents) -> Vec<Contents> {
        let mut per_channel: Vec<Vec<Vec<LetterId>>> = Vec::new();
        for (c, word) in w.iter().enumerate() {
            let infix = self.specs[c].spec.language.infix_closure();
            let cid = ChannelId(c as u32);
            let mut found = Vec::new();
            let mut cur = Vec::new();
            self.preimage_search(&infix, cid, word, infix.init(), &mut cur, &mut found);
            per_channel.push(found);
        }
        let mut combos: Vec<Contents> = vec![Vec::new()];
        for options in per_channel {
            let mut next = Vec::new();
            for c in &combos {
                for o in &options {
                    let mut c2 = c.clone();
                    c2.push(o.clone());
                    next.push(c2);
                }
            }
            combos = next;
        }
        combos
    }

    fn preimage_search(
        &self,
        infix: &Dfa,
        c: ChannelId,
        word: &[LetterId],
        s: u32,
        cur: &mut Vec<LetterId>,
        found: &mut Vec<Vec<LetterId>>,
    ) {
        if cur.len() == word.len() {
            if infix.is_final(s) {
                found.push(cur.clone());
            }
            return;
        }
        let orig = word[cur.len()];
        let alph = self.machine.alphabet(c);
        for l in self.preimage_letters(orig) {
            let local = alph.iter().position(|&x| x == l).unwrap() as u32;
            if let Some(t) = infix.step(s, local) {
                cur.push(l);
                self.preimage_search(infix, c, word, t, cur, found);
                cur.pop();
            }
        }
    }

    /// Relation over bundle letters whose image is `r`.
    pub fn relation_preimage(&self, r: &RationalRelation) -> RationalRelation {
        r.inverse_image(&|l| self.preimage_letters(l))
    }

    /// Original actions of a bundle transition path.
    pub fn lift_transitions(&self, tids: &[usize]) -> Vec<FifoAction> {
        tids.iter().map(|&t| self.original.transitions()[self.origin[t]].action).collect()
    }

    /// Original transition path of a bundle transition path.
    pub fn original_transitions(&self, tids: &[usize]) -> Vec<usize> {
        tids.iter().map(|&t| self.origin[t]).collect()
    }

    /// Maps bundle contents to original contents.
    pub fn lift_contents(&self, w: &Contents) -> Option<Contents> {
        w.iter().map(|word| word.iter().map(|&l| self.original_letter(l)).collect::<Option<Vec<_>>>()).collect()
    }
}

/// Relabels a machine through per-channel letter maps: every transition
/// becomes one transition per preimage letter. With `wildcard_sends`, a
/// send also becomes a send of each wildcard letter. Returns the machine
/// and, per new transition, the original transition.
pub fn inverse_hom_machine(
    machine: &FifoMachine,
    alphabets: &[Vec<String>],
    homs: &[ChannelHom],
    wildcard_sends: bool,
) -> Result<(FifoMachine, Vec<usize>), ModelError> {
    let mut b = FifoMachineBuilder::new();
    for name in machine.state_names() {
        b.add_state(name)?;
    }
    for (c, name) in machine.channel_names().iter().enumerate() {
        b.add_channel(name, &alphabets[c])?;
    }
    b.set_init(machine.init());
    let mut origin = Vec::new();
    for (tid, t) in machine.transitions().iter().enumerate() {
        let c = t.action.channel;
        let local = machine.local_index(t.action.letter) as u32;
        let hom = &homs[c.index()];
        for (s, img) in hom.image.iter().enumerate() {
            let hit = match img {
                Some(o) => *o == local,
                None => wildcard_sends && t.action.dir == Direction::Send,
            };
            if hit {
                let l = b.letter_id(&alphabets[c.index()][s]).expect("declared above");
                b.add_transition(t.src, FifoAction { dir: t.action.dir, channel: c, letter: l }, t.dst);
                origin.push(tid);
            }
        }
    }
    Ok((b.build()?, origin))
}

fn check_specs(machine: &FifoMachine, specs: &[ValidatedSpec]) -> Result<(), NormalizeError> {
    if specs.len() != machine.num_channels() {
        return Err(NormalizeError::SpecCount { expected: machine.num_channels(), got: specs.len() });
    }
    for (c, v) in specs.iter().enumerate() {
        let cid = ChannelId(c as u32);
        let names: Vec<&str> = machine.alphabet(cid).iter().map(|&l| machine.letter_name(l)).collect();
        let spec_names: Vec<&str> = v.spec.alphabet.iter().map(|s| s.as_str()).collect();
        if v.spec.channel != machine.channel_name(cid) || names != spec_names {
            return Err(NormalizeError::SpecMismatch {
                channel: machine.channel_name(cid).to_string(),
                spec: v.spec.channel.clone(),
            });
        }
    }
    Ok(())
}

/// Normal form for input-bounded runs.
pub fn normalize_machine(machine: &FifoMachine, specs: &[ValidatedSpec]) -> Result<NormalFormBundle, NormalizeError> {
    check_specs(machine, specs)?;
    let suffixed = machine.num_channels() > 1;
    let (dspecs, homs): (Vec<_>, Vec<_>) = specs.iter().map(|v| distinct_letterize(v, suffixed)).unzip();
    let valid = build_valid_automaton(&dspecs);
    build_bundle(BoundMode::Input, machine, specs, dspecs, homs, valid)
}

/// Name of the wildcard letter used for letters that are never received.
pub fn wildcard_name(channel: &str, suffixed: bool) -> String {
    if suffixed {
        format!("$_{channel}")
    } else {
        "$".to_string()
    }
}

/// Normal form for output-bounded runs: letters that are never received
/// are sent as a wildcard letter, which only ever follows the other sends.
/// The distinct specs become `Pref(L_c)·$*` with `$` as an extra tuple word.
pub fn normalize_machine_ob(
    machine: &FifoMachine,
    specs: &[ValidatedSpec],
) -> Result<NormalFormBundle, NormalizeError> {
    check_specs(machine, specs)?;
    let suffixed = machine.num_channels() > 1;
    let mut dspecs = Vec::new();
    let mut homs = Vec::new();
    let mut send = Vec::new();
    let mut recv = Vec::new();
    for v in specs {
        let (d, mut h) = distinct_letterize(v, suffixed);
        let n = d.spec.alphabet.len();
        let dollar = n as u32;
        let mut alphabet = d.spec.alphabet.clone();
        alphabet.push(wildcard_name(&v.spec.channel, suffixed));
        h.image.push(None);
        let language = d.spec.language.prefix_closure().widen(n + 1).concat_star(dollar);
        let mut tuple = d.spec.tuple.clone();
        tuple.push(vec![dollar]);
        send.push(language.clone());
        recv.push(d.spec.language.widen(n + 1).minimize());
        dspecs.push(ValidatedSpec {
            spec: BoundedLangSpec { channel: d.spec.channel.clone(), alphabet, tuple, language },
            distinct_letter: true,
            letter_bounded: d.letter_bounded,
        });
        homs.push(h);
    }
    let valid = ValidAutomaton { send, recv };
    build_bundle(BoundMode::Output, machine, specs, dspecs, homs, valid)
}

fn build_bundle(
    mode: BoundMode,
    machine: &FifoMachine,
    specs: &[ValidatedSpec],
    dspecs: Vec<ValidatedSpec>,
    homs: Vec<ChannelHom>,
    valid: ValidAutomaton,
) -> Result<NormalFormBundle, NormalizeError> {
    let alphabets: Vec<Vec<String>> = dspecs.iter().map(|v| v.spec.alphabet.clone()).collect();
    let (hm, hm_origin) = inverse_hom_machine(machine, &alphabets, &homs, mode == BoundMode::Output)?;

    // accessible part of the product with the valid-sequence automaton
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut keys: Vec<Vec<u32>> = Vec::new();
    let mut edges: Vec<(u32, usize, u32)> = Vec::new();
    let mut start = vec![hm.init().0];
    start.extend(valid.initial());
    index.insert(start.clone(), 0);
    keys.push(start);
    let mut queue = VecDeque::from([0u32]);
    while let Some(id) = queue.pop_front() {
        let key = keys[id as usize].clone();
        let q = StateId(key[0]);
        for (tid, t) in hm.outgoing(q) {
            let c = t.action.channel.index();
            let local = hm.local_index(t.action.letter) as u32;
            let Some(a) = valid.step(&key[1..], c, t.action.dir, local) else { continue };
            let mut nk = Vec::with_capacity(key.len());
            nk.push(t.dst.0);
            nk.extend(a);
            let nid = match index.get(&nk) {
                Some(&n) => n,
                None => {
                    let n = keys.len() as u32;
                    index.insert(nk.clone(), n);
                    keys.push(nk);
                    queue.push_back(n);
                    n
                }
            };
            edges.push((id, tid, nid));
        }
    }
    drop(index);

    // co-accessibility towards accepting valid-automaton states
    let n = keys.len();
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(s, _, d) in &edges {
        rev[d as usize].push(s);
    }
    let mut keep: Vec<bool> = keys.iter().map(|k| valid.is_final(&k[1..])).collect();
    let mut stack: Vec<u32> = (0..n as u32).filter(|&s| keep[s as usize]).collect();
    while let Some(s) = stack.pop() {
        for &p in &rev[s as usize] {
            if !keep[p as usize] {
                keep[p as usize] = true;
                stack.push(p);
            }
        }
    }
    keep[0] = true;
    drop(rev);

    let mut renum = vec![u32::MAX; n];
    let mut b = FifoMachineBuilder::new();
    let mut product_states = Vec::new();
    for (i, k) in keys.iter().enumerate() {
        if keep[i] {
            let mut name = String::from("(");
            name.push_str(machine.state_name(StateId(k[0])));
            for x in &k[1..] {
                name.push_str(&format!(",{x}"));
            }
            name.push(')');
            renum[i] = b.add_state(&name)?.0;
            product_states.push((StateId(k[0]), k[1..].to_vec()));
        }
    }
    for (c, name) in machine.channel_names().iter().enumerate() {
        b.add_channel(name, &alphabets[c])?;
    }
    b.set_init(StateId(0));
    let mut origin = Vec::new();
    for &(s, tid, d) in &edges {
        if keep[s as usize] && keep[d as usize] {
            let t = &hm.transitions()[tid];
            let l = b.letter_id(hm.letter_name(t.action.letter)).expect("same alphabet");
            b.add_transition(
                StateId(renum[s as usize]),
                FifoAction { letter: l, ..t.action },
                StateId(renum[d as usize]),
            );
            origin.push(hm_origin[tid]);
        }
    }
    Ok(NormalFormBundle {
        mode,
        original: machine.clone(),
        original_specs: specs.to_vec(),
        specs: dspecs,
        homs,
        machine: b.build()?,
        product_states,
        valid,
        origin,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalFormViolation {
    #[error("channel `{channel}` is not in distinct-letter form or uses letters outside its language")]
    Alphabet { channel: String },
    #[error("trace leaves the valid prefixes: {}", .rendered)]
    Trace { counterexample: Vec<FifoAction>, rendered: String },
}

/// Shortest control-graph trace of `machine` that is not a prefix of a
/// valid sequence, if any. `valid` must be over the machine's channel
/// alphabets.
pub fn traces_outside_valid(machine: &FifoMachine, valid: &ValidAutomaton) -> Option<Vec<FifoAction>> {
    let mut offsets = Vec::new();
    let mut k = 0u32;
    for c in 0..machine.num_channels() {
        offsets.push(k);
        k += machine.alphabet(ChannelId(c as u32)).len() as u32;
    }
    let explicit = valid.to_automaton(&offsets, machine.num_letters());
    let symbol = |a: &FifoAction| {
        let d = match a.dir {
            Direction::Send => 0,
            Direction::Receive => 1,
        };
        2 * a.letter.0 + d
    };
    let mut parent: HashMap<(u32, u32), Option<((u32, u32), FifoAction)>> = HashMap::new();
    let start = (machine.init().0, explicit.init());
    if explicit.is_empty() {
        // no valid sequence at all: any first action is a violation
        let t = machine.outgoing(machine.init()).next()?;
        return Some(vec![t.1.action]);
    }
    parent.insert(start, None);
    let mut queue = VecDeque::from([start]);
    while let Some((q, a)) = queue.pop_front() {
        for (_, t) in machine.outgoing(StateId(q)) {
            match explicit.step(a, symbol(&t.action)) {
                None => {
                    let mut trace = vec![t.action];
                    let mut cur = (q, a);
                    while let Some(Some((p, act))) = parent.get(&cur) {
                        trace.push(*act);
                        cur = *p;
                    }
                    trace.reverse();
                    return Some(trace);
                }
                Some(na) => {
                    let key = (t.dst.0, na);
                    if !parent.contains_key(&key) {
                        parent.insert(key, Some(((q, a), t.action)));
                        queue.push_back(key);
                    }
                }
            }
        }
    }
    None
}

/// Verifies the two normal-form conditions on a bundle.
pub fn check_normal_form(bundle: &NormalFormBundle) -> Result<(), NormalFormViolation> {
    let m = &bundle.machine;
    for (c, v) in bundle.specs.iter().enumerate() {
        let used = v.spec.language.symbols_used();
        let alph: BTreeSet<u32> = (0..m.alphabet(ChannelId(c as u32)).len() as u32).collect();
        if !v.distinct_letter || !alph.is_subset(&used) {
            return Err(NormalFormViolation::Alphabet { channel: v.spec.channel.clone() });
        }
    }
    match traces_outside_valid(m, &bundle.valid) {
        None => Ok(()),
        Some(tr) => {
            let rendered = tr.iter().map(|a| m.action_name(a)).collect::<Vec<_>>().join(" ");
            Err(NormalFormViolation::Trace { counterexample: tr, rendered })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounded::{validate_bounded_spec, Strictness};
    use crate::model::Direction::*;

    /// One channel over {a, b}: loops !a !b ?a at q0, ?b into q1, ?b loop.
    fn running_example() -> (FifoMachine, ValidatedSpec) {
        let mut b = FifoMachineBuilder::new();
        b.add_channel("c", &["a", "b"]).unwrap();
        let q0 = b.state("q0");
        b.set_init(q0);
        b.add_named("q0", "c", Send, "a", "q0").unwrap();
        b.add_named("q0", "c", Send, "b", "q0").unwrap();
        b.add_named("q0", "c", Receive, "a", "q0").unwrap();
        b.add_named("q0", "c", Receive, "b", "q1").unwrap();
        b.add_named("q1", "c", Receive, "b", "q1").unwrap();
        let m = b.build().unwrap();
        let alph = vec!["a".to_string(), "b".to_string()];
        let s = BoundedLangSpec::parse("c", &alph, &["ab", "b"], "(ab)*bb*").unwrap();
        (m, validate_bounded_spec(&s, Strictness::Strict).unwrap())
    }

    #[test]
    fn running_example_has_eight_states() {
        let (m, v) = running_example();
        let bundle = normalize_machine(&m, &[v]).unwrap();
        assert_eq!(bundle.machine.num_states(), 8);
        check_normal_form(&bundle).unwrap();
    }

    #[test]
    fn relabelled_machine_alone_is_not_normal() {
        let (m, v) = running_example();
        let (d, h) = distinct_letterize(&v, false);
        let valid = build_valid_automaton(std::slice::from_ref(&d));
        let (hm, _) = inverse_hom_machine(&m, std::slice::from_ref(&d.spec.alphabet), &[h], false).unwrap();
        let cex = traces_outside_valid(&hm, &valid).unwrap();
        assert_eq!(cex.len(), 1);
    }

    #[test]
    fn contents_preimages_respect_factors() {
        let (m, v) = running_example();
        let bundle = normalize_machine(&m, &[v]).unwrap();
        let b = m.letter_id("b").unwrap();
        let a = m.letter_id("a").unwrap();
        let pre = bundle.contents_preimages(&vec![vec![b]]);
        assert_eq!(pre.len(), 2);
        let pre = bundle.contents_preimages(&vec![vec![a, b, b]]);
        // a1 a2 a3 only
        assert_eq!(pre.len(), 1);
        let names: Vec<&str> = pre[0][0].iter().map(|&l| bundle.machine.letter_name(l)).collect();
        assert_eq!(names, ["a1", "a2", "a3"]);
    }
}
