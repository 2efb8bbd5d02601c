//! Rational relations over channel contents, given by automata whose
//! letters are tuples with one optional letter per channel.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use alloc::format;
use alloc::string::{String, ToString};

use crate::automata::{parse_regex_with, Nfa, Regex, RegexError};
use crate::model::{Contents, FifoMachine, LetterId};

/// One letter of a relation: component `c` is a letter of channel `c` or
/// `None` for the empty word.
pub type TupleLetter = Vec<Option<LetterId>>;

#[derive(Clone, Debug)]
pub struct RationalRelation {
    pub nchannels: usize,
    pub letters: Vec<TupleLetter>,
    pub nfa: Nfa,
}

impl RationalRelation {
    pub fn from_regex(nchannels: usize, letters: Vec<TupleLetter>, re: &Regex) -> Self {
        let nfa = re.to_nfa(letters.len());
        RationalRelation { nchannels, letters, nfa }
    }

    /// Relation containing every tuple of words over the given per-channel
    /// alphabets.
    pub fn universal(alphabets: &[Vec<LetterId>]) -> Self {
        let n = alphabets.len();
        let mut letters = Vec::new();
        for (c, alph) in alphabets.iter().enumerate() {
            for &l in alph {
                let mut t = vec![None; n];
                t[c] = Some(l);
                letters.push(t);
            }
        }
        let mut nfa = Nfa::new(letters.len(), 1);
        nfa.initial.push(0);
        nfa.finals[0] = true;
        for i in 0..letters.len() as u32 {
            nfa.add(0, i, 0);
        }
        RationalRelation { nchannels: n, letters, nfa }
    }

    /// Replaces every letter by all tuples of letters mapped onto it:
    /// `preimage(l)` lists the letters whose image is `l`.
    pub fn inverse_image(&self, preimage: &dyn Fn(LetterId) -> Vec<LetterId>) -> RationalRelation {
        let mut letters: Vec<TupleLetter> = Vec::new();
        let mut expansion: Vec<Vec<u32>> = Vec::new();
        for t in &self.letters {
            let mut combos: Vec<TupleLetter> = vec![Vec::new()];
            for comp in t {
                let options: Vec<Option<LetterId>> = match comp {
                    None => vec![None],
                    Some(l) => preimage(*l).into_iter().map(Some).collect(),
                };
                let mut next = Vec::new();
                for c in &combos {
                    for o in &options {
                        let mut c2 = c.clone();
                        c2.push(*o);
                        next.push(c2);
                    }
                }
                combos = next;
            }
            let mut ids = Vec::new();
            for c in combos {
                let id = match letters.iter().position(|x| *x == c) {
                    Some(i) => i,
                    None => {
                        letters.push(c);
                        letters.len() - 1
                    }
                };
                ids.push(id as u32);
            }
            expansion.push(ids);
        }
        let mut nfa = Nfa::new(letters.len(), self.nfa.num_states());
        nfa.initial = self.nfa.initial.clone();
        nfa.finals = self.nfa.finals.clone();
        nfa.eps = self.nfa.eps.clone();
        for (s, edges) in self.nfa.trans.iter().enumerate() {
            for &(a, t) in edges {
                for &b in &expansion[a as usize] {
                    nfa.add(s as u32, b, t);
                }
            }
        }
        RationalRelation { nchannels: self.nchannels, letters, nfa }
    }

    /// Direct membership test: some accepting path reads exactly `w`.
    pub fn contains(&self, w: &Contents) -> bool {
        let n = self.nchannels;
        let mut seen: BTreeSet<(u32, Vec<usize>)> = BTreeSet::new();
        let mut stack: Vec<(u32, Vec<usize>)> = Vec::new();
        for &s in &self.nfa.initial {
            stack.push((s, vec![0; n]));
        }
        while let Some((s, pos)) = stack.pop() {
            if !seen.insert((s, pos.clone())) {
                continue;
            }
            if self.nfa.finals[s as usize] && (0..n).all(|c| pos[c] == w[c].len()) {
                return true;
            }
            for &t in &self.nfa.eps[s as usize] {
                stack.push((t, pos.clone()));
            }
            'edge: for &(a, t) in &self.nfa.trans[s as usize] {
                let mut p2 = pos.clone();
                for (c, comp) in self.letters[a as usize].iter().enumerate() {
                    if let Some(l) = comp {
                        if w[c].get(p2[c]) != Some(l) {
                            continue 'edge;
                        }
                        p2[c] += 1;
                    }
                }
                stack.push((t, p2));
            }
        }
        false
    }
}

/// Parses a regex over tuple letters such as `[b,_]([a,_])*`: one component
/// per channel in declaration order, `_` for the empty word.
pub fn parse_relation(input: &str, machine: &FifoMachine) -> Result<RationalRelation, RegexError> {
    let n = machine.num_channels();
    let mut letters: Vec<TupleLetter> = Vec::new();
    let mut atom = |rest: &str| -> Result<(u32, usize), RegexError> {
        let bad = |m: String| RegexError::BadTuple(m);
        if !rest.starts_with('[') {
            return Err(RegexError::UnknownLetter { offset: 0, rest: rest.chars().take(12).collect() });
        }
        let close = rest.find(']').ok_or_else(|| bad("missing `]`".to_string()))?;
        let comps: Vec<&str> = rest[1..close].split(',').map(str::trim).collect();
        if comps.len() != n {
            return Err(bad(format!("`{}` has {} components, expected {n}", &rest[..=close], comps.len())));
        }
        let mut t = Vec::with_capacity(n);
        for (c, comp) in comps.iter().enumerate() {
            if *comp == "_" {
                t.push(None);
                continue;
            }
            let l = machine
                .letter_id(comp)
                .filter(|&l| machine.letter(l).channel.index() == c)
                .ok_or_else(|| bad(format!("`{comp}` is not a letter of channel {}", machine.channel_names()[c])))?;
            t.push(Some(l));
        }
        let sym = match letters.iter().position(|x| *x == t) {
            Some(i) => i,
            None => {
                letters.push(t);
                letters.len() - 1
            }
        };
        Ok((sym as u32, close + 1))
    };
    let re = parse_regex_with(input, &mut atom)?;
    Ok(RationalRelation::from_regex(n, letters, &re))
}
