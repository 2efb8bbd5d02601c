//! Bounded languages: validation, distinct-letter renaming and the
//! automaton accepting valid action sequences.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::automata::{letter_separator, parse_regex, split_word, Dfa, Regex, RegexError};
use crate::model::Direction;

/// A bounded language for one channel: a tuple of words `w1 .. wn` and a
/// language `L ⊆ w1* .. wn*`, both over the channel alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedLangSpec {
    pub channel: String,
    pub alphabet: Vec<String>,
    pub tuple: Vec<Vec<u32>>,
    pub language: Dfa,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundedError {
    #[error("channel `{channel}`: tuple word {index} is empty")]
    EmptyTupleWord { channel: String, index: usize },
    #[error("channel `{channel}`: language is empty")]
    EmptyLanguage { channel: String },
    #[error("channel `{channel}`: letters of the language and of the tuple differ ({detail})")]
    AlphabetMismatch { channel: String, detail: String },
    #[error("channel `{channel}`: language is not included in the tuple pattern, e.g. `{counterexample}`")]
    NotBounded { channel: String, counterexample: String },
    #[error("channel `{channel}`: {source}")]
    Regex { channel: String, source: RegexError },
}

impl BoundedLangSpec {
    /// Builds a spec from tuple words and a regular expression, both written
    /// over `alphabet`.
    pub fn parse(channel: &str, alphabet: &[String], tuple: &[&str], regex: &str) -> Result<Self, BoundedError> {
        let wrap = |source| BoundedError::Regex { channel: channel.to_string(), source };
        let words = tuple.iter().map(|w| split_word(w, alphabet)).collect::<Result<Vec<_>, _>>().map_err(wrap)?;
        let re = parse_regex(regex, alphabet).map_err(wrap)?;
        Ok(BoundedLangSpec {
            channel: channel.to_string(),
            alphabet: alphabet.to_vec(),
            tuple: words,
            language: re.to_dfa(alphabet.len()),
        })
    }

    pub fn nsym(&self) -> usize {
        self.alphabet.len()
    }

    pub fn word_string(&self, w: &[u32]) -> String {
        let sep = letter_separator(&self.alphabet);
        let parts: Vec<&str> = w.iter().map(|&s| self.alphabet[s as usize].as_str()).collect();
        parts.join(sep)
    }

    /// The language rendered as a regular expression.
    pub fn language_regex(&self) -> String {
        let sep = letter_separator(&self.alphabet);
        crate::automata::dfa_to_regex(&self.language)
            .render(&|s| self.alphabet[s as usize].clone(), sep)
    }

    /// `w1* .. wn*` over the spec alphabet.
    pub fn pattern(&self) -> Dfa {
        let parts = self
            .tuple
            .iter()
            .map(|w| Regex::star(Regex::concat(w.iter().map(|&s| Regex::Sym(s)).collect())))
            .collect();
        Regex::concat(parts).to_dfa(self.nsym())
    }

    /// Index of the tuple word containing `sym`, for distinct-letter specs.
    pub fn word_of(&self, sym: u32) -> Option<usize> {
        self.tuple.iter().position(|w| w.contains(&sym))
    }
}

/// A spec that passed validation, with its cached minimal automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidatedSpec {
    pub spec: BoundedLangSpec,
    pub distinct_letter: bool,
    pub letter_bounded: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strictness {
    /// All checks, including equality of the language and tuple alphabets.
    Strict,
    /// Skips the alphabet equality check; unused tuple words are dropped
    /// later by distinct-letter renaming.
    Relaxed,
}

pub fn validate_bounded_spec(spec: &BoundedLangSpec, strictness: Strictness) -> Result<ValidatedSpec, BoundedError> {
    let channel = spec.channel.clone();
    if let Some(index) = spec.tuple.iter().position(|w| w.is_empty()) {
        return Err(BoundedError::EmptyTupleWord { channel, index });
    }
    let lang = spec.language.minimize();
    if lang.is_empty() {
        return Err(BoundedError::EmptyLanguage { channel });
    }
    if strictness == Strictness::Strict {
        let in_lang = lang.symbols_used();
        let in_tuple: BTreeSet<u32> = spec.tuple.iter().flatten().copied().collect();
        if in_lang != in_tuple {
            let name = |s: &u32| spec.alphabet[*s as usize].clone();
            let only_lang: Vec<String> = in_lang.difference(&in_tuple).map(name).collect();
            let only_tuple: Vec<String> = in_tuple.difference(&in_lang).map(name).collect();
            let detail = format!("only in language: {:?}, only in tuple: {:?}", only_lang, only_tuple);
            return Err(BoundedError::AlphabetMismatch { channel, detail });
        }
    }
    if let Err(w) = lang.included_in(&spec.pattern()) {
        return Err(BoundedError::NotBounded { channel, counterexample: spec.word_string(&w) });
    }
    let flat: Vec<u32> = spec.tuple.iter().flatten().copied().collect();
    let distinct: BTreeSet<u32> = flat.iter().copied().collect();
    Ok(ValidatedSpec {
        distinct_letter: distinct.len() == flat.len(),
        letter_bounded: spec.tuple.iter().all(|w| w.len() == 1),
        spec: BoundedLangSpec { language: lang, ..spec.clone() },
    })
}

/// Name of the `i`-th (1-based) distinct letter of a channel.
pub fn distinct_letter_name(i: usize, channel: &str, suffixed: bool) -> String {
    if suffixed {
        format!("a{i}_{channel}")
    } else {
        format!("a{i}")
    }
}

/// Letter-to-letter map from a distinct-letter alphabet back to the
/// original channel alphabet. `None` marks a wildcard letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelHom {
    pub image: Vec<Option<u32>>,
}

impl ChannelHom {
    /// Distinct letters mapped to original symbol `orig`.
    pub fn preimage(&self, orig: u32) -> impl Iterator<Item = u32> + '_ {
        self.image.iter().enumerate().filter(move |(_, &i)| i == Some(orig)).map(|(a, _)| a as u32)
    }
}

/// Renames a validated spec into distinct-letter form, dropping tuple words
/// whose letters the language never uses.
pub fn distinct_letterize(v: &ValidatedSpec, suffixed: bool) -> (ValidatedSpec, ChannelHom) {
    let spec = &v.spec;
    let image: Vec<u32> = spec.tuple.iter().flatten().copied().collect();
    let m = image.len();
    let mut words = Vec::new();
    let mut k = 0u32;
    for w in &spec.tuple {
        words.push((k..k + w.len() as u32).collect::<Vec<u32>>());
        k += w.len() as u32;
    }
    let pattern = {
        let parts = words
            .iter()
            .map(|w| Regex::star(Regex::concat(w.iter().map(|&s| Regex::Sym(s)).collect())))
            .collect();
        Regex::concat(parts).to_dfa(m)
    };
    let lang = spec.language.inverse_image(&image).intersect(&pattern).minimize();
    let used = lang.symbols_used();
    let kept: Vec<&Vec<u32>> = words.iter().filter(|w| used.contains(&w[0])).collect();
    let mut rename: Vec<Option<u32>> = vec![None; m];
    let mut new_image = Vec::new();
    let mut tuple = Vec::new();
    for w in kept {
        let mut nw = Vec::new();
        for &s in w {
            let id = new_image.len() as u32;
            rename[s as usize] = Some(id);
            new_image.push(Some(image[s as usize]));
            nw.push(id);
        }
        tuple.push(nw);
    }
    let n = new_image.len();
    let language = lang.rename_symbols(&rename, n).minimize();
    let alphabet = (1..=n).map(|i| distinct_letter_name(i, &spec.channel, suffixed)).collect();
    let out = ValidatedSpec {
        spec: BoundedLangSpec { channel: spec.channel.clone(), alphabet, tuple, language },
        distinct_letter: true,
        letter_bounded: false,
    };
    let letter_bounded = out.spec.tuple.iter().all(|w| w.len() == 1);
    (ValidatedSpec { letter_bounded, ..out }, ChannelHom { image: new_image })
}

/// Deterministic automaton for valid action sequences: per channel, the
/// shuffle of a send-side and a receive-side automaton; channels combine
/// asynchronously. A state is the vector `[send_0, recv_0, send_1, ...]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidAutomaton {
    pub send: Vec<Dfa>,
    pub recv: Vec<Dfa>,
}

impl ValidAutomaton {
    pub fn num_channels(&self) -> usize {
        self.send.len()
    }

    pub fn initial(&self) -> Vec<u32> {
        let mut s = Vec::with_capacity(2 * self.send.len());
        for c in 0..self.send.len() {
            s.push(self.send[c].init());
            s.push(self.recv[c].init());
        }
        s
    }

    /// Next state after a local symbol on channel `c`, if defined.
    pub fn step(&self, state: &[u32], c: usize, dir: Direction, sym: u32) -> Option<Vec<u32>> {
        let (slot, dfa) = match dir {
            Direction::Send => (2 * c, &self.send[c]),
            Direction::Receive => (2 * c + 1, &self.recv[c]),
        };
        let t = dfa.step(state[slot], sym)?;
        let mut next = state.to_vec();
        next[slot] = t;
        Some(next)
    }

    pub fn is_final(&self, state: &[u32]) -> bool {
        (0..self.send.len()).all(|c| self.send[c].is_final(state[2 * c]) && self.recv[c].is_final(state[2 * c + 1]))
    }

    /// Explicit product automaton over action symbols `2 * letter + dir`,
    /// where `letter = offsets[c] + local symbol` and `dir` is 0 for sends.
    /// All states of the result are accessible and co-accessible.
    pub fn to_automaton(&self, offsets: &[u32], nletters: usize) -> Dfa {
        use alloc::collections::{BTreeMap, VecDeque};
        let nsym = 2 * nletters;
        let mut index: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
        let init = self.initial();
        let mut states: Vec<Vec<u32>> = vec![init.clone()];
        index.insert(init.clone(), 0);
        let mut edges: Vec<(u32, u32, u32)> = Vec::new();
        let mut queue = VecDeque::from([init]);
        while let Some(s) = queue.pop_front() {
            let sid = index[&s];
            for c in 0..self.send.len() {
                for (dir, d) in [(Direction::Send, 0u32), (Direction::Receive, 1)] {
                    let dfa = if d == 0 { &self.send[c] } else { &self.recv[c] };
                    for sym in 0..dfa.num_symbols() as u32 {
                        if let Some(n) = self.step(&s, c, dir, sym) {
                            let nid = match index.get(&n) {
                                Some(&i) => i,
                                None => {
                                    let i = states.len() as u32;
                                    index.insert(n.clone(), i);
                                    states.push(n.clone());
                                    queue.push_back(n);
                                    i
                                }
                            };
                            edges.push((sid, 2 * (offsets[c] + sym) + d, nid));
                        }
                    }
                }
            }
        }
        let mut dfa = Dfa::with_states(nsym, states.len());
        for (i, s) in states.iter().enumerate() {
            dfa.set_final(i as u32, self.is_final(s));
        }
        for (s, a, t) in edges {
            dfa.set(s, a, t);
        }
        dfa.trim()
    }
}

/// Valid-sequence automaton for input-bounded runs: sends follow `L_c`,
/// receives follow its prefix closure.
pub fn build_valid_automaton(specs: &[ValidatedSpec]) -> ValidAutomaton {
    ValidAutomaton {
        send: specs.iter().map(|v| v.spec.language.minimize()).collect(),
        recv: specs.iter().map(|v| v.spec.language.prefix_closure()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn validation_errors() {
        let s = BoundedLangSpec::parse("c", &ab(), &["b"], "a*").unwrap();
        assert!(matches!(validate_bounded_spec(&s, Strictness::Strict), Err(BoundedError::AlphabetMismatch { .. })));
        let s = BoundedLangSpec::parse("c", &ab(), &["a", "b"], "(ab)*").unwrap();
        assert!(matches!(validate_bounded_spec(&s, Strictness::Strict), Err(BoundedError::NotBounded { .. })));
        let s = BoundedLangSpec::parse("c", &ab(), &["ab", "b"], "(ab)*bb*").unwrap();
        let v = validate_bounded_spec(&s, Strictness::Strict).unwrap();
        assert!(!v.distinct_letter);
    }

    #[test]
    fn empty_word_and_language() {
        let mut s = BoundedLangSpec::parse("c", &ab(), &["a"], "a*").unwrap();
        s.tuple.push(Vec::new());
        assert!(matches!(validate_bounded_spec(&s, Strictness::Strict), Err(BoundedError::EmptyTupleWord { .. })));
        let mut s = BoundedLangSpec::parse("c", &ab(), &["a"], "a").unwrap();
        s.language = Dfa::empty(2);
        assert!(matches!(validate_bounded_spec(&s, Strictness::Strict), Err(BoundedError::EmptyLanguage { .. })));
    }

    #[test]
    fn distinct_letterization_of_running_example() {
        let s = BoundedLangSpec::parse("c", &ab(), &["ab", "b"], "(ab)*bb*").unwrap();
        let v = validate_bounded_spec(&s, Strictness::Strict).unwrap();
        let (d, h) = distinct_letterize(&v, false);
        assert_eq!(d.spec.alphabet, vec!["a1", "a2", "a3"]);
        assert_eq!(d.spec.tuple, vec![vec![0, 1], vec![2]]);
        assert_eq!(h.image, vec![Some(0), Some(1), Some(1)]);
        assert_eq!(d.spec.language_regex(), "(a1a2)*a3a3*");
        assert!(d.distinct_letter);
    }

    #[test]
    fn unused_words_are_dropped() {
        let s = BoundedLangSpec::parse("c", &ab(), &["a", "b"], "a*").unwrap();
        let v = validate_bounded_spec(&s, Strictness::Relaxed).unwrap();
        let (d, h) = distinct_letterize(&v, false);
        assert_eq!(d.spec.tuple, vec![vec![0]]);
        assert_eq!(h.image, vec![Some(0)]);
    }

    #[test]
    fn valid_automaton_tracks_both_sides() {
        let s = BoundedLangSpec::parse("c", &ab(), &["ab", "b"], "(ab)*bb*").unwrap();
        let v = validate_bounded_spec(&s, Strictness::Strict).unwrap();
        let (d, _) = distinct_letterize(&v, false);
        let va = build_valid_automaton(&[d]);
        let s0 = va.initial();
        assert!(va.step(&s0, 0, Direction::Send, 1).is_none());
        let s1 = va.step(&s0, 0, Direction::Send, 0).unwrap();
        assert!(!va.is_final(&s1));
        let s2 = va.step(&s1, 0, Direction::Receive, 0).unwrap();
        let s3 = va.step(&s2, 0, Direction::Send, 1).unwrap();
        let s4 = va.step(&s3, 0, Direction::Send, 2).unwrap();
        assert!(va.is_final(&s4));
        let explicit = va.to_automaton(&[0], 3);
        // !a1 ?a1 !a2 !a3 is accepted: symbols 2*letter + dir
        assert!(explicit.accepts(&[0, 1, 2, 4]));
        assert!(!explicit.accepts(&[1]));
    }
}
