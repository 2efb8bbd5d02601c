//! Seeded random machines with random bounded languages.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounded::{validate_bounded_spec, BoundedLangSpec, Strictness, ValidatedSpec};
use crate::model::{ChannelId, Direction, FifoMachine, FifoMachineBuilder, LetterId, StateId};
use crate::normalize::normalize_machine;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomParams {
    pub states: usize,
    pub channels: usize,
    /// Maximal length of a tuple word.
    pub max_word: usize,
    /// Maximal number of tuple words per channel.
    pub max_tuple: usize,
    pub transitions: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { states: 4, channels: 2, max_word: 2, max_tuple: 3, transitions: 8 }
    }
}

const POOLS: [[&str; 3]; 2] = [["a", "b", "c"], ["d", "e", "f"]];

/// A random validated spec: tuple words over `pool`, each constrained to
/// one of `w*`, `w+`, `w` or `(w|eps)`, concatenated in tuple order.
pub fn random_spec<R: Rng>(rng: &mut R, channel: &str, pool: &[&str], max_word: usize, max_tuple: usize) -> ValidatedSpec {
    let k = rng.gen_range(1..=max_tuple);
    let words: Vec<Vec<&str>> = (0..k)
        .map(|_| (0..rng.gen_range(1..=max_word)).map(|_| pool[rng.gen_range(0..pool.len())]).collect())
        .collect();
    let used: BTreeSet<&str> = words.iter().flatten().copied().collect();
    let alphabet: Vec<String> = pool.iter().filter(|l| used.contains(*l)).map(|s| s.to_string()).collect();
    let mut regex = String::new();
    for w in &words {
        let w = w.concat();
        let part = match rng.gen_range(0..4) {
            0 => format!("({w})*"),
            1 => format!("({w})+"),
            2 => format!("({w})"),
            _ => format!("({w}|eps)"),
        };
        regex.push_str(&part);
    }
    let tuple: Vec<String> = words.iter().map(|w| w.concat()).collect();
    let tuple: Vec<&str> = tuple.iter().map(|s| s.as_str()).collect();
    let spec = BoundedLangSpec::parse(channel, &alphabet, &tuple, &regex).expect("generated syntax");
    validate_bounded_spec(&spec, Strictness::Strict).expect("languages lie in their tuple pattern")
}

fn sample(rng: &mut ChaCha8Rng, p: &RandomParams) -> (FifoMachine, Vec<ValidatedSpec>) {
    let channels = p.channels.clamp(1, POOLS.len());
    let specs: Vec<ValidatedSpec> =
        (0..channels).map(|c| random_spec(rng, &format!("c{}", c + 1), &POOLS[c], p.max_word, p.max_tuple)).collect();
    let mut b = FifoMachineBuilder::new();
    for i in 0..p.states.max(1) {
        b.add_state(&format!("q{i}")).expect("fresh");
    }
    b.set_init(StateId(0));
    for v in &specs {
        b.add_channel(&v.spec.channel, &v.spec.alphabet).expect("disjoint pools");
    }
    let letters: Vec<Vec<LetterId>> = specs
        .iter()
        .map(|v| v.spec.alphabet.iter().map(|n| b.letter_id(n).expect("declared")).collect())
        .collect();
    for _ in 0..rng.gen_range(1..=p.transitions.max(1)) {
        let src = StateId(rng.gen_range(0..p.states.max(1)) as u32);
        let dst = StateId(rng.gen_range(0..p.states.max(1)) as u32);
        let c = rng.gen_range(0..channels);
        let letter = letters[c][rng.gen_range(0..letters[c].len())];
        let dir = if rng.gen_bool(0.5) { Direction::Send } else { Direction::Receive };
        b.add_transition(src, crate::model::FifoAction { dir, channel: ChannelId(c as u32), letter }, dst);
    }
    (b.build().expect("init set"), specs)
}

/// A reproducible random machine. Samples whose normal form has no
/// transition are rejected and redrawn (up to a fixed number of tries).
pub fn gen_random(seed: u64, params: &RandomParams) -> (FifoMachine, Vec<ValidatedSpec>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = sample(&mut rng, params);
    for _ in 0..64 {
        let bundle = normalize_machine(&last.0, &last.1).expect("generated specs match their machine");
        if !bundle.machine.transitions().is_empty() {
            break;
        }
        last = sample(&mut rng, params);
    }
    last
}

/// A random distinct-letter-capable spec from a seed, for round-trip checks.
pub fn gen_random_spec(seed: u64, max_word: usize, max_tuple: usize) -> ValidatedSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_spec(&mut rng, "c", &POOLS[0], max_word, max_tuple)
}
