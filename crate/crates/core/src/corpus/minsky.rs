//! Two-counter Minsky machines simulated on one channel holding
//! `$ a^x1 # b^x2 &`. Each rule rotates the channel once, adding or
//! dropping one letter on the way.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::make_spec;
use crate::bounded::{Strictness, ValidatedSpec};
use crate::model::{Direction, FifoMachine, FifoMachineBuilder, LetterId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinskyRule {
    /// `x := x + 1; goto to`
    Inc { from: String, counter: usize, to: String },
    /// `if x = 0 goto zero else (x := x - 1; goto nonzero)`
    TestDec { from: String, counter: usize, zero: String, nonzero: String },
}

impl MinskyRule {
    pub fn from(&self) -> &str {
        match self {
            MinskyRule::Inc { from, .. } | MinskyRule::TestDec { from, .. } => from,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinskyError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("program has no states")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinskyProgram {
    pub init: String,
    pub rules: Vec<MinskyRule>,
}

fn counter_index(tok: &str) -> Option<usize> {
    match tok {
        "x1" => Some(0),
        "x2" => Some(1),
        _ => None,
    }
}

impl MinskyProgram {
    /// States in order of first mention, starting with the initial one.
    pub fn states(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut add = |s: &str| {
            if seen.insert(s.to_string()) {
                out.push(s.to_string());
            }
        };
        add(&self.init);
        for r in &self.rules {
            match r {
                MinskyRule::Inc { from, to, .. } => {
                    add(from);
                    add(to);
                }
                MinskyRule::TestDec { from, zero, nonzero, .. } => {
                    add(from);
                    add(zero);
                    add(nonzero);
                }
            }
        }
        out
    }

    /// Lines `<q>: inc x1 goto <q'>` or `<q>: ifz x2 goto <q'> else dec goto <q''>`,
    /// an optional `init <q>` line, and `#` comments. Without `init`, the
    /// first rule's state is initial.
    pub fn parse(text: &str) -> Result<Self, MinskyError> {
        let mut init = None;
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| MinskyError::Syntax { line: i + 1, message: message.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if let ["init", q] = toks.as_slice() {
                init = Some(q.to_string());
                continue;
            }
            let Some(from) = toks.first().and_then(|t| t.strip_suffix(':')) else {
                return Err(err("expected `<state>:`"));
            };
            let from = from.to_string();
            let rule = match &toks[1..] {
                ["inc", x, "goto", q] => {
                    let counter = counter_index(x).ok_or_else(|| err("counter must be x1 or x2"))?;
                    MinskyRule::Inc { from, counter, to: q.to_string() }
                }
                ["ifz", x, "goto", z, "else", "dec", "goto", nz] => {
                    let counter = counter_index(x).ok_or_else(|| err("counter must be x1 or x2"))?;
                    MinskyRule::TestDec { from, counter, zero: z.to_string(), nonzero: nz.to_string() }
                }
                _ => return Err(err("expected `inc xN goto q` or `ifz xN goto q else dec goto q`")),
            };
            rules.push(rule);
        }
        let init = init.or_else(|| rules.first().map(|r| r.from().to_string())).ok_or(MinskyError::Empty)?;
        Ok(MinskyProgram { init, rules })
    }

    pub fn print(&self) -> String {
        let mut s = format!("init {}\n", self.init);
        for r in &self.rules {
            match r {
                MinskyRule::Inc { from, counter, to } => {
                    s.push_str(&format!("{from}: inc x{} goto {to}\n", counter + 1));
                }
                MinskyRule::TestDec { from, counter, zero, nonzero } => {
                    s.push_str(&format!("{from}: ifz x{} goto {zero} else dec goto {nonzero}\n", counter + 1));
                }
            }
        }
        s
    }

    /// Reachable `(state, x1, x2)` triples, or `None` once a counter
    /// exceeds `cap`.
    pub fn reachable(&self, cap: u32) -> Option<BTreeSet<(String, [u32; 2])>> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([(self.init.clone(), [0u32; 2])]);
        while let Some(cfg) = queue.pop_front() {
            if cfg.1.iter().any(|&x| x > cap) {
                return None;
            }
            if !seen.insert(cfg.clone()) {
                continue;
            }
            let (q, v) = cfg;
            for r in self.rules.iter().filter(|r| r.from() == q) {
                let mut w = v;
                match r {
                    MinskyRule::Inc { counter, to, .. } => {
                        w[*counter] += 1;
                        queue.push_back((to.clone(), w));
                    }
                    MinskyRule::TestDec { counter, zero, nonzero, .. } => {
                        if w[*counter] == 0 {
                            queue.push_back((zero.clone(), w));
                        } else {
                            w[*counter] -= 1;
                            queue.push_back((nonzero.clone(), w));
                        }
                    }
                }
            }
        }
        Some(seen)
    }

    /// A random program over `states` states with `rules` rules.
    pub fn random<R: Rng>(rng: &mut R, states: usize, rules: usize) -> Self {
        let name = |i: usize| format!("s{i}");
        let mut rs = Vec::new();
        for _ in 0..rules {
            let from = name(rng.gen_range(0..states));
            let counter = rng.gen_range(0..2);
            if rng.gen_bool(0.5) {
                rs.push(MinskyRule::Inc { from, counter, to: name(rng.gen_range(0..states)) });
            } else {
                let zero = name(rng.gen_range(0..states));
                let nonzero = name(rng.gen_range(0..states));
                rs.push(MinskyRule::TestDec { from, counter, zero, nonzero });
            }
        }
        MinskyProgram { init: name(0), rules: rs }
    }

    /// A seeded random program whose counters never exceed `cap`.
    pub fn seeded(seed: u64, states: usize, rules: usize, cap: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let p = Self::random(&mut rng, states, rules);
            if p.reachable(cap).is_some() {
                return p;
            }
        }
        MinskyProgram { init: "s0".to_string(), rules: Vec::new() }
    }
}

#[derive(Clone, Debug)]
pub struct MinskyInstance {
    pub machine: FifoMachine,
    /// `$*a*#*b*&*$*a*#*b*&*`, the shape of every reachable contents.
    pub shape: ValidatedSpec,
}

const ALPHABET: [&str; 5] = ["a", "b", "#", "$", "&"];

struct Gadgets {
    b: FifoMachineBuilder,
    fresh: usize,
}

impl Gadgets {
    fn mid(&mut self) -> String {
        self.fresh += 1;
        format!("_m{}", self.fresh)
    }
    fn edge(&mut self, p: &str, dir: Direction, l: &str, q: &str) {
        self.b.add_named(p, "c", dir, l, q).expect("declared letter");
    }
    fn recv(&mut self, p: &str, l: &str) -> String {
        let q = self.mid();
        self.edge(p, Direction::Receive, l, &q);
        q
    }
    fn send(&mut self, p: &str, l: &str) -> String {
        let q = self.mid();
        self.edge(p, Direction::Send, l, &q);
        q
    }
    /// `?l !l` from `p`, ending in a fresh state.
    fn echo(&mut self, p: &str, l: &str) -> String {
        let m = self.recv(p, l);
        self.send(&m, l)
    }
    /// `?l !l` loop at `p`.
    fn echo_loop(&mut self, p: &str, l: &str) {
        let m = self.recv(p, l);
        self.edge(&m, Direction::Send, l, p);
    }
}

/// Builds the simulating machine. An initial gadget writes `$#&` before
/// the program's initial state is entered.
pub fn gen_minsky(prog: &MinskyProgram) -> MinskyInstance {
    let mut g = Gadgets { b: FifoMachineBuilder::new(), fresh: 0 };
    g.b.add_channel("c", &ALPHABET).expect("fresh");
    let start = g.b.state("_start");
    g.b.set_init(start);
    for s in prog.states() {
        g.b.state(&s);
    }
    let s1 = g.send("_start", "$");
    let s2 = g.send(&s1, "#");
    g.edge(&s2, Direction::Send, "&", &prog.init);

    for r in &prog.rules {
        match r {
            MinskyRule::Inc { from, counter: 0, to } => {
                let p = g.echo(from, "$");
                g.echo_loop(&p, "a");
                let p = g.recv(&p, "#");
                let p = g.send(&p, "a");
                let p = g.send(&p, "#");
                g.echo_loop(&p, "b");
                let p = g.recv(&p, "&");
                g.edge(&p, Direction::Send, "&", to);
            }
            MinskyRule::Inc { from, to, .. } => {
                let p = g.echo(from, "$");
                g.echo_loop(&p, "a");
                let p = g.echo(&p, "#");
                g.echo_loop(&p, "b");
                let p = g.recv(&p, "&");
                let p = g.send(&p, "b");
                g.edge(&p, Direction::Send, "&", to);
            }
            MinskyRule::TestDec { from, counter: 0, zero, nonzero } => {
                let p = g.echo(from, "$");
                // nonzero: drop one a, rotate the rest
                let d = g.recv(&p, "a");
                g.echo_loop(&d, "a");
                let d = g.echo(&d, "#");
                g.echo_loop(&d, "b");
                let d = g.recv(&d, "&");
                g.edge(&d, Direction::Send, "&", nonzero);
                // zero: the head after $ is #
                let z = g.echo(&p, "#");
                g.echo_loop(&z, "b");
                let z = g.recv(&z, "&");
                g.edge(&z, Direction::Send, "&", zero);
            }
            MinskyRule::TestDec { from, zero, nonzero, .. } => {
                let p = g.echo(from, "$");
                g.echo_loop(&p, "a");
                let p = g.echo(&p, "#");
                let d = g.recv(&p, "b");
                g.echo_loop(&d, "b");
                let d = g.recv(&d, "&");
                g.edge(&d, Direction::Send, "&", nonzero);
                let z = g.recv(&p, "&");
                g.edge(&z, Direction::Send, "&", zero);
            }
        }
    }
    let machine = g.b.build().expect("init set");
    let shape = make_spec(
        "c",
        &ALPHABET,
        &["$", "a", "#", "b", "&", "$", "a", "#", "b", "&"],
        "$*a*#*b*&*$*a*#*b*&*",
        Strictness::Relaxed,
    )
    .expect("letter-bounded shape");
    MinskyInstance { machine, shape }
}

/// Whether `word` has the shape `$*a*#*b*&*$*a*#*b*&*`.
pub fn minsky_contents_ok(inst: &MinskyInstance, word: &[LetterId]) -> bool {
    let m = &inst.machine;
    let syms: Vec<u32> = word.iter().map(|&l| m.local_index(l) as u32).collect();
    inst.shape.spec.language.accepts(&syms)
}

/// Expected contents `$ a^x1 # b^x2 &` at a program state.
pub fn encode_counters(m: &FifoMachine, v: [u32; 2]) -> Vec<LetterId> {
    let l = |s: &str| m.letter_id(s).expect("minsky alphabet");
    let mut w = vec![l("$")];
    w.extend(core::iter::repeat_n(l("a"), v[0] as usize));
    w.push(l("#"));
    w.extend(core::iter::repeat_n(l("b"), v[1] as usize));
    w.push(l("&"));
    w
}

/// Program-state configurations `(state, contents)` expected at the
/// program states, keyed by state name.
pub fn expected_contents(inst: &MinskyInstance, reach: &BTreeSet<(String, [u32; 2])>) -> BTreeMap<String, BTreeSet<Vec<LetterId>>> {
    let mut out: BTreeMap<String, BTreeSet<Vec<LetterId>>> = BTreeMap::new();
    for (q, v) in reach {
        out.entry(q.clone()).or_default().insert(encode_counters(&inst.machine, *v));
    }
    out
}
