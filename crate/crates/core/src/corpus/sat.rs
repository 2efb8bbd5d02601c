//! 3SAT gadgets on one channel.
//!
//! Variable gadgets send `tk` or `fk`, a stop gadget sends `#`. Each clause
//! gadget rotates the whole channel once and only lets the rotation finish
//! if one of its literals was seen. The cleanup gadget empties the channel.
//! The formula is satisfiable iff the cleanup state is reachable with an
//! empty channel.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::make_spec;
use crate::bounded::{Strictness, ValidatedSpec};
use crate::model::{Direction, FifoConfig, FifoMachine, FifoMachineBuilder};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CnfError {
    #[error("literal {literal} out of range for {vars} variables")]
    BadLiteral { literal: i32, vars: usize },
    #[error("clause {clause} has {width} literals; at most 3 are supported")]
    ClauseWidth { clause: usize, width: usize },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// A 3-CNF formula. Literal `k` is variable `k`, `-k` its negation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub vars: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn new(vars: usize, clauses: Vec<[i32; 3]>) -> Result<Self, CnfError> {
        for c in &clauses {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > vars {
                    return Err(CnfError::BadLiteral { literal: l, vars });
                }
            }
        }
        Ok(CnfFormula { vars, clauses })
    }

    pub fn eval(&self, assignment: u32) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = assignment >> (l.unsigned_abs() - 1) & 1 == 1;
                v == (l > 0)
            })
        })
    }

    /// Brute force over all assignments.
    pub fn is_satisfiable(&self) -> bool {
        (0..1u32 << self.vars).any(|a| self.eval(a))
    }

    pub fn random<R: Rng>(rng: &mut R, vars: usize, clauses: usize) -> Self {
        let cs = (0..clauses)
            .map(|_| {
                let mut c = [0i32; 3];
                for l in &mut c {
                    let v = rng.gen_range(1..=vars as i32);
                    *l = if rng.gen_bool(0.5) { v } else { -v };
                }
                c
            })
            .collect();
        CnfFormula { vars, clauses: cs }
    }

    pub fn seeded(seed: u64, vars: usize, clauses: usize) -> Self {
        Self::random(&mut ChaCha8Rng::seed_from_u64(seed), vars, clauses)
    }

    /// DIMACS CNF. Clauses shorter than 3 repeat their last literal.
    pub fn parse_dimacs(text: &str) -> Result<Self, CnfError> {
        let mut vars = None;
        let mut clauses = Vec::new();
        let mut cur: Vec<i32> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let n = match parts.as_slice() {
                    ["cnf", n, _] => n.parse::<usize>().ok(),
                    _ => None,
                };
                let n = n.ok_or(CnfError::Syntax { line: i + 1, message: "expected `p cnf <vars> <clauses>`".into() })?;
                vars = Some(n);
                continue;
            }
            for tok in line.split_whitespace() {
                let l: i32 = tok
                    .parse()
                    .map_err(|_| CnfError::Syntax { line: i + 1, message: format!("bad literal `{tok}`") })?;
                if l != 0 {
                    cur.push(l);
                    continue;
                }
                let idx = clauses.len();
                let clause = pad(&cur).ok_or(CnfError::ClauseWidth { clause: idx, width: cur.len() })?;
                clauses.push(clause);
                cur.clear();
            }
        }
        if !cur.is_empty() {
            let idx = clauses.len();
            clauses.push(pad(&cur).ok_or(CnfError::ClauseWidth { clause: idx, width: cur.len() })?);
        }
        let vars = vars.ok_or(CnfError::Syntax { line: 0, message: "missing problem line".into() })?;
        CnfFormula::new(vars, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        for c in &self.clauses {
            s.push_str(&format!("{} {} {} 0\n", c[0], c[1], c[2]));
        }
        s
    }
}

fn pad(lits: &[i32]) -> Option<[i32; 3]> {
    match lits {
        [a] => Some([*a, *a, *a]),
        [a, b] => Some([*a, *b, *b]),
        [a, b, c] => Some([*a, *b, *c]),
        _ => None,
    }
}

/// A generated machine with its bounded language and reachability target.
#[derive(Clone, Debug)]
pub struct SatInstance {
    pub machine: FifoMachine,
    pub spec: ValidatedSpec,
    /// The cleanup state with an empty channel.
    pub target: FifoConfig,
    pub satisfiable: bool,
}

type Label = Option<(Direction, String)>;

/// Control graph with ε-edges, compiled by ε-closure.
#[derive(Default)]
struct Sketch {
    edges: Vec<(String, Label, String)>,
}

impl Sketch {
    fn eps(&mut self, p: &str, q: &str) {
        self.edges.push((p.into(), None, q.into()));
    }
    fn send(&mut self, p: &str, l: &str, q: &str) {
        self.edges.push((p.into(), Some((Direction::Send, l.into())), q.into()));
    }
    fn recv(&mut self, p: &str, l: &str, q: &str) {
        self.edges.push((p.into(), Some((Direction::Receive, l.into())), q.into()));
    }
    /// `?l` then `!l`, through a fresh middle state.
    fn echo(&mut self, p: &str, l: &str, q: &str) {
        let mid = format!("{p}>{l}>{q}");
        self.recv(p, l, &mid);
        self.send(&mid, l, q);
    }

    fn compile(&self, init: &str, channel: &str, alphabet: &[String]) -> FifoMachine {
        let mut eps: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut out: BTreeMap<&str, Vec<(&(Direction, String), &str)>> = BTreeMap::new();
        for (p, l, q) in &self.edges {
            match l {
                None => eps.entry(p).or_default().push(q),
                Some(a) => out.entry(p).or_default().push((a, q)),
            }
        }
        let closure = |p: &str| -> Vec<String> {
            let mut seen: BTreeSet<String> = BTreeSet::new();
            let mut stack = vec![p.to_string()];
            while let Some(s) = stack.pop() {
                if seen.insert(s.clone()) {
                    stack.extend(eps.get(s.as_str()).into_iter().flatten().map(|q| q.to_string()));
                }
            }
            seen.into_iter().collect()
        };
        let mut b = FifoMachineBuilder::new();
        b.add_channel(channel, alphabet).expect("fresh");
        let i = b.state(init);
        b.set_init(i);
        let mut done: BTreeSet<String> = BTreeSet::new();
        let mut queue = vec![init.to_string()];
        while let Some(p) = queue.pop() {
            if !done.insert(p.clone()) {
                continue;
            }
            let mut added: BTreeSet<(Direction, &str, &str)> = BTreeSet::new();
            for q in closure(&p) {
                for &((dir, l), r) in out.get(q.as_str()).into_iter().flatten() {
                    if added.insert((*dir, l.as_str(), r)) {
                        b.add_named(&p, channel, *dir, l, r).expect("declared letter");
                        queue.push(r.to_string());
                    }
                }
            }
        }
        b.build().expect("init set")
    }
}

fn lit_name(l: i32) -> String {
    if l > 0 {
        format!("t{l}")
    } else {
        format!("f{}", -l)
    }
}

/// Builds the gadget machine. `flat` uses branch-free clause gadgets that
/// read the variables in order; `unbounded_variant` adds a `!#` loop at
/// the end so that the machine is unbounded iff the formula is satisfiable.
pub fn gen_3sat(cnf: &CnfFormula, flat: bool, unbounded_variant: bool) -> SatInstance {
    let n = cnf.vars;
    let m = cnf.clauses.len();
    let mut alphabet: Vec<String> = Vec::new();
    for k in 1..=n as i32 {
        alphabet.push(lit_name(k));
        alphabet.push(lit_name(-k));
    }
    alphabet.push("#".into());
    let vars: Vec<String> = alphabet[..2 * n].to_vec();

    let mut g = Sketch::default();
    for k in 1..=n {
        let (p, q) = (format!("v{}", k - 1), format!("v{k}"));
        g.send(&p, &lit_name(k as i32), &q);
        g.send(&p, &lit_name(-(k as i32)), &q);
    }
    g.send(&format!("v{n}"), "#", "c0");
    for (i, clause) in cnf.clauses.iter().enumerate() {
        let (start, end) = (format!("c{i}"), format!("c{}", i + 1));
        for (j, &lit) in clause.iter().enumerate() {
            let pre = format!("c{i}.{j}");
            g.eps(&start, &pre);
            if flat {
                // one position per variable; the literal's variable is forced
                let mut cur = pre.clone();
                for k in 1..=n as i32 {
                    let next = format!("c{i}.{j}.{k}");
                    if k == lit.abs() {
                        g.echo(&cur, &lit_name(lit), &next);
                    } else {
                        g.echo(&cur, &lit_name(k), &next);
                        g.echo(&cur, &lit_name(-k), &next);
                    }
                    cur = next;
                }
                g.echo(&cur, "#", &end);
            } else {
                let post = format!("c{i}.{j}+");
                for v in &vars {
                    g.echo(&pre, v, &pre);
                    g.echo(&post, v, &post);
                }
                g.echo(&pre, &lit_name(lit), &post);
                g.echo(&post, "#", &end);
            }
        }
    }
    let start = format!("c{m}");
    let target_state = if flat {
        let mut cur = start.clone();
        for (k, v) in vars.iter().enumerate() {
            let next = format!("d{}", k + 1);
            g.recv(&cur, v, &next);
            g.eps(&cur, &next);
            cur = next;
        }
        g.recv(&cur, "#", "done");
        "done".to_string()
    } else {
        for l in &alphabet {
            g.recv(&start, l, &start);
        }
        start
    };
    if unbounded_variant {
        g.send(&target_state, "#", &target_state);
    }
    let machine = g.compile("v0", "c", &alphabet);

    // one block per pass over the channel: the assignment, then m rotations
    let block: String = (1..=n as i32).map(|k| format!("({}|{})", lit_name(k), lit_name(-k))).collect::<String>() + "#";
    let mut regex = String::new();
    for _ in 0..=m {
        regex.push_str(&format!("({block})"));
    }
    if unbounded_variant {
        regex.push_str("#*");
    }
    let tuple: Vec<&str> = (0..=m).flat_map(|_| alphabet.iter().map(|s| s.as_str())).collect();
    let alph: Vec<&str> = alphabet.iter().map(|s| s.as_str()).collect();
    let spec = make_spec("c", &alph, &tuple, &regex, Strictness::Strict).expect("tight language fits the tuple");
    let state = machine.state_id(&target_state).expect("cleanup state is reachable in the control graph");
    SatInstance {
        target: FifoConfig { state, contents: vec![Vec::new()] },
        machine,
        spec,
        satisfiable: cnf.is_satisfiable(),
    }
}
