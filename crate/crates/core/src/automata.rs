//! Finite automata over dense symbol alphabets `0..nsym`, plus a small
//! regular-expression front end.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

const NONE: u32 = u32::MAX;

/// Partial deterministic automaton with a dense transition table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    nsym: usize,
    table: Vec<u32>,
    finals: Vec<bool>,
    init: u32,
}

impl Dfa {
    /// Single non-final initial state, no transitions: the empty language.
    pub fn empty(nsym: usize) -> Self {
        Dfa { nsym, table: vec![NONE; nsym], finals: vec![false], init: 0 }
    }

    /// Accepts only the empty word.
    pub fn epsilon(nsym: usize) -> Self {
        Dfa { nsym, table: vec![NONE; nsym], finals: vec![true], init: 0 }
    }

    /// Accepts every word over the alphabet.
    pub fn universal(nsym: usize) -> Self {
        Dfa { nsym, table: vec![0; nsym], finals: vec![true], init: 0 }
    }

    pub fn with_states(nsym: usize, n: usize) -> Self {
        Dfa { nsym, table: vec![NONE; nsym * n.max(1)], finals: vec![false; n.max(1)], init: 0 }
    }

    pub fn num_symbols(&self) -> usize {
        self.nsym
    }
    pub fn num_states(&self) -> usize {
        self.finals.len()
    }
    pub fn init(&self) -> u32 {
        self.init
    }
    pub fn set_init(&mut self, s: u32) {
        self.init = s;
    }
    pub fn is_final(&self, s: u32) -> bool {
        self.finals[s as usize]
    }
    pub fn set_final(&mut self, s: u32, f: bool) {
        self.finals[s as usize] = f;
    }

    pub fn add_state(&mut self, fin: bool) -> u32 {
        let id = self.finals.len() as u32;
        self.finals.push(fin);
        self.table.extend(core::iter::repeat_n(NONE, self.nsym));
        id
    }

    pub fn set(&mut self, s: u32, a: u32, t: u32) {
        self.table[s as usize * self.nsym + a as usize] = t;
    }

    #[inline]
    pub fn step(&self, s: u32, a: u32) -> Option<u32> {
        let t = self.table[s as usize * self.nsym + a as usize];
        (t != NONE).then_some(t)
    }

    pub fn run(&self, word: &[u32]) -> Option<u32> {
        word.iter().try_fold(self.init, |s, &a| self.step(s, a))
    }

    pub fn accepts(&self, word: &[u32]) -> bool {
        self.run(word).is_some_and(|s| self.is_final(s))
    }

    pub fn successors(&self, s: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        let row = &self.table[s as usize * self.nsym..(s as usize + 1) * self.nsym];
        row.iter().enumerate().filter(|(_, &t)| t != NONE).map(|(a, &t)| (a as u32, t))
    }

    fn accessible(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.init];
        seen[self.init as usize] = true;
        while let Some(s) = stack.pop() {
            for (_, t) in self.successors(s) {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    fn coaccessible(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
        for s in 0..n as u32 {
            for (_, t) in self.successors(s) {
                rev[t as usize].push(s);
            }
        }
        let mut seen: Vec<bool> = self.finals.clone();
        let mut stack: Vec<u32> = (0..n as u32).filter(|&s| seen[s as usize]).collect();
        while let Some(s) = stack.pop() {
            for &p in &rev[s as usize] {
                if !seen[p as usize] {
                    seen[p as usize] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Restricts to states that are reachable and can reach a final state.
    pub fn trim(&self) -> Dfa {
        let acc = self.accessible();
        let co = self.coaccessible();
        if !co[self.init as usize] {
            return Dfa::empty(self.nsym);
        }
        let keep: Vec<bool> = acc.iter().zip(&co).map(|(a, b)| *a && *b).collect();
        self.restrict(&keep)
    }

    fn restrict(&self, keep: &[bool]) -> Dfa {
        let mut map = vec![NONE; self.num_states()];
        let mut order = Vec::new();
        // breadth-first numbering gives canonical state ids
        let mut queue = VecDeque::from([self.init]);
        map[self.init as usize] = 0;
        order.push(self.init);
        while let Some(s) = queue.pop_front() {
            for (_, t) in self.successors(s) {
                if keep[t as usize] && map[t as usize] == NONE {
                    map[t as usize] = order.len() as u32;
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        let mut out = Dfa::with_states(self.nsym, order.len());
        for (i, &s) in order.iter().enumerate() {
            out.finals[i] = self.finals[s as usize];
            for (a, t) in self.successors(s) {
                if keep[t as usize] {
                    out.set(i as u32, a, map[t as usize]);
                }
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        !self.coaccessible()[self.init as usize]
    }

    /// Minimal trimmed automaton with breadth-first canonical numbering.
    pub fn minimize(&self) -> Dfa {
        let t = self.trim();
        let n = t.num_states();
        let mut class: Vec<u32> = t.finals.iter().map(|&f| f as u32).collect();
        let mut nclasses = 0;
        loop {
            let mut sigs: BTreeMap<(u32, Vec<u32>), u32> = BTreeMap::new();
            let mut next = vec![0u32; n];
            for s in 0..n {
                let row: Vec<u32> = (0..t.nsym)
                    .map(|a| t.step(s as u32, a as u32).map_or(NONE, |d| class[d as usize]))
                    .collect();
                let k = sigs.len() as u32;
                next[s] = *sigs.entry((class[s], row)).or_insert(k);
            }
            let count = sigs.len();
            class = next;
            if count == nclasses {
                break;
            }
            nclasses = count;
        }
        let mut out = Dfa::with_states(t.nsym, nclasses);
        for s in 0..n {
            let c = class[s];
            out.finals[c as usize] = t.finals[s];
            for (a, d) in t.successors(s as u32) {
                out.set(c, a, class[d as usize]);
            }
        }
        out.init = class[t.init as usize];
        let all = vec![true; out.num_states()];
        out.restrict(&all)
    }

    /// Adds a sink so every transition is defined.
    pub fn complete(&self) -> Dfa {
        let mut out = self.clone();
        let sink = out.add_state(false);
        for s in 0..out.num_states() as u32 {
            for a in 0..out.nsym as u32 {
                if out.step(s, a).is_none() {
                    out.set(s, a, sink);
                }
            }
        }
        out
    }

    pub fn complement(&self) -> Dfa {
        let mut out = self.complete();
        for f in out.finals.iter_mut() {
            *f = !*f;
        }
        out
    }

    /// Synchronous product; `both` selects intersection vs union acceptance.
    fn product(&self, other: &Dfa, both: bool) -> Dfa {
        assert_eq!(self.nsym, other.nsym, "product over different alphabets");
        let (a, b) = if both { (self.clone(), other.clone()) } else { (self.complete(), other.complete()) };
        let mut index: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut out = Dfa::with_states(a.nsym, 0);
        out.finals.clear();
        out.table.clear();
        let fin = |x: u32, y: u32| if both { a.is_final(x) && b.is_final(y) } else { a.is_final(x) || b.is_final(y) };
        let start = (a.init, b.init);
        index.insert(start, out.add_state(fin(start.0, start.1)));
        let mut queue = VecDeque::from([start]);
        while let Some((x, y)) = queue.pop_front() {
            let id = index[&(x, y)];
            for (sym, xt) in a.successors(x) {
                if let Some(yt) = b.step(y, sym) {
                    let key = (xt, yt);
                    let t = match index.get(&key) {
                        Some(&t) => t,
                        None => {
                            let t = out.add_state(fin(xt, yt));
                            index.insert(key, t);
                            queue.push_back(key);
                            t
                        }
                    };
                    out.set(id, sym, t);
                }
            }
        }
        out
    }

    pub fn intersect(&self, other: &Dfa) -> Dfa {
        self.product(other, true)
    }

    pub fn union(&self, other: &Dfa) -> Dfa {
        self.product(other, false)
    }

    /// `Ok` if L(self) ⊆ L(other), otherwise a shortest word of
    /// L(self) \ L(other).
    pub fn included_in(&self, other: &Dfa) -> Result<(), Vec<u32>> {
        let diff = self.intersect(&other.complement());
        match diff.shortest_accepted() {
            Some(w) => Err(w),
            None => Ok(()),
        }
    }

    pub fn equivalent(&self, other: &Dfa) -> bool {
        self.included_in(other).is_ok() && other.included_in(self).is_ok()
    }

    pub fn shortest_accepted(&self) -> Option<Vec<u32>> {
        let n = self.num_states();
        let mut parent: Vec<Option<(u32, u32)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[self.init as usize] = true;
        let mut queue = VecDeque::from([self.init]);
        while let Some(s) = queue.pop_front() {
            if self.is_final(s) {
                let mut w = Vec::new();
                let mut cur = s;
                while let Some((p, a)) = parent[cur as usize] {
                    w.push(a);
                    cur = p;
                }
                w.reverse();
                return Some(w);
            }
            for (a, t) in self.successors(s) {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    parent[t as usize] = Some((s, a));
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Minimal automaton for the prefix closure.
    pub fn prefix_closure(&self) -> Dfa {
        let mut t = self.trim();
        if t.is_empty() {
            return t;
        }
        for f in t.finals.iter_mut() {
            *f = true;
        }
        t.minimize()
    }

    /// Minimal automaton for the set of factors.
    pub fn infix_closure(&self) -> Dfa {
        let t = self.trim();
        if t.is_empty() {
            return t;
        }
        let n = t.num_states();
        let mut nfa = Nfa::new(t.nsym, n);
        for s in 0..n as u32 {
            nfa.initial.push(s);
            nfa.finals[s as usize] = true;
            for (a, d) in t.successors(s) {
                nfa.add(s, a, d);
            }
        }
        nfa.determinize().minimize()
    }

    /// Symbols labelling some transition of the trimmed automaton.
    pub fn symbols_used(&self) -> BTreeSet<u32> {
        let t = self.trim();
        let mut out = BTreeSet::new();
        if t.is_empty() {
            return out;
        }
        for s in 0..t.num_states() as u32 {
            for (a, _) in t.successors(s) {
                out.insert(a);
            }
        }
        out
    }

    /// Inverse image under a letter-to-letter map: symbol `a` of the result
    /// behaves like `image[a]` in `self`.
    pub fn inverse_image(&self, image: &[u32]) -> Dfa {
        let mut out = Dfa::with_states(image.len(), self.num_states());
        out.finals = self.finals.clone();
        out.init = self.init;
        for s in 0..self.num_states() as u32 {
            for (a, &b) in image.iter().enumerate() {
                if let Some(t) = self.step(s, b) {
                    out.set(s, a as u32, t);
                }
            }
        }
        out
    }

    /// Renames symbols: symbol `a` becomes `rename[a]` (or is dropped when
    /// `None`) in an alphabet of size `nsym`.
    pub fn rename_symbols(&self, rename: &[Option<u32>], nsym: usize) -> Dfa {
        let mut out = Dfa::with_states(nsym, self.num_states());
        out.finals = self.finals.clone();
        out.init = self.init;
        for s in 0..self.num_states() as u32 {
            for (a, t) in self.successors(s) {
                if let Some(b) = rename[a as usize] {
                    out.set(s, b, t);
                }
            }
        }
        out
    }

    /// Concatenation with a single word.
    pub fn concat_word(&self, word: &[u32]) -> Dfa {
        let mut nfa = self.to_nfa();
        let prev: Vec<u32> = (0..self.num_states() as u32).filter(|&s| self.is_final(s)).collect();
        for f in nfa.finals.iter_mut() {
            *f = false;
        }
        let mut cur = nfa.add_state(word.is_empty());
        for &p in &prev {
            nfa.add_eps(p, cur);
        }
        for (i, &a) in word.iter().enumerate() {
            let next = nfa.add_state(i + 1 == word.len());
            nfa.add(cur, a, next);
            cur = next;
        }
        nfa.determinize().minimize()
    }

    /// Concatenation with `sym*`.
    pub fn concat_star(&self, sym: u32) -> Dfa {
        let mut nfa = self.to_nfa();
        let loop_state = nfa.add_state(true);
        nfa.add(loop_state, sym, loop_state);
        for s in 0..self.num_states() as u32 {
            if self.is_final(s) {
                nfa.add_eps(s, loop_state);
            }
        }
        nfa.determinize().minimize()
    }

    /// Same language over a larger alphabet.
    pub fn widen(&self, nsym: usize) -> Dfa {
        assert!(nsym >= self.nsym);
        let mut out = Dfa::with_states(nsym, self.num_states());
        out.finals = self.finals.clone();
        out.init = self.init;
        for s in 0..self.num_states() as u32 {
            for (a, t) in self.successors(s) {
                out.set(s, a, t);
            }
        }
        out
    }

    pub fn to_nfa(&self) -> Nfa {
        let n = self.num_states();
        let mut nfa = Nfa::new(self.nsym, n);
        nfa.initial.push(self.init);
        for s in 0..n as u32 {
            nfa.finals[s as usize] = self.is_final(s);
            for (a, t) in self.successors(s) {
                nfa.add(s, a, t);
            }
        }
        nfa
    }

    /// Words of length exactly `len` accepted from the initial state, in
    /// lexicographic symbol order. Intended for small inputs.
    pub fn words_of_length(&self, len: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut word = Vec::new();
        self.collect_words(self.init, len, &mut word, &mut out);
        out
    }

    fn collect_words(&self, s: u32, left: usize, word: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            if self.is_final(s) {
                out.push(word.clone());
            }
            return;
        }
        for (a, t) in self.successors(s) {
            word.push(a);
            self.collect_words(t, left - 1, word, out);
            word.pop();
        }
    }
}

/// Nondeterministic automaton with epsilon moves.
#[derive(Clone, Debug, Default)]
pub struct Nfa {
    pub nsym: usize,
    pub trans: Vec<Vec<(u32, u32)>>,
    pub eps: Vec<Vec<u32>>,
    pub initial: Vec<u32>,
    pub finals: Vec<bool>,
}

impl Nfa {
    pub fn new(nsym: usize, states: usize) -> Self {
        Nfa {
            nsym,
            trans: vec![Vec::new(); states],
            eps: vec![Vec::new(); states],
            initial: Vec::new(),
            finals: vec![false; states],
        }
    }

    pub fn num_states(&self) -> usize {
        self.finals.len()
    }

    pub fn add_state(&mut self, fin: bool) -> u32 {
        self.trans.push(Vec::new());
        self.eps.push(Vec::new());
        self.finals.push(fin);
        (self.finals.len() - 1) as u32
    }

    pub fn add(&mut self, s: u32, a: u32, t: u32) {
        self.trans[s as usize].push((a, t));
    }

    pub fn add_eps(&mut self, s: u32, t: u32) {
        self.eps[s as usize].push(t);
    }

    pub fn closure(&self, set: &mut BTreeSet<u32>) {
        let mut stack: Vec<u32> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s as usize] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
    }

    pub fn determinize(&self) -> Dfa {
        let mut start: BTreeSet<u32> = self.initial.iter().copied().collect();
        self.closure(&mut start);
        let mut index: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
        let mut out = Dfa::with_states(self.nsym, 0);
        out.finals.clear();
        out.table.clear();
        let key: Vec<u32> = start.iter().copied().collect();
        let fin = |k: &[u32]| k.iter().any(|&s| self.finals[s as usize]);
        let id = out.add_state(fin(&key));
        index.insert(key.clone(), id);
        let mut queue = VecDeque::from([key]);
        while let Some(k) = queue.pop_front() {
            let id = index[&k];
            let mut by_sym: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
            for &s in &k {
                for &(a, t) in &self.trans[s as usize] {
                    by_sym.entry(a).or_default().insert(t);
                }
            }
            for (a, mut set) in by_sym {
                self.closure(&mut set);
                let nk: Vec<u32> = set.into_iter().collect();
                let t = match index.get(&nk) {
                    Some(&t) => t,
                    None => {
                        let t = out.add_state(fin(&nk));
                        index.insert(nk.clone(), t);
                        queue.push_back(nk);
                        t
                    }
                };
                out.set(id, a, t);
            }
        }
        out
    }
}

/// Regular expressions over symbols.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Regex {
    Empty,
    Eps,
    Sym(u32),
    Concat(Vec<Regex>),
    Alt(Vec<Regex>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
}

impl Regex {
    pub fn concat(parts: Vec<Regex>) -> Regex {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Regex::Empty => return Regex::Empty,
                Regex::Eps => {}
                Regex::Concat(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Regex::Eps,
            1 => out.pop().unwrap(),
            _ => Regex::Concat(out),
        }
    }

    pub fn alt(parts: Vec<Regex>) -> Regex {
        let mut out: Vec<Regex> = Vec::new();
        for p in parts {
            let items = match p {
                Regex::Empty => continue,
                Regex::Alt(inner) => inner,
                other => vec![other],
            };
            for i in items {
                if !out.contains(&i) {
                    out.push(i);
                }
            }
        }
        // r* already contains eps
        if out.contains(&Regex::Eps) && out.iter().any(|r| matches!(r, Regex::Star(_))) && out.len() == 2 {
            out.retain(|r| *r != Regex::Eps);
        }
        match out.len() {
            0 => Regex::Empty,
            1 => out.pop().unwrap(),
            _ => Regex::Alt(out),
        }
    }

    pub fn star(r: Regex) -> Regex {
        match r {
            Regex::Empty | Regex::Eps => Regex::Eps,
            Regex::Star(_) => r,
            Regex::Plus(inner) => Regex::Star(inner),
            other => Regex::Star(Box::new(other)),
        }
    }

    pub fn to_nfa(&self, nsym: usize) -> Nfa {
        let mut nfa = Nfa::new(nsym, 0);
        let s = nfa.add_state(false);
        let t = nfa.add_state(true);
        self.build(&mut nfa, s, t);
        nfa.initial.push(s);
        nfa
    }

    fn build(&self, nfa: &mut Nfa, s: u32, t: u32) {
        match self {
            Regex::Empty => {}
            Regex::Eps => nfa.add_eps(s, t),
            Regex::Sym(a) => nfa.add(s, *a, t),
            Regex::Concat(parts) => {
                let mut cur = s;
                for (i, p) in parts.iter().enumerate() {
                    let next = if i + 1 == parts.len() { t } else { nfa.add_state(false) };
                    p.build(nfa, cur, next);
                    cur = next;
                }
                if parts.is_empty() {
                    nfa.add_eps(s, t);
                }
            }
            Regex::Alt(parts) => {
                for p in parts {
                    p.build(nfa, s, t);
                }
            }
            Regex::Star(inner) => {
                let m = nfa.add_state(false);
                nfa.add_eps(s, m);
                nfa.add_eps(m, t);
                let back = nfa.add_state(false);
                inner.build(nfa, m, back);
                nfa.add_eps(back, m);
            }
            Regex::Plus(inner) => {
                let m = nfa.add_state(false);
                let back = nfa.add_state(false);
                nfa.add_eps(s, m);
                inner.build(nfa, m, back);
                nfa.add_eps(back, m);
                nfa.add_eps(back, t);
            }
        }
    }

    pub fn to_dfa(&self, nsym: usize) -> Dfa {
        self.to_nfa(nsym).determinize().minimize()
    }

    /// Renders with `name` for symbols, joining concatenated symbols with
    /// `sep`.
    pub fn render(&self, name: &dyn Fn(u32) -> String, sep: &str) -> String {
        let mut out = String::new();
        self.render_into(&mut out, name, sep, 0);
        out
    }

    // precedence: 0 = alternation, 1 = concatenation, 2 = postfix operand
    fn render_into(&self, out: &mut String, name: &dyn Fn(u32) -> String, sep: &str, prec: u8) {
        match self {
            Regex::Empty => out.push_str("()"),
            Regex::Eps => out.push_str("eps"),
            Regex::Sym(a) => out.push_str(&name(*a)),
            Regex::Concat(parts) => {
                let paren = prec > 1;
                if paren {
                    out.push('(');
                }
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        out.push_str(sep);
                    }
                    p.render_into(out, name, sep, 1);
                }
                if paren {
                    out.push(')');
                }
            }
            Regex::Alt(parts) => {
                let paren = prec > 0;
                if paren {
                    out.push('(');
                }
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        out.push('|');
                    }
                    p.render_into(out, name, sep, 0);
                }
                if paren {
                    out.push(')');
                }
            }
            Regex::Star(inner) | Regex::Plus(inner) => {
                inner.render_into(out, name, sep, 2);
                out.push(if matches!(self, Regex::Star(_)) { '*' } else { '+' });
            }
        }
    }
}

/// Converts an automaton to a regular expression by state elimination.
pub fn dfa_to_regex(dfa: &Dfa) -> Regex {
    let d = dfa.trim();
    if d.is_empty() {
        return Regex::Empty;
    }
    let n = d.num_states();
    // nodes 0..n are automaton states, n is the source, n+1 the sink
    let src = n;
    let snk = n + 1;
    let mut edges: BTreeMap<(usize, usize), Regex> = BTreeMap::new();
    let add = |edges: &mut BTreeMap<(usize, usize), Regex>, i: usize, j: usize, r: Regex| {
        let e = edges.remove(&(i, j)).map_or(r.clone(), |old| Regex::alt(vec![old, r]));
        edges.insert((i, j), e);
    };
    add(&mut edges, src, d.init() as usize, Regex::Eps);
    for s in 0..n {
        if d.is_final(s as u32) {
            add(&mut edges, s, snk, Regex::Eps);
        }
        for (a, t) in d.successors(s as u32) {
            add(&mut edges, s, t as usize, Regex::Sym(a));
        }
    }
    let mut alive: BTreeSet<usize> = (0..n).collect();
    while !alive.is_empty() {
        // eliminate the state with the fewest in*out connections
        let pick = *alive
            .iter()
            .min_by_key(|&&k| {
                let ins = edges.keys().filter(|&&(i, j)| j == k && i != k).count();
                let outs = edges.keys().filter(|&&(i, j)| i == k && j != k).count();
                (ins * outs, k)
            })
            .unwrap();
        alive.remove(&pick);
        let lp = edges.remove(&(pick, pick)).map(Regex::star).unwrap_or(Regex::Eps);
        let ins: Vec<(usize, Regex)> =
            edges.iter().filter(|(&(_, j), _)| j == pick).map(|(&(i, _), r)| (i, r.clone())).collect();
        let outs: Vec<(usize, Regex)> =
            edges.iter().filter(|(&(i, _), _)| i == pick).map(|(&(_, j), r)| (j, r.clone())).collect();
        edges.retain(|&(i, j), _| i != pick && j != pick);
        for (i, ri) in &ins {
            for (j, rj) in &outs {
                let r = Regex::concat(vec![ri.clone(), lp.clone(), rj.clone()]);
                add(&mut edges, *i, *j, r);
            }
        }
    }
    edges.remove(&(src, snk)).unwrap_or(Regex::Empty)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegexError {
    #[error("unexpected `{found}` at offset {offset}")]
    Unexpected { found: String, offset: usize },
    #[error("unknown letter at offset {offset}: `{rest}`")]
    UnknownLetter { offset: usize, rest: String },
    #[error("unbalanced parentheses")]
    Unbalanced,
    #[error("invalid tuple letter: {0}")]
    BadTuple(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Bar,
    Star,
    Plus,
    Eps,
    Sym(u32),
}

/// Parser hook for atoms: given the remaining input, returns the symbol and
/// the number of bytes consumed.
pub type AtomFn<'a> = dyn FnMut(&str) -> Result<(u32, usize), RegexError> + 'a;

fn tokenize(input: &str, atom: &mut AtomFn<'_>) -> Result<Vec<(Tok, usize)>, RegexError> {
    let mut toks = Vec::new();
    let mut i = 0;
    let bytes = input.as_bytes();
    while i < input.len() {
        let c = bytes[i];
        let simple = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'|' => Some(Tok::Bar),
            b'*' => Some(Tok::Star),
            b'+' => Some(Tok::Plus),
            _ => None,
        };
        if let Some(t) = simple {
            toks.push((t, i));
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() || c == b'.' {
            i += 1;
            continue;
        }
        let rest = &input[i..];
        match atom(rest) {
            Ok((sym, used)) if used > 3 || !rest.starts_with("eps") => {
                toks.push((Tok::Sym(sym), i));
                i += used;
            }
            _ if rest.starts_with("eps") => {
                toks.push((Tok::Eps, i));
                i += 3;
            }
            Ok((sym, used)) => {
                toks.push((Tok::Sym(sym), i));
                i += used;
            }
            Err(RegexError::UnknownLetter { rest, .. }) => {
                return Err(RegexError::UnknownLetter { offset: i, rest })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn alt(&mut self) -> Result<Regex, RegexError> {
        let mut parts = vec![self.concat()?];
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            parts.push(self.concat()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Regex::Alt(parts) })
    }

    fn concat(&mut self) -> Result<Regex, RegexError> {
        let mut parts = Vec::new();
        while matches!(self.peek(), Some(Tok::LParen | Tok::Eps | Tok::Sym(_))) {
            parts.push(self.postfix()?);
        }
        Ok(Regex::concat(parts))
    }

    fn postfix(&mut self) -> Result<Regex, RegexError> {
        let mut r = self.atom()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => r = Regex::Star(Box::new(r)),
                Some(Tok::Plus) => r = Regex::Plus(Box::new(r)),
                _ => return Ok(r),
            }
            self.pos += 1;
        }
    }

    fn atom(&mut self) -> Result<Regex, RegexError> {
        let (tok, off) = self.toks[self.pos].clone();
        self.pos += 1;
        match tok {
            Tok::Eps => Ok(Regex::Eps),
            Tok::Sym(a) => Ok(Regex::Sym(a)),
            Tok::LParen => {
                let r = self.alt()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(RegexError::Unbalanced);
                }
                self.pos += 1;
                Ok(r)
            }
            other => Err(RegexError::Unexpected { found: alloc::format!("{other:?}"), offset: off }),
        }
    }
}

/// Parses a regular expression whose atoms are recognised by `atom`.
pub fn parse_regex_with(input: &str, atom: &mut AtomFn<'_>) -> Result<Regex, RegexError> {
    let toks = tokenize(input, atom)?;
    let mut p = Parser { toks, pos: 0 };
    let r = p.alt()?;
    if let Some((t, off)) = p.toks.get(p.pos) {
        if *t == Tok::RParen {
            return Err(RegexError::Unbalanced);
        }
        return Err(RegexError::Unexpected { found: alloc::format!("{t:?}"), offset: *off });
    }
    Ok(r)
}

/// Longest alphabet letter that prefixes `rest`.
pub fn longest_letter(alphabet: &[String], rest: &str) -> Option<(u32, usize)> {
    alphabet
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && rest.starts_with(l.as_str()))
        .max_by_key(|(_, l)| l.len())
        .map(|(i, l)| (i as u32, l.len()))
}

/// Parses a regular expression whose letters are drawn from `alphabet`.
pub fn parse_regex(input: &str, alphabet: &[String]) -> Result<Regex, RegexError> {
    let mut atom = |rest: &str| {
        longest_letter(alphabet, rest).ok_or_else(|| RegexError::UnknownLetter {
            offset: 0,
            rest: rest.chars().take(12).collect::<String>(),
        })
    };
    parse_regex_with(input, &mut atom)
}

/// Splits a word into alphabet letters by longest match; `.` and
/// whitespace separate letters explicitly.
pub fn split_word(input: &str, alphabet: &[String]) -> Result<Vec<u32>, RegexError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < input.len() {
        let rest = &input[i..];
        if rest.starts_with('.') || rest.starts_with(' ') {
            i += 1;
            continue;
        }
        let (sym, used) = longest_letter(alphabet, rest)
            .ok_or_else(|| RegexError::UnknownLetter { offset: i, rest: rest.to_string() })?;
        out.push(sym);
        i += used;
    }
    Ok(out)
}

/// Separator needed so that concatenated letters split back uniquely.
pub fn letter_separator(alphabet: &[String]) -> &'static str {
    let clash = alphabet
        .iter()
        .any(|a| alphabet.iter().any(|b| a != b && b.starts_with(a.as_str())) || a.as_str() == "eps");
    if clash { "." } else { "" }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Vec<String> {
        vec!["a".into(), "b".into(), "c".into()]
    }

    fn dfa(re: &str) -> Dfa {
        parse_regex(re, &abc()).unwrap().to_dfa(3)
    }

    #[test]
    fn regex_membership() {
        let d = dfa("(ab)*b+");
        assert!(d.accepts(&[0, 1, 1]));
        assert!(d.accepts(&[1, 1]));
        assert!(!d.accepts(&[0, 1]));
        assert!(!d.accepts(&[]));
        let e = dfa("a|eps");
        assert!(e.accepts(&[]) && e.accepts(&[0]) && !e.accepts(&[0, 0]));
    }

    #[test]
    fn minimization_is_canonical() {
        assert_eq!(dfa("(a|b)*"), dfa("(a*b*)*"));
        assert_eq!(dfa("a*").num_states(), 1);
        assert_eq!(dfa("(ab)*bb*").num_states(), 3);
    }

    #[test]
    fn inclusion_gives_shortest_counterexample() {
        assert!(dfa("(ab)*").included_in(&dfa("(a|b)*")).is_ok());
        assert_eq!(dfa("(a|b)*").included_in(&dfa("a*")), Err(vec![1]));
    }

    #[test]
    fn prefix_and_infix_closures() {
        let p = dfa("abc").prefix_closure();
        for w in [&[][..], &[0], &[0, 1], &[0, 1, 2]] {
            assert!(p.accepts(w));
        }
        assert!(!p.accepts(&[1]));
        let i = dfa("abc").infix_closure();
        assert!(i.accepts(&[1]) && i.accepts(&[1, 2]) && !i.accepts(&[0, 2]));
    }

    #[test]
    fn state_elimination_roundtrip() {
        for re in ["(ab)*bb*", "a|b c*", "(a|eps)(bc)*", "a*b*c*", "eps"] {
            let d = dfa(re);
            let back = dfa_to_regex(&d);
            assert!(back.to_dfa(3).equivalent(&d), "{re}");
        }
    }

    #[test]
    fn state_elimination_is_readable_on_bounded_shapes() {
        let names = ["a1", "a2", "a3"];
        let alph: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let d = parse_regex("(a1a2)*a3a3*", &alph).unwrap().to_dfa(3);
        let r = dfa_to_regex(&d).render(&|s| names[s as usize].to_string(), "");
        assert_eq!(r, "(a1a2)*a3a3*");
    }

    #[test]
    fn longest_match_tokenizing() {
        let alph: Vec<String> = vec!["a1".into(), "a12".into(), "b".into()];
        assert_eq!(split_word("a12b", &alph).unwrap(), vec![1, 2]);
        assert_eq!(split_word("a1.a12", &alph).unwrap(), vec![0, 1]);
        assert_eq!(letter_separator(&alph), ".");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_regex("(ab", &abc()), Err(RegexError::Unbalanced)));
        assert!(matches!(parse_regex("ad", &abc()), Err(RegexError::UnknownLetter { .. })));
    }

    #[test]
    fn concat_helpers() {
        let d = dfa("a*").concat_word(&[1, 2]);
        assert!(d.equivalent(&dfa("a*bc")));
        let d = dfa("ab").concat_star(2);
        assert!(d.equivalent(&dfa("abc*")));
    }
}
