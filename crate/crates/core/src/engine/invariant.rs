//! Linear unreachability test.
//!
//! Any run to `(q, w)` uses a path of the control graph from the initial
//! state to `q`, and its per-letter send/receive balance equals the letter
//! counts of `w`. Ignoring order and signs, the balances of such paths form
//! the affine space `pot(q) + span(cycle effects)`, computed from a spanning
//! tree. If the counts of `w` lie outside it, no run exists.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{Direction, FifoConfig, FifoMachine};

type Row = Vec<i128>;

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Rows in insertion order; each is zero at the pivots of earlier rows.
#[derive(Default)]
struct Span {
    rows: Vec<(usize, Row)>,
}

impl Span {
    fn reduce(&self, mut v: Row) -> Row {
        for (p, r) in &self.rows {
            if v[*p] != 0 {
                let (a, b) = (r[*p], v[*p]);
                for (x, y) in v.iter_mut().zip(r) {
                    *x = *x * a - y * b;
                }
                let g = v.iter().fold(0, |g, &x| gcd(g, x));
                if g > 1 {
                    v.iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        v
    }

    fn insert(&mut self, v: Row) {
        let v = self.reduce(v);
        if let Some(p) = v.iter().position(|&x| x != 0) {
            self.rows.push((p, v));
        }
    }

    fn contains(&self, v: Row) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }
}

fn delta(m: &FifoMachine, tid: usize) -> (usize, i128) {
    let a = &m.transitions()[tid].action;
    (a.letter.index(), if a.dir == Direction::Send { 1 } else { -1 })
}

/// `true` proves that `target` is unreachable from the initial
/// configuration (with empty channels).
pub fn linearly_unreachable(m: &FifoMachine, target: &FifoConfig) -> bool {
    let n = m.num_states();
    let ts = m.transitions();
    let mut back = vec![false; n];
    back[target.state.index()] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for t in ts {
            if back[t.dst.index()] && !back[t.src.index()] {
                back[t.src.index()] = true;
                changed = true;
            }
        }
    }
    let nl = m.num_letters();
    let mut pot: Vec<Option<Row>> = vec![None; n];
    let init = m.init();
    if !back[init.index()] {
        return true;
    }
    pot[init.index()] = Some(vec![0; nl]);
    let mut queue = VecDeque::from([init]);
    let mut trim_edges = Vec::new();
    while let Some(q) = queue.pop_front() {
        for (tid, t) in m.outgoing(q) {
            if !back[t.dst.index()] {
                continue;
            }
            trim_edges.push(tid);
            if pot[t.dst.index()].is_none() {
                let mut p = pot[q.index()].clone().expect("visited");
                let (l, d) = delta(m, tid);
                p[l] += d;
                pot[t.dst.index()] = Some(p);
                queue.push_back(t.dst);
            }
        }
    }
    let Some(end) = pot[target.state.index()].clone() else { return true };
    let mut span = Span::default();
    for tid in trim_edges {
        let t = &ts[tid];
        let (pu, pv) = (pot[t.src.index()].as_ref().expect("trim"), pot[t.dst.index()].as_ref().expect("trim"));
        let (l, d) = delta(m, tid);
        let mut v: Row = pu.iter().zip(pv).map(|(a, b)| a - b).collect();
        v[l] += d;
        span.insert(v);
    }
    let mut want: Row = vec![0; nl];
    for w in &target.contents {
        for l in w {
            want[l.index()] += 1;
        }
    }
    let diff: Row = want.iter().zip(&end).map(|(a, b)| a - b).collect();
    !span.contains(diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FifoMachineBuilder, LetterId};

    fn ping_pong() -> FifoMachine {
        // q0 -!a-> q1 -?a-> q0
        let mut b = FifoMachineBuilder::new();
        b.add_channel("c", &["a", "b"]).unwrap();
        let q0 = b.state("q0");
        b.set_init(q0);
        b.add_named("q0", "c", Direction::Send, "a", "q1").unwrap();
        b.add_named("q1", "c", Direction::Receive, "a", "q0").unwrap();
        b.build().unwrap()
    }

    #[test]
    fn balance_tracks_control_state() {
        let m = ping_pong();
        let (q0, q1) = (m.state_id("q0").unwrap(), m.state_id("q1").unwrap());
        let a = LetterId(0);
        assert!(!linearly_unreachable(&m, &FifoConfig { state: q1, contents: vec![vec![a]] }));
        assert!(!linearly_unreachable(&m, &FifoConfig { state: q0, contents: vec![vec![]] }));
        assert!(linearly_unreachable(&m, &FifoConfig { state: q0, contents: vec![vec![a]] }));
        assert!(linearly_unreachable(&m, &FifoConfig { state: q1, contents: vec![vec![]] }));
        assert!(linearly_unreachable(&m, &FifoConfig { state: q1, contents: vec![vec![a, LetterId(1)]] }));
    }
}
