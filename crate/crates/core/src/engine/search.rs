//! Level-synchronous breadth-first search with global deduplication.

use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hash;

use hashbrown::HashMap;

use super::Executor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BfsLimits {
    /// Nodes at this depth are not expanded.
    pub max_depth: Option<u32>,
    pub max_states: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BfsEnd {
    /// Every reachable node was expanded.
    Exhausted,
    /// The visitor stopped the search at this node.
    Stopped(u32),
    /// Some node at the depth limit had successors left unexplored.
    DepthLimit,
    StateLimit,
}

/// Explored part of a transition system. Node 0 is the initial node.
pub struct SearchGraph<K> {
    pub keys: Vec<K>,
    /// Parent node and transition id of the first discovery.
    pub parent: Vec<Option<(u32, u32)>>,
    pub depth: Vec<u32>,
    /// All explored edges `(transition, target)`, when recorded.
    pub edges: Option<Vec<Vec<(u32, u32)>>>,
    index: HashMap<K, u32>,
}

impl<K: Hash + Eq + Clone> SearchGraph<K> {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn id(&self, key: &K) -> Option<u32> {
        self.index.get(key).copied()
    }

    /// Transition ids from the initial node to `n`.
    pub fn path_to(&self, n: u32) -> Vec<usize> {
        self.path_between(0, n).expect("every node descends from the root")
    }

    /// Transition ids from ancestor `a` down to `n` along parent links.
    pub fn path_between(&self, a: u32, n: u32) -> Option<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = n;
        while cur != a {
            let (p, t) = self.parent[cur as usize]?;
            out.push(t as usize);
            cur = p;
        }
        out.reverse();
        Some(out)
    }

    /// Ancestors of `n`, nearest first, excluding `n`.
    pub fn ancestors(&self, n: u32) -> impl Iterator<Item = u32> + '_ {
        let mut cur = n;
        core::iter::from_fn(move || {
            let (p, _) = self.parent[cur as usize]?;
            cur = p;
            Some(p)
        })
    }
}

/// Breadth-first search from `init`. `successors` returns `(transition,
/// key)` pairs and runs through the executor; `visit` sees every newly
/// discovered node in discovery order and may stop the search.
pub fn bfs<K, E, S, V>(
    exec: &E,
    init: K,
    limits: BfsLimits,
    record_edges: bool,
    successors: S,
    mut visit: V,
) -> (SearchGraph<K>, BfsEnd)
where
    K: Hash + Eq + Clone + Send + Sync,
    E: Executor,
    S: Fn(&K) -> Vec<(u32, K)> + Sync,
    V: FnMut(&SearchGraph<K>, u32) -> Flow,
{
    let mut g = SearchGraph {
        keys: vec![init.clone()],
        parent: vec![None],
        depth: vec![0],
        edges: record_edges.then(|| vec![Vec::new()]),
        index: HashMap::new(),
    };
    g.index.insert(init, 0);
    if visit(&g, 0) == Flow::Stop {
        return (g, BfsEnd::Stopped(0));
    }
    let mut frontier: Vec<u32> = vec![0];
    let mut depth = 0u32;
    let mut truncated = false;
    while !frontier.is_empty() {
        if limits.max_depth.is_some_and(|d| depth >= d) {
            let keys = &g.keys;
            truncated = frontier.iter().any(|&n| !successors(&keys[n as usize]).is_empty());
            break;
        }
        let succs = {
            let keys = &g.keys;
            exec.map(&frontier, |&n| successors(&keys[n as usize]))
        };
        let mut next = Vec::new();
        for (&n, list) in frontier.iter().zip(succs) {
            for (t, k) in list {
                let id = match g.index.get(&k) {
                    Some(&id) => id,
                    None => {
                        if limits.max_states.is_some_and(|m| g.keys.len() >= m) {
                            return (g, BfsEnd::StateLimit);
                        }
                        let id = g.keys.len() as u32;
                        g.index.insert(k.clone(), id);
                        g.keys.push(k);
                        g.parent.push(Some((n, t)));
                        g.depth.push(depth + 1);
                        if let Some(e) = g.edges.as_mut() {
                            e.push(Vec::new());
                        }
                        next.push(id);
                        if visit(&g, id) == Flow::Stop {
                            return (g, BfsEnd::Stopped(id));
                        }
                        id
                    }
                };
                if let Some(e) = g.edges.as_mut() {
                    e[n as usize].push((t, id));
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    (g, if truncated { BfsEnd::DepthLimit } else { BfsEnd::Exhausted })
}
