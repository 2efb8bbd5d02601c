//! Direct breadth-first exploration of FIFO configurations.

use alloc::vec::Vec;

use super::search::{bfs, BfsEnd, BfsLimits, Flow, SearchGraph};
use super::Executor;
use crate::automata::Dfa;
use crate::bounded::ValidatedSpec;
use crate::model::{apply_action, Direction, FifoConfig, FifoMachine};

/// Which projection, if any, must stay a prefix of the bounded languages.
#[derive(Clone, Copy, Debug)]
pub enum Tracking<'a> {
    Free,
    Input(&'a [ValidatedSpec]),
    Output(&'a [ValidatedSpec]),
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ExploreLimits {
    pub max_depth: Option<u32>,
    pub channel_bound: Option<u32>,
    pub max_states: Option<usize>,
}

pub struct FifoExploration {
    /// Nodes are configurations paired with the tracked language states.
    pub graph: SearchGraph<(FifoConfig, Vec<u32>)>,
    pub end: BfsEnd,
    languages: Vec<Dfa>,
}

impl FifoExploration {
    pub fn configs(&self) -> impl Iterator<Item = &FifoConfig> {
        self.graph.keys.iter().map(|(c, _)| c)
    }

    /// Whether the tracked projection of the run to `node` is a complete
    /// word of the bounded languages (always true without tracking).
    pub fn is_complete(&self, node: u32) -> bool {
        let (_, lang) = &self.graph.keys[node as usize];
        self.languages.iter().zip(lang).all(|(d, &s)| d.is_final(s))
    }
}

pub fn explore_fifo<E: Executor>(
    machine: &FifoMachine,
    tracking: Tracking<'_>,
    limits: ExploreLimits,
    exec: &E,
) -> FifoExploration {
    let (specs, dir) = match tracking {
        Tracking::Free => (&[][..], None),
        Tracking::Input(s) => (s, Some(Direction::Send)),
        Tracking::Output(s) => (s, Some(Direction::Receive)),
    };
    let languages: Vec<Dfa> = specs.iter().map(|v| v.spec.language.minimize()).collect();
    // local symbol of each machine letter inside its spec alphabet
    let local: Vec<Option<u32>> = (0..machine.num_letters() as u32)
        .map(|l| {
            let letter = machine.letter(crate::model::LetterId(l));
            specs.get(letter.channel.index()).and_then(|v| {
                v.spec.alphabet.iter().position(|n| *n == letter.name).map(|p| p as u32)
            })
        })
        .collect();
    let init = (machine.initial_config(), languages.iter().map(|d| d.init()).collect::<Vec<u32>>());
    let bound = limits.channel_bound;
    let succ = |(cfg, lang): &(FifoConfig, Vec<u32>)| {
        let mut out = Vec::new();
        for (tid, t) in machine.outgoing(cfg.state) {
            let mut lang2 = lang.clone();
            if Some(t.action.dir) == dir {
                let c = t.action.channel.index();
                let Some(sym) = local[t.action.letter.index()] else { continue };
                match languages[c].step(lang[c], sym) {
                    Some(s) => lang2[c] = s,
                    None => continue,
                }
            }
            let mut contents = cfg.contents.clone();
            if apply_action(&mut contents, &t.action).is_err() {
                continue;
            }
            if bound.is_some_and(|b| contents[t.action.channel.index()].len() > b as usize) {
                continue;
            }
            out.push((tid as u32, (FifoConfig { state: t.dst, contents }, lang2)));
        }
        out
    };
    let (graph, end) = bfs(
        exec,
        init,
        BfsLimits { max_depth: limits.max_depth, max_states: limits.max_states },
        false,
        succ,
        |_, _| Flow::Continue,
    );
    FifoExploration { graph, end, languages }
}
