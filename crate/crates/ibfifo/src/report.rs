//! Verdict reports, as human text or `key=value` records.

use std::fmt::Write as _;
use std::time::Duration;

use ibfifo_core::engine::{Answer, Bound, Method, Verdict};
use ibfifo_core::model::{run_trace, FifoMachine};

use crate::formats::{print_contents, print_trace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    Records,
}

/// How answers are worded for a query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Wording {
    YesNo,
    Bounded,
    Terminates,
}

pub fn answer_label(answer: Answer, wording: Wording) -> &'static str {
    match (wording, answer) {
        (_, Answer::Unknown) => "unknown",
        (Wording::YesNo, Answer::Yes) => "yes",
        (Wording::YesNo, Answer::No) => "no",
        (Wording::Bounded, Answer::Yes) => "bounded",
        (Wording::Bounded, Answer::No) => "unbounded",
        (Wording::Terminates, Answer::Yes) => "terminating",
        (Wording::Terminates, Answer::No) => "nonterminating",
    }
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Trivial => "trivial",
        Method::Exhaustive => "bounded-exhaustive",
        Method::BoundedSearch => "bounded-search",
        Method::Coverability => "coverability",
        Method::Invariant => "linear-invariant",
        Method::SelfCovering => "self-covering",
        Method::Cycle => "cycle",
        Method::Reduction => "reduction",
    }
}

/// 0 = yes or holds, 1 = no or violated, 2 = unknown.
pub fn exit_code(answer: Answer) -> i32 {
    match answer {
        Answer::Yes => 0,
        Answer::No => 1,
        Answer::Unknown => 2,
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub query: String,
    pub answer: &'static str,
    pub method: &'static str,
    pub witness: Option<String>,
    /// Index in the witness where the repeatable part starts.
    pub loop_start: Option<usize>,
    pub end: Option<String>,
    pub bound: Option<Bound>,
    pub elapsed: Duration,
}

impl Report {
    /// Witness actions are those of `machine`, the original machine.
    pub fn new(query: &str, verdict: &Verdict, wording: Wording, machine: &FifoMachine, elapsed: Duration) -> Self {
        let mut r = Report {
            query: query.to_string(),
            answer: answer_label(verdict.answer, wording),
            method: method_name(verdict.method),
            witness: None,
            loop_start: None,
            end: None,
            bound: verdict.bound,
            elapsed,
        };
        if let Some(w) = &verdict.witness {
            r.witness = Some(print_trace(machine, &w.original));
            r.loop_start = w.split;
            if let Ok(end) = run_trace(machine, &machine.initial_config(), &w.original) {
                r.end = Some(format!("{} {}", machine.state_name(end.state), print_contents(machine, &end.contents)));
            }
        }
        r
    }

    pub fn render(&self, format: Format, with_witness: bool) -> String {
        let mut s = String::new();
        let ms = self.elapsed.as_secs_f64() * 1000.0;
        match format {
            Format::Records => {
                writeln!(s, "query={}", self.query).unwrap();
                writeln!(s, "answer={}", self.answer).unwrap();
                writeln!(s, "method={}", self.method).unwrap();
                if let Some(b) = self.bound {
                    writeln!(s, "depth={}\nstates={}", b.depth, b.states).unwrap();
                }
                if with_witness {
                    if let Some(w) = &self.witness {
                        writeln!(s, "witness={w}").unwrap();
                    }
                    if let Some(k) = self.loop_start {
                        writeln!(s, "loop_start={k}").unwrap();
                    }
                    if let Some(e) = &self.end {
                        writeln!(s, "end={e}").unwrap();
                    }
                }
                writeln!(s, "time_ms={ms:.1}").unwrap();
            }
            Format::Human => {
                writeln!(s, "{}: {} (by {})", self.query, self.answer, self.method).unwrap();
                if let Some(b) = self.bound {
                    writeln!(s, "  explored {} configurations, depth {}", b.states, b.depth).unwrap();
                }
                if with_witness {
                    if let Some(w) = &self.witness {
                        let shown = if w.is_empty() { "(empty run)" } else { w.as_str() };
                        writeln!(s, "  witness: {shown}").unwrap();
                    }
                    if let Some(k) = self.loop_start {
                        writeln!(s, "  repeatable from action {k}").unwrap();
                    }
                    if let Some(e) = &self.end {
                        writeln!(s, "  ends in: {e}").unwrap();
                    }
                }
                writeln!(s, "  time: {ms:.1} ms").unwrap();
            }
        }
        s
    }
}

/// Reads `key=value` lines back into pairs.
pub fn parse_records(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

pub fn record<'a>(records: &'a [(String, String)], key: &str) -> Option<&'a str> {
    records.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}
