//! Line-oriented text formats: machines, bounded-language files, contents
//! literals, targets, traces and counter machines.
//!
//! Machine and bounds files ignore each other's keywords, so one file may
//! carry both.

use std::fmt::Write as _;

use ibfifo_core::automata::{letter_separator, split_word};
use ibfifo_core::bounded::{validate_bounded_spec, BoundedError, BoundedLangSpec, Strictness, ValidatedSpec};
use ibfifo_core::model::{
    ChannelId, Contents, CounterConfig, CounterMachine, CounterOp, Direction, FifoAction, FifoConfig, FifoMachine,
    FifoMachineBuilder, ModelError,
};
use ibfifo_core::normalize::BoundMode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: undeclared {kind} `{name}`")]
    Undeclared { line: usize, column: usize, kind: &'static str, name: String },
    #[error("line {line}: {source}")]
    Model { line: usize, source: ModelError },
    #[error("{0}")]
    Bounded(#[from] BoundedError),
    #[error("no `init` line")]
    MissingInit,
    #[error("no bounded language for channel `{0}`")]
    MissingBounds(String),
    #[error("contents: {0}")]
    Contents(String),
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, column, message: message.into() }
}

/// Meaningful lines with their 1-based numbers; `#` starts a comment line.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

#[derive(Clone, Debug)]
pub struct MachineFile {
    pub name: String,
    pub machine: FifoMachine,
}

pub fn parse_machine(text: &str) -> Result<MachineFile, FormatError> {
    let mut name = String::from("machine");
    let mut channels: Vec<(usize, String)> = Vec::new();
    let mut alphabets: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut states: Vec<(usize, usize, String)> = Vec::new();
    let mut init: Option<(usize, usize, String)> = None;
    let mut trans: Vec<(usize, Vec<(usize, String)>)> = Vec::new();
    for (ln, line) in lines(text) {
        let toks = tokens(line);
        let (_, kw) = toks[0];
        let rest = &toks[1..];
        match kw {
            "machine" => {
                let (_, n) = rest.first().ok_or_else(|| syntax(ln, 1, "`machine` needs a name"))?;
                name = n.to_string();
            }
            "channels" => channels.extend(rest.iter().map(|(_, c)| (ln, c.to_string()))),
            "alphabet" => {
                let (col, head) = rest.first().ok_or_else(|| syntax(ln, 1, "`alphabet` needs `<channel>:`"))?;
                let c = head.strip_suffix(':').ok_or_else(|| syntax(ln, *col, "expected `<channel>:`"))?;
                alphabets.push((ln, c.to_string(), rest[1..].iter().map(|(_, l)| l.to_string()).collect()));
            }
            "states" => states.extend(rest.iter().map(|(col, s)| (ln, *col, s.to_string()))),
            "init" => {
                let (col, q) = rest.first().ok_or_else(|| syntax(ln, 1, "`init` needs a state"))?;
                init = Some((ln, *col, q.to_string()));
            }
            "trans" => {
                if rest.len() != 3 {
                    return Err(syntax(ln, 1, "expected `trans <q> <c>!<a> <q'>` or `trans <q> <c>?<a> <q'>`"));
                }
                trans.push((ln, rest.iter().map(|(c, s)| (*c, s.to_string())).collect()));
            }
            // bounds and target lines may share the file
            "channel" | "mode" | "state" | "contents" => {}
            other => return Err(syntax(ln, 1, format!("unknown keyword `{other}`"))),
        }
    }

    let mut b = FifoMachineBuilder::new();
    for (ln, col, s) in &states {
        if b.add_state(s).is_err() {
            return Err(syntax(*ln, *col, format!("duplicate state `{s}`")));
        }
    }
    for (ln, c) in &channels {
        let alph: Vec<String> =
            alphabets.iter().filter(|(_, a, _)| a == c).flat_map(|(_, _, ls)| ls.clone()).collect();
        b.add_channel(c, &alph).map_err(|source| FormatError::Model { line: *ln, source })?;
    }
    if let Some((ln, a, _)) = alphabets.iter().find(|(_, a, _)| !channels.iter().any(|(_, c)| c == a)) {
        return Err(FormatError::Undeclared { line: *ln, column: 10, kind: "channel", name: a.clone() });
    }
    let state_of = |ln: usize, col: usize, q: &str| {
        if states.iter().any(|(_, _, s)| s == q) {
            Ok(())
        } else {
            Err(FormatError::Undeclared { line: ln, column: col, kind: "state", name: q.to_string() })
        }
    };
    let (ln, col, q0) = init.ok_or(FormatError::MissingInit)?;
    state_of(ln, col, &q0)?;
    let q0 = b.state(&q0);
    b.set_init(q0);
    for (ln, t) in &trans {
        let (src, act, dst) = (&t[0], &t[1], &t[2]);
        state_of(*ln, src.0, &src.1)?;
        state_of(*ln, dst.0, &dst.1)?;
        let pos = act.1.find(['!', '?']).ok_or_else(|| syntax(*ln, act.0, "action must be `<c>!<a>` or `<c>?<a>`"))?;
        let (c, l) = (&act.1[..pos], &act.1[pos + 1..]);
        let dir = if act.1.as_bytes()[pos] == b'!' { Direction::Send } else { Direction::Receive };
        if b.channel_id(c).is_none() {
            return Err(FormatError::Undeclared { line: *ln, column: act.0, kind: "channel", name: c.to_string() });
        }
        if !alphabets.iter().any(|(_, a, ls)| a == c && ls.iter().any(|x| x == l)) {
            return Err(FormatError::Undeclared { line: *ln, column: act.0 + pos + 1, kind: "letter", name: l.to_string() });
        }
        b.add_named(&src.1, c, dir, l, &dst.1).map_err(|source| FormatError::Model { line: *ln, source })?;
    }
    let machine = b.build().map_err(|source| FormatError::Model { line: 0, source })?;
    Ok(MachineFile { name, machine })
}

pub fn print_machine(name: &str, m: &FifoMachine) -> String {
    let mut s = String::new();
    writeln!(s, "machine {name}").unwrap();
    writeln!(s, "channels {}", m.channel_names().join(" ")).unwrap();
    for (c, cname) in m.channel_names().iter().enumerate() {
        let letters: Vec<&str> = m.alphabet(ChannelId(c as u32)).iter().map(|&l| m.letter_name(l)).collect();
        writeln!(s, "alphabet {cname}: {}", letters.join(" ")).unwrap();
    }
    writeln!(s, "states {}", m.state_names().join(" ")).unwrap();
    writeln!(s, "init {}", m.state_name(m.init())).unwrap();
    for t in m.transitions() {
        writeln!(s, "trans {} {} {}", m.state_name(t.src), m.action_name(&t.action), m.state_name(t.dst)).unwrap();
    }
    s
}

#[derive(Clone, Debug)]
pub struct BoundsFile {
    pub mode: Option<BoundMode>,
    /// One spec per machine channel, in channel order.
    pub specs: Vec<ValidatedSpec>,
}

fn channel_alphabet(m: &FifoMachine, c: ChannelId) -> Vec<String> {
    m.alphabet(c).iter().map(|&l| m.letter_name(l).to_string()).collect()
}

/// Lines `channel <c>: tuple w1 w2 .. ; lang <regex>` and an optional
/// `mode ib|ob`.
pub fn parse_bounds(text: &str, m: &FifoMachine) -> Result<BoundsFile, FormatError> {
    let mut mode = None;
    let mut specs: Vec<Option<ValidatedSpec>> = vec![None; m.num_channels()];
    for (ln, line) in lines(text) {
        let toks = tokens(line);
        match toks[0].1 {
            "mode" => {
                mode = Some(match toks.get(1).map(|t| t.1) {
                    Some("ib") => BoundMode::Input,
                    Some("ob") => BoundMode::Output,
                    _ => return Err(syntax(ln, 6, "mode must be `ib` or `ob`")),
                });
            }
            "channel" => {
                let body = line["channel".len()..].trim_start();
                let colon = body.find(':').ok_or_else(|| syntax(ln, 9, "expected `channel <c>: ...`"))?;
                let cname = body[..colon].trim();
                let Some(c) = m.channel_id(cname) else {
                    return Err(FormatError::Undeclared { line: ln, column: 9, kind: "channel", name: cname.into() });
                };
                let rest = body[colon + 1..].trim();
                let semi = rest.find(';').ok_or_else(|| syntax(ln, 1, "expected `tuple ... ; lang ...`"))?;
                let tuple = rest[..semi].trim().strip_prefix("tuple").ok_or_else(|| syntax(ln, 1, "expected `tuple`"))?;
                let lang = rest[semi + 1..].trim().strip_prefix("lang").ok_or_else(|| syntax(ln, 1, "expected `lang`"))?;
                let words: Vec<&str> = tuple.split_whitespace().collect();
                let spec = BoundedLangSpec::parse(cname, &channel_alphabet(m, c), &words, lang.trim())?;
                specs[c.index()] = Some(validate_bounded_spec(&spec, Strictness::Relaxed)?);
            }
            _ => {}
        }
    }
    let specs = specs
        .into_iter()
        .enumerate()
        .map(|(c, s)| s.ok_or_else(|| FormatError::MissingBounds(m.channel_names()[c].clone())))
        .collect::<Result<_, _>>()?;
    Ok(BoundsFile { mode, specs })
}

pub fn print_bounds(mode: BoundMode, specs: &[ValidatedSpec]) -> String {
    let mut s = format!("mode {}\n", if mode == BoundMode::Input { "ib" } else { "ob" });
    for v in specs {
        let words: Vec<String> = v.spec.tuple.iter().map(|w| v.spec.word_string(w)).collect();
        writeln!(s, "channel {}: tuple {} ; lang {}", v.spec.channel, words.join(" "), v.spec.language_regex()).unwrap();
    }
    s
}

/// `c1=ab;c2=`; channels left out are empty.
pub fn parse_contents(text: &str, m: &FifoMachine) -> Result<Contents, FormatError> {
    let mut out: Contents = vec![Vec::new(); m.num_channels()];
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (c, w) = part.split_once('=').ok_or_else(|| FormatError::Contents(format!("`{part}` lacks `=`")))?;
        let cid = m.channel_id(c.trim()).ok_or_else(|| FormatError::Contents(format!("unknown channel `{c}`")))?;
        let alph = m.alphabet(cid);
        let syms = split_word(w.trim(), &channel_alphabet(m, cid)).map_err(|e| FormatError::Contents(e.to_string()))?;
        out[cid.index()] = syms.into_iter().map(|s| alph[s as usize]).collect();
    }
    Ok(out)
}

pub fn print_contents(m: &FifoMachine, w: &Contents) -> String {
    let parts: Vec<String> = w
        .iter()
        .enumerate()
        .map(|(c, word)| {
            let cid = ChannelId(c as u32);
            let sep = letter_separator(&channel_alphabet(m, cid));
            let letters: Vec<&str> = word.iter().map(|&l| m.letter_name(l)).collect();
            format!("{}={}", m.channel_name(cid), letters.join(sep))
        })
        .collect();
    parts.join(";")
}

/// Lines `state <q>` and `contents <literal>`.
pub fn parse_target(text: &str, m: &FifoMachine) -> Result<FifoConfig, FormatError> {
    let mut state = None;
    let mut contents = vec![Vec::new(); m.num_channels()];
    for (ln, line) in lines(text) {
        let toks = tokens(line);
        match toks[0].1 {
            "state" => {
                let (col, q) = *toks.get(1).ok_or_else(|| syntax(ln, 1, "`state` needs a name"))?;
                state = Some(m.state_id(q).ok_or_else(|| FormatError::Undeclared {
                    line: ln,
                    column: col,
                    kind: "state",
                    name: q.into(),
                })?);
            }
            "contents" => contents = parse_contents(line["contents".len()..].trim(), m)?,
            _ => {}
        }
    }
    let state = state.ok_or_else(|| syntax(0, 0, "target has no `state` line"))?;
    Ok(FifoConfig { state, contents })
}

pub fn print_target(m: &FifoMachine, t: &FifoConfig) -> String {
    format!("state {}\ncontents {}\n", m.state_name(t.state), print_contents(m, &t.contents))
}

/// Space-separated actions such as `c1!a c1?a c2!e`.
pub fn parse_trace(text: &str, m: &FifoMachine) -> Result<Vec<FifoAction>, FormatError> {
    let mut out = Vec::new();
    for (col, tok) in tokens(text) {
        let pos = tok.find(['!', '?']).ok_or_else(|| syntax(1, col, format!("`{tok}` is not an action")))?;
        let (c, l) = (&tok[..pos], &tok[pos + 1..]);
        let channel = m
            .channel_id(c)
            .ok_or_else(|| FormatError::Undeclared { line: 1, column: col, kind: "channel", name: c.into() })?;
        let letter = m
            .letter_id(l)
            .filter(|&x| m.letter(x).channel == channel)
            .ok_or_else(|| FormatError::Undeclared { line: 1, column: col + pos + 1, kind: "letter", name: l.into() })?;
        let dir = if tok.as_bytes()[pos] == b'!' { Direction::Send } else { Direction::Receive };
        out.push(FifoAction { dir, channel, letter });
    }
    Ok(out)
}

pub fn print_trace(m: &FifoMachine, trace: &[FifoAction]) -> String {
    trace.iter().map(|a| m.action_name(a)).collect::<Vec<_>>().join(" ")
}

/// `trans <q> inc|dec <x> [zero x,y] <q'>` lines after `counters` and
/// `states` headers.
pub fn print_counter_machine(cm: &CounterMachine) -> String {
    let mut s = String::new();
    writeln!(s, "counters {}", cm.counter_names().join(" ")).unwrap();
    writeln!(s, "states {}", cm.state_names().join(" ")).unwrap();
    writeln!(s, "init {}", cm.state_name(cm.init())).unwrap();
    for t in cm.transitions() {
        let (op, x) = match t.action.op {
            CounterOp::Inc(x) => ("inc", x),
            CounterOp::Dec(x) => ("dec", x),
        };
        write!(s, "trans {} {op} {}", cm.state_name(t.src), cm.counter_name(x)).unwrap();
        if !t.action.zero.is_empty() {
            let z: Vec<&str> = t.action.zero.iter().map(|&z| cm.counter_name(z)).collect();
            write!(s, " zero {}", z.join(",")).unwrap();
        }
        writeln!(s, " {}", cm.state_name(t.dst)).unwrap();
    }
    s
}

pub fn print_counter_target(cm: &CounterMachine, t: &CounterConfig) -> String {
    let vals: Vec<String> =
        t.valuation.iter().enumerate().map(|(i, v)| format!("{}={v}", cm.counter_names()[i])).collect();
    format!("target {} {}", cm.state_name(t.state), vals.join(" "))
}
