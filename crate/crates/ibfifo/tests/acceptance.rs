//! End-to-end acceptance checks. Runs without the libtest harness so that
//! one PASS/FAIL line per criterion is always printed.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ibfifo::formats::{parse_bounds, parse_machine, print_bounds, print_machine};
use ibfifo::report::{parse_records, record};
use ibfifo_core::automata::parse_regex;
use ibfifo_core::bounded::{distinct_letterize, ValidatedSpec};
use ibfifo_core::corpus::{
    expected_contents, gen_3sat, gen_cdp, gen_minsky, gen_random, gen_random_spec, gen_two_letter, make_spec,
    minsky_contents_ok, CnfFormula, MinskyProgram, RandomParams,
};
use ibfifo_core::counterize::{contents_to_valuation, is_zero_restricted, pairs_of, valuation_to_contents, LastSent};
use ibfifo_core::engine::{
    apply_reduction, decide_boundedness, decide_control_state, decide_reachability, decide_reduced, decide_termination,
    explore_fifo, translate_target, Analysis, Answer, EngineOptions, ExploreLimits, Reduction, ReductionInput,
    Sequential, Tracking,
};
use ibfifo_core::model::{
    counter_fire, fire, CounterConfig, Direction, FifoConfig, FifoMachine, FifoMachineBuilder, LetterId,
};
use ibfifo_core::normalize::{normalize_machine, BoundMode, NormalFormBundle};
use tempfile::TempDir;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ibfifo(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ibfifo")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn timed(limit: Duration, what: &str, t0: Instant) -> Result<(), String> {
    let took = t0.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

fn analysis(bundle: &NormalFormBundle) -> Analysis<'_> {
    Analysis::new(bundle, EngineOptions::default())
}

// 1: normal form and counter machine of the two-letter example
fn normal_form_example() -> Outcome {
    let dir = TempDir::new().unwrap();
    let (m, specs) = gen_two_letter();
    let file = write(dir.path(), "two.fm", &format!("{}{}", print_machine("two", &m), print_bounds(BoundMode::Input, &specs)));
    let t0 = Instant::now();
    let (code, normal) = ibfifo(&["normalize", "--machine", &file, "--emit"]);
    let (code2, counters) = ibfifo(&["counterize", "--machine", &file, "--emit"]);
    timed(Duration::from_secs(1), "normalize and counterize", t0)?;
    ensure(code == 0 && code2 == 0, || format!("exit codes {code} {code2}"))?;
    let nm = parse_machine(&normal).map_err(|e| e.to_string())?.machine;
    let nb = parse_bounds(&normal, &nm).map_err(|e| e.to_string())?;
    let spec = &nb.specs[0].spec;
    let names: Vec<String> = ["a1", "a2", "a3"].map(String::from).to_vec();
    ensure(spec.alphabet == names, || format!("alphabet {:?}", spec.alphabet))?;
    ensure(spec.tuple == vec![vec![0, 1], vec![2]], || format!("tuple {:?}", spec.tuple))?;
    let want = parse_regex("(a1a2)*a3a3*", &names).unwrap().to_dfa(3);
    ensure(spec.language.equivalent(&want), || "language differs from (a1a2)*a3a3*".into())?;
    ensure(nm.num_states() == 8, || format!("{} control states", nm.num_states()))?;
    let lines: Vec<&str> = counters.lines().collect();
    ensure(lines.contains(&"counters x1 x2"), || "counters are not x1 x2".into())?;
    let decs: Vec<&&str> = lines.iter().filter(|l| l.contains(" dec x2 ")).collect();
    ensure(!decs.is_empty() && decs.iter().all(|l| l.contains(" dec x2 zero x1 ")), || {
        format!("dec x2 transitions: {decs:?}")
    })?;
    Ok(format!("8 states, {} guarded decrements, {:?}", decs.len(), t0.elapsed()))
}

fn replay_matches(fm: &str, recs: &[(String, String)]) -> Result<(), String> {
    let witness = record(recs, "witness").ok_or("no witness")?;
    let end = record(recs, "end").ok_or("no end")?;
    let (state, contents) = end.split_once(' ').ok_or("bad end")?;
    let (code, out) = ibfifo(&["replay", "--machine", fm, "--trace", witness, "--state", state, "--contents", contents]);
    ensure(code == 0, || format!("replay of `{witness}` failed: {out}"))
}

// 2: connection/disconnection protocol facts
fn cdp_facts() -> Outcome {
    let dir = TempDir::new().unwrap();
    let (m, specs) = gen_cdp();
    let fm = write(dir.path(), "cdp.fm", &print_machine("cdp", &m));
    let bl = write(dir.path(), "cdp.bl", &print_bounds(BoundMode::Input, &specs));
    let common = ["--machine", fm.as_str(), "--bounds", bl.as_str(), "--format", "records", "--witness"];
    let mut slowest = Duration::ZERO;
    for (state, contents, want) in [("q10", "c1=;c2=e", 0), ("q00", "c1=b;c2=e", 0), ("q00", "c1=a;c2=", 1)] {
        let t0 = Instant::now();
        let mut args = vec!["reach", "--state", state, "--contents", contents];
        args.extend(common);
        let (code, out) = ibfifo(&args);
        timed(Duration::from_secs(5), "reach", t0)?;
        slowest = slowest.max(t0.elapsed());
        ensure(code == want, || format!("reach {state} {contents}: exit {code}\n{out}"))?;
        if want == 0 {
            let recs = parse_records(&out);
            ensure(record(&recs, "end") == Some(&format!("{state} {contents}")), || format!("end {:?}", record(&recs, "end")))?;
            replay_matches(&fm, &recs)?;
        }
    }
    let t0 = Instant::now();
    let mut args = vec!["check", "bounded"];
    args.extend(common);
    let (code, out) = ibfifo(&args);
    timed(Duration::from_secs(5), "check bounded", t0)?;
    let recs = parse_records(&out);
    ensure(code == 1 && record(&recs, "answer") == Some("unbounded"), || format!("check bounded: {out}"))?;
    // pump the loop twice and replay
    let witness: Vec<&str> = record(&recs, "witness").ok_or("no witness")?.split(' ').collect();
    let k: usize = record(&recs, "loop_start").ok_or("no loop")?.parse().unwrap();
    let mut pumped = witness.clone();
    pumped.extend_from_slice(&witness[k..]);
    pumped.extend_from_slice(&witness[k..]);
    let (code, out) = ibfifo(&["replay", "--machine", &fm, "--trace", &pumped.join(" ")]);
    ensure(code == 0, || format!("pumped run `{}` fails: {out}", pumped.join(" ")))?;
    Ok(format!("3 reach queries and boundedness, slowest {slowest:?}"))
}

// 3: rational reachability on the protocol
fn rational_reach() -> Outcome {
    let dir = TempDir::new().unwrap();
    let (m, specs) = gen_cdp();
    let file = write(dir.path(), "cdp.fm", &format!("{}{}", print_machine("cdp", &m), print_bounds(BoundMode::Input, &specs)));
    let t0 = Instant::now();
    let (code, out) = ibfifo(&[
        "rational-reach", "--machine", &file, "--state", "q11", "--relation", "[b,_]([a,_])*", "--format", "records", "--witness",
    ]);
    timed(Duration::from_secs(5), "rational-reach", t0)?;
    ensure(code == 0, || format!("exit {code}: {out}"))?;
    let recs = parse_records(&out);
    replay_matches(&file, &recs)?;
    let end = record(&recs, "end").unwrap_or_default();
    ensure(end.starts_with("q11 c1=b") && end.ends_with(";c2="), || format!("ends in {end}"))?;
    Ok(format!("yes, ends in {end}, {:?}", t0.elapsed()))
}

// 4: 3SAT gadgets against brute force
fn three_sat() -> Outcome {
    // the first ten satisfiable and ten unsatisfiable seeded formulas
    let mut picked = Vec::new();
    let mut counts = [0usize; 2];
    for seed in 0..100_000u64 {
        let cnf = CnfFormula::seeded(seed, 2 + (seed as usize % 4), 8);
        let k = cnf.is_satisfiable() as usize;
        if counts[k] < 10 {
            counts[k] += 1;
            picked.push((seed, cnf));
        }
        if counts == [10, 10] {
            break;
        }
    }
    ensure(picked.len() == 20, || format!("only {} formulas found", picked.len()))?;
    let (mut sat, mut slowest) = (0, Duration::ZERO);
    for (seed, cnf) in picked {
        let truth = cnf.is_satisfiable();
        sat += truth as usize;
        let t0 = Instant::now();
        let flat = seed % 2 == 0;
        let inst = gen_3sat(&cnf, flat, false);
        ensure(inst.satisfiable == truth, || format!("seed {seed}: generator disagrees"))?;
        let bundle = normalize_machine(&inst.machine, std::slice::from_ref(&inst.spec)).map_err(|e| e.to_string())?;
        let an = analysis(&bundle);
        let v = decide_reachability(&an, &Sequential, &translate_target(&bundle, &inst.target));
        let want = if truth { Answer::Yes } else { Answer::No };
        ensure(v.answer == want, || format!("seed {seed} flat={flat}: reach {:?}, sat {truth}", v.answer))?;
        let inst = gen_3sat(&cnf, flat, true);
        let bundle = normalize_machine(&inst.machine, std::slice::from_ref(&inst.spec)).map_err(|e| e.to_string())?;
        let an = analysis(&bundle);
        let flip = if truth { Answer::No } else { Answer::Yes };
        let b = decide_boundedness(&an, &Sequential).answer;
        let t = decide_termination(&an, &Sequential).answer;
        ensure(b == flip && t == flip, || format!("seed {seed}: bounded {b:?}, terminates {t:?}, sat {truth}"))?;
        timed(Duration::from_secs(60), "3sat instance", t0)?;
        slowest = slowest.max(t0.elapsed());
    }
    Ok(format!("20 formulas ({sat} satisfiable), slowest {slowest:?}"))
}

fn fifo_reachable(m: &FifoMachine, depth: Option<u32>) -> BTreeSet<FifoConfig> {
    let limits = ExploreLimits { max_depth: depth, channel_bound: None, max_states: None };
    explore_fifo(m, Tracking::Free, limits, &Sequential).configs().cloned().collect()
}

/// Counter BFS with last-sent tracking, decoded back to FIFO contents.
/// Fails when some counter configuration does not decode.
fn counter_reconstructed(bundle: &NormalFormBundle, depth: u32) -> Result<BTreeSet<FifoConfig>, String> {
    let an = analysis(bundle);
    let cm = &an.counters;
    let bm = &bundle.machine;
    let start = (cm.initial_config(), vec![None; bm.num_channels()] as LastSent);
    let mut seen = HashSet::from([start.clone()]);
    let mut layer = vec![start];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (cfg, last) in &layer {
            for (tid, _) in cm.outgoing(cfg.state) {
                let Ok(c2) = counter_fire(cm, cfg, tid) else { continue };
                let mut l2 = last.clone();
                let a = &bm.transitions()[tid].action;
                if a.dir == Direction::Send {
                    l2[a.channel.index()] = Some(a.letter);
                }
                if seen.insert((c2.clone(), l2.clone())) {
                    next.push((c2, l2));
                }
            }
        }
        layer = next;
    }
    seen.into_iter()
        .map(|(c, a): (CounterConfig, LastSent)| {
            valuation_to_contents(&c.valuation, &a, &an.index)
                .map(|contents| FifoConfig { state: c.state, contents })
                .ok_or_else(|| format!("valuation {:?} with last {:?} does not decode", c.valuation, a))
        })
        .collect()
}

// 5: FIFO and counter semantics agree
fn oracle_equivalence() -> Outcome {
    let params = RandomParams { states: 4, channels: 2, max_word: 2, max_tuple: 3, transitions: 8 };
    let mut total = 0;
    for seed in 0..100u64 {
        let (m, specs) = gen_random(seed, &params);
        let bundle = normalize_machine(&m, &specs).map_err(|e| e.to_string())?;
        let fifo = fifo_reachable(&bundle.machine, Some(10));
        let counter = counter_reconstructed(&bundle, 10).map_err(|e| format!("seed {seed}: {e}"))?;
        if fifo != counter {
            let only_f = fifo.difference(&counter).count();
            let only_c = counter.difference(&fifo).count();
            return Err(format!("seed {seed}: {only_f} only by FIFO, {only_c} only by counters"));
        }
        total += fifo.len();
    }
    Ok(format!("100 bundles, {total} configurations, 0 discrepancies"))
}

/// One state sending and receiving every letter, so the bundle carries the
/// spec unchanged up to renaming.
fn free_bundle(spec: &ValidatedSpec) -> NormalFormBundle {
    let mut b = FifoMachineBuilder::new();
    b.add_channel(&spec.spec.channel, &spec.spec.alphabet).unwrap();
    let q = b.state("q");
    b.set_init(q);
    for l in &spec.spec.alphabet {
        b.add_named("q", &spec.spec.channel, Direction::Send, l, "q").unwrap();
        b.add_named("q", &spec.spec.channel, Direction::Receive, l, "q").unwrap();
    }
    normalize_machine(&b.build().unwrap(), std::slice::from_ref(spec)).unwrap()
}

fn valuations(n: usize, total: u64) -> Vec<Vec<u64>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in valuations(n - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Counts (words checked, valuations decoded); errors on the first failure.
fn round_trips(spec: &ValidatedSpec) -> Result<(usize, usize), String> {
    let bundle = free_bundle(spec);
    let an = analysis(&bundle);
    let idx = &an.index;
    let letters = &idx.channel_letters[0];
    let mut words = 0;
    for len in 0..=8 {
        for syms in idx.infix[0].words_of_length(len) {
            let w = vec![syms.iter().map(|&s| letters[s as usize]).collect::<Vec<LetterId>>()];
            let v = contents_to_valuation(&w, idx);
            for a in pairs_of(&w, idx) {
                words += 1;
                ensure(valuation_to_contents(&v, &a, idx).as_ref() == Some(&w), || format!("word {w:?} with {a:?}"))?;
            }
        }
    }
    let mut decoded = 0;
    let lasts: Vec<LastSent> = std::iter::once(vec![None]).chain(letters.iter().map(|&l| vec![Some(l)])).collect();
    for v in valuations(idx.num_counters(), 8) {
        for a in &lasts {
            if let Some(w) = valuation_to_contents(&v, a, idx) {
                decoded += 1;
                ensure(contents_to_valuation(&w, idx) == v, || format!("valuation {v:?} with {a:?}"))?;
            }
        }
    }
    Ok((words, decoded))
}

// 6: encode/decode round trips
fn round_trip_properties() -> Outcome {
    let mut specs = vec![make_spec("c", &["p", "q", "r", "s"], &["pqr", "s"], "(pqr)*s*", ibfifo_core::bounded::Strictness::Strict)
        .map_err(|e| e.to_string())?];
    for seed in 0..20u64 {
        let (d, _) = distinct_letterize(&gen_random_spec(seed, 2, 3), false);
        specs.push(d);
    }
    let (mut words, mut decoded) = (0, 0);
    for (i, s) in specs.iter().enumerate() {
        let (w, d) = round_trips(s).map_err(|e| format!("spec {i}: {e}"))?;
        words += w;
        decoded += d;
    }
    Ok(format!("21 languages, {words} word/last pairs, {decoded} decodable valuations, 0 failures"))
}

fn corpus() -> Vec<(String, FifoMachine, Vec<ValidatedSpec>)> {
    let mut out = Vec::new();
    let (m, s) = gen_cdp();
    out.push(("cdp".to_string(), m, s));
    let (m, s) = gen_two_letter();
    out.push(("two-letter".to_string(), m, s));
    for seed in 0..4u64 {
        let cnf = CnfFormula::seeded(seed, 3, 3);
        for (flat, unb) in [(false, false), (true, false), (false, true)] {
            let inst = gen_3sat(&cnf, flat, unb);
            out.push((format!("3sat-{seed}-{flat}-{unb}"), inst.machine, vec![inst.spec]));
        }
    }
    for seed in 0..3u64 {
        let inst = gen_minsky(&MinskyProgram::seeded(seed, 3, 4, 4));
        out.push((format!("minsky-{seed}"), inst.machine, vec![inst.shape]));
    }
    for seed in 0..20u64 {
        let (m, s) = gen_random(seed, &RandomParams::default());
        out.push((format!("random-{seed}"), m, s));
    }
    out
}

/// Every FIFO trace of length <= depth stays a prefix of the valid words.
fn fifo_traces_valid(bundle: &NormalFormBundle, depth: u32) -> Result<usize, String> {
    let bm = &bundle.machine;
    let start = (bm.initial_config(), bundle.valid.initial());
    let mut seen = HashSet::from([start.clone()]);
    let mut layer = vec![start];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (cfg, vs) in &layer {
            for (tid, t) in bm.outgoing(cfg.state) {
                let Ok(c2) = fire(bm, cfg, tid) else { continue };
                let sym = bm.local_index(t.action.letter) as u32;
                let v2 = bundle
                    .valid
                    .step(vs, t.action.channel.index(), t.action.dir, sym)
                    .ok_or_else(|| format!("{} leaves the valid prefixes", bm.action_name(&t.action)))?;
                if seen.insert((c2.clone(), v2.clone())) {
                    next.push((c2, v2));
                }
            }
        }
        layer = next;
    }
    Ok(seen.len())
}

/// Every counter trace of length <= depth is zero-restricted. The set of
/// counters tested so far determines the property, so it joins the key.
fn counter_traces_restricted(bundle: &NormalFormBundle, depth: u32) -> Result<usize, String> {
    let an = analysis(bundle);
    let cm = &an.counters;
    let start = (cm.initial_config(), BTreeSet::new());
    let mut seen = HashSet::from([start.clone()]);
    let mut layer = vec![start];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (cfg, tested) in &layer {
            for (tid, t) in cm.outgoing(cfg.state) {
                let Ok(c2) = counter_fire(cm, cfg, tid) else { continue };
                let mut t2: BTreeSet<_> = tested.clone();
                t2.extend(t.action.zero.iter().copied());
                let step = [t.action.clone()];
                ensure(is_zero_restricted(&step) && !t2.contains(&t.action.op.counter()), || {
                    format!("counter {:?} used after its zero test", t.action.op.counter())
                })?;
                if seen.insert((c2.clone(), t2.clone())) {
                    next.push((c2, t2));
                }
            }
        }
        layer = next;
    }
    Ok(seen.len())
}

// 7: trace invariants of normal forms
fn trace_invariants() -> Outcome {
    let machines = corpus();
    let (mut fifo, mut counter) = (0, 0);
    for (name, m, specs) in &machines {
        let bundle = normalize_machine(m, specs).map_err(|e| format!("{name}: {e}"))?;
        fifo += fifo_traces_valid(&bundle, 12).map_err(|e| format!("{name}: {e}"))?;
        counter += counter_traces_restricted(&bundle, 12).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!("{} bundles, {fifo} FIFO and {counter} counter nodes to depth 12", machines.len()))
}

fn flip(a: Answer) -> Answer {
    match a {
        Answer::Yes => Answer::No,
        Answer::No => Answer::Yes,
        Answer::Unknown => Answer::Unknown,
    }
}

/// A reachable configuration for even seeds, a perturbed one otherwise.
fn pick_target(m: &FifoMachine, specs: &[ValidatedSpec], seed: u64) -> FifoConfig {
    let limits = ExploreLimits { max_depth: Some(8), channel_bound: None, max_states: Some(20_000) };
    let ex = explore_fifo(m, Tracking::Input(specs), limits, &Sequential);
    let complete: Vec<&FifoConfig> =
        (0..ex.graph.len() as u32).filter(|&n| ex.is_complete(n)).map(|n| &ex.graph.keys[n as usize].0).collect();
    let init = m.initial_config();
    let mut t = match complete.len() {
        0 => init,
        n => complete[(seed as usize / 2) % n].clone(),
    };
    if seed % 2 == 1 {
        let c = (seed as usize / 2) % m.num_channels();
        let alph = m.alphabet(ibfifo_core::model::ChannelId(c as u32));
        t.contents[c].push(alph[seed as usize % alph.len()]);
    }
    t
}

// 8: reductions agree with direct procedures
fn reduction_cross_checks() -> Outcome {
    let params = RandomParams { states: 3, channels: 2, max_word: 2, max_tuple: 2, transitions: 6 };
    let mut counts: BTreeMap<&str, [usize; 2]> = BTreeMap::new();
    for seed in 0..50u64 {
        let kind = Reduction::ALL[seed as usize % 5];
        let (m, specs) = gen_random(1000 + seed, &params);
        let bundle = normalize_machine(&m, &specs).map_err(|e| e.to_string())?;
        let an = analysis(&bundle);
        let target = pick_target(&m, &specs, seed);
        let state = ibfifo_core::model::StateId((seed % m.num_states() as u64) as u32);
        let direct = match kind {
            Reduction::ReachToCsr | Reduction::ReachToDeadlock => {
                decide_reachability(&an, &Sequential, &translate_target(&bundle, &target)).answer
            }
            Reduction::CsrToReach => decide_control_state(&an, &Sequential, &bundle.states_over(state)).answer,
            Reduction::BoundedToReach => flip(decide_boundedness(&an, &Sequential).answer),
            Reduction::TermToReach => flip(decide_termination(&an, &Sequential).answer),
        };
        let input = ReductionInput { machine: &m, specs: &specs, target: Some(&target), state: Some(state) };
        let reduced = apply_reduction(kind, input).map_err(|e| format!("seed {seed}: {e}"))?;
        let via = decide_reduced(&reduced, EngineOptions::default(), &Sequential).map_err(|e| e.to_string())?.answer;
        ensure(direct != Answer::Unknown && via != Answer::Unknown, || {
            format!("seed {seed} {}: inconclusive (direct {direct:?}, reduced {via:?})", kind.name())
        })?;
        ensure(direct == via, || format!("seed {seed} {}: direct {direct:?}, reduced {via:?}", kind.name()))?;
        counts.entry(kind.name()).or_default()[(direct == Answer::Yes) as usize] += 1;
    }
    let summary: Vec<String> = counts.iter().map(|(k, [no, yes])| format!("{k} {yes}y/{no}n")).collect();
    Ok(format!("50 instances, 0 discrepancies: {}", summary.join(", ")))
}

// 9: Minsky simulation against the interpreter
fn minsky_simulation() -> Outcome {
    let mut configs = 0;
    for seed in 0..10u64 {
        let prog = MinskyProgram::seeded(seed, 4, 5, 4);
        let reach = prog.reachable(4).ok_or_else(|| format!("seed {seed}: counters exceed 4"))?;
        let inst = gen_minsky(&prog);
        let m = &inst.machine;
        // the simulation is unrestricted; counters capped at 4 keep it finite
        let all = fifo_reachable(m, None);
        for q in prog.states() {
            let want = reach.iter().any(|(p, _)| *p == q);
            let got = all.iter().any(|c| m.state_name(c.state) == q);
            ensure(got == want, || format!("seed {seed}: state {q} reachable by FIFO {got}, by interpreter {want}"))?;
        }
        configs += all.len();
        let mut at_program: BTreeMap<String, BTreeSet<Vec<LetterId>>> = BTreeMap::new();
        let program_states: BTreeSet<String> = prog.states().into_iter().collect();
        for c in &all {
            ensure(minsky_contents_ok(&inst, &c.contents[0]), || {
                format!("seed {seed}: contents {} out of shape", m.word_name(&c.contents[0]))
            })?;
            let name = m.state_name(c.state);
            if program_states.contains(name) {
                at_program.entry(name.to_string()).or_default().insert(c.contents[0].clone());
            }
        }
        ensure(at_program == expected_contents(&inst, &reach), || format!("seed {seed}: program-state contents differ"))?;
    }
    Ok(format!("10 programs, {configs} configurations, all in shape"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("normal form of the two-letter example", normal_form_example),
        ("protocol reachability and boundedness", cdp_facts),
        ("rational reachability", rational_reach),
        ("3SAT ground truth", three_sat),
        ("FIFO/counter oracle equivalence", oracle_equivalence),
        ("encode/decode round trips", round_trip_properties),
        ("trace invariants", trace_invariants),
        ("reduction cross-checks", reduction_cross_checks),
        ("Minsky simulation", minsky_simulation),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = t0.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail}) [{took:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{took:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
