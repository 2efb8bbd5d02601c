use ibfifo_core::automata::split_word;
use ibfifo_core::corpus::{gen_3sat, gen_cdp, gen_two_letter, CnfFormula};
use ibfifo_core::counterize::{is_zero_restricted, CounterIndexing};
use ibfifo_core::engine::{
    decide_boundedness, decide_control_state, decide_deadlock, decide_rational_reachability, decide_reachability,
    decide_termination, ob_decide, translate_target, Analysis, Answer, EngineOptions, Method, ObQuery, Sequential,
    Verdict,
};
use ibfifo_core::model::{run_trace, CounterOp, Direction, FifoConfig, FifoMachine, FifoMachineBuilder};
use ibfifo_core::normalize::normalize_machine;
use ibfifo_core::relation::parse_relation;

fn config(m: &FifoMachine, state: &str, contents: &[&str]) -> FifoConfig {
    let contents = contents
        .iter()
        .enumerate()
        .map(|(c, w)| {
            let alph = m.alphabet(ibfifo_core::model::ChannelId(c as u32));
            let names: Vec<String> = alph.iter().map(|&l| m.letter_name(l).to_string()).collect();
            split_word(w, &names).unwrap().into_iter().map(|i| alph[i as usize]).collect()
        })
        .collect();
    FifoConfig { state: m.state_id(state).unwrap(), contents }
}

fn reach(m: &FifoMachine, specs: &[ibfifo_core::bounded::ValidatedSpec], target: &FifoConfig) -> Verdict {
    let bundle = normalize_machine(m, specs).unwrap();
    let an = Analysis::new(&bundle, EngineOptions::default());
    decide_reachability(&an, &Sequential, &translate_target(&bundle, target))
}

fn assert_replays(m: &FifoMachine, v: &Verdict, target: &FifoConfig) {
    let w = v.witness.as_ref().expect("yes answers carry witnesses");
    let end = run_trace(m, &m.initial_config(), &w.original).unwrap();
    assert_eq!(&end, target);
    assert!(is_zero_restricted(&w.counter));
}

#[test]
fn cdp_reachability_facts() {
    let (m, specs) = gen_cdp();
    for (state, contents) in [("q10", ["", "e"]), ("q00", ["b", "e"])] {
        let t = config(&m, state, &contents);
        let v = reach(&m, &specs, &t);
        assert_eq!(v.answer, Answer::Yes, "{state} {contents:?}");
        assert_replays(&m, &v, &t);
    }
    let v = reach(&m, &specs, &config(&m, "q00", &["a", ""]));
    assert_eq!(v.answer, Answer::No);
}

#[test]
fn cdp_is_unbounded_with_a_pumpable_run() {
    let (m, specs) = gen_cdp();
    let bundle = normalize_machine(&m, &specs).unwrap();
    let an = Analysis::new(&bundle, EngineOptions::default());
    let v = decide_boundedness(&an, &Sequential);
    assert_eq!(v.answer, Answer::No);
    let w = v.witness.unwrap();
    let split = w.split.unwrap();
    // prefix then loop twice: the loop stays fireable
    let mut trace = w.trace.clone();
    trace.extend_from_slice(&w.trace[split..]);
    let bm = &bundle.machine;
    run_trace(bm, &bm.initial_config(), &trace).unwrap();
    assert_eq!(decide_termination(&an, &Sequential).answer, Answer::No);
}

#[test]
fn cdp_rational_reachability() {
    let (m, specs) = gen_cdp();
    let bundle = normalize_machine(&m, &specs).unwrap();
    let an = Analysis::new(&bundle, EngineOptions::default());
    let rel = bundle.relation_preimage(&parse_relation("[b,_]([a,_])*", &m).unwrap());
    let states = bundle.states_over(m.state_id("q11").unwrap());
    let v = decide_rational_reachability(&an, &Sequential, &states, &rel);
    assert_eq!(v.answer, Answer::Yes);
    let w = v.witness.unwrap();
    let end = run_trace(&m, &m.initial_config(), &w.original).unwrap();
    assert_eq!(m.state_name(end.state), "q11");
    assert_eq!(m.word_name(&end.contents[0]).chars().next(), Some('b'));
    assert!(end.contents[1].is_empty());
}

#[test]
fn two_letter_counter_machine() {
    let (m, specs) = gen_two_letter();
    let bundle = normalize_machine(&m, &specs).unwrap();
    assert_eq!(bundle.machine.num_states(), 8);
    let an = Analysis::new(&bundle, EngineOptions::default());
    assert_eq!(an.counters.num_counters(), 2);
    let x = an.counters.counter_id("x1").unwrap();
    let y = an.counters.counter_id("x2").unwrap();
    let decs: Vec<_> =
        an.counters.transitions().iter().filter(|t| t.action.op == CounterOp::Dec(y)).collect();
    assert!(!decs.is_empty());
    for t in decs {
        assert_eq!(t.action.zero, vec![x]);
    }
    let _ = CounterIndexing::new(&bundle);
    // ab then b, receive everything
    let t = config(&m, "q1", &[""]);
    let v = reach(&m, &specs, &t);
    assert_eq!(v.answer, Answer::Yes);
    assert_replays(&m, &v, &t);
}

#[test]
fn three_sat_small_cases() {
    let sat = CnfFormula::new(2, vec![[1, 2, 2], [-1, 2, 2]]).unwrap();
    let unsat = CnfFormula::new(1, vec![[1, 1, 1], [-1, -1, -1]]).unwrap();
    for flat in [false, true] {
        for (f, expect) in [(&sat, Answer::Yes), (&unsat, Answer::No)] {
            let inst = gen_3sat(f, flat, false);
            let v = reach(&inst.machine, std::slice::from_ref(&inst.spec), &inst.target);
            assert_eq!(v.answer, expect, "flat={flat}");
            if expect == Answer::Yes {
                assert_replays(&inst.machine, &v, &inst.target);
            }
            let inst = gen_3sat(f, flat, true);
            let bundle = normalize_machine(&inst.machine, std::slice::from_ref(&inst.spec)).unwrap();
            let an = Analysis::new(&bundle, EngineOptions::default());
            let flip = if expect == Answer::Yes { Answer::No } else { Answer::Yes };
            assert_eq!(decide_boundedness(&an, &Sequential).answer, flip, "flat={flat}");
            assert_eq!(decide_termination(&an, &Sequential).answer, flip, "flat={flat}");
        }
    }
}

fn one_channel(edges: &[(&str, Direction, &str, &str)]) -> FifoMachine {
    let mut b = FifoMachineBuilder::new();
    b.add_channel("c", &["a", "b"]).unwrap();
    let q = b.state("q0");
    b.set_init(q);
    for &(p, d, l, q) in edges {
        b.add_named(p, "c", d, l, q).unwrap();
    }
    b.build().unwrap()
}

#[test]
fn termination_finds_lassos() {
    use Direction::*;
    // q0 -!a-> q1 -?a-> q0 loops forever with a bounded channel
    let m = one_channel(&[("q0", Send, "a", "q1"), ("q1", Receive, "a", "q0")]);
    let specs = [ibfifo_core::corpus::make_spec("c", &["a", "b"], &["a"], "a*", ibfifo_core::bounded::Strictness::Relaxed).unwrap()];
    let bundle = normalize_machine(&m, &specs).unwrap();
    let an = Analysis::new(&bundle, EngineOptions::default());
    assert_eq!(decide_boundedness(&an, &Sequential).answer, Answer::Yes);
    let v = decide_termination(&an, &Sequential);
    assert_eq!(v.answer, Answer::No);
    assert!(matches!(v.method, Method::Cycle | Method::SelfCovering));
}

#[test]
fn deadlock_needs_a_stuck_receive() {
    use Direction::*;
    let m = one_channel(&[("q0", Send, "a", "q1"), ("q1", Receive, "b", "q2"), ("q0", Send, "b", "q1")]);
    let spec = ibfifo_core::corpus::make_spec("c", &["a", "b"], &["a", "b"], "a|b", ibfifo_core::bounded::Strictness::Relaxed).unwrap();
    let bundle = normalize_machine(&m, std::slice::from_ref(&spec)).unwrap();
    let an = Analysis::new(&bundle, EngineOptions::default());
    // q1 with `a` in the channel is stuck; q2 is stuck trivially
    assert_eq!(decide_deadlock(&an, &Sequential).answer, Answer::Yes);
    let q2 = bundle.states_over(m.state_id("q2").unwrap());
    assert_eq!(decide_control_state(&an, &Sequential, &q2).answer, Answer::Yes);
}

#[test]
fn output_bounded_reach_with_leftover() {
    use Direction::*;
    // sends a then b, receives only a; output bound a*
    let m = one_channel(&[("q0", Send, "a", "q1"), ("q1", Send, "b", "q2"), ("q2", Receive, "a", "q3")]);
    let spec = ibfifo_core::corpus::make_spec("c", &["a", "b"], &["a"], "a*", ibfifo_core::bounded::Strictness::Relaxed).unwrap();
    let specs = [spec];
    let t = config(&m, "q3", &["b"]);
    let v = ob_decide(&m, &specs, &ObQuery::Reach(t.clone()), EngineOptions::default(), &Sequential).unwrap();
    assert_eq!(v.answer, Answer::Yes);
    let end = run_trace(&m, &m.initial_config(), &v.witness.unwrap().original).unwrap();
    assert_eq!(end, t);
    let t = config(&m, "q3", &[""]);
    let v = ob_decide(&m, &specs, &ObQuery::Reach(t), EngineOptions::default(), &Sequential).unwrap();
    assert_eq!(v.answer, Answer::No);
    let v = ob_decide(&m, &specs, &ObQuery::Bounded, EngineOptions::default(), &Sequential).unwrap();
    assert_eq!(v.answer, Answer::Yes);
}

