//! Ground-truth machines: the connection protocol, the two-letter running
//! example, 3SAT gadgets, Minsky simulations and seeded random machines.

mod minsky;
mod random;
mod sat;

pub use minsky::{
    encode_counters, expected_contents, gen_minsky, minsky_contents_ok, MinskyError, MinskyInstance, MinskyProgram,
    MinskyRule,
};
pub use random::{gen_random, gen_random_spec, random_spec, RandomParams};
pub use sat::{gen_3sat, CnfError, CnfFormula, SatInstance};

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bounded::{validate_bounded_spec, BoundedError, BoundedLangSpec, Strictness, ValidatedSpec};
use crate::model::{Direction, FifoMachine, FifoMachineBuilder};

/// Parses and validates a spec over `alphabet`.
pub fn make_spec(
    channel: &str,
    alphabet: &[&str],
    tuple: &[&str],
    regex: &str,
    strictness: Strictness,
) -> Result<ValidatedSpec, BoundedError> {
    let alph: Vec<String> = alphabet.iter().map(|s| s.to_string()).collect();
    let spec = BoundedLangSpec::parse(channel, &alph, tuple, regex)?;
    validate_bounded_spec(&spec, strictness)
}

/// The connection/disconnection protocol: the product of a client
/// (0 -c1!a-> 1, 1 -c1!b-> 0, 1 -c2?e-> 0) and a server
/// (0 -c1?a-> 1, 1 -c1?b-> 0, 1 -c2!e-> 0). States are named `q{client}{server}`.
pub fn gen_cdp() -> (FifoMachine, Vec<ValidatedSpec>) {
    use Direction::*;
    let client = [(0, "c1", Send, "a", 1), (1, "c1", Send, "b", 0), (1, "c2", Receive, "e", 0)];
    let server = [(0, "c1", Receive, "a", 1), (1, "c1", Receive, "b", 0), (1, "c2", Send, "e", 0)];
    let mut b = FifoMachineBuilder::new();
    for s in ["q00", "q01", "q10", "q11"] {
        b.add_state(s).expect("fresh");
    }
    b.add_channel("c1", &["a", "b"]).expect("fresh");
    b.add_channel("c2", &["e"]).expect("fresh");
    let q0 = b.state("q00");
    b.set_init(q0);
    let name = |c: u32, s: u32| alloc::format!("q{c}{s}");
    for &(p, ch, dir, l, p2) in &client {
        for s in 0..2 {
            b.add_named(&name(p, s), ch, dir, l, &name(p2, s)).expect("declared");
        }
    }
    for &(p, ch, dir, l, p2) in &server {
        for c in 0..2 {
            b.add_named(&name(c, p), ch, dir, l, &name(c, p2)).expect("declared");
        }
    }
    let m = b.build().expect("well formed");
    let specs = alloc::vec![
        make_spec("c1", &["a", "b"], &["ab", "a", "ab"], "(ab)*(a|eps)(ab)*", Strictness::Strict).expect("valid"),
        make_spec("c2", &["e"], &["e"], "e*", Strictness::Strict).expect("valid"),
    ];
    (m, specs)
}

/// One channel over {a, b}: at q0 loops !a, !b and ?a, ?b leads to q1
/// which loops ?b. Bounded by `(ab)*bb*` over `(ab, b)`.
pub fn gen_two_letter() -> (FifoMachine, Vec<ValidatedSpec>) {
    use Direction::*;
    let mut b = FifoMachineBuilder::new();
    b.add_channel("c", &["a", "b"]).expect("fresh");
    let q0 = b.state("q0");
    b.set_init(q0);
    b.add_named("q0", "c", Send, "a", "q0").expect("declared");
    b.add_named("q0", "c", Send, "b", "q0").expect("declared");
    b.add_named("q0", "c", Receive, "a", "q0").expect("declared");
    b.add_named("q0", "c", Receive, "b", "q1").expect("declared");
    b.add_named("q1", "c", Receive, "b", "q1").expect("declared");
    let m = b.build().expect("well formed");
    let spec = make_spec("c", &["a", "b"], &["ab", "b"], "(ab)*bb*", Strictness::Strict).expect("valid");
    (m, alloc::vec![spec])
}
