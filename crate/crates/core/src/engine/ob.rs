//! Output-bounded questions, answered through input-bounded machinery.
//!
//! Reachability of `(q, w)` asks for a run whose receive projections lie in
//! `L_c`; its send projections are then exactly `L_c·w_c`, which is an
//! input-bounded question. The other questions run on the wildcard normal
//! form, where letters that are never received travel as `$`.

use alloc::vec::Vec;

use super::finite::{decide_boundedness, decide_termination};
use super::reach::{decide_control_state, decide_reachability, translate_target};
use super::{Analysis, EngineOptions, Executor, Verdict};
use crate::bounded::{validate_bounded_spec, BoundedLangSpec, Strictness, ValidatedSpec};
use crate::model::{FifoConfig, FifoMachine, StateId};
use crate::normalize::{normalize_machine, normalize_machine_ob, NormalFormBundle, NormalizeError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObQuery {
    Reach(FifoConfig),
    ControlState(StateId),
    Bounded,
    Terminates,
}

/// Specs whose languages are `L_c·w_c`, with `w_c` appended to the tuple.
pub fn suffixed_specs(
    machine: &FifoMachine,
    specs: &[ValidatedSpec],
    target: &FifoConfig,
) -> Result<Vec<ValidatedSpec>, NormalizeError> {
    let mut out = Vec::new();
    for (c, v) in specs.iter().enumerate() {
        let word: Vec<u32> = target.contents[c].iter().map(|&l| machine.local_index(l) as u32).collect();
        let mut spec: BoundedLangSpec = v.spec.clone();
        if !word.is_empty() {
            spec.tuple.push(word.clone());
            spec.language = spec.language.concat_word(&word);
        }
        out.push(validate_bounded_spec(&spec, Strictness::Relaxed)?);
    }
    Ok(out)
}

/// The normal form an output-bounded query runs on.
pub fn ob_bundle(
    machine: &FifoMachine,
    specs: &[ValidatedSpec],
    query: &ObQuery,
) -> Result<NormalFormBundle, NormalizeError> {
    match query {
        ObQuery::Reach(t) => normalize_machine(machine, &suffixed_specs(machine, specs, t)?),
        _ => normalize_machine_ob(machine, specs),
    }
}

pub fn ob_decide<E: Executor>(
    machine: &FifoMachine,
    specs: &[ValidatedSpec],
    query: &ObQuery,
    options: EngineOptions,
    exec: &E,
) -> Result<Verdict, NormalizeError> {
    let bundle = ob_bundle(machine, specs, query)?;
    let an = Analysis::new(&bundle, options);
    Ok(match query {
        ObQuery::Reach(t) => decide_reachability(&an, exec, &translate_target(&bundle, t)),
        ObQuery::ControlState(q) => decide_control_state(&an, exec, &bundle.states_over(*q)),
        ObQuery::Bounded => decide_boundedness(&an, exec),
        ObQuery::Terminates => decide_termination(&an, exec),
    })
}
