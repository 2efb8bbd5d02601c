use proptest::prelude::*;

use ibfifo_core::corpus::{gen_random, RandomParams};
use ibfifo_core::counterize::{contents_to_valuation, pairs_of, valuation_to_contents};
use ibfifo_core::engine::{
    coverability_filter, decide_reachability, explore_fifo, linearly_unreachable, Analysis, Answer, CoverTarget,
    Coverability, EngineOptions, ExploreLimits, Sequential, Tracking,
};
use ibfifo_core::normalize::normalize_machine;

fn small() -> RandomParams {
    RandomParams { states: 3, channels: 2, max_word: 2, max_tuple: 2, transitions: 6 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn filters_never_refute_reached_configurations(seed in any::<u64>()) {
        let (m, specs) = gen_random(seed, &small());
        let bundle = normalize_machine(&m, &specs).unwrap();
        let an = Analysis::new(&bundle, EngineOptions { max_depth: 10, ..Default::default() });
        let limits = ExploreLimits { max_depth: Some(7), channel_bound: None, max_states: Some(5_000) };
        let ex = explore_fifo(&bundle.machine, Tracking::Free, limits, &Sequential);
        let mut checked = 0;
        for cfg in ex.configs() {
            prop_assert!(!linearly_unreachable(&bundle.machine, cfg));
            let v = contents_to_valuation(&cfg.contents, &an.index);
            let target = CoverTarget { states: vec![cfg.state], valuation: v.clone(), exact: true };
            prop_assert_eq!(coverability_filter(&an.counters, &[target], 50_000), Coverability::Maybe);
            for a in pairs_of(&cfg.contents, &an.index) {
                prop_assert_eq!(valuation_to_contents(&v, &a, &an.index), Some(cfg.contents.clone()));
            }
            if bundle.is_accepting(cfg.state) && checked < 4 {
                checked += 1;
                let verdict = decide_reachability(&an, &Sequential, std::slice::from_ref(cfg));
                prop_assert_ne!(verdict.answer, Answer::No);
            }
        }
    }
}
