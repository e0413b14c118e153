//! Token counting against a character-level oracle.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use crate::ingest::{count_tokens, validate_dimension_name};

/// The LLM-generated dimension names listed for the three example domains.
pub const EXAMPLE_DIMENSION_NAMES: [&str; 14] = [
    "parameters",
    "architecture",
    "pre-training data",
    "model size",
    "vocabulary size",
    "layer configuration",
    "optimizer",
    "R0 estimate",
    "incubation period",
    "zoonotic origin",
    "impact on species",
    "geographical range",
    "adaptation potential",
    "biodiversity impact",
];

/// Counts whitespace-to-text transitions one character at a time.
pub fn oracle_tokens(s: &str) -> usize {
    let mut count = 0;
    let mut prev_space = true;
    for c in s.chars() {
        let space = c.is_whitespace();
        if prev_space && !space {
            count += 1;
        }
        prev_space = space;
    }
    count
}

pub fn fuzz_string() -> impl Strategy<Value = String> {
    prop_oneof![
        "\\PC{0,40}",
        "[ \t\n\r\u{a0}\u{2003}\u{3000}a-z-]{0,30}",
        proptest::collection::vec(
            prop_oneof![Just(" "), Just("\t"), Just("\u{85}"), Just("x"), Just("β"), Just("-")],
            0..20
        )
        .prop_map(|parts| parts.concat()),
    ]
}

/// Checks `cases` fuzzed strings; returns how many were checked.
pub fn run(cases: u32) -> Result<u32, String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let checked = std::cell::Cell::new(0u32);
    runner
        .run(&fuzz_string(), |s| {
            let want = oracle_tokens(&s);
            prop_assert_eq!(count_tokens(&s), want, "{:?}", s);
            let check = validate_dimension_name(&s);
            prop_assert_eq!(check.tokens(), want);
            prop_assert_eq!(check.is_valid(), (1..=3).contains(&want));
            checked.set(checked.get() + 1);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(checked.get())
}
