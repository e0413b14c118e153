use raforge_core::ingest::{count_tokens, validate_dimension_name, NameCheck};
use raforge_core::testing::tokenizer_check::{self, oracle_tokens, EXAMPLE_DIMENSION_NAMES};

#[test]
fn example_dimension_names_are_valid() {
    for name in EXAMPLE_DIMENSION_NAMES {
        assert!(validate_dimension_name(name).is_valid(), "{name}");
        assert!((1..=3).contains(&oracle_tokens(name)));
    }
}

#[test]
fn four_words_need_curation() {
    match validate_dimension_name("number of model parameters") {
        NameCheck::Violation { tokens, .. } => assert_eq!(tokens, 4),
        other => panic!("{other:?}"),
    }
    assert!(!validate_dimension_name(" \t ").is_valid());
}

#[test]
fn oracle_handles_edges() {
    assert_eq!(oracle_tokens(""), 0);
    assert_eq!(oracle_tokens("  a  b "), 2);
    assert_eq!(oracle_tokens("a\u{3000}b"), 2);
    assert_eq!(count_tokens("pre-training data"), 2);
}

#[test]
fn ten_thousand_fuzzed_strings_match_the_oracle() {
    assert_eq!(tokenizer_check::run(10_000), Ok(10_000));
}
