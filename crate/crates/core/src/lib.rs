//! Byte pair encoding tokenization, following its formal semantics.
//!
//! A [`Dictionary`] is an ordered list of merge rules. Strings are tokenized
//! under SentencePiece semantics ([`tokenize_sp`], the correct tokenization)
//! or HuggingFace semantics ([`tokenize_hf`]); both agree on proper
//! dictionaries ([`check_proper`]). On top of that the crate provides static
//! dictionary analysis, incremental retokenization of concatenations and
//! edits, and a streaming tokenizer with memory bounded by the dictionary.
//!
//! ```
//! use bpetk::{tokenize_sp, Dictionary, Tokenization};
//!
//! let d = Dictionary::from_text_pairs(&[("a", "b"), ("a", "bc"), ("b", "c"), ("ab", "c")]).unwrap();
//! assert_eq!(tokenize_sp(&d, b"abcbcab"), Tokenization::from_texts(&["abc", "bc", "ab"]));
//! ```

pub mod analysis;
pub mod error;
pub mod fuzz;
pub mod generate;
pub mod incremental;
pub mod model;
pub mod semantics;
pub mod streaming;

pub use analysis::{
    analyze, chain_length_upper_bound, check_proper, improved_lookahead, longest_dependency_chain,
    sufficient_lookahead, swap_independent, train, train_bpe, useful_rules, useless_rules,
    AnalysisReport, PropernessReport, Side, TrainingRun, TrainingStep, Violation,
};
pub use error::{Error, Result};
pub use incremental::{
    concat_tokenizations, default_budget, splice_edit, splice_edit_with_budget, ConcatOutcome,
};
pub use model::{
    concat, is_refinement, trivial_tokenization, Dictionary, Rule, Symbol, Token, Tokenization,
};
pub use semantics::{
    applicable_decompositions, enumerate_base, tokenize, tokenize_hf, tokenize_hf_traced,
    tokenize_sp, tokenize_sp_traced, tokenize_traced, DerivationStep, DerivationTrace, Semantics,
};
pub use streaming::{
    empirical_lookahead, end_pad, first_token, stream_tokenize, PaddedInput, PaddedSymbol,
    StreamOptions, StreamSummary, StreamTokenizer,
};
