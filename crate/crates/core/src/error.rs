use thiserror::Error;

use crate::analysis::PropernessReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("tokens must contain at least one symbol")]
    EmptyToken,

    #[error("duplicate rule `{pair}` at positions {first} and {second}")]
    DuplicateRule {
        pair: String,
        first: usize,
        second: usize,
    },

    #[error("input has {len} symbols, more than the enumeration limit of {max}")]
    InputTooLong { len: usize, max: usize },

    #[error("dictionary is not proper ({} violation(s))", .0.violations.len())]
    ImproperDictionary(PropernessReport),

    #[error(
        "lookahead {lookahead} is too small: token #{token_index} was emitted with \
         {emitted_len} symbols but the correct token has {expected_len}"
    )]
    LookaheadTooSmall {
        lookahead: usize,
        token_index: u64,
        emitted_len: usize,
        expected_len: usize,
    },

    #[error("edit range {start}..{end} is out of bounds for a string of {len} symbols")]
    OffsetOutOfRange {
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("training corpus is empty")]
    EmptyCorpus,

    #[error("the {side} input is not the correct tokenization of the string it spells")]
    NotCorrectTokenization { side: &'static str },
}
