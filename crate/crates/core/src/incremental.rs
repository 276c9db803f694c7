//! Incremental retokenization: gluing two correct tokenizations together and
//! applying local edits without retokenizing the whole string.
//!
//! Gluing retokenizes a window made of the last tokens of the left side and
//! the first tokens of the right side. Once the window's first token equals
//! the left token it started from (or the window reaches the start) and its
//! last token equals the right token it ended on (or the window reaches the
//! end), everything outside the window is known to be unchanged. Otherwise
//! the window widens by one token on each mismatched side.

use crate::analysis::{check_proper, longest_dependency_chain};
use crate::error::{Error, Result};
use crate::model::{Dictionary, Symbol, Tokenization};
use crate::semantics::{tokenize_sp, Engine, Mode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcatOutcome<S: Symbol> {
    pub result: Tokenization<S>,
    /// Tokens of the left input that were replaced.
    pub left_rollback: usize,
    /// Tokens of the right input that entered the retokenized window.
    pub right_rollback: usize,
    /// The widening budget ran out and the whole string was retokenized.
    pub fell_back: bool,
}

/// Result of gluing two segmentations laid out back to back in one buffer:
/// `left[..keep_left] ++ middle ++ right[skip_right..]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Splice {
    pub keep_left: usize,
    pub middle: Vec<usize>,
    pub skip_right: usize,
    pub fell_back: bool,
}

impl Splice {
    fn left_rollback(&self, n: usize) -> usize {
        if self.fell_back {
            n
        } else {
            n - self.keep_left - 1
        }
    }
}

/// Glues segmentation `left` of `symbols[..π(left)]` to segmentation `right`
/// of the remaining symbols. Both must be correct tokenizations.
pub(crate) fn glue<S: Symbol>(
    dict: &Dictionary<S>,
    engine: &mut Engine,
    symbols: &[S],
    left: &[usize],
    right: &[usize],
    budget: usize,
    work: &mut u64,
) -> Splice {
    let (n, m) = (left.len(), right.len());
    if n == 0 || m == 0 {
        return Splice {
            keep_left: n,
            middle: Vec::new(),
            skip_right: 0,
            fell_back: false,
        };
    }
    let left_total = symbols.len() - right.iter().sum::<usize>();
    let (mut i, mut j) = (n - 1, 0);
    let mut start = left_total - left[i];
    let mut end = left_total + right[0];
    let (mut left_widenings, mut right_widenings) = (0, 0);
    let mut middle = Vec::new();
    loop {
        middle.clear();
        engine.run(dict, &symbols[start..end], Mode::Sp, None, &mut middle);
        *work += (end - start) as u64;
        let first_fixed = i == 0 || middle[0] == left[i];
        let last_fixed = j == m - 1 || middle[middle.len() - 1] == right[j];
        if first_fixed && last_fixed {
            return Splice {
                keep_left: i,
                middle,
                skip_right: j + 1,
                fell_back: false,
            };
        }
        if !first_fixed {
            i -= 1;
            start -= left[i];
            left_widenings += 1;
        }
        if !last_fixed {
            j += 1;
            end += right[j];
            right_widenings += 1;
        }
        if left_widenings > budget || right_widenings > budget {
            middle.clear();
            engine.run(dict, symbols, Mode::Sp, None, &mut middle);
            *work += symbols.len() as u64;
            return Splice {
                keep_left: 0,
                middle,
                skip_right: m,
                fell_back: true,
            };
        }
    }
}

/// Default number of widenings per side before falling back to a full
/// retokenization: twice the chain length bound for proper dictionaries,
/// twice the rule count otherwise.
pub fn default_budget<S: Symbol>(dict: &Dictionary<S>) -> usize {
    if check_proper(dict).proper {
        2 * longest_dependency_chain(dict).len()
    } else {
        2 * dict.size()
    }
}

fn check_correct<S: Symbol>(
    dict: &Dictionary<S>,
    t: &Tokenization<S>,
    side: &'static str,
) -> Result<()> {
    if cfg!(debug_assertions) && tokenize_sp(dict, &t.concat()) != *t {
        return Err(Error::NotCorrectTokenization { side });
    }
    Ok(())
}

/// Correct tokenization of `π(left) π(right)`, given the correct
/// tokenizations of both halves.
///
/// In debug builds the inputs are checked and a violated contract is
/// reported as [`Error::NotCorrectTokenization`].
pub fn concat_tokenizations<S: Symbol>(
    dict: &Dictionary<S>,
    left: &Tokenization<S>,
    right: &Tokenization<S>,
    budget: usize,
) -> Result<ConcatOutcome<S>> {
    check_correct(dict, left, "left")?;
    check_correct(dict, right, "right")?;
    let mut symbols = left.concat();
    symbols.extend(right.concat());
    let (l, r) = (left.lengths(), right.lengths());
    let splice = glue(dict, &mut Engine::new(), &symbols, &l, &r, budget, &mut 0);
    let mut lengths = l[..splice.keep_left].to_vec();
    lengths.extend_from_slice(&splice.middle);
    lengths.extend_from_slice(&r[splice.skip_right..]);
    Ok(ConcatOutcome {
        result: Tokenization::from_lengths(&symbols, &lengths),
        left_rollback: if l.is_empty() || r.is_empty() {
            0
        } else {
            splice.left_rollback(l.len())
        },
        right_rollback: if l.is_empty() { 0 } else { splice.skip_right },
        fell_back: splice.fell_back,
    })
}

/// Correct tokenization of the string spelled by `original` after replacing
/// symbols `edit_start..edit_end` with `replacement`.
///
/// Tokens ending strictly before the edit and starting strictly after it are
/// reused; only the middle is tokenized from scratch and then glued to them.
pub fn splice_edit<S: Symbol>(
    dict: &Dictionary<S>,
    original: &Tokenization<S>,
    edit_start: usize,
    edit_end: usize,
    replacement: &[S],
) -> Result<Tokenization<S>> {
    splice_edit_with_budget(
        dict,
        original,
        edit_start,
        edit_end,
        replacement,
        default_budget(dict),
    )
}

pub fn splice_edit_with_budget<S: Symbol>(
    dict: &Dictionary<S>,
    original: &Tokenization<S>,
    edit_start: usize,
    edit_end: usize,
    replacement: &[S],
    budget: usize,
) -> Result<Tokenization<S>> {
    let len = original.symbol_count();
    if edit_start > edit_end || edit_end > len {
        return Err(Error::OffsetOutOfRange {
            start: edit_start,
            end: edit_end,
            len,
        });
    }
    check_correct(dict, original, "original")?;
    let spans = original.spans();
    let prefix = spans.iter().take_while(|s| s.end < edit_start).count();
    let suffix_from = spans
        .iter()
        .position(|s| s.start > edit_end)
        .unwrap_or(spans.len())
        .max(prefix);
    let symbols = original.concat();
    let middle_start = spans.get(prefix).map_or(len, |s| s.start);
    let middle_end = spans.get(suffix_from).map_or(len, |s| s.start);
    let mut middle = symbols[middle_start.min(edit_start)..edit_start].to_vec();
    middle.extend_from_slice(replacement);
    middle.extend_from_slice(&symbols[edit_end..middle_end.max(edit_end)]);

    let head = original.slice(0..prefix);
    let tail = original.slice(suffix_from..original.len());
    let glued = concat_tokenizations(dict, &head, &tokenize_sp(dict, &middle), budget)?;
    Ok(concat_tokenizations(dict, &glued.result, &tail, budget)?.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::train_bpe;
    use crate::semantics::tokenize_sp;
    use proptest::prelude::*;

    fn example2() -> Dictionary<u8> {
        Dictionary::from_text_pairs(&[("c", "ab"), ("ab", "c"), ("a", "b")]).unwrap()
    }

    fn tk(texts: &[&str]) -> Tokenization<u8> {
        Tokenization::from_texts(texts)
    }

    #[test]
    fn glues_two_halves() {
        let d = example2();
        let half = tokenize_sp(&d, b"abcabc");
        assert_eq!(half, tk(&["abc", "abc"]));
        let out = concat_tokenizations(&d, &half, &half, default_budget(&d)).unwrap();
        assert_eq!(out.result, tk(&["abc", "abc", "abc", "abc"]));
        assert!(!out.fell_back);
        assert_eq!((out.left_rollback, out.right_rollback), (0, 1));
    }

    #[test]
    fn trivial_sides() {
        let d = example2();
        let t = tokenize_sp(&d, b"abcab");
        let out = concat_tokenizations(&d, &Tokenization::empty(), &t, 0).unwrap();
        assert_eq!(out.result, t);
        assert_eq!(
            (out.left_rollback, out.right_rollback, out.fell_back),
            (0, 0, false)
        );
        let out = concat_tokenizations(&d, &t, &Tokenization::empty(), 0).unwrap();
        assert_eq!(out.result, t);
    }

    #[test]
    fn ripple_through_the_whole_right_side() {
        let d = example2();
        let left = tokenize_sp(&d, b"c");
        let right = tokenize_sp(&d, b"abcabcabcabc");
        let out = concat_tokenizations(&d, &left, &right, default_budget(&d)).unwrap();
        assert_eq!(out.result, tk(&["cab", "cab", "cab", "cab", "c"]));
        assert_eq!(out.result, tokenize_sp(&d, b"cabcabcabcabc"));
        assert_eq!(out.right_rollback, 4);
        assert_eq!(out.left_rollback, 0);
        assert!(!out.fell_back);
    }

    #[test]
    fn exhausted_budget_falls_back() {
        let d = example2();
        let left = tokenize_sp(&d, b"c");
        let right = tokenize_sp(&d, b"abcabcabcabc");
        let out = concat_tokenizations(&d, &left, &right, 1).unwrap();
        assert!(out.fell_back);
        assert_eq!(out.result, tokenize_sp(&d, b"cabcabcabcabc"));
        assert_eq!((out.left_rollback, out.right_rollback), (1, 4));
    }

    #[cfg(debug_assertions)]
    #[test]
    fn incorrect_inputs_are_rejected_in_debug_builds() {
        let d = example2();
        let wrong = tk(&["ab", "c"]);
        assert_eq!(
            concat_tokenizations(&d, &wrong, &tk(&["a"]), 4),
            Err(Error::NotCorrectTokenization { side: "left" })
        );
    }

    #[test]
    fn deleting_the_first_symbol() {
        let d = example2();
        let original = tokenize_sp(&d, b"abcabcabcabc");
        let edited = splice_edit(&d, &original, 0, 1, b"").unwrap();
        assert_eq!(edited, tk(&["b", "cab", "cab", "cab", "c"]));
    }

    #[test]
    fn identity_edit() {
        let d = example2();
        let original = tokenize_sp(&d, b"abcabcabcabc");
        assert_eq!(splice_edit(&d, &original, 4, 7, b"bca").unwrap(), original);
        assert_eq!(splice_edit(&d, &original, 12, 12, b"").unwrap(), original);
    }

    #[test]
    fn edit_offsets_are_checked() {
        let d = example2();
        let original = tokenize_sp(&d, b"abc");
        assert_eq!(
            splice_edit(&d, &original, 2, 4, b"x"),
            Err(Error::OffsetOutOfRange {
                start: 2,
                end: 4,
                len: 3
            })
        );
        assert!(splice_edit(&d, &original, 2, 1, b"x").is_err());
    }

    proptest! {
        #[test]
        fn glue_matches_full_retokenization(
            corpus in prop::collection::vec(b'a'..=b'c', 20..120),
            w in prop::collection::vec(b'a'..=b'c', 0..80),
            cut in 0usize..80,
            budget in 0usize..6,
        ) {
            let d = train_bpe(&[corpus], 12).unwrap();
            let full = tokenize_sp(&d, &w);
            let cut = cut.min(full.len());
            let left = tokenize_sp(&d, &full.slice(0..cut).concat());
            let right = tokenize_sp(&d, &full.slice(cut..full.len()).concat());
            let out = concat_tokenizations(&d, &left, &right, budget).unwrap();
            prop_assert_eq!(&out.result, &full);
            if !out.fell_back {
                prop_assert!(out.left_rollback <= left.len());
                prop_assert!(out.right_rollback <= right.len());
            }
        }

        #[test]
        fn glue_at_any_symbol_offset(
            w in prop::collection::vec(b'a'..=b'c', 0..60),
            cut in 0usize..60,
        ) {
            // arbitrary, possibly improper, dictionary: gluing is semantics-general
            let d = Dictionary::from_text_pairs(&[("c", "ab"), ("ab", "c"), ("a", "b"), ("b", "b"), ("bb", "a")]).unwrap();
            let cut = cut.min(w.len());
            let left = tokenize_sp(&d, &w[..cut]);
            let right = tokenize_sp(&d, &w[cut..]);
            let out = concat_tokenizations(&d, &left, &right, usize::MAX).unwrap();
            prop_assert_eq!(out.result, tokenize_sp(&d, &w));
        }

        #[test]
        fn splice_matches_full_retokenization(
            corpus in prop::collection::vec(b'a'..=b'c', 20..120),
            w in prop::collection::vec(b'a'..=b'c', 0..80),
            a in 0usize..80,
            b in 0usize..80,
            replacement in prop::collection::vec(b'a'..=b'd', 0..6),
        ) {
            let d = train_bpe(&[corpus], 12).unwrap();
            let (a, b) = (a.min(w.len()), b.min(w.len()));
            let (a, b) = (a.min(b), a.max(b));
            let original = tokenize_sp(&d, &w);
            let mut edited = w[..a].to_vec();
            edited.extend_from_slice(&replacement);
            edited.extend_from_slice(&w[b..]);
            prop_assert_eq!(splice_edit(&d, &original, a, b, &replacement).unwrap(), tokenize_sp(&d, &edited));
        }
    }
}
