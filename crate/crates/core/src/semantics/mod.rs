//! The tokenization semantics of a merge dictionary.
//!
//! * [`enumerate_base`]: every terminal tokenization reachable from the
//!   trivial tokenization by merges in any order (the nondeterministic base).
//! * [`tokenize_sp`]: SentencePiece semantics. At every step apply the highest
//!   priority applicable rule at its leftmost occurrence.
//! * [`tokenize_hf`]: HuggingFace semantics. Pick the highest priority
//!   applicable rule, apply it left to right until it no longer applies, then
//!   pick again.
//!
//! Both deterministic tokenizers run on a heap-driven engine; the naive
//! transcriptions in [`reference`] serve as differential oracles.

mod engine;
pub mod reference;

use std::collections::BTreeSet;

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{trivial_tokenization, Dictionary, Symbol, Token, Tokenization};

use engine::Recorder;
pub(crate) use engine::{Engine, Mode};

/// Default symbol limit for [`enumerate_base`].
pub const DEFAULT_ENUMERATION_LIMIT: usize = 12;

/// Hard cap on [`enumerate_base`] inputs; states are stored as boundary bitmasks.
pub const MAX_ENUMERATION_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semantics {
    /// SentencePiece.
    Sp,
    /// HuggingFace.
    Hf,
}

impl Semantics {
    pub const ALL: [Semantics; 2] = [Semantics::Sp, Semantics::Hf];

    fn mode(self) -> Mode {
        match self {
            Semantics::Sp => Mode::Sp,
            Semantics::Hf => Mode::Hf,
        }
    }
}

/// One merge: rule `rule_index` joined the tokens at `position` and
/// `position + 1` of a tokenization that had `before_length` tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DerivationStep {
    pub rule_index: usize,
    pub position: usize,
    pub before_length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTrace<S: Symbol> {
    pub steps: Vec<DerivationStep>,
    pub result: Tokenization<S>,
    /// For HuggingFace traces, the index in `steps` where each phase (one
    /// rule exhausted left to right) begins. `None` for SentencePiece.
    pub phase_starts: Option<Vec<usize>>,
}

impl<S: Symbol> DerivationTrace<S> {
    /// Replays the steps from the trivial tokenization of `w`.
    ///
    /// Returns `None` if some step does not name an applicable merge.
    pub fn replay(&self, dict: &Dictionary<S>, w: &[S]) -> Option<Tokenization<S>> {
        let mut tokens = trivial_tokenization(w).into_tokens();
        for step in &self.steps {
            if step.before_length != tokens.len() || step.position + 1 >= tokens.len() {
                return None;
            }
            let (l, r) = (&tokens[step.position], &tokens[step.position + 1]);
            if dict.rule_for(l.symbols(), r.symbols()) != Some(step.rule_index) {
                return None;
            }
            tokens = apply_merge(&Tokenization::new(tokens), step.position).into_tokens();
        }
        Some(Tokenization::new(tokens))
    }

    /// Whether rule `rule_index` fired anywhere in the derivation.
    pub fn uses_rule(&self, rule_index: usize) -> bool {
        self.steps.iter().any(|s| s.rule_index == rule_index)
    }
}

/// Merges the tokens at `position` and `position + 1`.
pub fn apply_merge<S: Symbol>(t: &Tokenization<S>, position: usize) -> Tokenization<S> {
    let tokens = t.tokens();
    let mut joined = tokens[position].symbols().to_vec();
    joined.extend_from_slice(tokens[position + 1].symbols());
    let mut out = Vec::with_capacity(tokens.len() - 1);
    out.extend_from_slice(&tokens[..position]);
    out.push(Token::new(&joined).expect("non-empty"));
    out.extend_from_slice(&tokens[position + 2..]);
    Tokenization::new(out)
}

/// Every `(rule_index, position)` merge that applies to `t`, sorted.
pub fn applicable_decompositions<S: Symbol>(
    dict: &Dictionary<S>,
    t: &Tokenization<S>,
) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = t
        .tokens()
        .windows(2)
        .enumerate()
        .filter_map(|(p, pair)| {
            dict.rule_for(pair[0].symbols(), pair[1].symbols())
                .map(|r| (r, p))
        })
        .collect();
    out.sort_unstable();
    out
}

/// True iff no rule applies to `t`.
pub fn is_terminal<S: Symbol>(dict: &Dictionary<S>, t: &Tokenization<S>) -> bool {
    t.tokens().windows(2).all(|pair| {
        dict.rule_for(pair[0].symbols(), pair[1].symbols())
            .is_none()
    })
}

/// Token lengths of the tokenization of `w` under `semantics`.
pub fn segment<S: Symbol>(dict: &Dictionary<S>, w: &[S], semantics: Semantics) -> Vec<usize> {
    let mut out = Vec::new();
    Engine::new().run(dict, w, semantics.mode(), None, &mut out);
    out
}

pub fn tokenize<S: Symbol>(dict: &Dictionary<S>, w: &[S], semantics: Semantics) -> Tokenization<S> {
    Tokenization::from_lengths(w, &segment(dict, w, semantics))
}

pub fn tokenize_traced<S: Symbol>(
    dict: &Dictionary<S>,
    w: &[S],
    semantics: Semantics,
) -> DerivationTrace<S> {
    let mut recorder = Recorder::default();
    let mut lengths = Vec::new();
    Engine::new().run(dict, w, semantics.mode(), Some(&mut recorder), &mut lengths);
    DerivationTrace {
        steps: recorder.steps,
        result: Tokenization::from_lengths(w, &lengths),
        phase_starts: match semantics {
            Semantics::Sp => None,
            Semantics::Hf => Some(recorder.phase_starts),
        },
    }
}

/// The correct (SentencePiece) tokenization of `w`.
pub fn tokenize_sp<S: Symbol>(dict: &Dictionary<S>, w: &[S]) -> Tokenization<S> {
    tokenize(dict, w, Semantics::Sp)
}

pub fn tokenize_sp_traced<S: Symbol>(dict: &Dictionary<S>, w: &[S]) -> DerivationTrace<S> {
    tokenize_traced(dict, w, Semantics::Sp)
}

/// The HuggingFace tokenization of `w`.
pub fn tokenize_hf<S: Symbol>(dict: &Dictionary<S>, w: &[S]) -> Tokenization<S> {
    tokenize(dict, w, Semantics::Hf)
}

pub fn tokenize_hf_traced<S: Symbol>(dict: &Dictionary<S>, w: &[S]) -> DerivationTrace<S> {
    tokenize_traced(dict, w, Semantics::Hf)
}

/// All base tokenizations of `w`: terminal tokenizations reachable by merges
/// applied in any order.
///
/// Exhaustive search; `w` may have at most `max_len` symbols (and never more
/// than [`MAX_ENUMERATION_LIMIT`]).
pub fn enumerate_base<S: Symbol>(
    dict: &Dictionary<S>,
    w: &[S],
    max_len: usize,
) -> Result<BTreeSet<Tokenization<S>>> {
    let max = max_len.min(MAX_ENUMERATION_LIMIT);
    if w.len() > max {
        return Err(Error::InputTooLong { len: w.len(), max });
    }
    let mut terminals = BTreeSet::new();
    if w.len() <= 1 {
        terminals.insert(trivial_tokenization(w));
        return Ok(terminals);
    }

    // bit b set: a token boundary sits between symbols b and b + 1
    let start: u64 = (1u64 << (w.len() - 1)) - 1;
    let mut seen = FxHashSet::default();
    let mut stack = vec![start];
    seen.insert(start);
    while let Some(mask) = stack.pop() {
        let cuts: Vec<usize> = (0..w.len() - 1).filter(|b| mask & (1 << b) != 0).collect();
        let mut terminal = true;
        for (k, &cut) in cuts.iter().enumerate() {
            let begin = if k == 0 { 0 } else { cuts[k - 1] + 1 };
            let end = cuts.get(k + 1).map_or(w.len(), |&c| c + 1);
            if dict.rule_for(&w[begin..=cut], &w[cut + 1..end]).is_some() {
                terminal = false;
                let merged = mask & !(1 << cut);
                if seen.insert(merged) {
                    stack.push(merged);
                }
            }
        }
        if terminal {
            let mut lengths = Vec::with_capacity(cuts.len() + 1);
            let mut begin = 0;
            for &cut in &cuts {
                lengths.push(cut + 1 - begin);
                begin = cut + 1;
            }
            lengths.push(w.len() - begin);
            terminals.insert(Tokenization::from_lengths(w, &lengths));
        }
    }
    Ok(terminals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::concat;
    use proptest::prelude::*;

    fn dict(pairs: &[(&str, &str)]) -> Dictionary<u8> {
        Dictionary::from_text_pairs(pairs).unwrap()
    }

    fn tk(texts: &[&str]) -> Tokenization<u8> {
        Tokenization::from_texts(texts)
    }

    fn example1() -> Dictionary<u8> {
        dict(&[("a", "b"), ("a", "bc"), ("b", "c"), ("ab", "c")])
    }

    fn example2() -> Dictionary<u8> {
        dict(&[("c", "ab"), ("ab", "c"), ("a", "b")])
    }

    fn example3() -> Dictionary<u8> {
        dict(&[("ab", "a"), ("a", "b")])
    }

    /// Independent oracle: compare every adjacent pair against every rule.
    fn brute_force_decompositions(d: &Dictionary<u8>, t: &Tokenization<u8>) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, rule) in d.rules().iter().enumerate() {
            for p in 0..t.len().saturating_sub(1) {
                if t.tokens()[p] == rule.left && t.tokens()[p + 1] == rule.right {
                    out.push((i, p));
                }
            }
        }
        out
    }

    #[test]
    fn decompositions_example() {
        let d = example1();
        let t = tk(&["a", "b", "c", "b", "c", "a", "b"]);
        let expected = brute_force_decompositions(&d, &t);
        assert_eq!(expected, vec![(0, 0), (0, 5), (2, 1), (2, 3)]);
        assert_eq!(applicable_decompositions(&d, &t), expected);
        assert!(applicable_decompositions(&d, &tk(&["a"])).is_empty());
        assert!(applicable_decompositions(&d, &Tokenization::empty()).is_empty());
        assert!(applicable_decompositions(&dict(&[("a", "b")]), &tk(&["ab"])).is_empty());
    }

    #[test]
    fn sp_examples() {
        assert_eq!(
            tokenize_sp(&example1(), b"abcbcab"),
            tk(&["abc", "bc", "ab"])
        );
        assert_eq!(
            tokenize_sp(&example2(), b"abcabcabcabc"),
            tk(&["abc", "abc", "abc", "abc"])
        );
        assert_eq!(
            tokenize_sp(&example2(), b"cabcabcabcabc"),
            tk(&["cab", "cab", "cab", "cab", "c"])
        );
        assert_eq!(
            tokenize_sp(&example2(), b"bcabcabcabc"),
            tk(&["b", "cab", "cab", "cab", "c"])
        );
        assert_eq!(
            tokenize_sp(&example3(), b"abababab"),
            tk(&["aba", "b", "aba", "b"])
        );
        assert!(tokenize_sp(&example1(), b"").is_empty());
    }

    #[test]
    fn sp_trace_of_first_example() {
        let trace = tokenize_sp_traced(&example1(), b"abcbcab");
        let steps: Vec<(usize, usize, usize)> = trace
            .steps
            .iter()
            .map(|s| (s.rule_index, s.position, s.before_length))
            .collect();
        assert_eq!(steps, vec![(0, 0, 7), (0, 4, 6), (2, 2, 5), (3, 0, 4)]);
        assert!(trace.phase_starts.is_none());
    }

    #[test]
    fn example2_five_step_intermediate() {
        let w = b"abcabcabcabc";
        let trace = tokenize_sp_traced(&example2(), w);
        let partial = DerivationTrace {
            steps: trace.steps[..5].to_vec(),
            result: Tokenization::empty(),
            phase_starts: None,
        };
        assert_eq!(
            partial.replay(&example2(), w).unwrap(),
            tk(&["abc", "abc", "ab", "c", "a", "b", "c"])
        );
    }

    #[test]
    fn hf_examples() {
        assert_eq!(
            tokenize_hf(&example3(), b"abababab"),
            tk(&["ab", "ab", "ab", "ab"])
        );
        assert_eq!(
            tokenize_hf(&example1(), b"abcbcab"),
            tokenize_sp(&example1(), b"abcbcab")
        );
        assert_eq!(
            tokenize_hf(&example1(), b"abcbcab"),
            tk(&["abc", "bc", "ab"])
        );
        assert!(tokenize_hf(&example3(), b"").is_empty());
    }

    #[test]
    fn hf_trace_records_phases() {
        let trace = tokenize_hf_traced(&example3(), b"abababab");
        assert_eq!(trace.steps.len(), 4);
        assert_eq!(trace.phase_starts, Some(vec![0]));
        let reference = reference::tokenize_hf(&example3(), b"abababab");
        assert_eq!(trace, reference);
    }

    #[test]
    fn overlapping_self_pairs() {
        let d = dict(&[("a", "a")]);
        assert_eq!(tokenize_sp(&d, b"aaa"), tk(&["aa", "a"]));
        assert_eq!(tokenize_hf(&d, b"aaaaa"), tk(&["aa", "aa", "a"]));
    }

    #[test]
    fn enumerate_base_examples() {
        let set = enumerate_base(
            &dict(&[("a", "a"), ("b", "b")]),
            b"ab",
            DEFAULT_ENUMERATION_LIMIT,
        )
        .unwrap();
        assert_eq!(set.into_iter().collect::<Vec<_>>(), vec![tk(&["a", "b"])]);

        let set = enumerate_base(
            &dict(&[("a", "b"), ("b", "c")]),
            b"abc",
            DEFAULT_ENUMERATION_LIMIT,
        )
        .unwrap();
        let expected: BTreeSet<_> = [tk(&["ab", "c"]), tk(&["a", "bc"])].into_iter().collect();
        assert_eq!(set, expected);

        let set = enumerate_base(&example1(), b"", DEFAULT_ENUMERATION_LIMIT).unwrap();
        assert_eq!(
            set.into_iter().collect::<Vec<_>>(),
            vec![Tokenization::empty()]
        );
    }

    #[test]
    fn enumerate_base_rejects_long_input() {
        let err = enumerate_base(&example1(), &[b'a'; 13], DEFAULT_ENUMERATION_LIMIT).unwrap_err();
        assert_eq!(err, Error::InputTooLong { len: 13, max: 12 });
    }

    #[test]
    fn first_example_base_contains_the_useless_rule_route() {
        // the base tokenizer may use `a | bc`; the deterministic ones never do
        let d = example1();
        let base = enumerate_base(&d, b"abc", DEFAULT_ENUMERATION_LIMIT).unwrap();
        assert_eq!(base.len(), 1);
        assert!(base.contains(&tk(&["abc"])));
        assert!(!tokenize_sp_traced(&d, b"abc").uses_rule(1));
    }

    fn small_dictionary() -> impl Strategy<Value = Dictionary<u8>> {
        let side = prop::collection::vec(b'a'..=b'c', 1..3);
        prop::collection::vec((side.clone(), side), 0..7).prop_map(|pairs| {
            let mut rules: Vec<crate::model::Rule<u8>> = Vec::new();
            for (l, r) in pairs {
                let rule =
                    crate::model::Rule::new(Token::new(&l).unwrap(), Token::new(&r).unwrap());
                if !rules.contains(&rule) {
                    rules.push(rule);
                }
            }
            Dictionary::new(rules).unwrap()
        })
    }

    proptest! {
        #[test]
        fn engine_matches_reference(d in small_dictionary(), w in prop::collection::vec(b'a'..=b'c', 0..24)) {
            let sp = tokenize_sp_traced(&d, &w);
            prop_assert_eq!(&sp, &reference::tokenize_sp(&d, &w));
            let hf = tokenize_hf_traced(&d, &w);
            let hf_ref = reference::tokenize_hf(&d, &w);
            prop_assert_eq!(&hf.result, &hf_ref.result);
            prop_assert_eq!(&hf.steps, &hf_ref.steps);
            prop_assert_eq!(&hf.phase_starts, &hf_ref.phase_starts);
        }

        #[test]
        fn sound_terminal_and_replayable(d in small_dictionary(), w in prop::collection::vec(b'a'..=b'c', 0..24)) {
            for semantics in Semantics::ALL {
                let trace = tokenize_traced(&d, &w, semantics);
                prop_assert_eq!(concat(&trace.result), w.clone());
                prop_assert!(is_terminal(&d, &trace.result));
                let replayed = trace.replay(&d, &w);
                prop_assert_eq!(replayed.as_ref(), Some(&trace.result));
                prop_assert_eq!(tokenize_traced(&d, &w, semantics), trace);
            }
        }

        #[test]
        fn results_are_base_tokenizations(d in small_dictionary(), w in prop::collection::vec(b'a'..=b'c', 0..10)) {
            let base = enumerate_base(&d, &w, DEFAULT_ENUMERATION_LIMIT).unwrap();
            prop_assert!(!base.is_empty());
            prop_assert!(base.contains(&tokenize_sp(&d, &w)));
            prop_assert!(base.contains(&tokenize_hf(&d, &w)));
            for t in &base {
                prop_assert!(is_terminal(&d, t));
                prop_assert_eq!(concat(t), w.clone());
            }
        }

        #[test]
        fn char_profile_agrees_with_bytes(d in small_dictionary(), w in prop::collection::vec(b'a'..=b'c', 0..20)) {
            let rules = d.rules().iter().map(|r| {
                let conv = |t: &Token<u8>| Token::new(&t.symbols().iter().map(|&b| char::from(b)).collect::<Vec<_>>()).unwrap();
                crate::model::Rule::new(conv(&r.left), conv(&r.right))
            }).collect();
            let dc = Dictionary::<char>::new(rules).unwrap();
            let wc: Vec<char> = w.iter().map(|&b| char::from(b)).collect();
            prop_assert_eq!(tokenize_sp(&d, &w).lengths(), tokenize_sp(&dc, &wc).lengths());
        }
    }
}
