//! Static analysis of dictionaries: properness, rule usefulness, lookahead
//! bounds and order-independence of neighbouring rules.

mod train;

use std::collections::BTreeSet;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dictionary, Rule, Symbol};
use crate::semantics::{tokenize_traced, Semantics};

pub use train::{train, train_bpe, TrainingRun, TrainingStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A multi-symbol rule side that no strictly earlier rule produces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub rule_index: usize,
    pub side: Side,
    /// Highest priority rule producing the side, when one exists (it then
    /// necessarily comes at or after `rule_index`).
    pub producer: Option<usize>,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let side = match self.side {
            Side::Left => "left",
            Side::Right => "right",
        };
        match self.producer {
            Some(p) => write!(
                f,
                "rule {}: {side} side is only produced by lower priority rule {p}",
                self.rule_index
            ),
            None => write!(
                f,
                "rule {}: no rule produces the {side} side",
                self.rule_index
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PropernessReport {
    pub proper: bool,
    pub violations: Vec<Violation>,
}

/// Checks that every multi-symbol side of rule `j` is the product of some
/// rule `i < j`.
///
/// Products are indexed by their highest priority producer first, so the
/// check is linear in the total dictionary size (up to hashing).
pub fn check_proper<S: Symbol>(dict: &Dictionary<S>) -> PropernessReport {
    let mut first_producer: FxHashMap<Vec<S>, usize> = FxHashMap::default();
    for (i, rule) in dict.rules().iter().enumerate() {
        first_producer.entry(rule.product()).or_insert(i);
    }
    let mut violations = Vec::new();
    for (j, rule) in dict.rules().iter().enumerate() {
        for (side, token) in [(Side::Left, &rule.left), (Side::Right, &rule.right)] {
            if token.len() < 2 {
                continue;
            }
            match first_producer.get(token.symbols()) {
                Some(&i) if i < j => {}
                producer => violations.push(Violation {
                    rule_index: j,
                    side,
                    producer: producer.copied(),
                }),
            }
        }
    }
    PropernessReport {
        proper: violations.is_empty(),
        violations,
    }
}

pub(crate) fn require_proper<S: Symbol>(dict: &Dictionary<S>) -> Result<()> {
    let report = check_proper(dict);
    if report.proper {
        Ok(())
    } else {
        Err(Error::ImproperDictionary(report))
    }
}

/// Rules that fire in the tokenization of some string. A rule is useful
/// exactly when it fires while tokenizing its own product.
pub fn useful_rules<S: Symbol>(dict: &Dictionary<S>, semantics: Semantics) -> BTreeSet<usize> {
    dict.rules()
        .iter()
        .enumerate()
        .filter(|(i, rule)| tokenize_traced(dict, &rule.product(), semantics).uses_rule(*i))
        .map(|(i, _)| i)
        .collect()
}

pub fn useless_rules<S: Symbol>(dict: &Dictionary<S>, semantics: Semantics) -> BTreeSet<usize> {
    let useful = useful_rules(dict, semantics);
    (0..dict.size()).filter(|i| !useful.contains(i)).collect()
}

/// `|D| * max |uv|`, a lookahead that is always enough for a proper dictionary.
pub fn sufficient_lookahead<S: Symbol>(dict: &Dictionary<S>) -> Result<usize> {
    require_proper(dict)?;
    Ok(dict.size() * dict.max_rule_size())
}

fn suffix_prefix_overlap<S: Eq>(x: &[S], y: &[S]) -> bool {
    (1..=x.len().min(y.len())).any(|k| x[x.len() - k..] == y[..k])
}

fn contains<S: Eq>(haystack: &[S], needle: &[S]) -> bool {
    needle.len() <= haystack.len() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Sufficient condition for two neighbouring rules to be exchangeable without
/// changing any tokenization: their products neither overlap at an end nor
/// contain one another, in either order.
pub fn swap_independent<S: Symbol>(r: &Rule<S>, r2: &Rule<S>) -> bool {
    let x = r.product();
    let y = r2.product();
    !(suffix_prefix_overlap(&x, &y)
        || suffix_prefix_overlap(&y, &x)
        || contains(&y, &x)
        || contains(&x, &y))
}

/// Longest sequence of rules, in priority order, where each consecutive pair
/// fails [`swap_independent`].
///
/// Rules that are independent of each other can be brought into any relative
/// order by adjacent swaps, so only dependent rules keep a forced order
/// across the dictionaries reachable this way. The length of this chain is
/// what the adjacent-swap normalization converges to.
pub fn longest_dependency_chain<S: Symbol>(dict: &Dictionary<S>) -> Vec<usize> {
    let rules = dict.rules();
    let n = rules.len();
    let mut best = vec![1usize; n];
    let mut back: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        for i in 0..j {
            if best[i] + 1 > best[j] && !swap_independent(&rules[i], &rules[j]) {
                best[j] = best[i] + 1;
                back[j] = Some(i);
            }
        }
    }
    let Some(mut at) = (0..n).max_by_key(|&j| (best[j], std::cmp::Reverse(j))) else {
        return Vec::new();
    };
    let mut chain = vec![at];
    while let Some(prev) = back[at] {
        chain.push(prev);
        at = prev;
    }
    chain.reverse();
    chain
}

/// Upper bound on the chain length of a proper dictionary; never above `|D|`.
pub fn chain_length_upper_bound<S: Symbol>(dict: &Dictionary<S>) -> Result<usize> {
    require_proper(dict)?;
    Ok(longest_dependency_chain(dict).len())
}

/// `chain_length_upper_bound * max |uv|`.
pub fn improved_lookahead<S: Symbol>(dict: &Dictionary<S>) -> Result<usize> {
    Ok(chain_length_upper_bound(dict)? * dict.max_rule_size())
}

/// Everything the analyses know about a dictionary. Lookahead figures are
/// only defined for proper dictionaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub rule_count: usize,
    pub max_rule_size: usize,
    pub properness: PropernessReport,
    pub useless_rules_sp: Vec<usize>,
    pub useless_rules_hf: Vec<usize>,
    pub sufficient_lookahead: Option<usize>,
    pub chain_length_upper_bound: Option<usize>,
    pub improved_lookahead: Option<usize>,
    pub dependency_chain: Vec<usize>,
}

pub fn analyze<S: Symbol>(dict: &Dictionary<S>) -> AnalysisReport {
    let properness = check_proper(dict);
    let proper = properness.proper;
    let chain = longest_dependency_chain(dict);
    AnalysisReport {
        rule_count: dict.size(),
        max_rule_size: dict.max_rule_size(),
        properness,
        useless_rules_sp: useless_rules(dict, Semantics::Sp).into_iter().collect(),
        useless_rules_hf: useless_rules(dict, Semantics::Hf).into_iter().collect(),
        sufficient_lookahead: proper.then(|| dict.size() * dict.max_rule_size()),
        chain_length_upper_bound: proper.then_some(chain.len()),
        improved_lookahead: proper.then(|| chain.len() * dict.max_rule_size()),
        dependency_chain: chain,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::random_trained_dictionary;
    use crate::model::Token;
    use crate::semantics::tokenize_sp;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dict(pairs: &[(&str, &str)]) -> Dictionary<u8> {
        Dictionary::from_text_pairs(pairs).unwrap()
    }

    /// The chain family a_n|a_{n+1}, a_{n-1}|a_n a_{n+1}, ..., a_1|a_2...a_{n+1},
    /// with a_i spelled as the letter `b'a' + i`.
    fn chain_dictionary(n: u8) -> Dictionary<u8> {
        let rules = (1..=n)
            .rev()
            .map(|i| {
                let tail: Vec<u8> = (i + 1..=n + 1).map(|k| b'a' + k).collect();
                Rule::new(Token::single(b'a' + i), Token::new(&tail).unwrap())
            })
            .collect();
        Dictionary::new(rules).unwrap()
    }

    /// Oracle: look for a producer of every side by scanning all earlier rules.
    fn brute_force_proper(d: &Dictionary<u8>) -> bool {
        d.rules().iter().enumerate().all(|(j, rule)| {
            [&rule.left, &rule.right].iter().all(|side| {
                side.len() == 1 || d.rules()[..j].iter().any(|r| r.product() == side.symbols())
            })
        })
    }

    #[test]
    fn properness_examples() {
        let report = check_proper(&dict(&[("a", "b"), ("a", "bc"), ("b", "c"), ("ab", "c")]));
        assert!(!report.proper);
        assert_eq!(
            report.violations,
            vec![Violation {
                rule_index: 1,
                side: Side::Right,
                producer: Some(2)
            }]
        );
        assert!(check_proper(&dict(&[("b", "c"), ("a", "b"), ("c", "d"), ("ab", "cd")])).proper);
        assert!(check_proper(&dict(&[("a", "b")])).proper);
        assert!(check_proper(&Dictionary::<u8>::empty()).proper);

        let report = check_proper(&dict(&[("xy", "z")]));
        assert_eq!(report.violations[0].producer, None);
        assert_eq!(
            report.violations[0].to_string(),
            "rule 0: no rule produces the left side"
        );
    }

    #[test]
    fn useful_rule_examples() {
        let d = dict(&[("b", "c"), ("a", "b"), ("c", "d"), ("ab", "cd")]);
        assert_eq!(useful_rules(&d, Semantics::Sp), [0, 1, 2].into());
        assert_eq!(useful_rules(&d, Semantics::Hf), [0, 1, 2].into());
        assert_eq!(useless_rules(&d, Semantics::Sp), [3].into());
        assert_eq!(
            useful_rules(&dict(&[("a", "b")]), Semantics::Sp),
            [0].into()
        );

        let d = dict(&[("a", "b"), ("a", "bc"), ("b", "c"), ("ab", "c")]);
        assert!(!useful_rules(&d, Semantics::Sp).contains(&1));
        assert!(!crate::semantics::tokenize_sp_traced(&d, b"abc").uses_rule(1));
    }

    #[test]
    fn sufficient_lookahead_examples() {
        let chain = chain_dictionary(3);
        assert_eq!(chain.max_rule_size(), 4);
        assert_eq!(sufficient_lookahead(&chain).unwrap(), 12);
        assert_eq!(sufficient_lookahead(&dict(&[("a", "b")])).unwrap(), 2);
        assert_eq!(sufficient_lookahead(&Dictionary::<u8>::empty()).unwrap(), 0);
        assert!(matches!(
            sufficient_lookahead(&dict(&[("ab", "a"), ("a", "b")])),
            Err(Error::ImproperDictionary(_))
        ));
    }

    #[test]
    fn swap_independence_examples() {
        let r = |l: &str, rr: &str| Rule::<u8>::from_texts(l, rr);
        assert!(swap_independent(&r("a", "b"), &r("c", "d")));
        assert!(!swap_independent(&r("a", "b"), &r("ab", "cd")));
        assert!(!swap_independent(&r("a", "b"), &r("b", "c")));
        assert!(!swap_independent(&r("b", "c"), &r("a", "b")));
        assert!(!swap_independent(&r("a", "a"), &r("a", "b")));
        assert!(!swap_independent(&r("b", "c"), &r("a", "bcd")));
    }

    #[test]
    fn chain_bound_examples() {
        assert_eq!(
            chain_length_upper_bound(&dict(&[("a", "b"), ("c", "d"), ("ab", "cd")])).unwrap(),
            2
        );
        assert_eq!(chain_length_upper_bound(&dict(&[("a", "b")])).unwrap(), 1);
        assert_eq!(
            chain_length_upper_bound(&Dictionary::<u8>::empty()).unwrap(),
            0
        );
        let chain = chain_dictionary(3);
        for i in 0..2 {
            assert!(!swap_independent(chain.rule(i), chain.rule(i + 1)));
        }
        assert_eq!(chain_length_upper_bound(&chain).unwrap(), 3);
        assert_eq!(longest_dependency_chain(&chain), vec![0, 1, 2]);
    }

    #[test]
    fn report_for_useless_rule_example() {
        let report = analyze(&dict(&[("b", "c"), ("a", "b"), ("c", "d"), ("ab", "cd")]));
        assert!(report.properness.proper);
        assert_eq!(report.useless_rules_sp, vec![3]);
        assert_eq!(report.sufficient_lookahead, Some(16));
        let chain = report.chain_length_upper_bound.unwrap();
        assert!(chain <= 4);
        assert_eq!(report.improved_lookahead, Some(chain * 4));

        let report = analyze(&Dictionary::<u8>::empty());
        assert!(report.properness.proper);
        assert_eq!(report.sufficient_lookahead, Some(0));
    }

    fn random_dictionary() -> impl Strategy<Value = Dictionary<u8>> {
        let side = prop::collection::vec(b'a'..=b'd', 1..4);
        prop::collection::vec((side.clone(), side), 0..10).prop_map(|pairs| {
            let mut rules: Vec<Rule<u8>> = Vec::new();
            for (l, r) in pairs {
                let rule = Rule::new(Token::new(&l).unwrap(), Token::new(&r).unwrap());
                if !rules.contains(&rule) {
                    rules.push(rule);
                }
            }
            Dictionary::new(rules).unwrap()
        })
    }

    proptest! {
        #[test]
        fn properness_matches_brute_force(d in random_dictionary()) {
            let report = check_proper(&d);
            prop_assert_eq!(report.proper, brute_force_proper(&d));
            prop_assert_eq!(report.proper, report.violations.is_empty());
        }

        #[test]
        fn chain_bound_within_rule_count(d in random_dictionary()) {
            let chain = longest_dependency_chain(&d);
            prop_assert!(chain.len() <= d.size());
            prop_assert!(chain.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(chain.windows(2).all(|w| !swap_independent(d.rule(w[0]), d.rule(w[1]))));
            if check_proper(&d).proper {
                prop_assert!(improved_lookahead(&d).unwrap() <= sufficient_lookahead(&d).unwrap());
            }
        }

        #[test]
        fn swap_independence_is_symmetric(d in random_dictionary()) {
            for i in 0..d.size() {
                for j in 0..d.size() {
                    prop_assert_eq!(swap_independent(d.rule(i), d.rule(j)), swap_independent(d.rule(j), d.rule(i)));
                }
            }
        }

        #[test]
        fn swapping_independent_neighbours_keeps_tokenizations(
            seed in any::<u64>(),
            words in prop::collection::vec(prop::collection::vec(b'a'..=b'e', 0..30), 1..20),
        ) {
            let d: Dictionary<u8> = random_trained_dictionary(&mut ChaCha8Rng::seed_from_u64(seed), 30);
            for i in 0..d.size().saturating_sub(1) {
                if swap_independent(d.rule(i), d.rule(i + 1)) {
                    let swapped = d.with_swapped(i);
                    for w in &words {
                        prop_assert_eq!(tokenize_sp(&d, w), tokenize_sp(&swapped, w));
                    }
                }
            }
        }
    }
}
