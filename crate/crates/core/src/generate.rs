//! Random and structured instances for fuzzing and experiments.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::analysis::train_bpe;
use crate::model::{Dictionary, Rule, Symbol, Token};

/// The adversarial chain dictionary with `n` rules over letters `a_0 … a_{n+1}`:
/// `a_n ≀ a_{n+1}`, `a_{n-1} ≀ a_n a_{n+1}`, …, `a_1 ≀ a_2 ⋯ a_{n+1}`.
///
/// Its lookahead grows linearly in `n`: in `a_0 a_1 ⋯ a_{n+1}` the token
/// after `a_0` is only decided by the last symbol.
pub fn lookahead_chain<S: Symbol>(n: u8) -> Dictionary<S> {
    let rules = (1..=n)
        .rev()
        .map(|i| {
            let tail: Vec<S> = (i + 1..=n + 1).map(S::letter).collect();
            Rule::new(
                Token::single(S::letter(i)),
                Token::new(&tail).expect("non-empty"),
            )
        })
        .collect();
    Dictionary::new(rules).expect("distinct rules")
}

/// A random string of at most `max_len` symbols built by concatenating
/// alphabet symbols and rule products of `dict`, so that merges of every
/// depth actually occur. Uses `a`, `b`, `c` when the dictionary is empty.
pub fn random_string<S: Symbol, R: Rng>(
    rng: &mut R,
    dict: &Dictionary<S>,
    max_len: usize,
) -> Vec<S> {
    let mut pieces: Vec<Vec<S>> = dict.alphabet().into_iter().map(|s| vec![s]).collect();
    if pieces.is_empty() {
        pieces = (0..3).map(|i| vec![S::letter(i)]).collect();
    }
    pieces.extend(dict.rules().iter().map(Rule::product));
    let target = rng.random_range(0..=max_len);
    let mut w = Vec::with_capacity(target + dict.max_rule_size());
    while w.len() < target {
        w.extend_from_slice(pieces.choose(rng).expect("non-empty"));
    }
    w.truncate(target);
    w
}

/// A uniformly random string of exactly `len` symbols over the first
/// `alphabet` letters.
pub fn random_letters<S: Symbol, R: Rng>(rng: &mut R, alphabet: u8, len: usize) -> Vec<S> {
    (0..len)
        .map(|_| S::letter(rng.random_range(0..alphabet)))
        .collect()
}

/// A dictionary trained on a random corpus over 2 to 5 letters, with at most
/// `max_rules` rules. Always proper.
pub fn random_trained_dictionary<S: Symbol, R: Rng>(
    rng: &mut R,
    max_rules: usize,
) -> Dictionary<S> {
    let alphabet = rng.random_range(2..=5);
    let entries = rng.random_range(1..=3);
    let corpus: Vec<Vec<S>> = (0..entries)
        .map(|_| {
            let len = rng.random_range(20..=200);
            random_letters(rng, alphabet, len)
        })
        .collect();
    let rules = rng.random_range(0..=max_rules);
    train_bpe(&corpus, rules).expect("non-empty corpus")
}

/// An arbitrary dictionary, proper or not, of at most `max_rules` rules over
/// the first `alphabet` letters with sides of 1 to `max_side` symbols.
pub fn random_dictionary<S: Symbol, R: Rng>(
    rng: &mut R,
    alphabet: u8,
    max_rules: usize,
    max_side: usize,
) -> Dictionary<S> {
    let count = rng.random_range(0..=max_rules);
    let mut rules: Vec<Rule<S>> = Vec::with_capacity(count);
    for _ in 0..count {
        let side = |rng: &mut R| {
            let len = rng.random_range(1..=max_side);
            Token::new(&random_letters(rng, alphabet, len)).expect("non-empty")
        };
        let rule = Rule::new(side(rng), side(rng));
        if !rules.contains(&rule) {
            rules.push(rule);
        }
    }
    Dictionary::new(rules).expect("distinct rules")
}

/// The same rules in a random order; usually no longer proper.
pub fn shuffle_rules<S: Symbol, R: Rng>(rng: &mut R, dict: &Dictionary<S>) -> Dictionary<S> {
    let mut rules = dict.rules().to_vec();
    rules.shuffle(rng);
    Dictionary::new(rules).expect("distinct rules")
}
