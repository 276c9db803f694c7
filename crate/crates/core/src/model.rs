//! Value types shared by every other module: symbols, tokens, tokenizations,
//! merge rules and dictionaries.
//!
//! A [`Dictionary`] is preprocessed at construction into a hash index keyed by
//! `(left, right)` token pairs, so every tokenizer looks rules up in constant
//! time. All types are immutable after construction.

use std::fmt;
use std::hash::Hash;
use std::ops::Range;
use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// An atomic unit of the alphabet.
///
/// Two profiles are provided: bytes (`u8`, the default for files and streams)
/// and Unicode scalar values (`char`).
pub trait Symbol: Copy + Eq + Ord + Hash + fmt::Debug + Send + Sync + 'static {
    /// The `i`-th lowercase latin letter; used to build small synthetic alphabets.
    fn letter(i: u8) -> Self;

    /// Splits text into symbols of this profile.
    fn symbols_of(text: &str) -> Vec<Self>;

    /// Writes a human-readable rendering of the symbol.
    fn fmt_symbol(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;
}

impl Symbol for u8 {
    fn letter(i: u8) -> Self {
        b'a' + i
    }

    fn symbols_of(text: &str) -> Vec<Self> {
        text.as_bytes().to_vec()
    }

    fn fmt_symbol(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.escape_ascii())
    }
}

impl Symbol for char {
    fn letter(i: u8) -> Self {
        char::from(b'a' + i)
    }

    fn symbols_of(text: &str) -> Vec<Self> {
        text.chars().collect()
    }

    fn fmt_symbol(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.escape_debug())
    }
}

/// A non-empty string of symbols.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token<S>(Arc<[S]>);

impl<S: Symbol> Token<S> {
    pub fn new(symbols: &[S]) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyToken);
        }
        Ok(Self(symbols.into()))
    }

    pub fn single(symbol: S) -> Self {
        Self(Arc::from([symbol]))
    }

    /// Builds a token from text in this symbol profile.
    ///
    /// Panics on empty text; meant for literals in tests and examples.
    pub fn from_text(text: &str) -> Self {
        Self::new(&S::symbols_of(text)).expect("token text must be non-empty")
    }

    pub fn symbols(&self) -> &[S] {
        &self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl<S: Symbol> fmt::Debug for Token<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl<S: Symbol> fmt::Display for Token<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|s| s.fmt_symbol(f))
    }
}

/// A sequence of tokens, possibly empty.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tokenization<S> {
    tokens: Vec<Token<S>>,
}

impl<S: Symbol> Tokenization<S> {
    pub fn new(tokens: Vec<Token<S>>) -> Self {
        Self { tokens }
    }

    pub fn empty() -> Self {
        Self { tokens: Vec::new() }
    }

    /// Cuts `symbols` into consecutive tokens of the given lengths.
    ///
    /// The lengths must be non-zero and sum to `symbols.len()`.
    pub fn from_lengths(symbols: &[S], lengths: &[usize]) -> Self {
        let mut start = 0;
        let tokens = lengths
            .iter()
            .map(|&len| {
                let token = Token::new(&symbols[start..start + len]).expect("zero-length token");
                start += len;
                token
            })
            .collect();
        debug_assert_eq!(start, symbols.len());
        Self { tokens }
    }

    /// Builds a tokenization from token texts; panics on an empty entry.
    pub fn from_texts(texts: &[&str]) -> Self {
        Self::new(texts.iter().map(|t| Token::from_text(t)).collect())
    }

    pub fn tokens(&self) -> &[Token<S>] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<Token<S>> {
        self.tokens
    }

    /// Number of tokens.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.tokens.iter().map(Token::len).collect()
    }

    /// The concatenation of all tokens.
    pub fn concat(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.symbol_count());
        for token in &self.tokens {
            out.extend_from_slice(token.symbols());
        }
        out
    }

    pub fn symbol_count(&self) -> usize {
        self.tokens.iter().map(Token::len).sum()
    }

    /// The sub-tokenization made of the tokens in `range`.
    pub fn slice(&self, range: Range<usize>) -> Self {
        Self {
            tokens: self.tokens[range].to_vec(),
        }
    }

    /// Symbol span `[start, end)` of every token.
    pub fn spans(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.tokens
            .iter()
            .map(|t| {
                let span = start..start + t.len();
                start = span.end;
                span
            })
            .collect()
    }
}

impl<S: Symbol> fmt::Debug for Tokenization<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl<S: Symbol> fmt::Display for Tokenization<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, token) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{token}")?;
        }
        Ok(())
    }
}

impl<S: Symbol> FromIterator<Token<S>> for Tokenization<S> {
    fn from_iter<I: IntoIterator<Item = Token<S>>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Concatenation of the tokens of `t` back into a string.
pub fn concat<S: Symbol>(t: &Tokenization<S>) -> Vec<S> {
    t.concat()
}

/// One token per symbol of `w`.
pub fn trivial_tokenization<S: Symbol>(w: &[S]) -> Tokenization<S> {
    w.iter().map(|&s| Token::single(s)).collect()
}

/// True iff `coarser` is obtained from `t` by concatenating runs of
/// consecutive tokens of `t`.
pub fn is_refinement<S: Symbol>(t: &Tokenization<S>, coarser: &Tokenization<S>) -> bool {
    let mut fine = t.tokens().iter();
    for token in coarser.tokens() {
        let mut rest = token.symbols();
        while !rest.is_empty() {
            match fine.next() {
                Some(piece) if rest.starts_with(piece.symbols()) => {
                    rest = &rest[piece.len()..];
                }
                _ => return false,
            }
        }
    }
    fine.next().is_none()
}

/// A merge rule `left | right`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rule<S> {
    pub left: Token<S>,
    pub right: Token<S>,
}

impl<S: Symbol> Rule<S> {
    pub fn new(left: Token<S>, right: Token<S>) -> Self {
        Self { left, right }
    }

    pub fn from_texts(left: &str, right: &str) -> Self {
        Self::new(Token::from_text(left), Token::from_text(right))
    }

    /// The token this rule creates.
    pub fn product(&self) -> Vec<S> {
        let mut out = self.left.symbols().to_vec();
        out.extend_from_slice(self.right.symbols());
        out
    }

    /// `|uv|`.
    pub fn size(&self) -> usize {
        self.left.len() + self.right.len()
    }
}

impl<S: Symbol> fmt::Debug for Rule<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<S: Symbol> fmt::Display for Rule<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", self.left, self.right)
    }
}

/// Id of a token in a dictionary's vocabulary. Symbols that occur in no rule
/// map to [`INERT`]; they can never take part in a merge.
pub(crate) type TokenId = u32;
pub(crate) const INERT: TokenId = TokenId::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Merge {
    pub rule: u32,
    pub product: TokenId,
}

#[derive(Clone)]
struct RuleIndex<S> {
    ids: FxHashMap<Box<[S]>, TokenId>,
    singles: FxHashMap<S, TokenId>,
    pairs: FxHashMap<u64, Merge>,
}

fn pair_key(left: TokenId, right: TokenId) -> u64 {
    (u64::from(left) << 32) | u64::from(right)
}

impl<S: Symbol> RuleIndex<S> {
    fn build(rules: &[Rule<S>]) -> Result<Self> {
        let mut index = Self {
            ids: FxHashMap::default(),
            singles: FxHashMap::default(),
            pairs: FxHashMap::default(),
        };
        for (i, rule) in rules.iter().enumerate() {
            let left = index.intern(rule.left.symbols());
            let right = index.intern(rule.right.symbols());
            let product = index.intern(&rule.product());
            let merge = Merge {
                rule: i as u32,
                product,
            };
            if let Some(prev) = index.pairs.insert(pair_key(left, right), merge) {
                return Err(Error::DuplicateRule {
                    pair: rule.to_string(),
                    first: prev.rule as usize,
                    second: i,
                });
            }
        }
        Ok(index)
    }

    fn intern(&mut self, symbols: &[S]) -> TokenId {
        if let Some(&id) = self.ids.get(symbols) {
            return id;
        }
        let id = self.ids.len() as TokenId;
        self.ids.insert(symbols.into(), id);
        if let [single] = symbols {
            self.singles.insert(*single, id);
        }
        id
    }
}

/// An ordered list of merge rules; a lower index means a higher priority.
#[derive(Clone)]
pub struct Dictionary<S> {
    rules: Vec<Rule<S>>,
    index: RuleIndex<S>,
}

impl<S: Symbol> Dictionary<S> {
    /// Builds a dictionary, rejecting duplicated `(left, right)` pairs.
    pub fn new(rules: Vec<Rule<S>>) -> Result<Self> {
        let index = RuleIndex::build(&rules)?;
        Ok(Self { rules, index })
    }

    pub fn empty() -> Self {
        Self::new(Vec::new()).expect("empty dictionary is valid")
    }

    /// Builds a dictionary from `(left, right)` text pairs.
    pub fn from_text_pairs(pairs: &[(&str, &str)]) -> Result<Self> {
        let rules = pairs
            .iter()
            .map(|&(l, r)| {
                Ok(Rule::new(
                    Token::new(&S::symbols_of(l))?,
                    Token::new(&S::symbols_of(r))?,
                ))
            })
            .collect::<Result<_>>()?;
        Self::new(rules)
    }

    pub fn rules(&self) -> &[Rule<S>] {
        &self.rules
    }

    pub fn rule(&self, index: usize) -> &Rule<S> {
        &self.rules[index]
    }

    /// Number of rules.
    pub fn size(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Sum of `|uv|` over all rules.
    pub fn total_size(&self) -> usize {
        self.rules.iter().map(Rule::size).sum()
    }

    /// Largest `|uv|` over all rules; 0 for the empty dictionary.
    pub fn max_rule_size(&self) -> usize {
        self.rules.iter().map(Rule::size).max().unwrap_or(0)
    }

    /// Every symbol that occurs in some rule, sorted.
    pub fn alphabet(&self) -> Vec<S> {
        let mut symbols: Vec<S> = self.index.singles.keys().copied().collect();
        for rule in &self.rules {
            symbols.extend_from_slice(rule.left.symbols());
            symbols.extend_from_slice(rule.right.symbols());
        }
        symbols.sort_unstable();
        symbols.dedup();
        symbols
    }

    /// Index of the rule `left | right`, if present.
    pub fn rule_for(&self, left: &[S], right: &[S]) -> Option<usize> {
        let l = self.token_id(left)?;
        let r = self.token_id(right)?;
        self.merge(l, r).map(|m| m.rule as usize)
    }

    /// The same rules with positions `i` and `i + 1` exchanged.
    pub fn with_swapped(&self, i: usize) -> Self {
        let mut rules = self.rules.clone();
        rules.swap(i, i + 1);
        Self::new(rules).expect("a permutation keeps rules distinct")
    }

    pub(crate) fn symbol_id(&self, symbol: S) -> TokenId {
        self.index.singles.get(&symbol).copied().unwrap_or(INERT)
    }

    pub(crate) fn token_id(&self, symbols: &[S]) -> Option<TokenId> {
        self.index.ids.get(symbols).copied()
    }

    #[inline]
    pub(crate) fn merge(&self, left: TokenId, right: TokenId) -> Option<Merge> {
        if left == INERT || right == INERT {
            return None;
        }
        self.index.pairs.get(&pair_key(left, right)).copied()
    }
}

impl<S: Symbol> PartialEq for Dictionary<S> {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl<S: Symbol> Eq for Dictionary<S> {}

impl<S: Symbol> fmt::Debug for Dictionary<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.rules).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tk(texts: &[&str]) -> Tokenization<u8> {
        Tokenization::from_texts(texts)
    }

    #[test]
    fn concat_examples() {
        assert_eq!(concat(&tk(&["abc", "bc", "ab"])), b"abcbcab");
        assert_eq!(concat(&Tokenization::<u8>::empty()), b"");
        assert_eq!(concat(&tk(&["a", "b"])), b"ab");
    }

    #[test]
    fn trivial_tokenization_examples() {
        assert_eq!(trivial_tokenization(b"abc"), tk(&["a", "b", "c"]));
        assert!(trivial_tokenization::<u8>(b"").is_empty());
        assert_eq!(trivial_tokenization(b"aa"), tk(&["a", "a"]));
    }

    #[test]
    fn refinement_examples() {
        assert!(is_refinement(&tk(&["a", "b", "c"]), &tk(&["ab", "c"])));
        assert!(!is_refinement(&tk(&["ab", "c"]), &tk(&["a", "bc"])));
        assert!(is_refinement(&tk(&["a", "b"]), &tk(&["a", "b"])));
        assert!(!is_refinement(&tk(&["a", "b"]), &tk(&["a"])));
        assert!(!is_refinement(&tk(&["a"]), &tk(&["a", "b"])));
    }

    #[test]
    fn empty_token_is_rejected() {
        assert_eq!(Token::<u8>::new(&[]), Err(Error::EmptyToken));
    }

    #[test]
    fn duplicate_rules_are_rejected() {
        let err =
            Dictionary::<u8>::from_text_pairs(&[("a", "b"), ("c", "d"), ("a", "b")]).unwrap_err();
        assert_eq!(
            err,
            Error::DuplicateRule {
                pair: "a | b".into(),
                first: 0,
                second: 2
            }
        );
    }

    #[test]
    fn dictionary_sizes() {
        let d =
            Dictionary::<u8>::from_text_pairs(&[("a", "b"), ("a", "bc"), ("b", "c"), ("ab", "c")])
                .unwrap();
        assert_eq!(d.size(), 4);
        assert_eq!(d.total_size(), 2 + 3 + 2 + 3);
        assert_eq!(d.max_rule_size(), 3);
        assert_eq!(d.alphabet(), b"abc");
        assert_eq!(d.rule_for(b"ab", b"c"), Some(3));
        assert_eq!(d.rule_for(b"c", b"ab"), None);
        assert_eq!(d.rule_for(b"x", b"b"), None);
    }

    #[test]
    fn char_profile() {
        let d = Dictionary::<char>::from_text_pairs(&[("é", "t"), ("ét", "é")]).unwrap();
        assert_eq!(d.rule_for(&['é', 't'], &['é']), Some(1));
        assert_eq!(d.max_rule_size(), 3);
    }

    fn tokenization_strategy() -> impl Strategy<Value = Tokenization<u8>> {
        prop::collection::vec(prop::collection::vec(b'a'..=b'c', 1..4), 0..8)
            .prop_map(|ts| ts.iter().map(|t| Token::new(t).unwrap()).collect())
    }

    /// Random coarsening: merges each boundary with probability given by `mask`.
    fn coarsen(t: &Tokenization<u8>, mask: &[bool]) -> Tokenization<u8> {
        let mut out: Vec<Vec<u8>> = Vec::new();
        for (i, token) in t.tokens().iter().enumerate() {
            match out.last_mut() {
                Some(last) if i > 0 && mask.get(i).copied().unwrap_or(false) => {
                    last.extend_from_slice(token.symbols())
                }
                _ => out.push(token.symbols().to_vec()),
            }
        }
        out.iter().map(|t| Token::new(t).unwrap()).collect()
    }

    proptest! {
        #[test]
        fn trivial_tokenization_spells_input(w in prop::collection::vec(any::<u8>(), 0..40)) {
            let t = trivial_tokenization(&w);
            prop_assert_eq!(t.len(), w.len());
            prop_assert_eq!(concat(&t), w);
        }

        #[test]
        fn refinement_is_reflexive_and_transitive(
            t in tokenization_strategy(),
            m1 in prop::collection::vec(any::<bool>(), 8),
            m2 in prop::collection::vec(any::<bool>(), 8),
        ) {
            prop_assert!(is_refinement(&t, &t));
            let c1 = coarsen(&t, &m1);
            let c2 = coarsen(&c1, &m2);
            prop_assert!(is_refinement(&t, &c1));
            prop_assert!(is_refinement(&c1, &c2));
            prop_assert!(is_refinement(&t, &c2));
            prop_assert_eq!(concat(&c2), concat(&t));
        }
    }
}
