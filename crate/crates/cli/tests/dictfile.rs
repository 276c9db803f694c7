use std::collections::HashSet;
use std::fmt::Debug;

use bpetk::{Dictionary, Rule, Token};
use bpetk_cli::dictfile::{parse, parse_any, render, AnyDictionary};
use bpetk_cli::text::{escape, unescape, TextSymbol};
use proptest::prelude::*;

fn dictionary<S: TextSymbol>(pairs: Vec<(Vec<S>, Vec<S>)>) -> Dictionary<S> {
    let mut seen = HashSet::new();
    let rules = pairs
        .into_iter()
        .filter(|pair| seen.insert(pair.clone()))
        .map(|(l, r)| Rule::new(Token::new(&l).unwrap(), Token::new(&r).unwrap()))
        .collect();
    Dictionary::new(rules).unwrap()
}

fn side<S: Debug>(symbol: impl Strategy<Value = S>) -> impl Strategy<Value = Vec<S>> {
    prop::collection::vec(symbol, 1..5)
}

proptest! {
    #[test]
    fn byte_dictionaries_round_trip(pairs in prop::collection::vec((side(any::<u8>()), side(any::<u8>())), 0..12)) {
        let dict = dictionary(pairs);
        let text = render(&dict);
        prop_assert_eq!(parse::<u8>(&text).unwrap(), dict.clone());
        prop_assert_eq!(parse_any(&text).unwrap(), AnyDictionary::Bytes(dict));
    }

    #[test]
    fn char_dictionaries_round_trip(pairs in prop::collection::vec((side(any::<char>()), side(any::<char>())), 0..12)) {
        let dict = dictionary(pairs);
        let text = render(&dict);
        prop_assert_eq!(parse::<char>(&text).unwrap(), dict.clone());
        prop_assert_eq!(parse_any(&text).unwrap(), AnyDictionary::Chars(dict));
    }

    #[test]
    fn escaped_tokens_are_single_fields(symbols in prop::collection::vec(any::<char>(), 0..20)) {
        let text = escape(&symbols);
        prop_assert!(!text.contains(char::is_whitespace));
        prop_assert!(!text.starts_with('#'));
        prop_assert_eq!(unescape::<char>(&text).unwrap(), symbols);
    }
}
