//! Deliberately naive tokenizers that follow the definitions step by step by
//! rescanning the whole tokenization after every merge. Quadratic or worse;
//! kept only as an independent oracle for the heap-based engine.

use crate::model::{Dictionary, Symbol, Token, Tokenization};

use super::{DerivationStep, DerivationTrace};

fn find_leftmost<S: Symbol>(
    tokens: &[Token<S>],
    rule_left: &Token<S>,
    rule_right: &Token<S>,
) -> Option<usize> {
    tokens
        .windows(2)
        .position(|pair| &pair[0] == rule_left && &pair[1] == rule_right)
}

fn merge<S: Symbol>(tokens: &mut Vec<Token<S>>, position: usize) {
    let mut joined = tokens[position].symbols().to_vec();
    joined.extend_from_slice(tokens[position + 1].symbols());
    tokens[position] = Token::new(&joined).expect("non-empty");
    tokens.remove(position + 1);
}

fn highest_applicable<S: Symbol>(
    dict: &Dictionary<S>,
    tokens: &[Token<S>],
) -> Option<(usize, usize)> {
    dict.rules()
        .iter()
        .enumerate()
        .find_map(|(i, rule)| find_leftmost(tokens, &rule.left, &rule.right).map(|p| (i, p)))
}

/// Highest priority rule, leftmost position, one merge at a time.
pub fn tokenize_sp<S: Symbol>(dict: &Dictionary<S>, w: &[S]) -> DerivationTrace<S> {
    let mut tokens: Vec<Token<S>> = w.iter().map(|&s| Token::single(s)).collect();
    let mut steps = Vec::new();
    while let Some((rule_index, position)) = highest_applicable(dict, &tokens) {
        steps.push(DerivationStep {
            rule_index,
            position,
            before_length: tokens.len(),
        });
        merge(&mut tokens, position);
    }
    DerivationTrace {
        steps,
        result: Tokenization::new(tokens),
        phase_starts: None,
    }
}

/// Highest priority rule, then applied left to right until it no longer
/// applies, then re-picked.
pub fn tokenize_hf<S: Symbol>(dict: &Dictionary<S>, w: &[S]) -> DerivationTrace<S> {
    let mut tokens: Vec<Token<S>> = w.iter().map(|&s| Token::single(s)).collect();
    let mut steps = Vec::new();
    let mut phase_starts = Vec::new();
    while let Some((rule_index, _)) = highest_applicable(dict, &tokens) {
        phase_starts.push(steps.len());
        let rule = dict.rule(rule_index);
        while find_leftmost(&tokens, &rule.left, &rule.right).is_some() {
            let mut p = 0;
            while p + 1 < tokens.len() {
                if tokens[p] == rule.left && tokens[p + 1] == rule.right {
                    steps.push(DerivationStep {
                        rule_index,
                        position: p,
                        before_length: tokens.len(),
                    });
                    merge(&mut tokens, p);
                    // resume at p: the merged token may pair with its successor
                } else {
                    p += 1;
                }
            }
        }
    }
    DerivationTrace {
        steps,
        result: Tokenization::new(tokens),
        phase_starts: Some(phase_starts),
    }
}
