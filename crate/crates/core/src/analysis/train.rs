//! Greedy BPE training: repeatedly add the most frequent adjacent token pair.

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::model::{Dictionary, Rule, Symbol, Token, Tokenization};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingStep<S: Symbol> {
    pub rule: Rule<S>,
    /// Occurrences of the pair in the corpus when it was picked.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingRun<S: Symbol> {
    pub dictionary: Dictionary<S>,
    pub steps: Vec<TrainingStep<S>>,
    /// Tokenization of every corpus entry under the final dictionary.
    pub corpus: Vec<Tokenization<S>>,
    /// True when training stopped before `num_rules` because no pair
    /// occurred at least twice.
    pub halted_early: bool,
}

#[derive(Clone, Copy)]
struct PairStat {
    count: usize,
    first: (usize, usize),
    last: (usize, usize),
}

/// Interned corpus tokens.
struct Vocab<S> {
    tokens: Vec<Token<S>>,
    ids: FxHashMap<Token<S>, u32>,
}

impl<S: Symbol> Vocab<S> {
    fn intern(&mut self, token: Token<S>) -> u32 {
        if let Some(&id) = self.ids.get(&token) {
            return id;
        }
        let id = self.tokens.len() as u32;
        self.tokens.push(token.clone());
        self.ids.insert(token, id);
        id
    }
}

/// Trains a dictionary of at most `num_rules` rules.
///
/// Each corpus entry is tokenized on its own. Occurrences of one pair are
/// counted left to right without overlap (`x x x` holds one `x | x`). Ties on
/// the count go to the pair whose first occurrence is leftmost, scanning
/// entries in order.
pub fn train<S: Symbol, W: AsRef<[S]>>(corpus: &[W], num_rules: usize) -> Result<TrainingRun<S>> {
    if num_rules > 0 && corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut vocab = Vocab {
        tokens: Vec::new(),
        ids: FxHashMap::default(),
    };
    let mut entries: Vec<Vec<u32>> = corpus
        .iter()
        .map(|w| {
            w.as_ref()
                .iter()
                .map(|&s| vocab.intern(Token::single(s)))
                .collect()
        })
        .collect();

    let mut rules = Vec::new();
    let mut known: FxHashSet<(u32, u32)> = FxHashSet::default();
    let mut steps = Vec::new();
    let mut halted_early = false;
    let mut stats: FxHashMap<(u32, u32), PairStat> = FxHashMap::default();

    while rules.len() < num_rules {
        stats.clear();
        for (e, entry) in entries.iter().enumerate() {
            for (p, pair) in entry.windows(2).enumerate() {
                let key = (pair[0], pair[1]);
                if known.contains(&key) {
                    continue;
                }
                let stat = stats.entry(key).or_insert(PairStat {
                    count: 0,
                    first: (e, p),
                    last: (usize::MAX, usize::MAX),
                });
                if key.0 == key.1 && stat.last == (e, p.wrapping_sub(1)) {
                    continue;
                }
                stat.count += 1;
                stat.last = (e, p);
            }
        }
        let best = stats.iter().max_by(|(ka, a), (kb, b)| {
            a.count
                .cmp(&b.count)
                .then(b.first.cmp(&a.first))
                .then_with(|| {
                    let sa = (&vocab.tokens[ka.0 as usize], &vocab.tokens[ka.1 as usize]);
                    let sb = (&vocab.tokens[kb.0 as usize], &vocab.tokens[kb.1 as usize]);
                    sb.cmp(&sa)
                })
        });
        let Some((&(left, right), stat)) = best.filter(|(_, s)| s.count >= 2) else {
            halted_early = true;
            break;
        };
        let count = stat.count;
        let rule = Rule::new(
            vocab.tokens[left as usize].clone(),
            vocab.tokens[right as usize].clone(),
        );
        let product = vocab.intern(Token::new(&rule.product()).expect("non-empty"));
        known.insert((left, right));

        for entry in &mut entries {
            let mut merged = Vec::with_capacity(entry.len());
            let mut i = 0;
            while i < entry.len() {
                if i + 1 < entry.len() && entry[i] == left && entry[i + 1] == right {
                    merged.push(product);
                    i += 2;
                } else {
                    merged.push(entry[i]);
                    i += 1;
                }
            }
            *entry = merged;
        }
        steps.push(TrainingStep {
            rule: rule.clone(),
            count,
        });
        rules.push(rule);
    }

    let corpus = entries
        .iter()
        .map(|entry| {
            entry
                .iter()
                .map(|&id| vocab.tokens[id as usize].clone())
                .collect()
        })
        .collect();
    Ok(TrainingRun {
        dictionary: Dictionary::new(rules)?,
        steps,
        corpus,
        halted_early,
    })
}

/// Trains a dictionary of at most `num_rules` rules; see [`train`].
pub fn train_bpe<S: Symbol, W: AsRef<[S]>>(
    corpus: &[W],
    num_rules: usize,
) -> Result<Dictionary<S>> {
    train(corpus, num_rules).map(|run| run.dictionary)
}
