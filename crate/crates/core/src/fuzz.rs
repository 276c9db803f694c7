//! Differential fuzzing of the tokenizers against each other and against
//! full retokenization.
//!
//! Every trial draws its own generator from `(seed, trial)`, so runs are
//! reproducible and a failing trial can be replayed on its own. Semantics
//! agreement and swap equivalence are only claimed for proper dictionaries;
//! divergences on improper ones are counted as findings rather than
//! violations. Gluing and splicing must be exact for every dictionary.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{check_proper, swap_independent};
use crate::generate::{random_string, random_trained_dictionary, shuffle_rules};
use crate::incremental::{concat_tokenizations, default_budget, splice_edit};
use crate::model::{Dictionary, Symbol, Tokenization};
use crate::semantics::{tokenize_hf, tokenize_sp};
use crate::streaming::{stream_tokenize, StreamOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FuzzMode {
    /// SentencePiece and HuggingFace semantics agree.
    SpVsHf,
    /// Streaming output equals batch tokenization.
    StreamVsBatch,
    /// Gluing independently tokenized halves, and splicing random edits,
    /// equals full retokenization.
    ConcatVsFull,
    /// Swapping adjacent swap-independent rules leaves tokenizations unchanged.
    SwapEquivalence,
}

impl FuzzMode {
    pub const ALL: [FuzzMode; 4] = [
        FuzzMode::SpVsHf,
        FuzzMode::StreamVsBatch,
        FuzzMode::ConcatVsFull,
        FuzzMode::SwapEquivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FuzzMode::SpVsHf => "sp-vs-hf",
            FuzzMode::StreamVsBatch => "stream-vs-batch",
            FuzzMode::ConcatVsFull => "concat-vs-full",
            FuzzMode::SwapEquivalence => "swap-equivalence",
        }
    }
}

impl fmt::Display for FuzzMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FuzzMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FuzzMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown fuzz mode `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DictionarySource<S: Symbol> {
    Fixed(Dictionary<S>),
    /// A freshly trained dictionary per trial; with `shuffle`, half of them
    /// get their rules reordered, which usually breaks properness.
    TrainRandom {
        max_rules: usize,
        shuffle: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzConfig {
    pub mode: FuzzMode,
    pub trials: u64,
    pub seed: u64,
    /// Longest random input string.
    pub max_len: usize,
}

impl FuzzConfig {
    pub fn new(mode: FuzzMode, trials: u64, seed: u64) -> Self {
        Self {
            mode,
            trials,
            seed,
            max_len: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample<S: Symbol> {
    pub trial: u64,
    pub dictionary: Dictionary<S>,
    pub input: Vec<S>,
    /// What the reference side produced.
    pub expected: Tokenization<S>,
    /// What the side under test produced.
    pub actual: Tokenization<S>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzReport<S: Symbol> {
    pub mode: FuzzMode,
    pub trials: u64,
    /// Trials in which the property applied and was checked.
    pub checked: u64,
    /// Divergences the property rules out.
    pub violations: u64,
    /// Tolerated divergences on improper dictionaries.
    pub findings: u64,
    pub first_violation: Option<Counterexample<S>>,
    pub first_finding: Option<Counterexample<S>>,
}

impl<S: Symbol> FuzzReport<S> {
    pub fn is_clean(&self) -> bool {
        self.violations == 0
    }
}

/// Generator for one trial, independent of every other trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn fuzz<S: Symbol>(source: &DictionarySource<S>, config: &FuzzConfig) -> FuzzReport<S> {
    let fixed_proper = match source {
        DictionarySource::Fixed(d) => Some(check_proper(d).proper),
        DictionarySource::TrainRandom { .. } => None,
    };
    let mut report = FuzzReport {
        mode: config.mode,
        trials: config.trials,
        checked: 0,
        violations: 0,
        findings: 0,
        first_violation: None,
        first_finding: None,
    };
    for trial in 0..config.trials {
        let mut rng = trial_rng(config.seed, trial);
        let (dict, proper) = match source {
            DictionarySource::Fixed(d) => (d.clone(), fixed_proper.expect("fixed")),
            DictionarySource::TrainRandom { max_rules, shuffle } => {
                let mut d = random_trained_dictionary(&mut rng, *max_rules);
                if *shuffle && rng.random_bool(0.5) {
                    d = shuffle_rules(&mut rng, &d);
                }
                let proper = check_proper(&d).proper;
                (d, proper)
            }
        };
        let w = random_string(&mut rng, &dict, config.max_len);
        let Some(outcome) = run_trial(config.mode, &dict, proper, &w, &mut rng) else {
            continue;
        };
        report.checked += 1;
        let Err((expected, actual, detail)) = outcome else {
            continue;
        };
        let example = Counterexample {
            trial,
            dictionary: dict,
            input: w,
            expected,
            actual,
            detail,
        };
        if proper || config.mode == FuzzMode::ConcatVsFull {
            report.violations += 1;
            report.first_violation.get_or_insert(example);
        } else {
            report.findings += 1;
            report.first_finding.get_or_insert(example);
        }
    }
    report
}

type Divergence<S> = (Tokenization<S>, Tokenization<S>, String);

/// `None` when the property does not apply to this instance.
fn run_trial<S: Symbol>(
    mode: FuzzMode,
    dict: &Dictionary<S>,
    proper: bool,
    w: &[S],
    rng: &mut ChaCha8Rng,
) -> Option<Result<(), Divergence<S>>> {
    let check = |expected: Tokenization<S>, actual: Tokenization<S>, detail: String| {
        if expected == actual {
            Ok(())
        } else {
            Err((expected, actual, detail))
        }
    };
    match mode {
        FuzzMode::SpVsHf => Some(check(
            tokenize_sp(dict, w),
            tokenize_hf(dict, w),
            "sp | hf".into(),
        )),
        FuzzMode::StreamVsBatch => {
            if !proper {
                return None;
            }
            let mut tokens = Vec::new();
            stream_tokenize(
                dict,
                w.iter().copied(),
                |t| tokens.push(t.to_vec()),
                StreamOptions::default(),
            )
            .expect("proper dictionary");
            let lengths: Vec<usize> = tokens.iter().map(Vec::len).collect();
            Some(check(
                tokenize_sp(dict, w),
                Tokenization::from_lengths(w, &lengths),
                "batch | stream".into(),
            ))
        }
        FuzzMode::ConcatVsFull => {
            let full = tokenize_sp(dict, w);
            let split = rng.random_range(0..=w.len());
            let left = tokenize_sp(dict, &w[..split]);
            let right = tokenize_sp(dict, &w[split..]);
            let glued = concat_tokenizations(dict, &left, &right, default_budget(dict))
                .expect("correct halves");
            if glued.result != full {
                return Some(Err((
                    full,
                    glued.result,
                    format!("concat split at symbol {split}"),
                )));
            }
            let start = rng.random_range(0..=w.len());
            let end = rng.random_range(start..=w.len());
            let replacement = random_string(rng, dict, 8);
            let mut edited = w[..start].to_vec();
            edited.extend_from_slice(&replacement);
            edited.extend_from_slice(&w[end..]);
            let spliced =
                splice_edit(dict, &full, start, end, &replacement).expect("offsets in range");
            Some(check(
                tokenize_sp(dict, &edited),
                spliced,
                format!("edit {start}..{end} <- {} symbols", replacement.len()),
            ))
        }
        FuzzMode::SwapEquivalence => {
            let candidates: Vec<usize> = (0..dict.size().saturating_sub(1))
                .filter(|&i| swap_independent(dict.rule(i), dict.rule(i + 1)))
                .collect();
            if candidates.is_empty() {
                return None;
            }
            let i = candidates[rng.random_range(0..candidates.len())];
            let swapped = dict.with_swapped(i);
            Some(check(
                tokenize_sp(dict, w),
                tokenize_sp(&swapped, w),
                format!("rules {i} and {} swapped", i + 1),
            ))
        }
    }
}
