//! Left-to-right tokenization with memory bounded by the dictionary.
//!
//! The tokenizer keeps a window of the next `k` symbols of the input and, at
//! every step, emits the first token of the correct tokenization of that
//! window. For a proper dictionary and `k` at least the lookahead constant,
//! that token is also the next token of the whole input, whatever follows.
//! When the input ends, the window is implicitly padded with a reserved
//! symbol that no rule mentions, so the final tokens need no special case.
//!
//! The window's tokenization is maintained incrementally: after the first
//! token is emitted the rest is still correct, and newly read symbols are
//! glued on with [`crate::incremental`]'s window-widening procedure. Each
//! step therefore costs time bounded by the dictionary, not by the input.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{longest_dependency_chain, require_proper};
use crate::error::{Error, Result};
use crate::generate::random_string;
use crate::incremental::glue;
use crate::model::{Dictionary, Symbol, Token};
use crate::semantics::{segment, Engine, Mode, Semantics};

/// A symbol of the padded alphabet. The padding symbol is kept out of band so
/// every value of `S` remains usable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PaddedSymbol<S> {
    Symbol(S),
    Pad,
}

/// `body` followed by `pad_count` padding symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedInput<S> {
    pub body: Vec<S>,
    pub pad_count: usize,
}

impl<S: Symbol> PaddedInput<S> {
    pub fn len(&self) -> usize {
        self.body.len() + self.pad_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = PaddedSymbol<S>> + '_ {
        self.body
            .iter()
            .map(|&s| PaddedSymbol::Symbol(s))
            .chain(std::iter::repeat_n(PaddedSymbol::Pad, self.pad_count))
    }

    pub fn to_vec(&self) -> Vec<PaddedSymbol<S>> {
        self.iter().collect()
    }
}

pub fn end_pad<S: Symbol>(w: &[S], k: usize) -> PaddedInput<S> {
    PaddedInput {
        body: w.to_vec(),
        pad_count: k,
    }
}

/// First token of the correct tokenization of `window`, or `None` once the
/// window starts with padding (the stream is exhausted).
///
/// Padding never merges, so only the symbols before the first pad matter.
pub fn first_token<S: Symbol>(
    dict: &Dictionary<S>,
    window: &[PaddedSymbol<S>],
) -> Result<Option<Token<S>>> {
    require_proper(dict)?;
    let body: Vec<S> = window
        .iter()
        .map_while(|p| match p {
            PaddedSymbol::Symbol(s) => Some(*s),
            PaddedSymbol::Pad => None,
        })
        .collect();
    let lengths = segment(dict, &body, Semantics::Sp);
    Ok(lengths
        .first()
        .map(|&len| Token::new(&body[..len]).expect("non-empty")))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StreamOptions {
    /// Window size; defaults to the sufficient lookahead of the dictionary.
    pub lookahead: Option<usize>,
    /// Shadow every emitted token with one computed from a window of the
    /// sufficient lookahead and fail on the first disagreement.
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StreamSummary {
    /// Window size in force.
    pub lookahead: usize,
    pub tokens_emitted: u64,
    pub symbols_consumed: u64,
    /// Largest number of symbols the tokenizing window ever held.
    pub peak_window: usize,
    /// Largest number of symbols buffered, including the verification window.
    pub peak_buffer: usize,
    /// Symbols passed through the merge engine; linear in the input.
    pub work: u64,
}

/// Contiguous FIFO over a `Vec`; popped space is reclaimed once it outweighs
/// the live part, so memory stays within twice the live length.
#[derive(Debug)]
struct Sliding<T> {
    data: Vec<T>,
    start: usize,
}

impl<T> Default for Sliding<T> {
    fn default() -> Self {
        Self {
            data: Vec::new(),
            start: 0,
        }
    }
}

impl<T: Copy> Sliding<T> {
    fn as_slice(&self) -> &[T] {
        &self.data[self.start..]
    }

    fn len(&self) -> usize {
        self.data.len() - self.start
    }

    fn push(&mut self, value: T) {
        self.data.push(value);
    }

    fn extend_from_slice(&mut self, values: &[T]) {
        self.data.extend_from_slice(values);
    }

    fn truncate(&mut self, len: usize) {
        self.data.truncate(self.start + len);
    }

    fn pop_front(&mut self, n: usize) {
        self.start += n;
        if self.start >= 64 && 2 * self.start >= self.data.len() {
            self.data.drain(..self.start);
            self.start = 0;
        }
    }
}

/// Correct segmentation of the first `covered` buffered symbols.
#[derive(Debug, Default)]
struct View {
    limit: usize,
    lengths: Sliding<usize>,
    covered: usize,
}

/// Push-based streaming tokenizer; see the module docs.
pub struct StreamTokenizer<'d, S: Symbol> {
    dict: &'d Dictionary<S>,
    engine: Engine,
    buffer: Sliding<S>,
    capacity: usize,
    primary: View,
    shadow: Option<View>,
    budget: usize,
    fresh: Vec<usize>,
    emit: Vec<S>,
    summary: StreamSummary,
}

impl<'d, S: Symbol> StreamTokenizer<'d, S> {
    /// Fails if the dictionary is not proper. A lookahead of 0 is raised to 1:
    /// the window must hold at least the symbol being emitted.
    pub fn new(dict: &'d Dictionary<S>, options: StreamOptions) -> Result<Self> {
        require_proper(dict)?;
        let sufficient = (dict.size() * dict.max_rule_size()).max(1);
        let lookahead = options.lookahead.unwrap_or(sufficient).max(1);
        let shadow = (options.verify && lookahead < sufficient).then(|| View {
            limit: sufficient,
            ..View::default()
        });
        let capacity = shadow.as_ref().map_or(lookahead, |s| s.limit);
        Ok(Self {
            dict,
            engine: Engine::new(),
            buffer: Sliding::default(),
            capacity,
            primary: View {
                limit: lookahead,
                ..View::default()
            },
            shadow,
            budget: 2 * longest_dependency_chain(dict).len(),
            fresh: Vec::new(),
            emit: Vec::new(),
            summary: StreamSummary {
                lookahead,
                ..StreamSummary::default()
            },
        })
    }

    pub fn lookahead(&self) -> usize {
        self.primary.limit
    }

    pub fn summary(&self) -> &StreamSummary {
        &self.summary
    }

    pub fn push(&mut self, symbol: S, sink: &mut impl FnMut(&[S])) -> Result<()> {
        self.buffer.push(symbol);
        self.summary.symbols_consumed += 1;
        self.summary.peak_buffer = self.summary.peak_buffer.max(self.buffer.len());
        if self.buffer.len() >= self.capacity {
            self.step(sink)?;
        }
        Ok(())
    }

    pub fn feed(&mut self, symbols: &[S], sink: &mut impl FnMut(&[S])) -> Result<()> {
        symbols.iter().try_for_each(|&s| self.push(s, sink))
    }

    /// Signals the end of input and drains the window.
    pub fn finish(mut self, sink: &mut impl FnMut(&[S])) -> Result<StreamSummary> {
        while self.buffer.len() > 0 {
            self.step(sink)?;
        }
        Ok(self.summary)
    }

    fn extend(&mut self, which: usize) {
        let available = self.buffer.len();
        let view = if which == 0 {
            &mut self.primary
        } else {
            self.shadow.as_mut().expect("shadow view")
        };
        let target = view.limit.min(available);
        if target <= view.covered {
            return;
        }
        let window = &self.buffer.as_slice()[..target];
        self.fresh.clear();
        self.engine.run(
            self.dict,
            &window[view.covered..],
            Mode::Sp,
            None,
            &mut self.fresh,
        );
        self.summary.work += (target - view.covered) as u64;
        let splice = glue(
            self.dict,
            &mut self.engine,
            window,
            view.lengths.as_slice(),
            &self.fresh,
            self.budget,
            &mut self.summary.work,
        );
        view.lengths.truncate(splice.keep_left);
        view.lengths.extend_from_slice(&splice.middle);
        view.lengths
            .extend_from_slice(&self.fresh[splice.skip_right..]);
        view.covered = target;
    }

    fn step(&mut self, sink: &mut impl FnMut(&[S])) -> Result<()> {
        self.extend(0);
        self.summary.peak_window = self.summary.peak_window.max(self.primary.covered);
        let Some(&token_len) = self.primary.lengths.as_slice().first() else {
            return Ok(());
        };
        if self.shadow.is_some() {
            self.extend(1);
            let shadow = self.shadow.as_mut().expect("shadow view");
            let expected = shadow.lengths.as_slice()[0];
            if expected != token_len {
                return Err(Error::LookaheadTooSmall {
                    lookahead: self.primary.limit,
                    token_index: self.summary.tokens_emitted,
                    emitted_len: token_len,
                    expected_len: expected,
                });
            }
            shadow.lengths.pop_front(1);
            shadow.covered -= token_len;
        }
        self.emit.clear();
        self.emit
            .extend_from_slice(&self.buffer.as_slice()[..token_len]);
        sink(&self.emit);
        self.summary.tokens_emitted += 1;
        self.buffer.pop_front(token_len);
        self.primary.lengths.pop_front(1);
        self.primary.covered -= token_len;
        Ok(())
    }
}

/// Streams `input` through a [`StreamTokenizer`], handing every token to
/// `sink` as soon as it is fixed.
pub fn stream_tokenize<S: Symbol>(
    dict: &Dictionary<S>,
    input: impl IntoIterator<Item = S>,
    mut sink: impl FnMut(&[S]),
    options: StreamOptions,
) -> Result<StreamSummary> {
    let mut tokenizer = StreamTokenizer::new(dict, options)?;
    for symbol in input {
        tokenizer.push(symbol, &mut sink)?;
    }
    tokenizer.finish(&mut sink)
}

/// Token lengths produced by streaming `w` with a fixed window size.
pub fn stream_lengths<S: Symbol>(
    dict: &Dictionary<S>,
    w: &[S],
    lookahead: usize,
) -> Result<Vec<usize>> {
    let mut lengths = Vec::new();
    stream_tokenize(
        dict,
        w.iter().copied(),
        |t| lengths.push(t.len()),
        StreamOptions {
            lookahead: Some(lookahead),
            verify: false,
        },
    )?;
    Ok(lengths)
}

/// Smallest window size for which streaming agreed with batch tokenization
/// on `samples` random strings of at most `max_len` symbols.
///
/// This is an estimate from below of the true lookahead constant, not a
/// guarantee; the strings are built from the dictionary's own tokens so that
/// long merges actually occur.
pub fn empirical_lookahead<S: Symbol>(
    dict: &Dictionary<S>,
    samples: usize,
    max_len: usize,
    seed: u64,
) -> Result<usize> {
    require_proper(dict)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<Vec<S>> = (0..samples)
        .map(|_| random_string(&mut rng, dict, max_len))
        .collect();
    let batch: Vec<Vec<usize>> = inputs
        .iter()
        .map(|w| segment(dict, w, Semantics::Sp))
        .collect();
    let sufficient = (dict.size() * dict.max_rule_size()).max(1);
    for k in 1..sufficient {
        let mut agrees = true;
        for (w, expected) in inputs.iter().zip(&batch) {
            if stream_lengths(dict, w, k)? != *expected {
                agrees = false;
                break;
            }
        }
        if agrees {
            return Ok(k);
        }
    }
    Ok(sufficient)
}
