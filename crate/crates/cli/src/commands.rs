//! Command-line arguments and the implementation of every subcommand.
//!
//! Commands read and write through [`Streams`] so they can run against
//! in-memory buffers as well as the process's standard streams.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use bpetk::fuzz::{fuzz, Counterexample, DictionarySource, FuzzConfig, FuzzMode};
use bpetk::{
    analyze, concat_tokenizations, default_budget, empirical_lookahead, splice_edit_with_budget,
    tokenize, tokenize_traced, train, AnalysisReport, Dictionary, Semantics, StreamOptions,
    StreamTokenizer, Tokenization,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dictfile::{parse_any, render, AnyDictionary};
use crate::error::CliError;
use crate::text::{decode, escape, unescape, TextSymbol, Utf8Decoder};

const CHUNK: usize = 1 << 16;

#[derive(Debug, Parser)]
#[command(
    name = "bpetk",
    version,
    about = "Byte pair encoding tokenization toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize a file (or standard input) in one pass.
    Tokenize(TokenizeArgs),
    /// Tokenize standard input (or a file) left to right in bounded memory.
    Stream(StreamArgs),
    /// Train a dictionary on a corpus with one entry per line.
    Train(TrainArgs),
    /// Analyze a dictionary: properness, useless rules, lookahead bounds.
    Check(CheckArgs),
    /// Run randomized differential tests.
    Fuzz(FuzzArgs),
    /// Tokenize two files separately and glue the results.
    Concat(ConcatArgs),
    /// Replace a range of a file and update its tokenization locally.
    Edit(EditArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SemanticsArg {
    /// SentencePiece: highest priority rule, leftmost position, one merge at a time.
    Sp,
    /// HuggingFace: exhaust the highest priority rule left to right.
    Hf,
}

impl From<SemanticsArg> for Semantics {
    fn from(arg: SemanticsArg) -> Self {
        match arg {
            SemanticsArg::Sp => Semantics::Sp,
            SemanticsArg::Hf => Semantics::Hf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlphabetArg {
    Bytes,
    Chars,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    SpVsHf,
    StreamVsBatch,
    ConcatVsFull,
    SwapEquivalence,
}

impl From<ModeArg> for FuzzMode {
    fn from(arg: ModeArg) -> Self {
        match arg {
            ModeArg::SpVsHf => FuzzMode::SpVsHf,
            ModeArg::StreamVsBatch => FuzzMode::StreamVsBatch,
            ModeArg::ConcatVsFull => FuzzMode::ConcatVsFull,
            ModeArg::SwapEquivalence => FuzzMode::SwapEquivalence,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write tokens as records of a 4-byte little-endian length and the raw bytes.
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    /// Dictionary file.
    pub dict: PathBuf,
    /// Input file; standard input when omitted.
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SemanticsArg::Sp)]
    pub semantics: SemanticsArg,
    /// Print every merge as `step rule=<i> pos=<p>` on standard error.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// Dictionary file.
    pub dict: PathBuf,
    /// Input file; standard input when omitted.
    pub input: Option<PathBuf>,
    /// Window size in symbols; defaults to the sufficient lookahead.
    #[arg(long)]
    pub lookahead: Option<usize>,
    /// Check every token against a window of the sufficient lookahead.
    #[arg(long)]
    pub verify: bool,
    /// Print token, symbol and memory counters on standard error.
    #[arg(long)]
    pub stats: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Corpus file; every line is a separate entry.
    pub corpus: PathBuf,
    /// Maximum number of rules.
    #[arg(long)]
    pub rules: usize,
    /// Output dictionary; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = AlphabetArg::Bytes)]
    pub alphabet: AlphabetArg,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Dictionary file.
    pub dict: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
    /// Also estimate the lookahead from this many random strings.
    #[arg(long, value_name = "SAMPLES")]
    pub empirical_lookahead: Option<usize>,
    /// Longest random string for the estimate.
    #[arg(long, default_value_t = 64)]
    pub max_len: usize,
    #[arg(long, env = "BPETK_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    /// Fuzz a fixed dictionary.
    #[arg(
        long,
        required_unless_present = "train_random",
        conflicts_with = "train_random"
    )]
    pub dict: Option<PathBuf>,
    /// Train a fresh random dictionary for every trial.
    #[arg(long)]
    pub train_random: bool,
    /// With --train-random, reorder the rules of half the dictionaries,
    /// which usually makes them improper.
    #[arg(long, requires = "train_random")]
    pub shuffle_rules: bool,
    #[arg(long, default_value_t = 30)]
    pub max_rules: usize,
    #[arg(long, default_value_t = 1000)]
    pub iterations: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::SpVsHf)]
    pub mode: ModeArg,
    #[arg(long, env = "BPETK_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Longest random input string.
    #[arg(long, default_value_t = 200)]
    pub max_len: usize,
}

#[derive(Debug, Args)]
pub struct ConcatArgs {
    /// Dictionary file.
    pub dict: PathBuf,
    /// Left input file.
    pub left: PathBuf,
    /// Right input file.
    pub right: PathBuf,
    /// Widenings per side before retokenizing everything.
    #[arg(long)]
    pub budget: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EditArgs {
    /// Dictionary file.
    pub dict: PathBuf,
    /// Input file to edit.
    pub input: PathBuf,
    /// First symbol offset of the replaced range.
    #[arg(long)]
    pub start: usize,
    /// Offset just past the replaced range.
    #[arg(long)]
    pub end: usize,
    /// Replacement text, with the escapes of the dictionary format.
    #[arg(long, default_value = "")]
    pub replacement: String,
    /// Widenings per side before retokenizing everything.
    #[arg(long)]
    pub budget: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub struct Streams<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

macro_rules! with_dictionary {
    ($any:expr, $d:ident => $body:expr) => {
        match $any {
            AnyDictionary::Bytes($d) => $body,
            AnyDictionary::Chars($d) => $body,
        }
    };
}

pub fn run(cli: Cli, io: &mut Streams<'_>) -> Result<(), CliError> {
    match cli.command {
        Command::Tokenize(args) => {
            with_dictionary!(load_dictionary(&args.dict)?, d => cmd_tokenize(&d, &args, io))
        }
        Command::Stream(args) => {
            with_dictionary!(load_dictionary(&args.dict)?, d => cmd_stream(&d, &args, io))
        }
        Command::Train(args) => match args.alphabet {
            AlphabetArg::Bytes => cmd_train::<u8>(&args, io),
            AlphabetArg::Chars => cmd_train::<char>(&args, io),
        },
        Command::Check(args) => {
            with_dictionary!(load_dictionary(&args.dict)?, d => cmd_check(&d, &args, io))
        }
        Command::Fuzz(args) => match &args.dict {
            Some(path) => {
                with_dictionary!(load_dictionary(path)?, d => cmd_fuzz(DictionarySource::Fixed(d), &args, io))
            }
            None => cmd_fuzz::<u8>(
                DictionarySource::TrainRandom {
                    max_rules: args.max_rules,
                    shuffle: args.shuffle_rules,
                },
                &args,
                io,
            ),
        },
        Command::Concat(args) => {
            with_dictionary!(load_dictionary(&args.dict)?, d => cmd_concat(&d, &args, io))
        }
        Command::Edit(args) => {
            with_dictionary!(load_dictionary(&args.dict)?, d => cmd_edit(&d, &args, io))
        }
    }
}

pub fn load_dictionary(path: &Path) -> Result<AnyDictionary, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_any(&text).map_err(|e| CliError::dictionary(path, e))
}

fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> Result<Vec<u8>, CliError> {
    match path {
        Some(path) => fs::read(path).map_err(|e| CliError::io(path, e)),
        None => {
            let mut bytes = Vec::new();
            stdin
                .read_to_end(&mut bytes)
                .map_err(|e| CliError::io("<stdin>", e))?;
            Ok(bytes)
        }
    }
}

fn read_symbols<S: TextSymbol>(
    path: Option<&Path>,
    stdin: &mut dyn Read,
) -> Result<Vec<S>, CliError> {
    let bytes = read_input(path, stdin)?;
    decode(&bytes).map_err(|e| CliError::Parse(format!("{}: {e}", display_input(path))))
}

fn display_input(path: Option<&Path>) -> String {
    path.map_or("<stdin>".into(), |p| p.display().to_string())
}

fn stdout_error(e: io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn stderr_error(e: io::Error) -> CliError {
    CliError::io("<stderr>", e)
}

/// Writes tokens one per line (escaped) or as binary records.
struct TokenWriter<'a> {
    out: &'a mut dyn Write,
    binary: bool,
    buf: Vec<u8>,
    error: Option<io::Error>,
}

impl<'a> TokenWriter<'a> {
    fn new(out: &'a mut dyn Write, binary: bool) -> Self {
        Self {
            out,
            binary,
            buf: Vec::new(),
            error: None,
        }
    }

    fn write<S: TextSymbol>(&mut self, token: &[S]) {
        if self.error.is_some() {
            return;
        }
        self.buf.clear();
        if self.binary {
            let mut raw = Vec::new();
            S::write_raw(token, &mut raw);
            self.buf
                .extend_from_slice(&(raw.len() as u32).to_le_bytes());
            self.buf.extend_from_slice(&raw);
        } else {
            self.buf.extend_from_slice(escape(token).as_bytes());
            self.buf.push(b'\n');
        }
        if let Err(e) = self.out.write_all(&self.buf) {
            self.error = Some(e);
        }
    }

    fn write_all<S: TextSymbol>(&mut self, t: &Tokenization<S>) -> Result<(), CliError> {
        for token in t.tokens() {
            self.write(token.symbols());
        }
        self.check()
    }

    fn check(&mut self) -> Result<(), CliError> {
        self.error.take().map_or(Ok(()), |e| Err(stdout_error(e)))
    }
}

fn cmd_tokenize<S: TextSymbol>(
    d: &Dictionary<S>,
    args: &TokenizeArgs,
    io: &mut Streams<'_>,
) -> Result<(), CliError> {
    let w: Vec<S> = read_symbols(args.input.as_deref(), io.stdin)?;
    let semantics = args.semantics.into();
    let result = if args.trace {
        let trace = tokenize_traced(d, &w, semantics);
        for step in &trace.steps {
            writeln!(
                io.stderr,
                "step rule={} pos={}",
                step.rule_index, step.position
            )
            .map_err(stderr_error)?;
        }
        trace.result
    } else {
        tokenize(d, &w, semantics)
    };
    TokenWriter::new(io.stdout, args.output.binary).write_all(&result)
}

fn cmd_stream<S: TextSymbol>(
    d: &Dictionary<S>,
    args: &StreamArgs,
    io: &mut Streams<'_>,
) -> Result<(), CliError> {
    let options = StreamOptions {
        lookahead: args.lookahead,
        verify: args.verify,
    };
    let mut tokenizer = StreamTokenizer::new(d, options)?;
    let mut file;
    let source: &mut dyn Read = match &args.input {
        Some(path) => {
            file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            &mut file
        }
        None => io.stdin,
    };
    let name = display_input(args.input.as_deref());
    let mut writer = TokenWriter::new(io.stdout, args.output.binary);
    let mut chunk = vec![0u8; CHUNK];
    let mut decoder = Utf8Decoder::default();
    let mut symbols: Vec<S> = Vec::with_capacity(CHUNK);
    loop {
        let n = match source.read(&mut chunk) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(CliError::io(&name, e)),
        };
        symbols.clear();
        S::decode_chunk(&mut decoder, &chunk[..n], &mut symbols)
            .map_err(|e| CliError::Parse(format!("{name}: {e}")))?;
        tokenizer.feed(&symbols, &mut |t: &[S]| writer.write(t))?;
        writer.check()?;
    }
    decoder
        .finish()
        .map_err(|e| CliError::Parse(format!("{name}: {e}")))?;
    let summary = tokenizer.finish(&mut |t: &[S]| writer.write(t))?;
    writer.check()?;
    if args.stats {
        writeln!(
            io.stderr,
            "tokens={} symbols={} lookahead={} peak_window={} peak_buffer={} work={}",
            summary.tokens_emitted,
            summary.symbols_consumed,
            summary.lookahead,
            summary.peak_window,
            summary.peak_buffer,
            summary.work
        )
        .map_err(stderr_error)?;
    }
    Ok(())
}

fn cmd_train<S: TextSymbol>(args: &TrainArgs, io: &mut Streams<'_>) -> Result<(), CliError> {
    let symbols: Vec<S> = read_symbols(Some(&args.corpus), io.stdin)?;
    let newline = S::symbols_of("\n")[0];
    let mut corpus: Vec<&[S]> = symbols.split(|&s| s == newline).collect();
    if corpus.last().is_some_and(|entry| entry.is_empty()) {
        corpus.pop();
    }
    let run = train(&corpus, args.rules)?;
    for (i, step) in run.steps.iter().enumerate() {
        writeln!(
            io.stderr,
            "rule {i}: {} {} count={}",
            escape(step.rule.left.symbols()),
            escape(step.rule.right.symbols()),
            step.count
        )
        .map_err(stderr_error)?;
    }
    if run.halted_early {
        writeln!(
            io.stderr,
            "warning: stopped after {} of {} rules: no remaining pair occurs twice",
            run.steps.len(),
            args.rules
        )
        .map_err(stderr_error)?;
    }
    let text = render(&run.dictionary);
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => io.stdout.write_all(text.as_bytes()).map_err(stdout_error),
    }
}

/// The analysis report as printed by `check`.
#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub alphabet: &'static str,
    #[serde(flatten)]
    pub analysis: AnalysisReport,
    pub empirical_lookahead: Option<usize>,
}

fn join(indices: &[usize]) -> String {
    if indices.is_empty() {
        "none".into()
    } else {
        indices
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn optional(value: Option<usize>) -> String {
    value.map_or("n/a".into(), |v| v.to_string())
}

fn render_text_report(report: &CheckReport) -> String {
    let a = &report.analysis;
    let mut out = format!("alphabet: {}\n", report.alphabet);
    out.push_str(&format!("rules: {}\n", a.rule_count));
    out.push_str(&format!("max rule size: {}\n", a.max_rule_size));
    out.push_str(&format!("proper: {}\n", a.properness.proper));
    for v in &a.properness.violations {
        out.push_str(&format!("violation: {v}\n"));
    }
    out.push_str(&format!(
        "useless rules (sp): {}\n",
        join(&a.useless_rules_sp)
    ));
    out.push_str(&format!(
        "useless rules (hf): {}\n",
        join(&a.useless_rules_hf)
    ));
    out.push_str(&format!(
        "sufficient lookahead: {}\n",
        optional(a.sufficient_lookahead)
    ));
    out.push_str(&format!(
        "chain length upper bound: {}\n",
        optional(a.chain_length_upper_bound)
    ));
    out.push_str(&format!(
        "improved lookahead: {}\n",
        optional(a.improved_lookahead)
    ));
    out.push_str(&format!(
        "dependency chain: {}\n",
        join(&a.dependency_chain)
    ));
    if let Some(k) = report.empirical_lookahead {
        out.push_str(&format!("empirical lookahead: {k}\n"));
    }
    out
}

fn cmd_check<S: TextSymbol>(
    d: &Dictionary<S>,
    args: &CheckArgs,
    io: &mut Streams<'_>,
) -> Result<(), CliError> {
    let analysis = analyze(d);
    let proper = analysis.properness.proper;
    let empirical = match args.empirical_lookahead {
        Some(samples) if proper => Some(empirical_lookahead(d, samples, args.max_len, args.seed)?),
        _ => None,
    };
    let report = CheckReport {
        alphabet: S::ALPHABET.name(),
        analysis,
        empirical_lookahead: empirical,
    };
    let text = match args.report {
        ReportFormat::Text => render_text_report(&report),
        ReportFormat::Json => serde_json::to_string_pretty(&report).expect("serializable") + "\n",
    };
    io.stdout.write_all(text.as_bytes()).map_err(stdout_error)?;
    if proper {
        Ok(())
    } else {
        Err(CliError::Reported(4))
    }
}

fn rules_inline<S: TextSymbol>(d: &Dictionary<S>) -> String {
    d.rules()
        .iter()
        .map(|r| format!("{} {}", escape(r.left.symbols()), escape(r.right.symbols())))
        .collect::<Vec<_>>()
        .join(", ")
}

fn tokens_inline<S: TextSymbol>(t: &Tokenization<S>) -> String {
    t.tokens()
        .iter()
        .map(|token| escape(token.symbols()))
        .collect::<Vec<_>>()
        .join(" | ")
}

fn write_counterexample<S: TextSymbol>(
    out: &mut dyn Write,
    kind: &str,
    example: &Counterexample<S>,
) -> io::Result<()> {
    writeln!(out, "{kind} at trial {}: {}", example.trial, example.detail)?;
    writeln!(out, "  dictionary: [{}]", rules_inline(&example.dictionary))?;
    writeln!(out, "  input: {}", escape(&example.input))?;
    writeln!(out, "  expected: {}", tokens_inline(&example.expected))?;
    writeln!(out, "  actual: {}", tokens_inline(&example.actual))
}

fn cmd_fuzz<S: TextSymbol>(
    source: DictionarySource<S>,
    args: &FuzzArgs,
    io: &mut Streams<'_>,
) -> Result<(), CliError> {
    let config = FuzzConfig {
        mode: args.mode.into(),
        trials: args.iterations,
        seed: args.seed,
        max_len: args.max_len,
    };
    let report = fuzz(&source, &config);
    let out = &mut *io.stdout;
    writeln!(
        out,
        "mode={} seed={} trials={} checked={} violations={} findings={}",
        report.mode, args.seed, report.trials, report.checked, report.violations, report.findings
    )
    .map_err(stdout_error)?;
    if let Some(example) = &report.first_violation {
        write_counterexample(out, "violation", example).map_err(stdout_error)?;
    }
    if let Some(example) = &report.first_finding {
        write_counterexample(out, "finding (improper dictionary)", example)
            .map_err(stdout_error)?;
    }
    if report.is_clean() {
        Ok(())
    } else {
        Err(CliError::Violation(format!(
            "{} violation(s) of {} in {} trials",
            report.violations, report.mode, report.trials
        )))
    }
}

fn cmd_concat<S: TextSymbol>(
    d: &Dictionary<S>,
    args: &ConcatArgs,
    io: &mut Streams<'_>,
) -> Result<(), CliError> {
    let left: Vec<S> = read_symbols(Some(&args.left), io.stdin)?;
    let right: Vec<S> = read_symbols(Some(&args.right), io.stdin)?;
    let left = tokenize(d, &left, Semantics::Sp);
    let right = tokenize(d, &right, Semantics::Sp);
    let budget = args.budget.unwrap_or_else(|| default_budget(d));
    let outcome = concat_tokenizations(d, &left, &right, budget)?;
    writeln!(
        io.stderr,
        "left_rollback={} right_rollback={} fell_back={}",
        outcome.left_rollback, outcome.right_rollback, outcome.fell_back
    )
    .map_err(stderr_error)?;
    TokenWriter::new(io.stdout, args.output.binary).write_all(&outcome.result)
}

fn cmd_edit<S: TextSymbol>(
    d: &Dictionary<S>,
    args: &EditArgs,
    io: &mut Streams<'_>,
) -> Result<(), CliError> {
    let w: Vec<S> = read_symbols(Some(&args.input), io.stdin)?;
    let replacement: Vec<S> =
        unescape(&args.replacement).map_err(|e| CliError::Parse(format!("--replacement: {e}")))?;
    let original = tokenize(d, &w, Semantics::Sp);
    let budget = args.budget.unwrap_or_else(|| default_budget(d));
    let result = splice_edit_with_budget(d, &original, args.start, args.end, &replacement, budget)?;
    TokenWriter::new(io.stdout, args.output.binary).write_all(&result)
}
