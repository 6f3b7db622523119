//! The `slm` command line: `prep`, `train`, `ppl`, `report`, `sample`,
//! `enum`, `joint` and `synth`.
//!
//! Every artifact starts with `#` header lines recording the tool version,
//! the command, the settings that affect the output and the SHA-256 of each
//! input (by basename). Thread count and output paths are left out so
//! reruns compare byte for byte.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::eval::{compare_report, perplexity, Corpus, EvalError, PerplexityOptions};
use crate::events::{extract_corpus, EventError, EventSet};
use crate::lm::{
    parser_vocabulary, predictor_vocabulary, JointModel, LmError, OutcomeCoding, Sample,
};
use crate::maxent::{train_gis, CondMaxEntModel, GisOptions, MaxEntError};
use crate::oracle::{enumerate_complete_parses, synth_corpus_gen, write_corpus, SynthSpec};
use crate::scheme::{default_parser_templates, ContextScheme};
use crate::token::Token;
use crate::transition::{derivation_of, TransitionError};
use crate::treebank::{read_parsed_corpus, HeadRules, TreebankError};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;
pub const EXIT_MISSING_PARSE: i32 = 5;
pub const EXIT_NOT_COMPLETE: i32 = 6;
pub const EXIT_TRAINING: i32 = 7;

#[derive(Debug, Parser)]
#[command(name = "slm", version, about = "Structured language model toolkit")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bracketed treebank to an event file.
    Prep(PrepArgs),
    /// Fit a predictor or parser model on an event file with GIS.
    Train(TrainArgs),
    /// Perplexity of a predictor model on a corpus.
    Ppl(PplArgs),
    /// Side-by-side perplexity table for several predictor models.
    Report(ReportArgs),
    /// Ancestral sampling of sentences with parses.
    Sample(SampleArgs),
    /// All complete parses of a sentence of the given length.
    Enum(EnumArgs),
    /// Joint log-probability of each parsed sentence.
    Joint(JointArgs),
    /// Synthetic treebank from the planted head-conditioned generator.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct PrepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub head_rules: Option<PathBuf>,
    #[arg(long, default_value = "W")]
    pub scheme: ContextScheme,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// `predictor` or `parser`.
    #[arg(long, default_value = "predictor")]
    pub component: Component,
    /// Defaults to the scheme recorded in the event file.
    #[arg(long)]
    pub scheme: Option<ContextScheme>,
    /// Semicolon-separated templates; defaults depend on the scheme.
    #[arg(long)]
    pub templates: Option<String>,
    #[arg(long, default_value_t = 1e-4)]
    pub alpha: f64,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Component {
    Predictor,
    Parser,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Bracketed parses, or one tokenized sentence per line with `--raw`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub head_rules: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PplArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Also score the `</s>` predictions.
    #[arg(long)]
    pub include_boundary: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `NAME=PATH`, or `PATH` to name the row after its scheme. Repeatable.
    #[arg(long = "model", required = true, action = clap::ArgAction::Append)]
    pub models: Vec<String>,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Tab-separated output instead of the aligned table.
    #[arg(long)]
    pub tsv: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub predictor: PathBuf,
    #[arg(long)]
    pub parser: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 100)]
    pub max_words: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnumArgs {
    #[arg(long)]
    pub len: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JointArgs {
    #[arg(long)]
    pub predictor: PathBuf,
    #[arg(long)]
    pub parser: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub head_rules: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub sentences: usize,
    /// No modifiers and no objects.
    #[arg(long)]
    pub degenerate: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::new(EXIT_IO, format!("{}: {e}", path.display()))
    }
}

impl From<TreebankError> for CliError {
    fn from(e: TreebankError) -> Self {
        CliError::new(EXIT_FORMAT, e.to_string())
    }
}

impl From<EventError> for CliError {
    fn from(e: EventError) -> Self {
        let code = match &e {
            EventError::Sentence { .. } => EXIT_NOT_COMPLETE,
            EventError::Format { .. } => EXIT_FORMAT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<MaxEntError> for CliError {
    fn from(e: MaxEntError) -> Self {
        let code = match &e {
            MaxEntError::Format { .. } | MaxEntError::TemplateSyntax { .. } => EXIT_FORMAT,
            _ => EXIT_TRAINING,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::MissingParse(_) => EXIT_MISSING_PARSE,
            EvalError::Sentence { .. } => EXIT_NOT_COMPLETE,
            EvalError::EmptyCorpus | EvalError::Table { .. } => EXIT_FORMAT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<LmError> for CliError {
    fn from(e: LmError) -> Self {
        let code = match &e {
            LmError::Transition(_) => EXIT_NOT_COMPLETE,
            _ => EXIT_FORMAT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<TransitionError> for CliError {
    fn from(e: TransitionError) -> Self {
        CliError::new(EXIT_NOT_COMPLETE, e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Expands `--config FILE` into flags placed right after the subcommand, so
/// flags given on the command line win. Lines are `key=value`; `#` starts a
/// comment; a bare `key` is a switch.
pub fn expand_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .ok_or_else(|| CliError::new(EXIT_USAGE, "--config needs a file"))?;
    let path = PathBuf::from(path);
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let mut rest: Vec<OsString> = args[..pos].to_vec();
    rest.extend_from_slice(&args[pos + 2..]);
    let mut extra = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => extra.push(format!("--{}={}", k.trim(), v.trim()).into()),
            None => extra.push(format!("--{line}").into()),
        }
    }
    // Position of the subcommand: first argument after the program name
    // that is not a global flag or its value.
    let mut i = 1;
    while i < rest.len() {
        let a = rest[i].to_string_lossy();
        if a == "--threads" {
            i += 2;
        } else if a.starts_with("--threads=") {
            i += 1;
        } else {
            break;
        }
    }
    let at = (i + 1).min(rest.len());
    rest.splice(at..at, extra);
    Ok(rest)
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = match expand_config(args.into_iter().map(Into::into).collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("slm: {}", e.message);
            return e.code;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("slm: {}", e.message);
            e.code
        }
    }
}

pub fn main() -> i32 {
    run_from(std::env::args_os())
}

pub fn run(cli: Cli) -> CliResult {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Prep(a) => prep(a),
        Command::Train(a) => train(a),
        Command::Ppl(a) => ppl(a),
        Command::Report(a) => report(a),
        Command::Sample(a) => sample(a),
        Command::Enum(a) => enumerate(a),
        Command::Joint(a) => joint(a),
        Command::Synth(a) => synth(a),
    })
}

struct Input {
    name: String,
    text: String,
}

fn read_input(path: &Path) -> CliResult<Input> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Input { name, text })
}

fn digest(input: &Input) -> String {
    format!(
        "input={} sha256={}",
        input.name,
        hex::encode(Sha256::digest(input.text.as_bytes()))
    )
}

/// Header lines (without the leading `# `).
fn header(command: &str, settings: &[(&str, String)], inputs: &[&Input]) -> Vec<String> {
    let mut h = vec![
        format!("slm={}", env!("CARGO_PKG_VERSION")),
        format!("command={command}"),
    ];
    h.extend(settings.iter().map(|(k, v)| format!("{k}={v}")));
    h.extend(inputs.iter().map(|i| digest(i)));
    h
}

fn with_header(header: &[String], body: &str) -> String {
    let mut s = String::new();
    for h in header {
        writeln!(s, "# {h}").unwrap();
    }
    s.push_str(body);
    s
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so the final path never holds a partial artifact.
fn write_atomic(path: &Path, contents: &str) -> CliResult {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn emit(out: &Option<PathBuf>, contents: &str) -> CliResult {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn head_rules(path: &Option<PathBuf>) -> CliResult<(HeadRules, Option<Input>)> {
    match path {
        None => Ok((HeadRules::default(), None)),
        Some(p) => {
            let input = read_input(p)?;
            Ok((HeadRules::parse(&input.text)?, Some(input)))
        }
    }
}

fn read_model(path: &Path) -> CliResult<(CondMaxEntModel, Input)> {
    let input = read_input(path)?;
    let model = CondMaxEntModel::from_text(&input.text)
        .map_err(|e| CliError::new(EXIT_FORMAT, format!("{}: {e}", path.display())))?;
    Ok((model, input))
}

fn model_scheme(model: &CondMaxEntModel, path: &Path) -> CliResult<ContextScheme> {
    model
        .meta_value("scheme")
        .ok_or_else(|| {
            CliError::new(
                EXIT_FORMAT,
                format!("{}: model header has no scheme", path.display()),
            )
        })?
        .parse()
        .map_err(|e: crate::scheme::SchemeError| CliError::new(EXIT_FORMAT, e.to_string()))
}

fn prep(a: PrepArgs) -> CliResult {
    let input = read_input(&a.input)?;
    let (rules, rules_input) = head_rules(&a.head_rules)?;
    let trees = read_parsed_corpus(&input.text, &rules)?;
    let events = extract_corpus(&trees, &a.scheme)?;
    let mut inputs = vec![&input];
    inputs.extend(rules_input.as_ref());
    let set = EventSet {
        meta: header(
            "prep",
            &[
                ("scheme", a.scheme.to_string()),
                ("sentences", trees.len().to_string()),
            ],
            &inputs,
        ),
        events,
    };
    write_atomic(&a.out, &set.to_text())
}

fn train(a: TrainArgs) -> CliResult {
    let input = read_input(&a.events)?;
    let set = EventSet::from_text(&input.text)?;
    let scheme = match a.scheme {
        Some(s) => s,
        None => set
            .meta_value("scheme")
            .ok_or_else(|| CliError::new(EXIT_USAGE, "event file has no scheme; pass --scheme"))?
            .parse()
            .map_err(|e: crate::scheme::SchemeError| CliError::new(EXIT_FORMAT, e.to_string()))?,
    };
    let (observations, outcomes, default_templates) = match a.component {
        Component::Predictor => {
            let obs = set.predictor_observations();
            let vocab = predictor_vocabulary(obs.iter().map(|o| o.outcome.as_str()));
            (obs, vocab, scheme.default_templates())
        }
        Component::Parser => (
            set.parser_observations(),
            parser_vocabulary(),
            default_parser_templates(),
        ),
    };
    let templates: Vec<String> = match &a.templates {
        Some(t) => t
            .split(';')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        None => default_templates,
    };
    let mut model =
        CondMaxEntModel::from_events(templates.clone(), outcomes, &observations, a.alpha)?;
    let report = train_gis(
        &mut model,
        &observations,
        GisOptions {
            max_iters: a.iters,
            tol: a.tol,
        },
    )?;
    let component = match a.component {
        Component::Predictor => "predictor",
        Component::Parser => "parser",
    };
    for h in header(
        "train",
        &[
            ("component", component.to_string()),
            ("scheme", scheme.to_string()),
            ("templates", templates.join("; ")),
            ("alpha", a.alpha.to_string()),
            ("iters", a.iters.to_string()),
            ("tol", a.tol.to_string()),
            ("gis_iterations", report.iterations.to_string()),
            ("gis_converged", report.converged.to_string()),
            ("gis_max_violation", format!("{:e}", report.max_violation)),
        ],
        &[&input],
    ) {
        model.push_meta(h);
    }
    eprintln!(
        "slm: {component} model: {} features, {} GIS iterations, max violation {:e}{}",
        model.features().len(),
        report.iterations,
        report.max_violation,
        if report.converged {
            ""
        } else {
            " (not converged)"
        }
    );
    write_atomic(&a.out, &model.to_text())
}

fn read_corpus(a: &CorpusArgs) -> CliResult<(Corpus, Vec<Input>)> {
    let input = read_input(&a.input)?;
    if a.raw {
        let sentences = input
            .text
            .lines()
            .filter(|l| !l.trim_start().starts_with('#'))
            .enumerate()
            .map(|(i, l)| {
                let toks: Vec<Token> = l
                    .split_whitespace()
                    .map(Token::untagged)
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::new(EXIT_FORMAT, format!("sentence {}: {e}", i + 1)))?;
                if toks.is_empty() {
                    return Err(CliError::new(
                        EXIT_FORMAT,
                        format!("sentence {} is empty", i + 1),
                    ));
                }
                Ok(toks)
            })
            .collect::<CliResult<Vec<_>>>()?;
        return Ok((Corpus::Raw(sentences), vec![input]));
    }
    let (rules, rules_input) = head_rules(&a.head_rules)?;
    let trees = read_parsed_corpus(&input.text, &rules)?;
    let mut inputs = vec![input];
    inputs.extend(rules_input);
    Ok((Corpus::Parsed(trees), inputs))
}

fn ppl(a: PplArgs) -> CliResult {
    let (model, model_input) = read_model(&a.model)?;
    let scheme = model_scheme(&model, &a.model)?;
    let (corpus, inputs) = read_corpus(&a.corpus)?;
    let stats = perplexity(
        &model,
        &scheme,
        &corpus,
        PerplexityOptions {
            include_boundary: a.include_boundary,
        },
    )?;
    let mut all: Vec<&Input> = vec![&model_input];
    all.extend(inputs.iter());
    let h = header(
        "ppl",
        &[
            ("scheme", scheme.to_string()),
            ("include_boundary", a.include_boundary.to_string()),
        ],
        &all,
    );
    let body = format!(
        "pp\t{:.1}\nlog_prob\t{:?}\nwords\t{}\noov\t{}\nsentences\t{}\n",
        stats.pp, stats.log_prob, stats.words, stats.oov, stats.sentences
    );
    emit(&a.out, &with_header(&h, &body))
}

fn report(a: ReportArgs) -> CliResult {
    let mut models = Vec::new();
    let mut model_inputs = Vec::new();
    for spec in &a.models {
        let (name, path) = match spec.split_once('=') {
            Some((n, p)) => (Some(n.to_string()), PathBuf::from(p)),
            None => (None, PathBuf::from(spec)),
        };
        let (model, input) = read_model(&path)?;
        let scheme = model_scheme(&model, &path)?;
        models.push((name.unwrap_or_else(|| scheme.to_string()), scheme, model));
        model_inputs.push(input);
    }
    let (corpus, inputs) = read_corpus(&a.corpus)?;
    let rep = compare_report(&models, &corpus)?;
    let mut all: Vec<&Input> = model_inputs.iter().collect();
    all.extend(inputs.iter());
    let h = header(
        "report",
        &[("format", if a.tsv { "tsv" } else { "table" }.into())],
        &all,
    );
    let body = if a.tsv {
        rep.render_tsv()
    } else {
        rep.render_table()
    };
    emit(&a.out, &with_header(&h, &body))
}

fn joint_model(pred: &Path, pars: &Path) -> CliResult<(JointModel, Input, Input)> {
    let (predictor, pi) = read_model(pred)?;
    let scheme = model_scheme(&predictor, pred)?;
    let (parser, qi) = read_model(pars)?;
    let jm = JointModel::new(predictor, scheme, parser, OutcomeCoding::Word)?;
    Ok((jm, pi, qi))
}

fn sample(a: SampleArgs) -> CliResult {
    let (jm, pi, qi) = joint_model(&a.predictor, &a.parser)?;
    let mut body = String::new();
    for i in 0..a.count {
        let seed = a.seed.wrapping_add(i as u64);
        match jm.sample_sentence(seed, a.max_words) {
            Sample::Complete {
                parse, log_prob, ..
            } => writeln!(
                body,
                "{log_prob:?}\t{}",
                crate::treebank::write_complete_parse(&parse)
            )
            .unwrap(),
            Sample::Truncated => writeln!(body, "TRUNCATED").unwrap(),
        }
    }
    let h = header(
        "sample",
        &[
            ("seed", a.seed.to_string()),
            ("count", a.count.to_string()),
            ("max_words", a.max_words.to_string()),
        ],
        &[&pi, &qi],
    );
    emit(&a.out, &with_header(&h, &body))
}

fn enumerate(a: EnumArgs) -> CliResult {
    if a.len == 0 || a.len > 6 {
        return Err(CliError::new(EXIT_USAGE, "--len must be between 1 and 6"));
    }
    let words: Vec<Token> = (1..=a.len)
        .map(|i| Token::new(format!("w{i}"), "X").expect("plain token"))
        .collect();
    let r = enumerate_complete_parses(&words);
    let mut body = String::new();
    for d in &r.derivations {
        writeln!(body, "{}", d.to_line()).unwrap();
    }
    let h = header(
        "enum",
        &[("len", a.len.to_string()), ("count", r.count.to_string())],
        &[],
    );
    emit(&a.out, &with_header(&h, &body))
}

fn joint(a: JointArgs) -> CliResult {
    let (jm, pi, qi) = joint_model(&a.predictor, &a.parser)?;
    let input = read_input(&a.input)?;
    let (rules, rules_input) = head_rules(&a.head_rules)?;
    let trees = read_parsed_corpus(&input.text, &rules)?;
    let mut body = String::new();
    let mut total = 0.0;
    for t in &trees {
        derivation_of(t)?;
        let lp = jm.joint_prob(t)?;
        total += lp;
        writeln!(body, "{lp:?}").unwrap();
    }
    writeln!(body, "total\t{total:?}").unwrap();
    let mut all = vec![&pi, &qi, &input];
    all.extend(rules_input.as_ref());
    let h = header("joint", &[], &all);
    emit(&a.out, &with_header(&h, &body))
}

fn synth(a: SynthArgs) -> CliResult {
    if a.sentences == 0 {
        return Err(CliError::new(EXIT_USAGE, "--sentences must be at least 1"));
    }
    let spec = if a.degenerate {
        SynthSpec::degenerate()
    } else {
        SynthSpec::default()
    };
    let corpus = synth_corpus_gen(a.seed, a.sentences, &spec);
    let h = header(
        "synth",
        &[
            ("seed", a.seed.to_string()),
            ("sentences", a.sentences.to_string()),
            ("degenerate", a.degenerate.to_string()),
        ],
        &[],
    );
    write_atomic(&a.out, &with_header(&h, &write_corpus(&corpus)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(args)
    }

    #[test]
    fn templates_flag_accepts_semicolon_list() {
        let cli = parse(&[
            "slm",
            "train",
            "--scheme",
            "H",
            "--events",
            "e",
            "--out",
            "m",
            "--templates",
            "4 <= <*>_<*> <?>; 2 <= <?>_<*> <?>",
        ])
        .unwrap();
        let Command::Train(t) = cli.command else {
            panic!()
        };
        assert_eq!(t.scheme, Some(ContextScheme::H));
        let n = t.templates.unwrap().split(';').count();
        assert_eq!(n, 2);
    }

    #[test]
    fn missing_events_is_usage_error() {
        assert!(parse(&["slm", "train", "--out", "m"]).is_err());
        assert!(parse(&["slm", "enum", "--len", "3", "--bogus"]).is_err());
        let Command::Enum(e) = parse(&["slm", "enum", "--len", "3"]).unwrap().command else {
            panic!()
        };
        assert_eq!(e.len, 3);
    }

    #[test]
    fn config_values_are_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "# defaults\nalpha=0.5\niters = 3\n").unwrap();
        let args: Vec<OsString> = [
            "slm",
            "--threads",
            "2",
            "train",
            "--config",
            cfg.to_str().unwrap(),
            "--events",
            "e",
            "--out",
            "m",
            "--alpha",
            "0.25",
        ]
        .iter()
        .map(OsString::from)
        .collect();
        let cli = Cli::try_parse_from(expand_config(args).unwrap()).unwrap();
        let Command::Train(t) = cli.command else {
            panic!()
        };
        assert_eq!(t.alpha, 0.25);
        assert_eq!(t.iters, 3);
        assert_eq!(cli.threads, 2);
    }
}
