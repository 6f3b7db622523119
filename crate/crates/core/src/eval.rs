//! Perplexity with the sentence boundary excluded, parameter counts, and
//! the side-by-side model comparison table.

use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::maxent::CondMaxEntModel;
use crate::scheme::ContextScheme;
use crate::token::Token;
use crate::transition::{
    derivation_of, HeadedTree, Phase, Transition, TransitionError, WordParsePrefix,
};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("scheme {0} conditions on parses but the corpus is raw text")]
    MissingParse(String),
    #[error("sentence {index}: {source}")]
    Sentence {
        index: usize,
        source: TransitionError,
    },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("report table, line {line}: {message}")]
    Table { line: usize, message: String },
}

/// Sentences to score.
#[derive(Clone, Debug, PartialEq)]
pub enum Corpus {
    /// Complete parses.
    Parsed(Vec<HeadedTree>),
    /// Tokenized sentences without parses.
    Raw(Vec<Vec<Token>>),
}

impl Corpus {
    pub fn len(&self) -> usize {
        match self {
            Corpus::Parsed(v) => v.len(),
            Corpus::Raw(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct PerplexityOptions {
    /// Also score the `</s>` predictions.
    pub include_boundary: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerplexityStats {
    pub pp: f64,
    /// Sum of `ln P(w_k | context)` over scored events.
    pub log_prob: f64,
    /// Scored predictions.
    pub words: usize,
    /// Scored words outside the model vocabulary (scored as `<unk>`).
    pub oov: usize,
    pub sentences: usize,
}

/// Prediction steps of a raw sentence: each word followed by a null, which
/// gives a flat parse; word-only schemes see the same contexts under any
/// parse.
fn flat_steps(words: &[Token]) -> Vec<Transition> {
    let mut steps = Vec::with_capacity(words.len() * 2 + 3);
    for w in words {
        steps.push(Transition::Predict(w.clone()));
        steps.push(Transition::Null);
    }
    steps.push(Transition::Predict(Token::eos()));
    steps
}

/// Per-sentence `(sum ln p, scored, oov)`.
fn score_sentence(
    model: &CondMaxEntModel,
    scheme: &ContextScheme,
    steps: &[Transition],
    opts: PerplexityOptions,
) -> Result<(f64, usize, usize), TransitionError> {
    let mut prefix = WordParsePrefix::new();
    let mut phase = Phase::Predictor;
    let (mut sum, mut n, mut oov) = (0.0, 0, 0);
    for (step, t) in steps.iter().enumerate() {
        if let Transition::Predict(w) = t {
            if !w.is_eos() || opts.include_boundary {
                let ctx = scheme.classify(&prefix);
                sum += model.cond_prob(&ctx, w.surface()).ln();
                n += 1;
                if model.outcome_id(w.surface()).is_none() {
                    oov += 1;
                }
            }
            if w.is_eos() {
                break;
            }
        }
        prefix
            .apply_in_place(t, phase)
            .map_err(|reason| TransitionError::IllegalTransition {
                step,
                transition: t.code(),
                reason,
            })?;
        phase = if *t == Transition::Null {
            Phase::Predictor
        } else {
            Phase::Parser
        };
    }
    Ok((sum, n, oov))
}

/// `exp(-(1/N) sum ln P(w_k | context))` over predicted words, `</s>`
/// excluded unless requested. Sentence sums are added in corpus order.
pub fn perplexity(
    model: &CondMaxEntModel,
    scheme: &ContextScheme,
    corpus: &Corpus,
    opts: PerplexityOptions,
) -> Result<PerplexityStats, EvalError> {
    let per_sentence: Vec<Result<(f64, usize, usize), EvalError>> = match corpus {
        Corpus::Raw(_) if scheme.needs_parse() => {
            return Err(EvalError::MissingParse(scheme.to_string()))
        }
        Corpus::Raw(sentences) => sentences
            .par_iter()
            .enumerate()
            .map(|(index, s)| {
                score_sentence(model, scheme, &flat_steps(s), opts)
                    .map_err(|source| EvalError::Sentence { index, source })
            })
            .collect(),
        Corpus::Parsed(trees) => trees
            .par_iter()
            .enumerate()
            .map(|(index, t)| {
                derivation_of(t)
                    .and_then(|d| score_sentence(model, scheme, &d.steps, opts))
                    .map_err(|source| EvalError::Sentence { index, source })
            })
            .collect(),
    };
    let mut stats = PerplexityStats {
        pp: 0.0,
        log_prob: 0.0,
        words: 0,
        oov: 0,
        sentences: corpus.len(),
    };
    for r in per_sentence {
        let (sum, n, oov) = r?;
        stats.log_prob += sum;
        stats.words += n;
        stats.oov += oov;
    }
    if stats.words == 0 {
        return Err(EvalError::EmptyCorpus);
    }
    stats.pp = (-stats.log_prob / stats.words as f64).exp();
    Ok(stats)
}

/// Retained features; the GIS correction feature is not a parameter.
pub fn count_params(model: &CondMaxEntModel) -> usize {
    model.features().len()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub pp: f64,
    pub params: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PPReport {
    pub rows: Vec<ReportRow>,
    pub sentences: usize,
    /// Predicted words, `</s>` excluded.
    pub words: usize,
    pub oov: Vec<usize>,
}

/// Scores every named model on the same corpus.
pub fn compare_report(
    models: &[(String, ContextScheme, CondMaxEntModel)],
    corpus: &Corpus,
) -> Result<PPReport, EvalError> {
    let mut report = PPReport {
        rows: Vec::new(),
        sentences: corpus.len(),
        words: 0,
        oov: Vec::new(),
    };
    for (name, scheme, model) in models {
        let stats = perplexity(model, scheme, corpus, PerplexityOptions::default())?;
        report.words = stats.words;
        report.oov.push(stats.oov);
        report.rows.push(ReportRow {
            name: name.clone(),
            pp: stats.pp,
            params: count_params(model),
        });
    }
    Ok(report)
}

impl PPReport {
    /// Fixed-width `LM | PP | param` table, two models per line in the
    /// order given.
    pub fn render_table(&self) -> String {
        let cells: Vec<[String; 3]> = self
            .rows
            .iter()
            .map(|r| [r.name.clone(), format!("{:.1}", r.pp), r.params.to_string()])
            .collect();
        let header = ["LM", "PP", "param"];
        let mut width = header.map(str::len);
        for c in &cells {
            for (w, s) in width.iter_mut().zip(c) {
                *w = (*w).max(s.len());
            }
        }
        let group = |c: &[String; 3]| {
            format!(
                "{:<w0$} | {:>w1$} | {:>w2$}",
                c[0],
                c[1],
                c[2],
                w0 = width[0],
                w1 = width[1],
                w2 = width[2]
            )
        };
        let head = group(&header.map(str::to_string));
        let rule: String = head
            .chars()
            .map(|c| if c == '|' { '+' } else { '-' })
            .collect();
        let per_line = if cells.len() > 1 { 2 } else { 1 };
        let mut out = String::new();
        let join = |parts: Vec<String>| parts.join(" || ");
        writeln!(out, "{}", join(vec![head; per_line])).unwrap();
        writeln!(out, "{}", vec![rule; per_line].join("-++-")).unwrap();
        for pair in cells.chunks(2) {
            writeln!(out, "{}", join(pair.iter().map(group).collect())).unwrap();
        }
        writeln!(
            out,
            "sentences {}  words {}  oov {}",
            self.sentences,
            self.words,
            self.oov
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(",")
        )
        .unwrap();
        out
    }

    /// `LM<TAB>PP<TAB>param` lines with full precision.
    pub fn render_tsv(&self) -> String {
        let mut out = String::from("LM\tPP\tparam\n");
        for r in &self.rows {
            writeln!(out, "{}\t{:?}\t{}", r.name, r.pp, r.params).unwrap();
        }
        out
    }

    /// Reads back the rows of [`render_table`](Self::render_table); `#`
    /// lines are skipped. PP values carry the printed precision.
    pub fn parse_table(text: &str) -> Result<Vec<ReportRow>, EvalError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty()
                || line.starts_with('#')
                || line.starts_with("LM ")
                || line.starts_with('-')
                || line.starts_with("sentences ")
            {
                continue;
            }
            for group in line.split(" || ") {
                let cols: Vec<&str> = group.split('|').map(str::trim).collect();
                let err = |message: &str| EvalError::Table {
                    line: i + 1,
                    message: message.to_string(),
                };
                if cols.len() != 3 {
                    return Err(err("expected `LM | PP | param`"));
                }
                rows.push(ReportRow {
                    name: cols[0].to_string(),
                    pp: cols[1].parse().map_err(|_| err("bad PP"))?,
                    params: cols[2].parse().map_err(|_| err("bad param count"))?,
                });
            }
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::predictor_vocabulary;

    fn raw(s: &str) -> Vec<Token> {
        s.split_whitespace()
            .map(|w| Token::untagged(w).unwrap())
            .collect()
    }

    #[test]
    fn uniform_model_perplexity_is_vocabulary_size() {
        let vocab = predictor_vocabulary(["a", "b", "c"]);
        let v = vocab.len() as f64;
        let m = CondMaxEntModel::new(vec![], vocab, vec![], 0.0).unwrap();
        let corpus = Corpus::Raw(vec![raw("a b"), raw("c a zz")]);
        let s = perplexity(&m, &ContextScheme::W, &corpus, PerplexityOptions::default()).unwrap();
        assert!((s.pp - v).abs() < 1e-12 * v);
        assert_eq!(s.words, 5);
        assert_eq!(s.oov, 1);
    }

    #[test]
    fn raw_corpus_with_head_scheme_is_missing_parse() {
        let m = CondMaxEntModel::new(vec![], predictor_vocabulary(["a"]), vec![], 0.0).unwrap();
        let r = perplexity(
            &m,
            &ContextScheme::H,
            &Corpus::Raw(vec![raw("a")]),
            PerplexityOptions::default(),
        );
        assert_eq!(r, Err(EvalError::MissingParse("H".into())));
    }

    #[test]
    fn table_round_trip() {
        let report = PPReport {
            rows: vec![
                ReportRow {
                    name: "W".into(),
                    pp: 352.04,
                    params: 208487,
                },
                ReportRow {
                    name: "w".into(),
                    pp: 419.0,
                    params: 103732,
                },
                ReportRow {
                    name: "H".into(),
                    pp: 292.46,
                    params: 206540,
                },
                ReportRow {
                    name: "h".into(),
                    pp: 410.0,
                    params: 102437,
                },
            ],
            sentences: 2,
            words: 10,
            oov: vec![0, 0, 0, 0],
        };
        let table = report.render_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "LM |    PP |  param || LM |    PP |  param");
        assert_eq!(lines[2], "W  | 352.0 | 208487 || w  | 419.0 | 103732");
        assert_eq!(lines[3], "H  | 292.5 | 206540 || h  | 410.0 | 102437");
        let rows = PPReport::parse_table(&table).unwrap();
        assert_eq!(rows.len(), 4);
        for (a, b) in rows.iter().zip(&report.rows) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.params, b.params);
            assert_eq!(format!("{:.1}", a.pp), format!("{:.1}", b.pp));
        }
        assert!(report
            .render_tsv()
            .starts_with("LM\tPP\tparam\nW\t352.04\t208487\n"));
    }
}
