//! Training events read off gold derivations, and the event file format.
//!
//! Each line is either a predictor event
//! `P<TAB>word_tag<TAB>...<TAB>outcome` or a parser event
//! `T<TAB>h0word_h0tag<TAB>h1word_h1tag<TAB>{AL|AR|N}`. Words and tags use
//! the backslash escaping of [`crate::token::escape`]. Lines starting with
//! `#` are metadata.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::maxent::Observation;
use crate::scheme::{parser_context, ContextScheme, Field};
use crate::token::{decode_pair, encode_pair, escape, unescape, TokenError};
use crate::transition::{
    derivation_of, HeadedTree, Phase, Transition, TransitionError, WordParsePrefix,
};

#[derive(Debug, Error, PartialEq)]
pub enum EventError {
    #[error("sentence {index}: {source}")]
    Sentence {
        index: usize,
        source: TransitionError,
    },
    #[error("event file, line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParserAction {
    AdjoinLeft,
    AdjoinRight,
    Null,
}

impl ParserAction {
    pub const ALL: [ParserAction; 3] = [
        ParserAction::AdjoinLeft,
        ParserAction::AdjoinRight,
        ParserAction::Null,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ParserAction::AdjoinLeft => "AL",
            ParserAction::AdjoinRight => "AR",
            ParserAction::Null => "N",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        match s {
            "AL" => Some(ParserAction::AdjoinLeft),
            "AR" => Some(ParserAction::AdjoinRight),
            "N" => Some(ParserAction::Null),
            _ => None,
        }
    }

    pub fn from_transition(t: &Transition) -> Option<Self> {
        match t {
            Transition::AdjoinLeft => Some(ParserAction::AdjoinLeft),
            Transition::AdjoinRight => Some(ParserAction::AdjoinRight),
            Transition::Null => Some(ParserAction::Null),
            Transition::Predict(_) => None,
        }
    }

    pub fn transition(self) -> Transition {
        match self {
            ParserAction::AdjoinLeft => Transition::AdjoinLeft,
            ParserAction::AdjoinRight => Transition::AdjoinRight,
            ParserAction::Null => Transition::Null,
        }
    }
}

impl fmt::Display for ParserAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Predictor {
        context: Vec<Field>,
        outcome: String,
    },
    Parser {
        context: Vec<Field>,
        outcome: ParserAction,
    },
}

impl Event {
    pub fn to_line(&self) -> String {
        let (kind, context, outcome) = match self {
            Event::Predictor { context, outcome } => ("P", context, escape(outcome)),
            Event::Parser { context, outcome } => ("T", context, outcome.code().to_string()),
        };
        let mut s = String::from(kind);
        for (w, t) in context {
            s.push('\t');
            s.push_str(&encode_pair(w, t));
        }
        s.push('\t');
        s.push_str(&outcome);
        s
    }

    pub fn parse_line(line: &str) -> Result<Self, String> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 {
            return Err("too few fields".into());
        }
        let context = fields[1..fields.len() - 1]
            .iter()
            .map(|f| decode_pair(f))
            .collect::<Result<Vec<_>, TokenError>>()
            .map_err(|e| e.to_string())?;
        let last = fields[fields.len() - 1];
        match fields[0] {
            "P" => Ok(Event::Predictor {
                context,
                outcome: unescape(last).map_err(|e| e.to_string())?,
            }),
            "T" => {
                if context.len() != 2 {
                    return Err("parser events carry exactly two context fields".into());
                }
                let outcome = ParserAction::from_code(last)
                    .ok_or_else(|| format!("unknown parser action `{last}`"))?;
                Ok(Event::Parser { context, outcome })
            }
            k => Err(format!("unknown event kind `{k}`")),
        }
    }
}

/// Events in derivation order, sentence after sentence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventSet {
    pub meta: Vec<String>,
    pub events: Vec<Event>,
}

impl EventSet {
    pub fn predictor(&self) -> impl Iterator<Item = (&[Field], &str)> {
        self.events.iter().filter_map(|e| match e {
            Event::Predictor { context, outcome } => Some((context.as_slice(), outcome.as_str())),
            _ => None,
        })
    }

    pub fn parser(&self) -> impl Iterator<Item = (&[Field], ParserAction)> {
        self.events.iter().filter_map(|e| match e {
            Event::Parser { context, outcome } => Some((context.as_slice(), *outcome)),
            _ => None,
        })
    }

    pub fn predictor_observations(&self) -> Vec<Observation> {
        self.predictor()
            .map(|(c, o)| Observation::new(c.to_vec(), o))
            .collect()
    }

    pub fn parser_observations(&self) -> Vec<Observation> {
        self.parser()
            .map(|(c, o)| Observation::new(c.to_vec(), o.code()))
            .collect()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for m in &self.meta {
            writeln!(out, "# {m}")?;
        }
        for e in &self.events {
            writeln!(out, "{}", e.to_line())?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("event text is UTF-8")
    }

    pub fn from_text(text: &str) -> Result<Self, EventError> {
        let mut set = EventSet::default();
        for (i, line) in text.lines().enumerate() {
            if let Some(m) = line.strip_prefix('#') {
                set.meta.push(m.trim_start().to_string());
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let e = Event::parse_line(line).map_err(|message| EventError::Format {
                line: i + 1,
                message,
            })?;
            set.events.push(e);
        }
        Ok(set)
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find_map(|m| m.strip_prefix(key)?.strip_prefix('='))
    }
}

/// Replays the derivation of a complete parse, emitting a predictor event
/// at every prediction and a parser event at every non-forced parser step.
pub fn extract_events(
    t: &HeadedTree,
    scheme: &ContextScheme,
) -> Result<Vec<Event>, TransitionError> {
    let d = derivation_of(t)?;
    let mut prefix = WordParsePrefix::new();
    let mut phase = Phase::Predictor;
    let mut out = Vec::new();
    for (step, tr) in d.steps.iter().enumerate() {
        match tr {
            Transition::Predict(tok) => out.push(Event::Predictor {
                context: scheme.classify(&prefix),
                outcome: tok.surface().to_string(),
            }),
            op => {
                if prefix.forced_parser_transition().is_none() {
                    out.push(Event::Parser {
                        context: parser_context(&prefix),
                        outcome: ParserAction::from_transition(op).expect("parser op"),
                    });
                }
            }
        }
        prefix
            .apply_in_place(tr, phase)
            .map_err(|reason| TransitionError::IllegalTransition {
                step,
                transition: tr.code(),
                reason,
            })?;
        phase = if *tr == Transition::Null {
            Phase::Predictor
        } else {
            Phase::Parser
        };
    }
    Ok(out)
}

/// Extracts events from a whole corpus; sentences may be processed in
/// parallel but the output keeps corpus order.
pub fn extract_corpus(
    trees: &[HeadedTree],
    scheme: &ContextScheme,
) -> Result<Vec<Event>, EventError> {
    let per_sentence: Vec<Result<Vec<Event>, EventError>> = trees
        .par_iter()
        .enumerate()
        .map(|(index, t)| {
            extract_events(t, scheme).map_err(|source| EventError::Sentence { index, source })
        })
        .collect();
    let mut out = Vec::new();
    for r in per_sentence {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::Token;
    use crate::treebank::{read_parsed_corpus, HeadRules};
    use std::sync::Arc;

    fn f(w: &str, t: &str) -> Field {
        (w.to_string(), t.to_string())
    }

    fn w1w2_left() -> HeadedTree {
        let leaf = |w: &str| Arc::new(HeadedTree::Leaf(Token::new(w, "T").unwrap()));
        let w12 = Arc::new(HeadedTree::node(
            leaf("w1"),
            leaf("w2"),
            crate::transition::HeadSide::Left,
        ));
        let body = Arc::new(HeadedTree::node(
            w12,
            Arc::new(HeadedTree::Leaf(Token::eos())),
            crate::transition::HeadSide::Right,
        ));
        HeadedTree::node(
            Arc::new(HeadedTree::Leaf(Token::bos())),
            body,
            crate::transition::HeadSide::Right,
        )
    }

    #[test]
    fn two_word_sentence_events() {
        let events = extract_events(&w1w2_left(), &ContextScheme::W).unwrap();
        assert_eq!(
            events,
            vec![
                Event::Predictor {
                    context: vec![f("<s>", "SB")],
                    outcome: "w1".into()
                },
                Event::Predictor {
                    context: vec![f("w1", "T")],
                    outcome: "w2".into()
                },
                Event::Parser {
                    context: vec![f("w2", "T"), f("w1", "T")],
                    outcome: ParserAction::AdjoinLeft
                },
                Event::Predictor {
                    context: vec![f("w2", "T")],
                    outcome: "</s>".into()
                },
            ]
        );
    }

    #[test]
    fn head_context_for_long_distance_prediction() {
        let corpus = read_parsed_corpus(
            "(S (NP (NP (DT the) (NN dog)) (SBAR (S (NP (PRP I)) (VP (VBD heard) (NP (NN yesterday)))))) (VP (VBD barked) (ADVP (RB again))))",
            &HeadRules::default(),
        )
        .unwrap();
        let events = extract_events(&corpus[0], &ContextScheme::H).unwrap();
        let barked = events
            .iter()
            .find_map(|e| match e {
                Event::Predictor { context, outcome } if outcome == "barked" => {
                    Some(context.clone())
                }
                _ => None,
            })
            .unwrap();
        assert_eq!(barked, vec![f("dog", "NN")]);
    }

    #[test]
    fn file_format_round_trip() {
        let set = EventSet {
            meta: vec!["scheme=W".into()],
            events: vec![
                Event::Predictor {
                    context: vec![f("a_b", "N\tN")],
                    outcome: "x_y".into(),
                },
                Event::Parser {
                    context: vec![f("a", "A"), f("<s>", "SB")],
                    outcome: ParserAction::Null,
                },
            ],
        };
        let text = set.to_text();
        assert_eq!(
            text,
            "# scheme=W\nP\ta\\_b_N\\tN\tx\\_y\nT\ta_A\t<s>_SB\tN\n"
        );
        let back = EventSet::from_text(&text).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.meta_value("scheme"), Some("W"));
        assert!(EventSet::from_text("Q\tx_y\tz\n").is_err());
        assert!(EventSet::from_text("T\tx_y\tAL\n").is_err());
    }
}
