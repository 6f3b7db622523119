//! Equivalence classifications of a word-parse prefix into predictor
//! contexts.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::token::{Token, BLANK_TAG};
use crate::transition::WordParsePrefix;

/// One (word, tag) context slot.
pub type Field = (String, String);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bad scheme `{0}`: expected W, w, H, h or gen:p=<int>,n=<int>,tags=<0|1>")]
pub struct SchemeError(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Previous (word, tag).
    WordTag,
    /// Previous word.
    Word,
    /// Exposed (headword, tag).
    HeadTag,
    /// Exposed headword.
    Head,
    /// `p - 1` exposed heads followed by `n - 1` previous words.
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ContextScheme {
    kind: SchemeKind,
    heads: usize,
    words: usize,
    use_tags: bool,
}

impl ContextScheme {
    pub const W: ContextScheme = ContextScheme {
        kind: SchemeKind::WordTag,
        heads: 0,
        words: 1,
        use_tags: true,
    };
    pub const LOWER_W: ContextScheme = ContextScheme {
        kind: SchemeKind::Word,
        heads: 0,
        words: 1,
        use_tags: false,
    };
    pub const H: ContextScheme = ContextScheme {
        kind: SchemeKind::HeadTag,
        heads: 1,
        words: 0,
        use_tags: true,
    };
    pub const LOWER_H: ContextScheme = ContextScheme {
        kind: SchemeKind::Head,
        heads: 1,
        words: 0,
        use_tags: false,
    };

    /// `p - 1` heads and `n - 1` words; `p, n >= 1`.
    pub fn general(p: usize, n: usize, use_tags: bool) -> Result<Self, SchemeError> {
        if p == 0 || n == 0 {
            return Err(SchemeError(format!("gen:p={p},n={n}")));
        }
        Ok(ContextScheme {
            kind: SchemeKind::General,
            heads: p - 1,
            words: n - 1,
            use_tags,
        })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn use_tags(&self) -> bool {
        self.use_tags
    }

    /// Number of context fields produced.
    pub fn arity(&self) -> usize {
        self.heads + self.words
    }

    /// Whether contexts depend on the parse and not only on the words.
    pub fn needs_parse(&self) -> bool {
        self.heads > 0
    }

    pub fn classify(&self, prefix: &WordParsePrefix) -> Vec<Field> {
        let heads = prefix.exposed_heads(self.heads);
        let words = prefix.last_words(self.words);
        heads
            .iter()
            .chain(words.iter())
            .map(|t| self.field(t))
            .collect()
    }

    fn field(&self, t: &Token) -> Field {
        let tag = if self.use_tags { t.tag() } else { BLANK_TAG };
        (t.surface().to_string(), tag.to_string())
    }

    /// Constraint templates used when none are given: the four bigram-style
    /// templates for tagged schemes, the two word-only ones otherwise.
    pub fn default_templates(&self) -> Vec<String> {
        match self.kind {
            SchemeKind::WordTag | SchemeKind::HeadTag => [
                "4 <= <*>_<*> <?>",
                "2 <= <?>_<*> <?>",
                "2 <= <?>_<?> <?>",
                "8 <= <*>_<?> <?>",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            SchemeKind::Word | SchemeKind::Head => ["4 <= <*>_<*> <?>", "2 <= <?>_<*> <?>"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            SchemeKind::General => {
                let n = self.arity();
                let pattern = |slot: usize, pair: &str| {
                    let mut parts: Vec<&str> = vec!["<*>_<*>"; n];
                    parts[slot] = pair;
                    parts.join(" ")
                };
                let mut out =
                    vec![format!("4 <= {} <?>", vec!["<*>_<*>"; n].join(" ")).replace("  ", " ")];
                for slot in 0..n {
                    out.push(format!("2 <= {} <?>", pattern(slot, "<?>_<*>")));
                    if self.use_tags {
                        out.push(format!("2 <= {} <?>", pattern(slot, "<?>_<?>")));
                        out.push(format!("8 <= {} <?>", pattern(slot, "<*>_<?>")));
                    }
                }
                out
            }
        }
    }
}

/// Parser-model context: `(h_0, h_{-1})` with tags.
pub fn parser_context(prefix: &WordParsePrefix) -> Vec<Field> {
    prefix
        .exposed_heads(2)
        .iter()
        .map(|t| (t.surface().to_string(), t.tag().to_string()))
        .collect()
}

/// Templates for the parser model over `(h_0, h_{-1})`.
pub fn default_parser_templates() -> Vec<String> {
    [
        "1 <= <*>_<*> <*>_<*> <?>",
        "1 <= <*>_<?> <*>_<?> <?>",
        "2 <= <?>_<?> <*>_<?> <?>",
        "2 <= <*>_<?> <?>_<?> <?>",
        "3 <= <?>_<*> <?>_<*> <?>",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

impl fmt::Display for ContextScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SchemeKind::WordTag => f.write_str("W"),
            SchemeKind::Word => f.write_str("w"),
            SchemeKind::HeadTag => f.write_str("H"),
            SchemeKind::Head => f.write_str("h"),
            SchemeKind::General => write!(
                f,
                "gen:p={},n={},tags={}",
                self.heads + 1,
                self.words + 1,
                u8::from(self.use_tags)
            ),
        }
    }
}

impl FromStr for ContextScheme {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SchemeError(s.to_string());
        match s {
            "W" => return Ok(Self::W),
            "w" => return Ok(Self::LOWER_W),
            "H" => return Ok(Self::H),
            "h" => return Ok(Self::LOWER_H),
            _ => {}
        }
        let body = s.strip_prefix("gen:").ok_or_else(bad)?;
        let (mut p, mut n, mut tags) = (None, None, None);
        for kv in body.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            let v: usize = v.parse().map_err(|_| bad())?;
            match k {
                "p" => p = Some(v),
                "n" => n = Some(v),
                "tags" if v <= 1 => tags = Some(v == 1),
                _ => return Err(bad()),
            }
        }
        match (p, n, tags) {
            (Some(p), Some(n), Some(tags)) => Self::general(p, n, tags).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transition::{Phase, Transition};

    fn prefix(steps: &[Transition]) -> WordParsePrefix {
        let mut p = WordParsePrefix::new();
        let mut phase = Phase::Predictor;
        for t in steps {
            p.apply_in_place(t, phase).unwrap();
            phase = if *t == Transition::Null {
                Phase::Predictor
            } else {
                Phase::Parser
            };
        }
        p
    }

    fn pred(w: &str, t: &str) -> Transition {
        Transition::Predict(Token::new(w, t).unwrap())
    }

    fn f(w: &str, t: &str) -> Field {
        (w.to_string(), t.to_string())
    }

    #[test]
    fn schemes_round_trip_through_strings() {
        for s in [
            "W",
            "w",
            "H",
            "h",
            "gen:p=2,n=3,tags=1",
            "gen:p=1,n=1,tags=0",
        ] {
            assert_eq!(s.parse::<ContextScheme>().unwrap().to_string(), s);
        }
        assert!("gen:p=0,n=2,tags=1".parse::<ContextScheme>().is_err());
        assert!("gen:p=2,n=2,tags=2".parse::<ContextScheme>().is_err());
        assert!("X".parse::<ContextScheme>().is_err());
    }

    #[test]
    fn sentence_start_pads_with_bos() {
        let p = WordParsePrefix::new();
        assert_eq!(ContextScheme::W.classify(&p), vec![f("<s>", "SB")]);
        assert_eq!(ContextScheme::LOWER_H.classify(&p), vec![f("<s>", "<*>")]);
    }

    #[test]
    fn general_scheme_heads_then_words() {
        // [<s>, (a b)|b, c]
        let p = prefix(&[
            pred("a", "A"),
            Transition::Null,
            pred("b", "B"),
            Transition::AdjoinRight,
            Transition::Null,
            pred("c", "C"),
            Transition::Null,
        ]);
        let s = ContextScheme::general(2, 3, true).unwrap();
        assert_eq!(s.classify(&p), vec![f("c", "C"), f("c", "C"), f("b", "B")]);
    }

    #[test]
    fn head_scheme_skips_attached_modifiers() {
        // the dog [I heard yesterday] -> head dog exposed
        let p = prefix(&[
            pred("the", "DT"),
            Transition::Null,
            pred("dog", "NN"),
            Transition::AdjoinRight,
            Transition::Null,
            pred("yesterday", "NN"),
            Transition::AdjoinLeft,
            Transition::Null,
        ]);
        assert_eq!(ContextScheme::H.classify(&p), vec![f("dog", "NN")]);
        assert_eq!(ContextScheme::W.classify(&p), vec![f("yesterday", "NN")]);
        assert_eq!(parser_context(&p), vec![f("dog", "NN"), f("<s>", "SB")]);
    }

    #[test]
    fn default_template_counts() {
        assert_eq!(ContextScheme::W.default_templates().len(), 4);
        assert_eq!(ContextScheme::LOWER_H.default_templates().len(), 2);
        let g = ContextScheme::general(2, 2, true)
            .unwrap()
            .default_templates();
        assert_eq!(g[0], "4 <= <*>_<*> <*>_<*> <?>");
        assert_eq!(g.len(), 7);
        assert_eq!(
            ContextScheme::general(1, 1, false)
                .unwrap()
                .default_templates(),
            vec!["4 <= <?>".to_string()]
        );
    }
}
