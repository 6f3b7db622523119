//! Penn-style bracketed trees, head rules, head percolation and
//! head-preserving binarization.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::token::{Token, TokenError};
use crate::transition::{HeadSide, HeadedTree};

/// Shipped head-rule table.
pub const DEFAULT_HEAD_RULES: &str = include_str!("../data/head_rules.txt");

#[derive(Debug, Error, PartialEq)]
pub enum TreebankError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("head rules, line {line}: {message}")]
    Rules { line: usize, message: String },
    #[error("tree {index} has no words after removing empty elements")]
    EmptySentence { index: usize },
    #[error(transparent)]
    Token(#[from] TokenError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NaryTree {
    Leaf {
        word: String,
        tag: String,
    },
    Node {
        label: String,
        children: Vec<NaryTree>,
    },
}

impl NaryTree {
    pub fn label(&self) -> &str {
        match self {
            NaryTree::Leaf { tag, .. } => tag,
            NaryTree::Node { label, .. } => label,
        }
    }

    pub fn leaves(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            NaryTree::Leaf { word, tag } => out.push((word, tag)),
            NaryTree::Node { children, .. } => {
                for c in children {
                    c.collect_leaves(out);
                }
            }
        }
    }

    /// Drops `-NONE-` leaves (and constituents left empty) and strips
    /// function labels such as `-SBJ` or `=2`. Returns `None` if nothing
    /// remains.
    pub fn strip_empty_elements(self) -> Option<NaryTree> {
        match self {
            NaryTree::Leaf { ref tag, .. } if tag == "-NONE-" => None,
            leaf @ NaryTree::Leaf { .. } => Some(leaf),
            NaryTree::Node { label, children } => {
                let children: Vec<_> = children
                    .into_iter()
                    .filter_map(NaryTree::strip_empty_elements)
                    .collect();
                if children.is_empty() {
                    return None;
                }
                Some(NaryTree::Node {
                    label: base_label(&label).to_string(),
                    children,
                })
            }
        }
    }
}

/// `NP-SBJ-1` -> `NP`, `NP=2` -> `NP`; labels starting with `-` are kept.
fn base_label(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    match label.find(['-', '=']) {
        Some(i) => &label[..i],
        None => label,
    }
}

enum Lexeme<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            text,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self, c: char) {
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
    }

    /// Next lexeme with its (line, column); `#` lines at depth 0 are
    /// comments and handled by the caller through `skip_comment`.
    fn next(&mut self) -> Option<(Lexeme<'a>, usize, usize)> {
        let rest = &self.text[self.pos..];
        let mut chars = rest.chars();
        loop {
            let c = chars.clone().next()?;
            if c.is_whitespace() {
                chars.next();
                self.bump(c);
            } else {
                break;
            }
        }
        let (line, col) = (self.line, self.col);
        let c = self.text[self.pos..].chars().next()?;
        match c {
            '(' => {
                self.bump(c);
                Some((Lexeme::Open, line, col))
            }
            ')' => {
                self.bump(c);
                Some((Lexeme::Close, line, col))
            }
            _ => {
                let start = self.pos;
                while let Some(c) = self.text[self.pos..].chars().next() {
                    if c.is_whitespace() || c == '(' || c == ')' {
                        break;
                    }
                    self.bump(c);
                }
                Some((Lexeme::Atom(&self.text[start..self.pos]), line, col))
            }
        }
    }

    fn at_comment(&self) -> bool {
        let rest = self.text[self.pos..].trim_start();
        rest.starts_with('#')
    }

    fn skip_line(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            self.bump(c);
            if c == '\n' {
                break;
            }
        }
    }
}

/// Parses every top-level bracketing in `text`. Lines starting with `#`
/// outside any bracket are comments. An unlabeled wrapper around a single
/// tree is removed.
pub fn parse_bracketed(text: &str) -> Result<Vec<NaryTree>, TreebankError> {
    let mut lx = Lexer::new(text);
    let mut trees = Vec::new();
    loop {
        while lx.at_comment() {
            lx.skip_line();
        }
        let Some((lexeme, line, column)) = lx.next() else {
            break;
        };
        match lexeme {
            Lexeme::Open => {
                let t = parse_node(&mut lx, line, column)?;
                trees.push(unwrap_outer(t));
            }
            Lexeme::Close => {
                return Err(TreebankError::Syntax {
                    line,
                    column,
                    message: "unbalanced `)`".into(),
                })
            }
            Lexeme::Atom(a) => {
                return Err(TreebankError::Syntax {
                    line,
                    column,
                    message: format!("word `{a}` outside brackets"),
                })
            }
        }
    }
    Ok(trees)
}

fn unwrap_outer(t: NaryTree) -> NaryTree {
    match t {
        NaryTree::Node {
            label,
            mut children,
        } if label.is_empty() && children.len() == 1 => {
            unwrap_outer(children.pop().expect("one child"))
        }
        t => t,
    }
}

/// Parses after an opening bracket at (`line`, `column`).
fn parse_node(lx: &mut Lexer<'_>, line: usize, column: usize) -> Result<NaryTree, TreebankError> {
    let eof = |message: &str| TreebankError::Syntax {
        line,
        column,
        message: message.to_string(),
    };
    let mut label = String::new();
    let mut children = Vec::new();
    let mut word: Option<String> = None;
    let mut first = true;
    loop {
        let Some((lexeme, l, c)) = lx.next() else {
            return Err(eof("unclosed `(`"));
        };
        match lexeme {
            Lexeme::Open => {
                if word.is_some() {
                    return Err(TreebankError::Syntax {
                        line: l,
                        column: c,
                        message: "constituent mixes a word and subtrees".into(),
                    });
                }
                children.push(parse_node(lx, l, c)?);
            }
            Lexeme::Atom(a) if first => label = a.to_string(),
            Lexeme::Atom(a) => {
                if word.is_some() || !children.is_empty() {
                    return Err(TreebankError::Syntax {
                        line: l,
                        column: c,
                        message: format!("unexpected word `{a}`"),
                    });
                }
                word = Some(a.to_string());
            }
            Lexeme::Close => {
                return match word {
                    Some(word) if !label.is_empty() => Ok(NaryTree::Leaf { word, tag: label }),
                    Some(_) => Err(eof("word without a tag")),
                    None if children.is_empty() => Err(eof("empty constituent")),
                    None => Ok(NaryTree::Node { label, children }),
                };
            }
        }
        first = false;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadRule {
    pub direction: Direction,
    pub priority: Vec<String>,
}

impl HeadRule {
    /// Index of the head child: the first priority label found scanning in
    /// `direction`, else the first child in that direction.
    pub fn select(&self, child_labels: &[&str]) -> usize {
        let order: Vec<usize> = match self.direction {
            Direction::LeftToRight => (0..child_labels.len()).collect(),
            Direction::RightToLeft => (0..child_labels.len()).rev().collect(),
        };
        for wanted in &self.priority {
            if let Some(&i) = order.iter().find(|&&i| child_labels[i] == wanted) {
                return i;
            }
        }
        order[0]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeadRules {
    rules: HashMap<String, HeadRule>,
    fallback: HeadRule,
}

impl Default for HeadRules {
    fn default() -> Self {
        HeadRules::parse(DEFAULT_HEAD_RULES).expect("shipped head rules parse")
    }
}

impl HeadRules {
    /// Lines `LABEL DIRECTION prio...`; `*default* DIRECTION` is required.
    pub fn parse(text: &str) -> Result<Self, TreebankError> {
        let mut rules = HashMap::new();
        let mut fallback = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| TreebankError::Rules {
                line: i + 1,
                message,
            };
            let mut fields = line.split_whitespace();
            let label = fields.next().expect("non-empty line");
            let direction = match fields.next() {
                Some("left-to-right" | "left" | "l2r") => Direction::LeftToRight,
                Some("right-to-left" | "right" | "r2l") => Direction::RightToLeft,
                Some(d) => return Err(err(format!("unknown direction `{d}`"))),
                None => return Err(err("missing direction".into())),
            };
            let rule = HeadRule {
                direction,
                priority: fields.map(str::to_string).collect(),
            };
            if label == "*default*" {
                fallback = Some(rule);
            } else if rules.insert(label.to_string(), rule).is_some() {
                return Err(err(format!("duplicate rule for `{label}`")));
            }
        }
        let fallback = fallback.ok_or(TreebankError::Rules {
            line: 0,
            message: "missing `*default*` rule".into(),
        })?;
        Ok(HeadRules { rules, fallback })
    }

    pub fn rule_for(&self, label: &str) -> &HeadRule {
        self.rules.get(label).unwrap_or(&self.fallback)
    }
}

/// An n-ary tree annotated with heads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeadedNary {
    Leaf(Token),
    Node {
        label: String,
        children: Vec<HeadedNary>,
        head_child: usize,
        head: Token,
    },
}

impl HeadedNary {
    pub fn head(&self) -> &Token {
        match self {
            HeadedNary::Leaf(t) => t,
            HeadedNary::Node { head, .. } => head,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            HeadedNary::Leaf(t) => t.tag(),
            HeadedNary::Node { label, .. } => label,
        }
    }
}

pub fn percolate_heads(t: &NaryTree, rules: &HeadRules) -> Result<HeadedNary, TreebankError> {
    match t {
        NaryTree::Leaf { word, tag } => {
            Ok(HeadedNary::Leaf(Token::new(word.clone(), tag.clone())?))
        }
        NaryTree::Node { label, children } => {
            let children = children
                .iter()
                .map(|c| percolate_heads(c, rules))
                .collect::<Result<Vec<_>, _>>()?;
            let labels: Vec<&str> = children.iter().map(HeadedNary::label).collect();
            let head_child = rules.rule_for(label).select(&labels);
            let head = children[head_child].head().clone();
            Ok(HeadedNary::Node {
                label: label.clone(),
                children,
                head_child,
                head,
            })
        }
    }
}

/// Left siblings of the head child are attached first (nearest first, head
/// from the right), then right siblings (nearest first, head from the left).
/// Unary nodes collapse into their child.
pub fn binarize(t: &HeadedNary) -> HeadedTree {
    match t {
        HeadedNary::Leaf(tok) => HeadedTree::Leaf(tok.clone()),
        HeadedNary::Node {
            children,
            head_child,
            ..
        } => {
            let mut cur = Arc::new(binarize(&children[*head_child]));
            for sib in children[..*head_child].iter().rev() {
                cur = Arc::new(HeadedTree::node(
                    Arc::new(binarize(sib)),
                    cur,
                    HeadSide::Right,
                ));
            }
            for sib in &children[*head_child + 1..] {
                cur = Arc::new(HeadedTree::node(
                    cur,
                    Arc::new(binarize(sib)),
                    HeadSide::Left,
                ));
            }
            Arc::unwrap_or_clone(cur)
        }
    }
}

/// Wraps a binarized sentence tree into a complete parse: `</s>` is adjoined
/// at the root from the right unless the tree already ends with it, then
/// `<s>` is adjoined on the left.
pub fn complete_parse(sentence: HeadedTree) -> HeadedTree {
    let ends_with_eos = sentence.leaves().last().is_some_and(|t| t.is_eos());
    let body = if ends_with_eos {
        sentence
    } else {
        HeadedTree::node(
            Arc::new(sentence),
            Arc::new(HeadedTree::Leaf(Token::eos())),
            HeadSide::Right,
        )
    };
    HeadedTree::node(
        Arc::new(HeadedTree::Leaf(Token::bos())),
        Arc::new(body),
        HeadSide::Right,
    )
}

/// Bracketed text to complete parses: strip empty elements, percolate,
/// binarize, wrap with the sentence markers.
pub fn read_parsed_corpus(text: &str, rules: &HeadRules) -> Result<Vec<HeadedTree>, TreebankError> {
    parse_bracketed(text)?
        .into_iter()
        .enumerate()
        .map(|(index, t)| {
            let t = t
                .strip_empty_elements()
                .ok_or(TreebankError::EmptySentence { index })?;
            let headed = percolate_heads(&t, rules)?;
            Ok(complete_parse(binarize(&headed)))
        })
        .collect()
}

/// Renders the part of a complete parse below `<s>` as bracketed text.
pub fn write_complete_parse(t: &HeadedTree) -> String {
    match t {
        HeadedTree::Node { left, right, .. } if left.head().is_bos() => right.to_bracketed(),
        other => other.to_bracketed(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transition::is_complete_parse;

    fn leaf(w: &str, t: &str) -> HeadedNary {
        HeadedNary::Leaf(Token::new(w, t).unwrap())
    }

    fn flat(words: &[&str], head_child: usize) -> HeadedNary {
        let children: Vec<_> = words.iter().map(|w| leaf(w, "T")).collect();
        HeadedNary::Node {
            label: "X".into(),
            head: children[head_child].head().clone(),
            children,
            head_child,
        }
    }

    #[test]
    fn parses_simple_sentence() {
        let trees = parse_bracketed("(S (NP (DT the) (NN dog)) (VP (VBD barked)))").unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].leaves().len(), 3);
    }

    #[test]
    fn reports_imbalance_with_position() {
        assert!(matches!(
            parse_bracketed("(S"),
            Err(TreebankError::Syntax {
                line: 1,
                column: 1,
                ..
            })
        ));
        assert!(matches!(
            parse_bracketed("(S (NN a)))"),
            Err(TreebankError::Syntax {
                line: 1,
                column: 11,
                ..
            })
        ));
        assert!(matches!(
            parse_bracketed("\n ( )"),
            Err(TreebankError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn unwraps_unlabeled_outer_pair() {
        let trees = parse_bracketed("((A (t w)))\n# comment\n( (B (t v)) )").unwrap();
        assert_eq!(trees[0].label(), "A");
        assert_eq!(trees[1].label(), "B");
    }

    #[test]
    fn strips_traces_and_function_labels() {
        let t = parse_bracketed("(S (NP-SBJ-1 (-NONE- *T*)) (NP=2 (-LRB- -LRB-) (NN x)))")
            .unwrap()
            .remove(0)
            .strip_empty_elements()
            .unwrap();
        let NaryTree::Node { children, .. } = &t else {
            panic!()
        };
        assert_eq!(children.len(), 1);
        assert_eq!(children[0].label(), "NP");
        assert_eq!(t.leaves(), vec![("-LRB-", "-LRB-"), ("x", "NN")]);
    }

    #[test]
    fn head_rules_pick_children() {
        let rules = HeadRules::parse("NP right-to-left NN\n*default* right-to-left\n").unwrap();
        let np = parse_bracketed("(NP (DT the) (NN dog))").unwrap().remove(0);
        assert_eq!(
            percolate_heads(&np, &rules).unwrap().head().surface(),
            "dog"
        );
        let unknown = parse_bracketed("(ZZ (A a) (B b) (C c))").unwrap().remove(0);
        assert_eq!(
            percolate_heads(&unknown, &rules).unwrap().head().surface(),
            "c"
        );
        let unary = parse_bracketed("(NP (DT the))").unwrap().remove(0);
        assert_eq!(
            percolate_heads(&unary, &rules).unwrap().head().surface(),
            "the"
        );
        assert!(HeadRules::parse("NP left\n").is_err());
        assert!(HeadRules::parse("*default* sideways\n").is_err());
        HeadRules::default();
    }

    #[test]
    fn binarization_order() {
        assert_eq!(
            binarize(&flat(&["a", "b", "c"], 1)).to_string(),
            "((a b)|b c)|b"
        );
        assert_eq!(binarize(&flat(&["a", "b"], 1)).to_string(), "(a b)|b");
        assert_eq!(
            binarize(&flat(&["a", "b", "c", "d"], 1)).to_string(),
            "(((a b)|b c)|b d)|b"
        );
        assert_eq!(
            binarize(&flat(&["a", "b", "c"], 0)).to_string(),
            "((a b)|a c)|a"
        );
    }

    #[test]
    fn corpus_reader_builds_complete_parses() {
        let corpus = read_parsed_corpus(
            "(S (NP (DT the) (NN dog)) (VP (VBD barked)))",
            &HeadRules::default(),
        )
        .unwrap();
        assert!(is_complete_parse(&corpus[0]));
        assert_eq!(
            corpus[0].to_string(),
            "(<s> (((the dog)|dog barked)|barked </s>)|</s>)|</s>"
        );
        let again =
            read_parsed_corpus(&write_complete_parse(&corpus[0]), &HeadRules::default()).unwrap();
        assert_eq!(again, corpus);
        assert!(matches!(
            read_parsed_corpus("(S (-NONE- *))", &HeadRules::default()),
            Err(TreebankError::EmptySentence { index: 0 })
        ));
    }
}
