//! Word-parse prefixes, headed binary trees and the PREDICTOR/PARSER
//! transition system.
//!
//! A sentence with a complete parse is generated by alternating a word
//! prediction with zero or more adjoins closed by a `Null`. The stack of a
//! [`WordParsePrefix`] always starts with the `<s>` leaf; once `</s>` has been
//! predicted the parser is forced to adjoin right until only `<s>` and one
//! tree remain, and the final `<s>` adjunction is deterministic.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::token::{Token, TokenError, BOS};

#[derive(Debug, Error, PartialEq)]
pub enum TransitionError {
    #[error("illegal transition {transition} at step {step}: {reason}")]
    IllegalTransition {
        step: usize,
        transition: String,
        reason: &'static str,
    },
    #[error("derivation is incomplete: {0}")]
    Incomplete(&'static str),
    #[error("not a complete parse")]
    NotCompleteParse,
    #[error("derivation text, token {index}: {message}")]
    Syntax { index: usize, message: String },
    #[error(transparent)]
    Token(#[from] TokenError),
}

/// Which child a node takes its head from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeadSide {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HeadedTree {
    Leaf(Token),
    Node {
        left: Arc<HeadedTree>,
        right: Arc<HeadedTree>,
        head: Token,
        head_from: HeadSide,
    },
}

impl HeadedTree {
    pub fn leaf(token: Token) -> Self {
        HeadedTree::Leaf(token)
    }

    /// Builds a node whose head percolates from `head_from`.
    pub fn node(left: Arc<HeadedTree>, right: Arc<HeadedTree>, head_from: HeadSide) -> Self {
        let head = match head_from {
            HeadSide::Left => left.head().clone(),
            HeadSide::Right => right.head().clone(),
        };
        HeadedTree::Node {
            left,
            right,
            head,
            head_from,
        }
    }

    pub fn head(&self) -> &Token {
        match self {
            HeadedTree::Leaf(t) => t,
            HeadedTree::Node { head, .. } => head,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, HeadedTree::Leaf(_))
    }

    /// Leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&Token> {
        let mut out = Vec::new();
        let mut todo = vec![self];
        while let Some(t) = todo.pop() {
            match t {
                HeadedTree::Leaf(tok) => out.push(tok),
                HeadedTree::Node { left, right, .. } => {
                    todo.push(right);
                    todo.push(left);
                }
            }
        }
        out
    }

    /// Pushes up to `n` leaves onto `out`, rightmost first.
    fn rightmost_leaves<'a>(&'a self, n: usize, out: &mut Vec<&'a Token>) {
        let mut todo = vec![self];
        while let Some(t) = todo.pop() {
            if out.len() == n {
                return;
            }
            match t {
                HeadedTree::Leaf(tok) => out.push(tok),
                HeadedTree::Node { left, right, .. } => {
                    todo.push(left);
                    todo.push(right);
                }
            }
        }
    }

    /// True when every node's head equals the head of its `head_from` child.
    pub fn heads_consistent(&self) -> bool {
        match self {
            HeadedTree::Leaf(_) => true,
            HeadedTree::Node {
                left,
                right,
                head,
                head_from,
            } => {
                let child = match head_from {
                    HeadSide::Left => left,
                    HeadSide::Right => right,
                };
                child.head() == head && left.heads_consistent() && right.heads_consistent()
            }
        }
    }

    /// Bracketed rendering: leaves as `(tag word)`, nodes as `(HL l r)` or
    /// `(HR l r)` by head side.
    pub fn to_bracketed(&self) -> String {
        let mut s = String::new();
        self.write_bracketed(&mut s);
        s
    }

    fn write_bracketed(&self, out: &mut String) {
        match self {
            HeadedTree::Leaf(t) => {
                out.push('(');
                out.push_str(t.tag());
                out.push(' ');
                out.push_str(t.surface());
                out.push(')');
            }
            HeadedTree::Node {
                left,
                right,
                head_from,
                ..
            } => {
                out.push_str(match head_from {
                    HeadSide::Left => "(HL ",
                    HeadSide::Right => "(HR ",
                });
                left.write_bracketed(out);
                out.push(' ');
                right.write_bracketed(out);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for HeadedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeadedTree::Leaf(t) => write!(f, "{}", t.surface()),
            HeadedTree::Node {
                left, right, head, ..
            } => write!(f, "({} {})|{}", left, right, head.surface()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Transition {
    Predict(Token),
    AdjoinLeft,
    AdjoinRight,
    Null,
}

impl Transition {
    pub fn is_parser_op(&self) -> bool {
        !matches!(self, Transition::Predict(_))
    }

    /// Action code in the derivation text format.
    pub fn code(&self) -> String {
        match self {
            Transition::Predict(t) => format!("P:{}", t.encode()),
            Transition::AdjoinLeft => "AL".to_string(),
            Transition::AdjoinRight => "AR".to_string(),
            Transition::Null => "N".to_string(),
        }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Predictor,
    Parser,
}

/// Transitions allowed in a given state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegalSet {
    /// Any word other than `<s>` may be predicted.
    pub predict: bool,
    pub parser: Vec<Transition>,
}

impl LegalSet {
    pub fn contains(&self, t: &Transition) -> bool {
        match t {
            Transition::Predict(tok) => self.predict && !tok.is_bos(),
            op => self.parser.contains(op),
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.predict && self.parser.is_empty()
    }
}

/// The word-parse k-prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WordParsePrefix {
    stack: Vec<Arc<HeadedTree>>,
    k: usize,
}

impl Default for WordParsePrefix {
    fn default() -> Self {
        Self::new()
    }
}

impl WordParsePrefix {
    pub fn new() -> Self {
        WordParsePrefix {
            stack: vec![Arc::new(HeadedTree::Leaf(Token::bos()))],
            k: 0,
        }
    }

    pub fn stack(&self) -> &[Arc<HeadedTree>] {
        &self.stack
    }

    /// Number of predicted words, `<s>` excluded (`</s>` included once predicted).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h0(&self) -> &Token {
        self.stack.last().expect("stack holds <s>").head()
    }

    /// True when `T_{-1}` is the `<s>` leaf.
    pub fn below_top_is_bos(&self) -> bool {
        self.stack.len() == 2
    }

    /// Outer-loop exit: `h_0 == </s>` and `T_{-1} == <s>`.
    pub fn is_finished(&self) -> bool {
        self.stack.len() == 2 && self.h0().is_eos()
    }

    /// `[h_0, h_{-1}, ...]`, padded with `<s>`.
    pub fn exposed_heads(&self, m: usize) -> Vec<Token> {
        let mut out: Vec<Token> = self
            .stack
            .iter()
            .rev()
            .take(m)
            .map(|t| t.head().clone())
            .collect();
        out.resize(m, Token::bos());
        out
    }

    /// The last `n` words, most recent first, padded with `<s>`.
    pub fn last_words(&self, n: usize) -> Vec<Token> {
        let mut refs = Vec::with_capacity(n);
        for tree in self.stack.iter().rev() {
            if refs.len() == n {
                break;
            }
            tree.rightmost_leaves(n, &mut refs);
        }
        let mut out: Vec<Token> = refs.into_iter().cloned().collect();
        out.resize(n, Token::bos());
        out
    }

    pub fn legal_transitions(&self, phase: Phase) -> LegalSet {
        match phase {
            Phase::Predictor => LegalSet {
                predict: !self.is_finished(),
                parser: Vec::new(),
            },
            Phase::Parser => {
                let parser = if self.stack.len() < 2 {
                    Vec::new()
                } else if self.below_top_is_bos() {
                    vec![Transition::Null]
                } else if self.h0().is_eos() {
                    vec![Transition::AdjoinRight]
                } else {
                    vec![
                        Transition::AdjoinLeft,
                        Transition::AdjoinRight,
                        Transition::Null,
                    ]
                };
                LegalSet {
                    predict: false,
                    parser,
                }
            }
        }
    }

    /// The phase-aware forced transition, if the state admits exactly one.
    pub fn forced_parser_transition(&self) -> Option<Transition> {
        let legal = self.legal_transitions(Phase::Parser);
        (legal.parser.len() == 1).then(|| legal.parser[0].clone())
    }

    /// Applies `t` in place, checking legality for `phase`.
    pub fn apply_in_place(&mut self, t: &Transition, phase: Phase) -> Result<(), &'static str> {
        if !self.legal_transitions(phase).contains(t) {
            return Err(match (phase, t) {
                (Phase::Predictor, Transition::Predict(tok)) if tok.is_bos() => {
                    "<s> cannot be predicted"
                }
                (Phase::Predictor, Transition::Predict(_)) => "sentence already finished",
                (Phase::Predictor, _) => "parser transition in predictor phase",
                (Phase::Parser, Transition::Predict(_)) => "prediction in parser phase",
                (Phase::Parser, _) if self.below_top_is_bos() => "only null is legal after <s>",
                (Phase::Parser, _) => "only adjoin-right is legal when h_0 is </s>",
            });
        }
        match t {
            Transition::Predict(tok) => {
                self.stack.push(Arc::new(HeadedTree::Leaf(tok.clone())));
                self.k += 1;
            }
            Transition::AdjoinLeft | Transition::AdjoinRight => {
                let right = self.stack.pop().expect("legal adjoin");
                let left = self.stack.pop().expect("legal adjoin");
                let side = if *t == Transition::AdjoinLeft {
                    HeadSide::Left
                } else {
                    HeadSide::Right
                };
                self.stack
                    .push(Arc::new(HeadedTree::node(left, right, side)));
            }
            Transition::Null => {}
        }
        Ok(())
    }

    /// Pure variant of [`apply_in_place`](Self::apply_in_place).
    pub fn apply_transition(&self, t: &Transition, phase: Phase) -> Result<Self, TransitionError> {
        let mut next = self.clone();
        next.apply_in_place(t, phase)
            .map_err(|reason| TransitionError::IllegalTransition {
                step: 0,
                transition: t.code(),
                reason,
            })?;
        Ok(next)
    }

    /// The deterministic final `<s>` adjunction of a finished prefix.
    pub fn complete(&self) -> Result<HeadedTree, TransitionError> {
        if !self.is_finished() {
            return Err(TransitionError::Incomplete("</s> not adjoined under <s>"));
        }
        Ok(HeadedTree::node(
            self.stack[0].clone(),
            self.stack[1].clone(),
            HeadSide::Right,
        ))
    }
}

/// Steps of a complete derivation, excluding the implicit final `<s>` adjoin.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Derivation {
    pub steps: Vec<Transition>,
}

impl Derivation {
    pub fn new(steps: Vec<Transition>) -> Self {
        Derivation { steps }
    }

    /// `N_k` for each position: parser ops following the k-th prediction.
    pub fn parser_op_counts(&self) -> Vec<usize> {
        let mut counts = Vec::new();
        for t in &self.steps {
            match t {
                Transition::Predict(_) => counts.push(0),
                _ => {
                    if let Some(c) = counts.last_mut() {
                        *c += 1;
                    }
                }
            }
        }
        counts
    }

    pub fn words(&self) -> Vec<&Token> {
        self.steps
            .iter()
            .filter_map(|t| match t {
                Transition::Predict(tok) if !tok.is_eos() => Some(tok),
                _ => None,
            })
            .collect()
    }

    /// One line: action codes separated by spaces and terminated by `DONE`.
    pub fn to_line(&self) -> String {
        let mut s = String::new();
        for t in &self.steps {
            s.push_str(&t.code());
            s.push(' ');
        }
        s.push_str("DONE");
        s
    }

    pub fn parse_line(line: &str) -> Result<Self, TransitionError> {
        let mut steps = Vec::new();
        let mut done = false;
        for (index, code) in line.split(' ').filter(|c| !c.is_empty()).enumerate() {
            if done {
                return Err(TransitionError::Syntax {
                    index,
                    message: "action after DONE".into(),
                });
            }
            let t = match code {
                "AL" => Transition::AdjoinLeft,
                "AR" => Transition::AdjoinRight,
                "N" => Transition::Null,
                "DONE" => {
                    done = true;
                    continue;
                }
                c => match c.strip_prefix("P:") {
                    Some(tok) => Transition::Predict(Token::decode(tok)?),
                    None => {
                        return Err(TransitionError::Syntax {
                            index,
                            message: format!("unknown action `{c}`"),
                        })
                    }
                },
            };
            steps.push(t);
        }
        if !done {
            return Err(TransitionError::Syntax {
                index: steps.len(),
                message: "missing DONE".into(),
            });
        }
        Ok(Derivation { steps })
    }
}

/// Replays a derivation from the initial prefix, including the final
/// deterministic `<s>` adjunction.
pub fn replay(d: &Derivation) -> Result<HeadedTree, TransitionError> {
    let mut prefix = WordParsePrefix::new();
    let mut phase = Phase::Predictor;
    for (step, t) in d.steps.iter().enumerate() {
        prefix
            .apply_in_place(t, phase)
            .map_err(|reason| TransitionError::IllegalTransition {
                step,
                transition: t.code(),
                reason,
            })?;
        phase = match t {
            Transition::Predict(_) => Phase::Parser,
            Transition::Null => Phase::Predictor,
            _ => Phase::Parser,
        };
    }
    if phase != Phase::Predictor {
        return Err(TransitionError::Incomplete(
            "parser phase not closed by null",
        ));
    }
    prefix.complete()
}

/// Checks the complete-parse conditions: `(<s> R)` headed from the right,
/// `R` spanning `w_1 .. w_l </s>`, `</s>` heading every constituent that
/// contains it, and consistent percolation everywhere.
pub fn is_complete_parse(t: &HeadedTree) -> bool {
    let HeadedTree::Node {
        left,
        right,
        head_from: HeadSide::Right,
        ..
    } = t
    else {
        return false;
    };
    if !matches!(left.as_ref(), HeadedTree::Leaf(tok) if tok.is_bos()) {
        return false;
    }
    if !t.heads_consistent() {
        return false;
    }
    let leaves = right.leaves();
    let Some((last, body)) = leaves.split_last() else {
        return false;
    };
    if !last.is_eos() || body.iter().any(|w| w.is_eos() || w.surface() == BOS) {
        return false;
    }
    // every node on the right spine of R contains </s> and must take its head from the right
    let mut spine = right.as_ref();
    while let HeadedTree::Node {
        right, head_from, ..
    } = spine
    {
        if *head_from != HeadSide::Right {
            return false;
        }
        spine = right;
    }
    true
}

/// The unique derivation of a complete parse.
pub fn derivation_of(t: &HeadedTree) -> Result<Derivation, TransitionError> {
    if !is_complete_parse(t) {
        return Err(TransitionError::NotCompleteParse);
    }
    let HeadedTree::Node { right, .. } = t else {
        unreachable!("checked by is_complete_parse")
    };
    // Post-order yields each prediction followed by the adjoins of every
    // constituent ending at that word; a null closes each position.
    let mut steps = Vec::new();
    let mut todo: Vec<(&HeadedTree, bool)> = vec![(right, false)];
    while let Some((node, expanded)) = todo.pop() {
        match node {
            HeadedTree::Leaf(tok) => {
                if !steps.is_empty() {
                    steps.push(Transition::Null);
                }
                steps.push(Transition::Predict(tok.clone()));
            }
            HeadedTree::Node {
                left,
                right,
                head_from,
                ..
            } => {
                if expanded {
                    steps.push(match head_from {
                        HeadSide::Left => Transition::AdjoinLeft,
                        HeadSide::Right => Transition::AdjoinRight,
                    });
                } else {
                    todo.push((node, true));
                    todo.push((right, false));
                    todo.push((left, false));
                }
            }
        }
    }
    steps.push(Transition::Null);
    Ok(Derivation { steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(w: &str) -> Token {
        Token::new(w, "T").unwrap()
    }

    fn leaf(w: &str) -> Arc<HeadedTree> {
        Arc::new(HeadedTree::Leaf(tok(w)))
    }

    fn eos() -> Arc<HeadedTree> {
        Arc::new(HeadedTree::Leaf(Token::eos()))
    }

    fn bos() -> Arc<HeadedTree> {
        Arc::new(HeadedTree::Leaf(Token::bos()))
    }

    fn run(steps: &[Transition]) -> WordParsePrefix {
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

    fn pred(w: &str) -> Transition {
        Transition::Predict(tok(w))
    }

    #[test]
    fn initial_prefix() {
        let p = WordParsePrefix::new();
        assert_eq!(p.stack().len(), 1);
        assert_eq!(p.k(), 0);
        assert_eq!(p.exposed_heads(1), vec![Token::bos()]);
        assert_eq!(p.exposed_heads(2), vec![Token::bos(), Token::bos()]);
        let legal = p.legal_transitions(Phase::Predictor);
        assert!(legal.predict);
        assert!(legal.parser.is_empty());
        assert!(!legal.contains(&Transition::Predict(Token::bos())));
    }

    #[test]
    fn adjoin_left_percolates_from_left_child() {
        let p = run(&[
            pred("the"),
            Transition::Null,
            pred("dog"),
            Transition::AdjoinRight,
            Transition::Null,
            pred("heard"),
        ]);
        // the (the dog) constituent is headed by dog here
        assert_eq!(p.h0().surface(), "heard");
        let p = p
            .apply_transition(&Transition::AdjoinLeft, Phase::Parser)
            .unwrap();
        assert_eq!(p.stack().len(), 2);
        assert_eq!(p.h0().surface(), "dog");
    }

    #[test]
    fn adjoin_right_keeps_eos_head() {
        let p = run(&[
            pred("x"),
            Transition::Null,
            Transition::Predict(Token::eos()),
        ]);
        let p = p
            .apply_transition(&Transition::AdjoinRight, Phase::Parser)
            .unwrap();
        assert!(p.h0().is_eos());
        assert!(p.is_finished() || p.stack().len() == 2);
    }

    #[test]
    fn adjoin_against_bos_is_illegal() {
        let p = run(&[pred("x")]);
        assert_eq!(
            p.legal_transitions(Phase::Parser).parser,
            vec![Transition::Null]
        );
        assert!(matches!(
            p.apply_transition(&Transition::AdjoinLeft, Phase::Parser),
            Err(TransitionError::IllegalTransition { .. })
        ));
    }

    #[test]
    fn parser_legality_cases() {
        let p = run(&[pred("a"), Transition::Null, pred("b")]);
        assert_eq!(p.legal_transitions(Phase::Parser).parser.len(), 3);
        let p = run(&[
            pred("a"),
            Transition::Null,
            pred("b"),
            Transition::Null,
            Transition::Predict(Token::eos()),
        ]);
        assert_eq!(
            p.legal_transitions(Phase::Parser).parser,
            vec![Transition::AdjoinRight]
        );
    }

    #[test]
    fn exposed_heads_and_last_words() {
        // [<s>, (a b)|b, c]
        let p = run(&[
            pred("a"),
            Transition::Null,
            pred("b"),
            Transition::AdjoinRight,
            Transition::Null,
            pred("c"),
        ]);
        assert_eq!(p.exposed_heads(2), vec![tok("c"), tok("b")]);
        assert_eq!(p.exposed_heads(3), vec![tok("c"), tok("b"), Token::bos()]);
        assert_eq!(
            p.last_words(4),
            vec![tok("c"), tok("b"), tok("a"), Token::bos()]
        );
        assert_eq!(p.last_words(5)[4], Token::bos());
    }

    #[test]
    fn eight_step_derivation_round_trip() {
        let w12 = Arc::new(HeadedTree::node(leaf("w1"), leaf("w2"), HeadSide::Left));
        let body = Arc::new(HeadedTree::node(w12, eos(), HeadSide::Right));
        let full = HeadedTree::node(bos(), body, HeadSide::Right);
        assert!(is_complete_parse(&full));
        let d = derivation_of(&full).unwrap();
        assert_eq!(
            d.steps,
            vec![
                pred("w1"),
                Transition::Null,
                pred("w2"),
                Transition::AdjoinLeft,
                Transition::Null,
                Transition::Predict(Token::eos()),
                Transition::AdjoinRight,
                Transition::Null,
            ]
        );
        assert_eq!(replay(&d).unwrap(), full);
        assert_eq!(d.parser_op_counts(), vec![1, 2, 2]);
        assert_eq!(d.to_line(), "P:w1_T N P:w2_T AL N P:</s>_SE AR N DONE");
        assert_eq!(Derivation::parse_line(&d.to_line()).unwrap(), d);
    }

    #[test]
    fn single_word_derivation() {
        let body = Arc::new(HeadedTree::node(leaf("w1"), eos(), HeadSide::Right));
        let full = HeadedTree::node(bos(), body, HeadSide::Right);
        let d = derivation_of(&full).unwrap();
        assert_eq!(
            d.steps,
            vec![
                pred("w1"),
                Transition::Null,
                Transition::Predict(Token::eos()),
                Transition::AdjoinRight,
                Transition::Null,
            ]
        );
        assert_eq!(replay(&d).unwrap(), full);
    }

    #[test]
    fn replay_rejects_bad_derivations() {
        assert!(matches!(
            replay(&Derivation::default()),
            Err(TransitionError::Incomplete(_))
        ));
        let d = Derivation::new(vec![
            pred("w1"),
            Transition::Null,
            pred("w2"),
            Transition::Null,
            Transition::Predict(Token::eos()),
            Transition::AdjoinLeft,
        ]);
        assert!(matches!(
            replay(&d),
            Err(TransitionError::IllegalTransition { step: 5, .. })
        ));
        assert!(Derivation::parse_line("P:a_T N").is_err());
        assert!(Derivation::parse_line("XX DONE").is_err());
    }

    #[test]
    fn completeness_conditions() {
        // (w1 w2) headed by either word is fine
        for side in [HeadSide::Left, HeadSide::Right] {
            let w12 = Arc::new(HeadedTree::node(leaf("w1"), leaf("w2"), side));
            let body = Arc::new(HeadedTree::node(w12, eos(), HeadSide::Right));
            assert!(is_complete_parse(&HeadedTree::node(
                bos(),
                body,
                HeadSide::Right
            )));
        }
        // root headed by w1
        let body = Arc::new(HeadedTree::node(leaf("w1"), eos(), HeadSide::Left));
        assert!(!is_complete_parse(&HeadedTree::node(
            bos(),
            body,
            HeadSide::Right
        )));
        // no </s>
        let body = Arc::new(HeadedTree::node(leaf("w1"), leaf("w2"), HeadSide::Right));
        assert!(!is_complete_parse(&HeadedTree::node(
            bos(),
            body,
            HeadSide::Right
        )));
        assert!(matches!(
            derivation_of(&HeadedTree::Leaf(tok("x"))),
            Err(TransitionError::NotCompleteParse)
        ));
    }

    #[test]
    fn empty_sentence_is_legal() {
        let d = Derivation::new(vec![Transition::Predict(Token::eos()), Transition::Null]);
        let t = replay(&d).unwrap();
        assert!(is_complete_parse(&t));
        assert_eq!(derivation_of(&t).unwrap(), d);
    }
}
