//! The joint model `P(W, T)`: a predictor model over the next word given
//! the classified prefix, and a parser model over adjoin/null transitions
//! given `(h_0, h_{-1})`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::events::ParserAction;
use crate::maxent::CondMaxEntModel;
use crate::scheme::{parser_context, ContextScheme};
use crate::token::{decode_pair, encode_pair, Token, EOS, UNK};
use crate::transition::{
    derivation_of, HeadedTree, Phase, Transition, TransitionError, WordParsePrefix,
};

#[derive(Debug, Error, PartialEq)]
pub enum LmError {
    #[error("parser model outcomes must be exactly AL, AR, N")]
    ParserVocabulary,
    #[error("predictor model vocabulary lacks </s>")]
    MissingEos,
    #[error(transparent)]
    Transition(#[from] TransitionError),
}

/// How predictor outcomes map to tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeCoding {
    /// Outcomes are surface words; sampled words get the placeholder tag.
    Word,
    /// Outcomes are `word_tag` encodings (`</s>` stays bare).
    WordTag,
}

impl OutcomeCoding {
    pub fn outcome(self, t: &Token) -> String {
        match self {
            OutcomeCoding::Word => t.surface().to_string(),
            OutcomeCoding::WordTag if t.is_eos() => EOS.to_string(),
            OutcomeCoding::WordTag => t.encode(),
        }
    }

    pub fn token(self, outcome: &str) -> Token {
        match self {
            OutcomeCoding::Word => Token::untagged(outcome),
            OutcomeCoding::WordTag if outcome == EOS => Ok(Token::eos()),
            OutcomeCoding::WordTag => decode_pair(outcome).and_then(|(w, t)| Token::new(w, t)),
        }
        .unwrap_or_else(|_| Token::untagged(UNK).expect("plain token"))
    }
}

/// Result of ancestral sampling.
#[derive(Clone, Debug, PartialEq)]
pub enum Sample {
    Complete {
        words: Vec<Token>,
        parse: HeadedTree,
        log_prob: f64,
    },
    Truncated,
}

#[derive(Clone, Debug)]
pub struct JointModel {
    predictor: CondMaxEntModel,
    scheme: ContextScheme,
    parser: CondMaxEntModel,
    coding: OutcomeCoding,
    parser_ids: [usize; 3],
}

impl JointModel {
    pub fn new(
        predictor: CondMaxEntModel,
        scheme: ContextScheme,
        parser: CondMaxEntModel,
        coding: OutcomeCoding,
    ) -> Result<Self, LmError> {
        if parser.outcomes().len() != 3 {
            return Err(LmError::ParserVocabulary);
        }
        let mut parser_ids = [0; 3];
        for (slot, a) in parser_ids.iter_mut().zip(ParserAction::ALL) {
            *slot = parser
                .outcome_id(a.code())
                .ok_or(LmError::ParserVocabulary)?;
        }
        if predictor.outcome_id(EOS).is_none() {
            return Err(LmError::MissingEos);
        }
        Ok(JointModel {
            predictor,
            scheme,
            parser,
            coding,
            parser_ids,
        })
    }

    pub fn predictor(&self) -> &CondMaxEntModel {
        &self.predictor
    }

    pub fn parser(&self) -> &CondMaxEntModel {
        &self.parser
    }

    pub fn scheme(&self) -> ContextScheme {
        self.scheme
    }

    pub fn coding(&self) -> OutcomeCoding {
        self.coding
    }

    /// `P(w_k | W_{k-1} T_{k-1})`.
    pub fn predictor_prob(&self, prefix: &WordParsePrefix, w: &Token) -> f64 {
        let ctx = self.scheme.classify(prefix);
        self.predictor.cond_prob(&ctx, &self.coding.outcome(w))
    }

    /// `P(t | W_k T_k)` with the forced cases: null after `<s>`, adjoin-right
    /// when `h_0` is `</s>`.
    pub fn parser_prob(&self, prefix: &WordParsePrefix, t: &Transition) -> f64 {
        let Some(action) = ParserAction::from_transition(t) else {
            return 0.0;
        };
        if let Some(forced) = prefix.forced_parser_transition() {
            return if forced == *t { 1.0 } else { 0.0 };
        }
        if prefix.stack().len() < 2 {
            return 0.0;
        }
        let dist = self.parser.cond_dist(&parser_context(prefix));
        dist[self.parser_ids[action as usize]]
    }

    /// Log-probability contributed by one step; forced parser steps add
    /// nothing.
    fn step_log_prob(&self, prefix: &WordParsePrefix, t: &Transition) -> Option<f64> {
        match t {
            Transition::Predict(w) => Some(self.predictor_prob(prefix, w).ln()),
            _ if prefix.forced_parser_transition().is_some() => None,
            _ => Some(self.parser_prob(prefix, t).ln()),
        }
    }

    /// `ln P(W, T)` of a complete parse, accumulated along its derivation.
    pub fn joint_prob(&self, parse: &HeadedTree) -> Result<f64, LmError> {
        let d = derivation_of(parse)?;
        let mut prefix = WordParsePrefix::new();
        let mut phase = Phase::Predictor;
        let mut total = 0.0;
        for (step, t) in d.steps.iter().enumerate() {
            if let Some(lp) = self.step_log_prob(&prefix, t) {
                total += lp;
            }
            prefix.apply_in_place(t, phase).map_err(|reason| {
                TransitionError::IllegalTransition {
                    step,
                    transition: t.code(),
                    reason,
                }
            })?;
            phase = next_phase(t);
        }
        Ok(total)
    }

    /// Ancestral sampling with a seeded generator.
    pub fn sample_sentence(&self, seed: u64, max_words: usize) -> Sample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, max_words)
    }

    /// Draws one sentence; `Truncated` when more than `max_words` words
    /// would be needed before `</s>`.
    pub fn sample_with<R: Rng>(&self, rng: &mut R, max_words: usize) -> Sample {
        let mut prefix = WordParsePrefix::new();
        let mut words = Vec::new();
        let mut log_prob = 0.0;
        loop {
            // predictor
            let ctx = self.scheme.classify(&prefix);
            let dist = self.predictor.cond_dist(&ctx);
            let y = draw(rng, &dist);
            let w = self.coding.token(&self.predictor.outcomes()[y]);
            if w.is_bos() {
                continue;
            }
            if !w.is_eos() && words.len() == max_words {
                return Sample::Truncated;
            }
            let t = Transition::Predict(w.clone());
            if let Some(lp) = self.step_log_prob(&prefix, &t) {
                log_prob += lp;
            }
            prefix
                .apply_in_place(&t, Phase::Predictor)
                .expect("sampled prediction is legal");
            if !w.is_eos() {
                words.push(w);
            }
            // parser
            loop {
                let t = match prefix.forced_parser_transition() {
                    Some(t) => t,
                    None => {
                        let dist = self.parser.cond_dist(&parser_context(&prefix));
                        let probs: Vec<f64> = self.parser_ids.iter().map(|&i| dist[i]).collect();
                        ParserAction::ALL[draw(rng, &probs)].transition()
                    }
                };
                if let Some(lp) = self.step_log_prob(&prefix, &t) {
                    log_prob += lp;
                }
                prefix
                    .apply_in_place(&t, Phase::Parser)
                    .expect("sampled parser step is legal");
                if t == Transition::Null {
                    break;
                }
            }
            if prefix.is_finished() {
                let parse = prefix.complete().expect("finished prefix completes");
                return Sample::Complete {
                    words,
                    parse,
                    log_prob,
                };
            }
        }
    }
}

fn next_phase(t: &Transition) -> Phase {
    if *t == Transition::Null {
        Phase::Predictor
    } else {
        Phase::Parser
    }
}

fn draw<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, p) in probs.iter().enumerate() {
        if u < *p {
            return i;
        }
        u -= p;
    }
    probs.len() - 1
}

/// Predictor outcome vocabulary for a word-coded model: the given words plus
/// `</s>` and `<unk>`, sorted and deduplicated.
pub fn predictor_vocabulary<'a>(words: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut v: Vec<String> = words.into_iter().map(str::to_string).collect();
    v.push(EOS.to_string());
    v.push(UNK.to_string());
    v.sort();
    v.dedup();
    v
}

pub fn parser_vocabulary() -> Vec<String> {
    ParserAction::ALL
        .iter()
        .map(|a| a.code().to_string())
        .collect()
}

/// Encodes a token the way [`OutcomeCoding::WordTag`] does.
pub fn word_tag_outcome(word: &str, tag: &str) -> String {
    if word == EOS {
        EOS.to_string()
    } else {
        encode_pair(word, tag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(outcomes: Vec<String>, alpha: f64) -> CondMaxEntModel {
        CondMaxEntModel::new(vec![], outcomes, vec![], alpha).unwrap()
    }

    fn toy() -> JointModel {
        JointModel::new(
            uniform(predictor_vocabulary(["a", "b"]), 0.0),
            ContextScheme::H,
            uniform(parser_vocabulary(), 0.0),
            OutcomeCoding::Word,
        )
        .unwrap()
    }

    fn tok(w: &str) -> Token {
        Token::untagged(w).unwrap()
    }

    #[test]
    fn forced_provisions() {
        let jm = toy();
        let mut p = WordParsePrefix::new();
        p.apply_in_place(&Transition::Predict(tok("a")), Phase::Predictor)
            .unwrap();
        assert_eq!(jm.parser_prob(&p, &Transition::Null), 1.0);
        assert_eq!(jm.parser_prob(&p, &Transition::AdjoinLeft), 0.0);
        p.apply_in_place(&Transition::Null, Phase::Parser).unwrap();
        p.apply_in_place(&Transition::Predict(Token::eos()), Phase::Predictor)
            .unwrap();
        assert_eq!(jm.parser_prob(&p, &Transition::AdjoinRight), 1.0);
        assert_eq!(jm.parser_prob(&p, &Transition::Null), 0.0);
    }

    #[test]
    fn unconstrained_zero_weight_parser_is_uniform() {
        let jm = toy();
        let mut p = WordParsePrefix::new();
        for t in [
            Transition::Predict(tok("a")),
            Transition::Null,
            Transition::Predict(tok("b")),
        ] {
            let phase = if t.is_parser_op() {
                Phase::Parser
            } else {
                Phase::Predictor
            };
            p.apply_in_place(&t, phase).unwrap();
        }
        for t in [
            Transition::AdjoinLeft,
            Transition::AdjoinRight,
            Transition::Null,
        ] {
            assert!((jm.parser_prob(&p, &t) - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn one_word_joint_probability_by_hand() {
        // vocabulary {</s>, <unk>, a, b}: uniform 1/4 each, both parser steps forced
        let jm = toy();
        let d = crate::transition::Derivation::new(vec![
            Transition::Predict(tok("a")),
            Transition::Null,
            Transition::Predict(Token::eos()),
            Transition::AdjoinRight,
            Transition::Null,
        ]);
        let parse = crate::transition::replay(&d).unwrap();
        let lp = jm.joint_prob(&parse).unwrap();
        assert!((lp - 2.0 * (0.25f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_seeded_and_consistent() {
        let jm = toy();
        let a = jm.sample_sentence(7, 50);
        assert_eq!(a, jm.sample_sentence(7, 50));
        if let Sample::Complete {
            parse, log_prob, ..
        } = a
        {
            assert!(crate::transition::is_complete_parse(&parse));
            assert_eq!(jm.joint_prob(&parse).unwrap().to_bits(), log_prob.to_bits());
        }
    }

    #[test]
    fn word_tag_coding() {
        let c = OutcomeCoding::WordTag;
        let t = Token::new("dog", "NN").unwrap();
        assert_eq!(c.outcome(&t), "dog_NN");
        assert_eq!(c.token("dog_NN"), t);
        assert_eq!(c.token(EOS), Token::eos());
        assert_eq!(word_tag_outcome("</s>", "SE"), EOS);
    }

    #[test]
    fn model_vocabularies_are_checked() {
        let bad_parser = uniform(vec!["AL".into(), "AR".into()], 0.0);
        assert_eq!(
            JointModel::new(
                uniform(predictor_vocabulary(["a"]), 0.0),
                ContextScheme::W,
                bad_parser,
                OutcomeCoding::Word
            )
            .unwrap_err(),
            LmError::ParserVocabulary
        );
        assert_eq!(
            JointModel::new(
                uniform(vec!["a".into()], 0.0),
                ContextScheme::W,
                uniform(parser_vocabulary(), 0.0),
                OutcomeCoding::Word
            )
            .unwrap_err(),
            LmError::MissingEos
        );
    }
}
