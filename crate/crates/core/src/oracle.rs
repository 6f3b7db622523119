//! Brute-force checks on tiny instances and a planted synthetic corpus
//! generator.
//!
//! Enumeration walks every legal transition sequence; the shape count is an
//! independent route that never touches the transition system.

use std::collections::HashSet;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lm::{parser_vocabulary, word_tag_outcome, JointModel, OutcomeCoding, Sample};
use crate::maxent::{CondMaxEntModel, Feature};
use crate::scheme::ContextScheme;
use crate::token::{Token, EOS};
use crate::transition::{
    is_complete_parse, Derivation, HeadedTree, Phase, Transition, WordParsePrefix,
};
use crate::treebank::write_complete_parse;

#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationResult {
    pub l: usize,
    pub parses: Vec<HeadedTree>,
    pub derivations: Vec<Derivation>,
    pub count: usize,
}

/// All complete parses of `words` found by depth-first search over legal
/// transitions, with the derivation that reached each.
pub fn enumerate_complete_parses(words: &[Token]) -> EnumerationResult {
    let mut parses = Vec::new();
    let mut derivations = Vec::new();
    let mut steps = Vec::new();
    dfs_sentence(
        words,
        WordParsePrefix::new(),
        Phase::Predictor,
        &mut steps,
        &mut |prefix, steps| {
            parses.push(prefix.complete().expect("finished"));
            derivations.push(Derivation::new(steps.to_vec()));
        },
    );
    EnumerationResult {
        l: words.len(),
        count: parses.len(),
        parses,
        derivations,
    }
}

fn dfs_sentence(
    words: &[Token],
    prefix: WordParsePrefix,
    phase: Phase,
    steps: &mut Vec<Transition>,
    visit: &mut dyn FnMut(&WordParsePrefix, &[Transition]),
) {
    let options: Vec<Transition> = match phase {
        Phase::Predictor => {
            if prefix.is_finished() {
                visit(&prefix, steps);
                return;
            }
            let next = words.get(prefix.k()).cloned().unwrap_or_else(Token::eos);
            if prefix.k() > words.len() {
                return;
            }
            vec![Transition::Predict(next)]
        }
        Phase::Parser => prefix.legal_transitions(Phase::Parser).parser,
    };
    for t in options {
        let mut next = prefix.clone();
        next.apply_in_place(&t, phase).expect("legal option");
        let next_phase = if t == Transition::Null {
            Phase::Predictor
        } else {
            Phase::Parser
        };
        steps.push(t);
        dfs_sentence(words, next, next_phase, steps, visit);
        steps.pop();
    }
}

/// Independent count: over every binary shape with `l + 1` leaves, nodes
/// that do not contain the final `</s>` leaf may take either head.
pub fn count_by_shapes(l: usize) -> u64 {
    shapes(l + 1)
        .iter()
        .map(|s| 1u64 << free_nodes(s, true))
        .sum()
}

#[derive(Clone, Debug)]
enum Shape {
    Leaf,
    Node(Arc<Shape>, Arc<Shape>),
}

fn shapes(n: usize) -> Vec<Arc<Shape>> {
    if n == 1 {
        return vec![Arc::new(Shape::Leaf)];
    }
    let mut out = Vec::new();
    for left in 1..n {
        for l in shapes(left) {
            for r in shapes(n - left) {
                out.push(Arc::new(Shape::Node(l.clone(), r)));
            }
        }
    }
    out
}

/// Internal nodes not on the path to the last leaf, when `on_spine`.
fn free_nodes(s: &Shape, on_spine: bool) -> u32 {
    match s {
        Shape::Leaf => 0,
        Shape::Node(l, r) => u32::from(!on_spine) + free_nodes(l, false) + free_nodes(r, on_spine),
    }
}

/// `sum exp(ln P(W, T))` over every sentence of at most `max_len` words
/// from `vocab` and every complete parse of it.
pub fn total_mass(jm: &JointModel, vocab: &[Token], max_len: usize) -> f64 {
    let mut mass = 0.0;
    let mut visit = |t: HeadedTree| {
        mass += jm
            .joint_prob(&t)
            .expect("enumerated parse is complete")
            .exp();
    };
    dfs_all(
        vocab,
        max_len,
        WordParsePrefix::new(),
        Phase::Predictor,
        &mut visit,
    );
    mass
}

fn dfs_all(
    vocab: &[Token],
    max_len: usize,
    prefix: WordParsePrefix,
    phase: Phase,
    visit: &mut dyn FnMut(HeadedTree),
) {
    let options: Vec<Transition> = match phase {
        Phase::Predictor => {
            if prefix.is_finished() {
                visit(prefix.complete().expect("finished"));
                return;
            }
            let mut o = vec![Transition::Predict(Token::eos())];
            if prefix.k() < max_len {
                o.extend(vocab.iter().map(|w| Transition::Predict(w.clone())));
            }
            o
        }
        Phase::Parser => prefix.legal_transitions(Phase::Parser).parser,
    };
    for t in options {
        let mut next = prefix.clone();
        next.apply_in_place(&t, phase).expect("legal option");
        let next_phase = if t == Transition::Null {
            Phase::Predictor
        } else {
            Phase::Parser
        };
        dfs_all(vocab, max_len, next, next_phase, visit);
    }
}

/// `P(W) = sum_T P(W, T)` by multiplying step probabilities along the
/// search tree of a fixed sentence.
pub fn path_sum(jm: &JointModel, words: &[Token]) -> f64 {
    fn go(jm: &JointModel, words: &[Token], prefix: WordParsePrefix, phase: Phase) -> f64 {
        match phase {
            Phase::Predictor => {
                if prefix.is_finished() {
                    return 1.0;
                }
                if prefix.k() > words.len() {
                    return 0.0;
                }
                let w = words.get(prefix.k()).cloned().unwrap_or_else(Token::eos);
                let p = jm.predictor_prob(&prefix, &w);
                let mut next = prefix;
                next.apply_in_place(&Transition::Predict(w), Phase::Predictor)
                    .expect("legal prediction");
                p * go(jm, words, next, Phase::Parser)
            }
            Phase::Parser => prefix
                .legal_transitions(Phase::Parser)
                .parser
                .into_iter()
                .map(|t| {
                    let p = jm.parser_prob(&prefix, &t);
                    let mut next = prefix.clone();
                    next.apply_in_place(&t, Phase::Parser).expect("legal op");
                    let ph = if t == Transition::Null {
                        Phase::Predictor
                    } else {
                        Phase::Parser
                    };
                    p * go(jm, words, next, ph)
                })
                .sum(),
        }
    }
    go(jm, words, WordParsePrefix::new(), Phase::Predictor)
}

/// Vocabulary and structure of the planted generator.
///
/// Sentences look like `DT NN (JJ RB)* VB (DT NN)*`. Each modifier pair is
/// attached under the subject noun, so the noun stays exposed when the verb
/// is predicted while the previous word is an adverb. Every noun stem also
/// occurs as a verb, so the tag disambiguates the surface word.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub dets: usize,
    pub stems: usize,
    pub modifiers: usize,
    /// Probability of another modifier pair after the subject noun.
    pub modifier_prob: f64,
    /// Probability of another object after the verb.
    pub object_prob: f64,
    /// Verbs preferred by each noun.
    pub verbs_per_noun: usize,
    /// Uniform floor of the planted models.
    pub noise: f64,
    pub max_words: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            dets: 4,
            stems: 40,
            modifiers: 20,
            modifier_prob: 0.6,
            object_prob: 0.5,
            verbs_per_noun: 2,
            noise: 1e-6,
            max_words: 200,
        }
    }
}

const DETS: &[&str] = &["the", "a", "this", "that", "every", "some", "no", "each"];
const STEMS: &[&str] = &[
    "walk", "run", "watch", "play", "talk", "call", "work", "drink", "fish", "cook", "dance",
    "jump", "kick", "laugh", "look", "love", "move", "need", "paint", "plan", "rain", "rest",
    "ring", "sail", "shop", "sign", "sleep", "smile", "smoke", "snow", "start", "stop", "swim",
    "test", "trade", "train", "visit", "wait", "wash", "guard",
];
const ADJS: &[&str] = &[
    "big", "small", "old", "young", "red", "tall", "quiet", "happy", "brave", "calm", "eager",
    "gentle", "proud", "silly", "wise", "lazy", "fierce", "shy", "bright", "dark",
];
const ADVS: &[&str] = &[
    "today",
    "yesterday",
    "again",
    "here",
    "there",
    "now",
    "often",
    "soon",
    "later",
    "early",
    "always",
    "never",
    "seldom",
    "twice",
    "once",
    "still",
    "indoors",
    "outside",
    "upstairs",
    "nearby",
];

fn pick(list: &[&str], prefix: &str, i: usize) -> String {
    list.get(i)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("{prefix}{i}"))
}

impl SynthSpec {
    /// The spec with no modifiers and no objects: every prediction sees the
    /// same history under word and head classifications.
    pub fn degenerate() -> Self {
        SynthSpec {
            modifier_prob: 0.0,
            object_prob: 0.0,
            ..SynthSpec::default()
        }
    }

    fn words(&self, list: &[&str], prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| pick(list, prefix, i)).collect()
    }

    pub fn det_words(&self) -> Vec<String> {
        self.words(DETS, "det", self.dets)
    }

    pub fn stem_words(&self) -> Vec<String> {
        self.words(STEMS, "stem", self.stems)
    }

    pub fn adj_words(&self) -> Vec<String> {
        self.words(ADJS, "adj", self.modifiers)
    }

    pub fn adv_words(&self) -> Vec<String> {
        self.words(ADVS, "adv", self.modifiers)
    }

    /// Verb stems preferred by noun stem `i`.
    pub fn verbs_of(&self, i: usize) -> Vec<usize> {
        (0..self.verbs_per_noun)
            .map(|j| (i + 7 * j) % self.stems)
            .collect()
    }
}

/// Weight offset that makes planted support dominate every unlisted outcome.
const SUPPORT: f64 = 25.0;

/// The planted joint model: an `H`-scheme predictor over `word_tag`
/// outcomes and a tag-driven parser.
pub fn planted_model(spec: &SynthSpec) -> JointModel {
    let dets = spec.det_words();
    let stems = spec.stem_words();
    let adjs = spec.adj_words();
    let advs = spec.adv_words();

    let mut outcomes: Vec<String> = Vec::new();
    outcomes.extend(dets.iter().map(|w| word_tag_outcome(w, "DT")));
    outcomes.extend(stems.iter().map(|w| word_tag_outcome(w, "NN")));
    outcomes.extend(stems.iter().map(|w| word_tag_outcome(w, "VB")));
    outcomes.extend(adjs.iter().map(|w| word_tag_outcome(w, "JJ")));
    outcomes.extend(advs.iter().map(|w| word_tag_outcome(w, "RB")));
    outcomes.push(EOS.to_string());

    let mut feats = Vec::new();
    let mut add = |template: usize, binding: Vec<String>, outcome: String, p: f64| {
        if p > 0.0 {
            feats.push(Feature {
                template,
                binding,
                outcome,
                weight: p.ln() + SUPPORT,
            });
        }
    };
    let tag = |t: &str| vec![t.to_string()];
    for d in &dets {
        add(
            1,
            tag("SB"),
            word_tag_outcome(d, "DT"),
            1.0 / dets.len() as f64,
        );
        add(
            1,
            tag("VB"),
            word_tag_outcome(d, "DT"),
            spec.object_prob / dets.len() as f64,
        );
    }
    add(1, tag("VB"), EOS.to_string(), 1.0 - spec.object_prob);
    for n in &stems {
        add(
            1,
            tag("DT"),
            word_tag_outcome(n, "NN"),
            1.0 / stems.len() as f64,
        );
    }
    for a in &advs {
        add(
            1,
            tag("JJ"),
            word_tag_outcome(a, "RB"),
            1.0 / advs.len() as f64,
        );
    }
    for (i, n) in stems.iter().enumerate() {
        let ctx = vec![n.clone(), "NN".to_string()];
        for a in &adjs {
            add(
                0,
                ctx.clone(),
                word_tag_outcome(a, "JJ"),
                spec.modifier_prob / adjs.len() as f64,
            );
        }
        let verbs = spec.verbs_of(i);
        for v in &verbs {
            add(
                0,
                ctx.clone(),
                word_tag_outcome(&stems[*v], "VB"),
                (1.0 - spec.modifier_prob) / verbs.len() as f64,
            );
        }
    }
    let predictor = CondMaxEntModel::new(
        vec!["1 <= <?>_<?> <?>".into(), "1 <= <*>_<?> <?>".into()],
        outcomes,
        feats,
        spec.noise,
    )
    .expect("planted predictor is well formed");

    let rules = [
        ("NN", "DT", "AR"),
        ("JJ", "NN", "N"),
        ("RB", "JJ", "AR"),
        ("RB", "NN", "AL"),
        ("VB", "NN", "AR"),
        ("DT", "VB", "N"),
        ("NN", "VB", "AL"),
    ];
    let parser_feats = rules
        .iter()
        .map(|(h0, h1, a)| Feature {
            template: 0,
            binding: vec![h0.to_string(), h1.to_string()],
            outcome: a.to_string(),
            weight: SUPPORT,
        })
        .collect();
    let parser = CondMaxEntModel::new(
        vec!["1 <= <*>_<?> <*>_<?> <?>".into()],
        parser_vocabulary(),
        parser_feats,
        spec.noise,
    )
    .expect("planted parser is well formed");

    JointModel::new(predictor, ContextScheme::H, parser, OutcomeCoding::WordTag)
        .expect("planted joint model is well formed")
}

/// Samples `sentences` complete parses from the planted model; truncated
/// draws are discarded and redrawn from the same stream.
pub fn synth_corpus_gen(seed: u64, sentences: usize, spec: &SynthSpec) -> Vec<HeadedTree> {
    let jm = planted_model(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sentences);
    while out.len() < sentences {
        if let Sample::Complete { parse, .. } = jm.sample_with(&mut rng, spec.max_words) {
            debug_assert!(is_complete_parse(&parse));
            out.push(parse);
        }
    }
    out
}

/// One bracketed tree per line.
pub fn write_corpus(parses: &[HeadedTree]) -> String {
    let mut s = String::new();
    for p in parses {
        s.push_str(&write_complete_parse(p));
        s.push('\n');
    }
    s
}

/// Distinctness check used by the enumeration tests.
pub fn all_distinct<T: std::hash::Hash + Eq>(items: &[T]) -> bool {
    let set: HashSet<&T> = items.iter().collect();
    set.len() == items.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transition::{derivation_of, replay};

    fn words(l: usize) -> Vec<Token> {
        (1..=l)
            .map(|i| Token::new(format!("w{i}"), "X").unwrap())
            .collect()
    }

    #[test]
    fn small_counts_by_both_routes() {
        for (l, expected) in [(1, 1), (2, 3), (3, 13)] {
            let r = enumerate_complete_parses(&words(l));
            assert_eq!(r.count, expected);
            assert_eq!(count_by_shapes(l), expected as u64);
        }
    }

    #[test]
    fn enumerated_parses_are_complete_distinct_and_replayable() {
        let r = enumerate_complete_parses(&words(3));
        assert!(all_distinct(&r.parses));
        for (p, d) in r.parses.iter().zip(&r.derivations) {
            assert!(is_complete_parse(p));
            assert_eq!(&derivation_of(p).unwrap(), d);
            assert_eq!(&replay(d).unwrap(), p);
        }
    }

    #[test]
    fn planted_parses_have_expected_shape() {
        let corpus = synth_corpus_gen(3, 20, &SynthSpec::default());
        assert_eq!(corpus.len(), 20);
        for t in &corpus {
            assert!(is_complete_parse(t));
        }
        assert_eq!(
            write_corpus(&corpus),
            write_corpus(&synth_corpus_gen(3, 20, &SynthSpec::default()))
        );
    }
}
