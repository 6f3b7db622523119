//! Conditional maximum-entropy models over (word, tag) contexts.
//!
//! Features are binary indicators instantiated from constraint templates
//! such as `2 <= <?>_<*> <?>`: each `<?>` slot binds the corresponding
//! context word or tag, `<*>` ignores it, and the trailing `<?>` binds the
//! predicted outcome. A binding survives harvesting when it occurs at least
//! `cutoff` times in the training events.

mod gis;
mod io;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scheme::Field;
use crate::token::UNK;

pub use gis::{train_gis, GisOptions, GisReport};

#[derive(Debug, Error, PartialEq)]
pub enum MaxEntError {
    #[error("template `{text}`: {message}")]
    TemplateSyntax { text: String, message: String },
    #[error("template {template} needs {needed} context fields, event {event} has {found}")]
    ArityMismatch {
        template: usize,
        event: usize,
        needed: usize,
        found: usize,
    },
    #[error("no training events")]
    NoEvents,
    #[error("outcome `{0}` is not in the model vocabulary")]
    UnknownOutcome(String),
    #[error("weight of feature {feature} became non-finite at iteration {iteration}")]
    NonfiniteWeight { feature: usize, iteration: usize },
    #[error("model file, line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("invalid model: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Match,
    DontCare,
}

impl Slot {
    fn parse(s: &str) -> Option<Slot> {
        match s {
            "<?>" => Some(Slot::Match),
            "<*>" => Some(Slot::DontCare),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Slot::Match => "<?>",
            Slot::DontCare => "<*>",
        }
    }
}

/// A constraint template: cutoff plus (word-slot, tag-slot) pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeatureTemplate {
    cutoff: u64,
    slots: Vec<(Slot, Slot)>,
}

impl FeatureTemplate {
    pub fn new(cutoff: u64, slots: Vec<(Slot, Slot)>) -> Result<Self, MaxEntError> {
        if cutoff == 0 {
            return Err(MaxEntError::TemplateSyntax {
                text: format!("{cutoff} <= ..."),
                message: "cutoff must be positive".into(),
            });
        }
        Ok(FeatureTemplate { cutoff, slots })
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn slots(&self) -> &[(Slot, Slot)] {
        &self.slots
    }

    /// Context fields the template reads.
    pub fn arity(&self) -> usize {
        self.slots.len()
    }

    pub fn match_count(&self) -> usize {
        self.slots
            .iter()
            .map(|(w, t)| usize::from(*w == Slot::Match) + usize::from(*t == Slot::Match))
            .sum()
    }

    /// Bound history values, or `None` if the context is too short.
    pub fn bind(&self, context: &[Field]) -> Option<Vec<String>> {
        if context.len() < self.slots.len() {
            return None;
        }
        let mut out = Vec::with_capacity(self.match_count());
        for ((ws, ts), (w, t)) in self.slots.iter().zip(context) {
            if *ws == Slot::Match {
                out.push(w.clone());
            }
            if *ts == Slot::Match {
                out.push(t.clone());
            }
        }
        Some(out)
    }

    /// Parses `;`-separated templates; empty entries are ignored.
    pub fn parse_list(s: &str) -> Result<Vec<Self>, MaxEntError> {
        s.split(';')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for FeatureTemplate {
    type Err = MaxEntError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let err = |message: &str| MaxEntError::TemplateSyntax {
            text: text.to_string(),
            message: message.to_string(),
        };
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(err("expected `CUTOFF <= SLOTS... <?>`"));
        }
        let cutoff: u64 = tokens[0]
            .parse()
            .map_err(|_| err("cutoff is not an integer"))?;
        if cutoff == 0 {
            return Err(err("cutoff must be positive"));
        }
        if tokens[1] != "<=" {
            return Err(err("expected `<=` after the cutoff"));
        }
        if tokens[tokens.len() - 1] != "<?>" {
            return Err(err("outcome slot must be `<?>`"));
        }
        let mut slots = Vec::new();
        for pair in &tokens[2..tokens.len() - 1] {
            let (w, t) = pair
                .split_once('_')
                .ok_or_else(|| err("history slot must be SLOT_SLOT"))?;
            match (Slot::parse(w), Slot::parse(t)) {
                (Some(w), Some(t)) => slots.push((w, t)),
                _ => return Err(err("slot must be `<?>` or `<*>`")),
            }
        }
        Ok(FeatureTemplate { cutoff, slots })
    }
}

impl fmt::Display for FeatureTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <=", self.cutoff)?;
        for (w, t) in &self.slots {
            write!(f, " {}_{}", w.as_str(), t.as_str())?;
        }
        f.write_str(" <?>")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Feature {
    pub template: usize,
    pub binding: Vec<String>,
    pub outcome: String,
    pub weight: f64,
}

impl Feature {
    fn sort_key(&self) -> (usize, &[String], &str) {
        (self.template, &self.binding, &self.outcome)
    }
}

/// One training observation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Observation {
    pub context: Vec<Field>,
    pub outcome: String,
}

impl Observation {
    pub fn new(context: Vec<Field>, outcome: impl Into<String>) -> Self {
        Observation {
            context,
            outcome: outcome.into(),
        }
    }
}

/// Counts every (template, binding, outcome) occurrence and keeps those
/// reaching the template cutoff. Weights start at zero; the table is sorted
/// by (template, binding, outcome).
pub fn harvest_features(
    events: &[Observation],
    templates: &[FeatureTemplate],
) -> Result<Vec<Feature>, MaxEntError> {
    let mut counts: BTreeMap<(usize, Vec<String>, &str), u64> = BTreeMap::new();
    for (ei, ev) in events.iter().enumerate() {
        for (ti, tpl) in templates.iter().enumerate() {
            let binding = tpl.bind(&ev.context).ok_or(MaxEntError::ArityMismatch {
                template: ti,
                event: ei,
                needed: tpl.arity(),
                found: ev.context.len(),
            })?;
            *counts
                .entry((ti, binding, ev.outcome.as_str()))
                .or_default() += 1;
        }
    }
    Ok(counts
        .into_iter()
        .filter(|((ti, _, _), n)| *n >= templates[*ti].cutoff)
        .map(|((template, binding, outcome), _)| Feature {
            template,
            binding,
            outcome: outcome.to_string(),
            weight: 0.0,
        })
        .collect())
}

/// `(template, bound values)`.
type BindingKey = (usize, Vec<String>);

/// Feature table, templates, outcome vocabulary and uniform-interpolation
/// floor `alpha`.
#[derive(Clone, Debug)]
pub struct CondMaxEntModel {
    meta: Vec<String>,
    alpha: f64,
    outcomes: Vec<String>,
    outcome_index: HashMap<String, usize>,
    templates: Vec<FeatureTemplate>,
    template_text: Vec<String>,
    features: Vec<Feature>,
    index: HashMap<BindingKey, Vec<(usize, usize)>>,
}

impl PartialEq for CondMaxEntModel {
    fn eq(&self, other: &Self) -> bool {
        self.meta == other.meta
            && self.alpha.to_bits() == other.alpha.to_bits()
            && self.outcomes == other.outcomes
            && self.template_text == other.template_text
            && self.features.len() == other.features.len()
            && self.features.iter().zip(&other.features).all(|(a, b)| {
                a.sort_key() == b.sort_key() && a.weight.to_bits() == b.weight.to_bits()
            })
    }
}

impl CondMaxEntModel {
    /// Builds a model from template strings (kept verbatim), an outcome
    /// vocabulary and a feature table.
    pub fn new(
        template_text: Vec<String>,
        outcomes: Vec<String>,
        mut features: Vec<Feature>,
        alpha: f64,
    ) -> Result<Self, MaxEntError> {
        if outcomes.is_empty() {
            return Err(MaxEntError::Invalid("empty outcome vocabulary".into()));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(MaxEntError::Invalid(format!(
                "alpha {alpha} outside [0, 1]"
            )));
        }
        let templates = template_text
            .iter()
            .map(|t| t.parse())
            .collect::<Result<Vec<FeatureTemplate>, _>>()?;
        let mut outcome_index = HashMap::new();
        for (i, o) in outcomes.iter().enumerate() {
            if outcome_index.insert(o.clone(), i).is_some() {
                return Err(MaxEntError::Invalid(format!("duplicate outcome `{o}`")));
            }
        }
        features.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut index: HashMap<BindingKey, Vec<(usize, usize)>> = HashMap::new();
        for (fi, f) in features.iter().enumerate() {
            let tpl = templates.get(f.template).ok_or_else(|| {
                MaxEntError::Invalid(format!("feature {fi} names template {}", f.template))
            })?;
            if f.binding.len() != tpl.match_count() {
                return Err(MaxEntError::Invalid(format!(
                    "feature {fi} binds {} values, template has {} match slots",
                    f.binding.len(),
                    tpl.match_count()
                )));
            }
            if !f.weight.is_finite() {
                return Err(MaxEntError::Invalid(format!(
                    "feature {fi} weight not finite"
                )));
            }
            let y = *outcome_index
                .get(&f.outcome)
                .ok_or_else(|| MaxEntError::UnknownOutcome(f.outcome.clone()))?;
            index
                .entry((f.template, f.binding.clone()))
                .or_default()
                .push((y, fi));
        }
        Ok(CondMaxEntModel {
            meta: Vec::new(),
            alpha,
            outcomes,
            outcome_index,
            templates,
            template_text,
            features,
            index,
        })
    }

    /// Harvests features from `events` and builds an untrained model.
    /// Outcomes of the events must belong to `outcomes`.
    pub fn from_events(
        template_text: Vec<String>,
        outcomes: Vec<String>,
        events: &[Observation],
        alpha: f64,
    ) -> Result<Self, MaxEntError> {
        let templates = template_text
            .iter()
            .map(|t| t.parse())
            .collect::<Result<Vec<FeatureTemplate>, _>>()?;
        let features = harvest_features(events, &templates)?;
        Self::new(template_text, outcomes, features, alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        assert!((0.0..=1.0).contains(&alpha), "alpha outside [0, 1]");
        self.alpha = alpha;
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn outcome_id(&self, outcome: &str) -> Option<usize> {
        self.outcome_index.get(outcome).copied()
    }

    pub fn templates(&self) -> &[FeatureTemplate] {
        &self.templates
    }

    pub fn template_text(&self) -> &[String] {
        &self.template_text
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.features.iter().map(|f| f.weight)
    }

    pub(crate) fn set_weights(&mut self, w: &[f64]) {
        for (f, w) in self.features.iter_mut().zip(w) {
            f.weight = *w;
        }
    }

    /// Free-form `key=value` lines stored in the model file header.
    pub fn meta(&self) -> &[String] {
        &self.meta
    }

    pub fn push_meta(&mut self, line: impl Into<String>) {
        self.meta.push(line.into());
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find_map(|m| m.strip_prefix(key)?.strip_prefix('='))
    }

    /// `(outcome id, feature id)` pairs active in `context`.
    pub fn active_features(&self, context: &[Field]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (ti, tpl) in self.templates.iter().enumerate() {
            let Some(binding) = tpl.bind(context) else {
                continue;
            };
            if let Some(list) = self.index.get(&(ti, binding)) {
                out.extend_from_slice(list);
            }
        }
        out
    }

    /// Unfloored log-linear distribution in log space.
    pub(crate) fn log_softmax_with(
        &self,
        active: &[(usize, usize)],
        weight: impl Fn(usize) -> f64,
    ) -> Vec<f64> {
        let mut scores = vec![0.0; self.outcomes.len()];
        for &(y, f) in active {
            scores[y] += weight(f);
        }
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_z = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
        for s in &mut scores {
            *s -= log_z;
        }
        scores
    }

    /// `P(y | context)` for every outcome, interpolated with the uniform
    /// distribution by `alpha`.
    pub fn cond_dist(&self, context: &[Field]) -> Vec<f64> {
        let active = self.active_features(context);
        let floor = self.alpha / self.outcomes.len() as f64;
        self.log_softmax_with(&active, |f| self.features[f].weight)
            .into_iter()
            .map(|lp| (1.0 - self.alpha) * lp.exp() + floor)
            .collect()
    }

    /// Entry of [`cond_dist`](Self::cond_dist); outcomes outside the
    /// vocabulary are scored as `<unk>`, or 0 when the model has none.
    pub fn cond_prob(&self, context: &[Field], outcome: &str) -> f64 {
        match self.outcome_id(outcome).or_else(|| self.outcome_id(UNK)) {
            Some(y) => self.cond_dist(context)[y],
            None => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(w: &str, t: &str) -> Field {
        (w.to_string(), t.to_string())
    }

    fn obs(w: &str, y: &str) -> Observation {
        Observation::new(vec![field(w, "T")], y)
    }

    #[test]
    fn parses_templates() {
        let t: FeatureTemplate = "4 <= <*>_<*> <?>".parse().unwrap();
        assert_eq!(t.cutoff(), 4);
        assert_eq!(t.arity(), 1);
        assert_eq!(t.match_count(), 0);
        assert_eq!(t.to_string(), "4 <= <*>_<*> <?>");
        let t: FeatureTemplate = "1 <= <?>".parse().unwrap();
        assert_eq!(t.arity(), 0);
        assert!("0 <= <?>".parse::<FeatureTemplate>().is_err());
        assert!("4 <= <x>_<*> <?>".parse::<FeatureTemplate>().is_err());
        assert!("4 < <*>_<*> <?>".parse::<FeatureTemplate>().is_err());
        assert!("4 <= <*>_<*> <*>".parse::<FeatureTemplate>().is_err());
        let list = FeatureTemplate::parse_list("4 <= <*>_<*> <?>; 2 <= <?>_<*> <?>;").unwrap();
        assert_eq!(list.len(), 2);
    }

    #[test]
    fn cutoff_keeps_counts_at_threshold() {
        let mut events = Vec::new();
        events.extend(std::iter::repeat_n(obs("dog", "barked"), 4));
        events.extend(std::iter::repeat_n(obs("cat", "mewed"), 3));
        let tpl: Vec<FeatureTemplate> = vec!["4 <= <?>_<*> <?>".parse().unwrap()];
        let feats = harvest_features(&events, &tpl).unwrap();
        assert_eq!(feats.len(), 1);
        assert_eq!(feats[0].binding, vec!["dog".to_string()]);
        assert_eq!(feats[0].outcome, "barked");
    }

    #[test]
    fn unigram_template_yields_one_feature_per_outcome() {
        let events: Vec<_> = ["a", "b", "c", "a", "b", "c"]
            .iter()
            .map(|y| obs("x", y))
            .collect();
        let tpl: Vec<FeatureTemplate> = vec!["2 <= <*>_<*> <?>".parse().unwrap()];
        assert_eq!(harvest_features(&events, &tpl).unwrap().len(), 3);
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let tpl: Vec<FeatureTemplate> = vec!["1 <= <*>_<*> <?>_<*> <?>".parse().unwrap()];
        assert!(matches!(
            harvest_features(&[obs("x", "y")], &tpl),
            Err(MaxEntError::ArityMismatch {
                needed: 2,
                found: 1,
                ..
            })
        ));
    }

    #[test]
    fn zero_weights_are_uniform_and_alpha_floors() {
        let outcomes: Vec<String> = (0..5).map(|i| format!("o{i}")).collect();
        let m = CondMaxEntModel::new(vec![], outcomes.clone(), vec![], 0.0).unwrap();
        for p in m.cond_dist(&[]) {
            assert!((p - 0.2).abs() < 1e-15);
        }
        let feats = vec![Feature {
            template: 0,
            binding: vec![],
            outcome: "o1".into(),
            weight: 5.0,
        }];
        let mut m = CondMaxEntModel::new(vec!["1 <= <?>".into()], outcomes, feats, 1.0).unwrap();
        assert!(m.cond_dist(&[]).iter().all(|p| (p - 0.2).abs() < 1e-15));
        m.set_alpha(0.1);
        let d = m.cond_dist(&[]);
        assert!(d.iter().all(|&p| p >= 0.1 / 5.0));
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_outcomes_map_to_unk() {
        let outcomes = vec!["a".to_string(), UNK.to_string()];
        let m = CondMaxEntModel::new(vec![], outcomes, vec![], 0.0).unwrap();
        assert_eq!(m.cond_prob(&[], "zzz"), m.cond_dist(&[])[1]);
        let m = CondMaxEntModel::new(vec![], vec!["a".into()], vec![], 0.0).unwrap();
        assert_eq!(m.cond_prob(&[], "zzz"), 0.0);
    }

    #[test]
    fn rejects_invalid_models() {
        assert!(CondMaxEntModel::new(vec![], vec![], vec![], 0.0).is_err());
        let bad = vec![Feature {
            template: 0,
            binding: vec!["x".into()],
            outcome: "a".into(),
            weight: 0.0,
        }];
        assert!(CondMaxEntModel::new(vec!["1 <= <?>".into()], vec!["a".into()], bad, 0.0).is_err());
    }
}
