//! Trains the four predictor configurations on a synthetic treebank and
//! prints the perplexity table on held-out sentences.

use structured_lm::eval::{compare_report, Corpus};
use structured_lm::events::{extract_corpus, EventSet};
use structured_lm::lm::predictor_vocabulary;
use structured_lm::maxent::{train_gis, CondMaxEntModel, GisOptions};
use structured_lm::oracle::{synth_corpus_gen, SynthSpec};
use structured_lm::scheme::ContextScheme;

fn main() {
    let spec = SynthSpec::default();
    let train = synth_corpus_gen(1, 3000, &spec);
    let test = synth_corpus_gen(2, 500, &spec);
    let mut models = Vec::new();
    for scheme in [
        ContextScheme::W,
        ContextScheme::LOWER_W,
        ContextScheme::H,
        ContextScheme::LOWER_H,
    ] {
        let set = EventSet {
            meta: vec![],
            events: extract_corpus(&train, &scheme).unwrap(),
        };
        let obs = set.predictor_observations();
        let vocab = predictor_vocabulary(obs.iter().map(|o| o.outcome.as_str()));
        let mut m =
            CondMaxEntModel::from_events(scheme.default_templates(), vocab, &obs, 1e-4).unwrap();
        train_gis(&mut m, &obs, GisOptions::default()).unwrap();
        models.push((scheme.to_string(), scheme, m));
    }
    let report = compare_report(&models, &Corpus::Parsed(test)).unwrap();
    print!("{}", report.render_table());
}
