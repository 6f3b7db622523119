//! Fits a predictor model with GIS on the bundled treebank and shows the
//! most likely next words after "the".

use structured_lm::events::extract_corpus;
use structured_lm::events::EventSet;
use structured_lm::lm::predictor_vocabulary;
use structured_lm::maxent::{train_gis, CondMaxEntModel, GisOptions};
use structured_lm::scheme::ContextScheme;
use structured_lm::treebank::{read_parsed_corpus, HeadRules};

const TREEBANK: &str = include_str!("../data/mini_treebank.mrg");

fn main() {
    let trees = read_parsed_corpus(TREEBANK, &HeadRules::default()).unwrap();
    let set = EventSet {
        meta: vec![],
        events: extract_corpus(&trees, &ContextScheme::W).unwrap(),
    };
    let obs = set.predictor_observations();
    let vocab = predictor_vocabulary(obs.iter().map(|o| o.outcome.as_str()));
    let templates = vec![
        "1 <= <*>_<*> <?>".to_string(),
        "1 <= <?>_<*> <?>".to_string(),
    ];
    let mut model = CondMaxEntModel::from_events(templates, vocab, &obs, 1e-3).unwrap();
    let report = train_gis(
        &mut model,
        &obs,
        GisOptions {
            max_iters: 300,
            tol: 1e-5,
        },
    )
    .unwrap();
    println!(
        "{} features, {} iterations, log-likelihood {:.3} -> {:.3}",
        model.features().len(),
        report.iterations,
        report.log_likelihood[0],
        report.log_likelihood.last().unwrap()
    );

    let ctx = vec![("the".to_string(), "DT".to_string())];
    let mut dist: Vec<(f64, &str)> = model
        .cond_dist(&ctx)
        .into_iter()
        .zip(model.outcomes().iter().map(String::as_str))
        .collect();
    dist.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (p, w) in dist.iter().take(5) {
        println!("P({w} | the) = {p:.3}");
    }
}
