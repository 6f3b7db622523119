//! Reads the bundled treebank, percolates heads, binarizes, and prints the
//! predictor and parser events of the first sentence under each scheme.

use structured_lm::events::extract_events;
use structured_lm::scheme::ContextScheme;
use structured_lm::transition::derivation_of;
use structured_lm::treebank::{read_parsed_corpus, write_complete_parse, HeadRules};

const TREEBANK: &str = include_str!("../data/mini_treebank.mrg");

fn main() {
    let trees = read_parsed_corpus(TREEBANK, &HeadRules::default()).unwrap();
    let t = &trees[3];
    println!("{}", write_complete_parse(t));
    println!("{}\n", derivation_of(t).unwrap().to_line());
    for scheme in [ContextScheme::W, ContextScheme::H] {
        println!("scheme {scheme}");
        for e in extract_events(t, &scheme).unwrap() {
            println!("  {}", e.to_line());
        }
    }
}
