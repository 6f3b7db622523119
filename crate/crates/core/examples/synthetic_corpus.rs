//! Writes a few sentences of the planted synthetic treebank. The subject
//! noun picks the verb, and a run of modifier pairs usually separates them.

use structured_lm::oracle::{synth_corpus_gen, write_corpus, SynthSpec};

fn main() {
    let n = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(5);
    print!(
        "{}",
        write_corpus(&synth_corpus_gen(7, n, &SynthSpec::default()))
    );
}
