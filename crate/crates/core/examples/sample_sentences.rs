//! Ancestral sampling from the planted joint model. Each sample reports the
//! log-probability accumulated while drawing, which equals the joint
//! probability recomputed from the finished parse.

use structured_lm::lm::Sample;
use structured_lm::oracle::{planted_model, SynthSpec};
use structured_lm::treebank::write_complete_parse;

fn main() {
    let jm = planted_model(&SynthSpec::default());
    for seed in 0..5 {
        match jm.sample_sentence(seed, 50) {
            Sample::Complete {
                words,
                parse,
                log_prob,
            } => {
                assert_eq!(jm.joint_prob(&parse).unwrap().to_bits(), log_prob.to_bits());
                let text: Vec<&str> = words.iter().map(|w| w.surface()).collect();
                println!("{log_prob:.3}  {}", text.join(" "));
                println!("        {}", write_complete_parse(&parse));
            }
            Sample::Truncated => println!("truncated"),
        }
    }
}
