//! Joint log-probability of a sentence and its parse, against the sum over
//! every parse of the same words.

use structured_lm::oracle::{enumerate_complete_parses, path_sum, planted_model, SynthSpec};
use structured_lm::token::Token;

fn main() {
    let jm = planted_model(&SynthSpec::default());
    let words: Vec<Token> = [("the", "DT"), ("fish", "NN"), ("walk", "VB")]
        .iter()
        .map(|(w, t)| Token::new(*w, *t).unwrap())
        .collect();
    let parses = enumerate_complete_parses(&words).parses;
    let mut total = 0.0;
    for p in &parses {
        let lp = jm.joint_prob(p).unwrap();
        total += lp.exp();
        println!("{lp:>12.4}  {}", p.to_bracketed());
    }
    println!("sum over {} parses: {total:.6e}", parses.len());
    println!("path sum:           {:.6e}", path_sum(&jm, &words));
}
