//! Every complete parse of a short sentence, with the derivation that builds
//! it, and the independent count over tree shapes.
//!
//! cargo run --example enumerate_parses -- 3

use structured_lm::oracle::{count_by_shapes, enumerate_complete_parses};
use structured_lm::token::Token;
use structured_lm::transition::replay;

fn main() {
    let l: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(2);
    let words: Vec<Token> = (1..=l)
        .map(|i| Token::new(format!("w{i}"), "X").unwrap())
        .collect();
    let r = enumerate_complete_parses(&words);
    for (parse, d) in r.parses.iter().zip(&r.derivations) {
        assert_eq!(&replay(d).unwrap(), parse);
        println!("{}\n    {}", parse.to_bracketed(), d.to_line());
    }
    println!(
        "l={l}: {} parses by search, {} by shape count",
        r.count,
        count_by_shapes(l)
    );
}
