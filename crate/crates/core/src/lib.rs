//! A structured language model: words are generated left to right together
//! with a binary headed parse, and each step is scored by a conditional
//! maximum-entropy model.
//!
//! The pipeline is: read a bracketed treebank ([`treebank`]), turn each tree
//! into a derivation ([`transition`]), extract training events ([`events`]),
//! fit models with GIS ([`maxent`]), and score or sample with the joint model
//! ([`lm`], [`eval`]). [`oracle`] holds brute-force checks and a planted
//! synthetic corpus generator.

pub mod cli;
pub mod eval;
pub mod events;
pub mod lm;
pub mod maxent;
pub mod oracle;
pub mod scheme;
pub mod token;
pub mod transition;
pub mod treebank;
