//! Contextual biasing over weighted finite-state transducers.
//!
//! Phrase lists compile into phoneme, wordpiece or grapheme tries with
//! per-arc bonuses and cancelling failure arcs. A decoding graph joins
//! wordpiece loops with a pronunciation prefix tree, and a label-synchronous
//! beam search scores symbol posteriors against it with shallow fusion.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bias;
pub mod decoder;
pub mod graph;
pub mod lexicon;
pub mod sampler;
pub mod symbols;
pub mod tokenize;
pub mod units;
pub mod wer;
pub mod wfst;
