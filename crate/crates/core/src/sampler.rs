//! Frequency-based stochastic choice between wordpiece and phoneme targets.
//!
//! A word with corpus count `c` is rendered as phonemes with probability
//! `p0 * min(T / c, 1)`, so rare words (seen `T` times or fewer) get phoneme
//! targets with probability `p0` and frequent words progressively less often.
//! Each call draws afresh, so the same sentence can yield different targets.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, RngExt};

use crate::lexicon::Lexicon;
use crate::symbols::{SymbolKind, SymbolTable};
use crate::tokenize::{TokenizeError, WordpieceInventory};
use crate::units::rebind;
use crate::wfst::Label;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub p0: f64,
    pub t: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SamplerError {
    InvalidConfig(&'static str),
    Tokenize(TokenizeError),
}

impl fmt::Display for SamplerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplerError::InvalidConfig(s) => write!(f, "invalid sampler config: {s}"),
            SamplerError::Tokenize(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for SamplerError {}

impl From<TokenizeError> for SamplerError {
    fn from(e: TokenizeError) -> Self {
        SamplerError::Tokenize(e)
    }
}

impl SamplerConfig {
    pub fn new(p0: f64, t: u64, seed: u64) -> Result<Self, SamplerError> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(SamplerError::InvalidConfig("p0 must lie in [0, 1]"));
        }
        if t == 0 {
            return Err(SamplerError::InvalidConfig("T must be at least 1"));
        }
        Ok(SamplerConfig { p0, t, seed })
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { p0: 0.5, t: 10, seed: 0 }
    }
}

/// `p0 * min(T / c, 1)`; a zero count takes the clamped branch.
pub fn phoneme_presentation_prob(count: u64, cfg: &SamplerConfig) -> f64 {
    if count == 0 || count <= cfg.t {
        cfg.p0
    } else {
        cfg.p0 * (cfg.t as f64 / count as f64)
    }
}

/// Builds one mixed target sequence for `transcript`.
///
/// Words in `lex` are independently rendered as phonemes with their
/// presentation probability, all other words as wordpieces. `<eow>` separates
/// consecutive words regardless of how either side was rendered. One uniform
/// draw is consumed per in-lexicon word.
pub fn sample_target_sequence<S, R>(
    transcript: &[S],
    lex: &Lexicon,
    inv: &WordpieceInventory,
    symbols: &SymbolTable,
    cfg: &SamplerConfig,
    rng: &mut R,
) -> Result<Vec<Label>, SamplerError>
where
    S: AsRef<str>,
    R: Rng + ?Sized,
{
    let mut out = Vec::new();
    for (i, word) in transcript.iter().enumerate() {
        let word = word.as_ref();
        if i > 0 {
            out.push(symbols.eow());
        }
        let as_phonemes = match lex.get(word) {
            Some(entry) => {
                let u: f64 = rng.random();
                if u < phoneme_presentation_prob(entry.frequency, cfg) {
                    Some(
                        rebind(&entry.pronunciation, lex.symbols(), symbols, SymbolKind::Phoneme)
                            .map_err(|_| TokenizeError::OutOfLexicon(word.to_string()))?,
                    )
                } else {
                    None
                }
            }
            None => None,
        };
        match as_phonemes {
            Some(p) => out.extend(p),
            None => out.extend(inv.tokenize_ids(word, symbols)?),
        }
    }
    Ok(out)
}
