//! Synthetic symbol posteriors standing in for an acoustic model.
//!
//! With probability ε a step is a confusion: one same-kind symbol drawn
//! uniformly takes mass `1 - ε` and the reference keeps `ε / 2`, the rest of
//! ε going evenly to the remaining same-kind symbols. Otherwise the reference
//! takes `1 - ε` and ε is shared evenly by the other same-kind symbols.
//! `<eow>` has no confusables and is always certain.

use alloc::vec::Vec;

use rand::{Rng, RngExt};

use super::EmissionSequence;
use crate::symbols::SymbolKind;
use crate::units::{ExpansionFailure, UnitContext};
use crate::wfst::Label;

/// Reference symbols: phonemes for foreign words, wordpieces otherwise, with
/// `<eow>` between words.
pub fn synthetic_reference<S: AsRef<str>, F: AsRef<str>>(
    transcript: &[S],
    foreign: &[F],
    ctx: &UnitContext<'_>,
) -> Result<Vec<Label>, ExpansionFailure> {
    let mut out = Vec::new();
    for (i, w) in transcript.iter().enumerate() {
        let w = w.as_ref();
        if i > 0 {
            out.push(ctx.symbols.eow());
        }
        if foreign.iter().any(|f| f.as_ref() == w) {
            out.extend(ctx.phonemes(w)?);
        } else {
            out.extend(ctx.wordpieces(w)?);
        }
    }
    Ok(out)
}

pub fn generate_synthetic_emissions<S, F, R>(
    utt_id: &str,
    transcript: &[S],
    foreign: &[F],
    ctx: &UnitContext<'_>,
    noise: f64,
    rng: &mut R,
) -> Result<EmissionSequence, ExpansionFailure>
where
    S: AsRef<str>,
    F: AsRef<str>,
    R: Rng + ?Sized,
{
    assert!((0.0..1.0).contains(&noise), "noise must lie in [0, 1)");
    let reference = synthetic_reference(transcript, foreign, ctx)?;
    let table = ctx.symbols;
    let phonemes: Vec<Label> = table.ids_of_kind(SymbolKind::Phoneme).collect();
    let pieces: Vec<Label> = table.ids_of_kind(SymbolKind::Wordpiece).collect();

    let mut steps = Vec::with_capacity(reference.len());
    for &r in &reference {
        let pool: &[Label] = match table.kind(r) {
            Some(SymbolKind::Phoneme) => &phonemes,
            Some(SymbolKind::Wordpiece) => &pieces,
            _ => &[],
        };
        let others: Vec<Label> = pool.iter().copied().filter(|&l| l != r).collect();
        let mut probs: Vec<(Label, f64)> = Vec::with_capacity(others.len() + 1);
        if noise == 0.0 || others.is_empty() {
            probs.push((r, 1.0));
        } else if rng.random::<f64>() < noise {
            let c = others[rng.random_range(0..others.len())];
            probs.push((c, 1.0 - noise));
            if others.len() == 1 {
                probs.push((r, noise));
            } else {
                probs.push((r, noise / 2.0));
                let share = noise / 2.0 / (others.len() - 1) as f64;
                probs.extend(others.iter().filter(|&&l| l != c).map(|&l| (l, share)));
            }
        } else {
            probs.push((r, 1.0 - noise));
            let share = noise / others.len() as f64;
            probs.extend(others.iter().map(|&l| (l, share)));
        }
        steps.push(probs.into_iter().map(|(l, p)| (l, libm::log(p))).collect());
    }
    Ok(EmissionSequence::new(utt_id, steps).expect("steps are normalized by construction"))
}
