//! Compilation of biasing phrase lists into contextual transducers.
//!
//! The contextual transducer is a deterministic trie over modeling units in
//! which every arc carries the bonus `-w`. Each non-start state owns one
//! failure arc back to the start whose cost gives back the bonus accrued past
//! the deepest completed phrase on its path, so partial matches earn nothing
//! in the end while completed phrases keep `-n·w`.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::symbols::{SymbolKind, SymbolTable};
use crate::units::{ExpansionFailure, Unit, UnitContext};
use crate::wfst::{
    compose, determinize_acyclic, minimize_acyclic, step_with_failure, Arc, Cost, FstError, Label, StateId, Wfst,
    EPSILON, FAILURE,
};

#[derive(Debug, Clone, PartialEq)]
pub enum BiasError {
    EmptyPhrase(usize),
    InvalidConfig(&'static str),
    Expansion(ExpansionFailure),
    Fst(FstError),
    /// The transducer is not a trie with failure arcs to its start.
    Malformed(&'static str),
}

impl fmt::Display for BiasError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiasError::EmptyPhrase(i) => write!(f, "phrase {i} is empty"),
            BiasError::InvalidConfig(s) => write!(f, "invalid bias config: {s}"),
            BiasError::Expansion(e) => e.fmt(f),
            BiasError::Fst(e) => e.fmt(f),
            BiasError::Malformed(s) => write!(f, "malformed contextual transducer: {s}"),
        }
    }
}

impl core::error::Error for BiasError {}

impl From<ExpansionFailure> for BiasError {
    fn from(e: ExpansionFailure) -> Self {
        BiasError::Expansion(e)
    }
}

impl From<FstError> for BiasError {
    fn from(e: FstError) -> Self {
        BiasError::Fst(e)
    }
}

pub const DEFAULT_BONUS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasConfig {
    pub unit: Unit,
    /// Per-arc bonus; arcs carry cost `-w`.
    pub w: f64,
    /// Fusion weight, consumed by the decoder.
    pub lambda: f64,
}

impl BiasConfig {
    pub fn new(unit: Unit, w: f64, lambda: f64) -> Result<Self, BiasError> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(BiasError::InvalidConfig("bonus must be positive and finite"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(BiasError::InvalidConfig("lambda must be non-negative and finite"));
        }
        Ok(BiasConfig { unit, w, lambda })
    }
}

impl Default for BiasConfig {
    fn default() -> Self {
        BiasConfig { unit: Unit::Phoneme, w: DEFAULT_BONUS, lambda: 1.0 }
    }
}

/// A compiled biasing trie with failure arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualFst {
    fst: Wfst,
    units: Vec<Unit>,
    phrase_count: usize,
}

impl ContextualFst {
    /// Wraps a machine read from disk after checking the trie shape: input
    /// deterministic, acyclic apart from failure arcs, and every failure arc
    /// pointing at the start.
    pub fn from_wfst(mut fst: Wfst) -> Result<Self, BiasError> {
        fst.validate()?;
        if fst.start().is_none() {
            fst = single_state();
        }
        let start = fst.start().unwrap_or(0);
        if !fst.is_input_deterministic() {
            return Err(BiasError::Malformed("two arcs share an input label"));
        }
        let mut plain = Wfst::new();
        plain.add_states(fst.num_states());
        plain.set_start(start);
        for s in fst.state_ids() {
            for a in fst.arcs(s) {
                if a.is_failure() {
                    if a.next != start {
                        return Err(BiasError::Malformed("failure arc not aimed at the start"));
                    }
                } else if a.is_epsilon() {
                    return Err(BiasError::Malformed("epsilon-input arc"));
                } else {
                    plain.add_arc(s, *a);
                }
            }
        }
        if !plain.is_acyclic() {
            return Err(BiasError::Malformed("trie arcs form a cycle"));
        }
        let phrase_count = fst.state_ids().filter(|&s| fst.is_final(s)).count();
        fst.arc_sort();
        Ok(ContextualFst { fst, units: Vec::new(), phrase_count })
    }

    pub fn empty() -> Self {
        ContextualFst { fst: single_state(), units: Vec::new(), phrase_count: 0 }
    }

    pub fn fst(&self) -> &Wfst {
        &self.fst
    }

    pub fn into_wfst(self) -> Wfst {
        self.fst
    }

    /// Units the phrases were compiled in; empty when loaded from disk.
    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn phrase_count(&self) -> usize {
        self.phrase_count
    }

    pub fn start(&self) -> StateId {
        self.fst.start().unwrap_or(0)
    }

    pub fn step(&self, state: StateId, label: Label) -> Result<(StateId, Cost), FstError> {
        step_with_failure(&self.fst, state, label)
    }

    /// The trie alone, failure arcs dropped.
    pub fn trie(&self) -> Wfst {
        strip_failures(&self.fst)
    }

    /// Cost of abandoning a partial match at `state`: its failure cost, or 0
    /// at the start.
    pub fn finish_cost(&self, state: StateId) -> Cost {
        if state == self.start() {
            return 0.0;
        }
        self.fst.failure_arc(state).map_or(0.0, |a| a.cost)
    }
}

fn strip_failures(f: &Wfst) -> Wfst {
    let mut g = Wfst::new().with_symbols(f.input_symbols().cloned(), f.output_symbols().cloned());
    g.add_states(f.num_states());
    if let Some(s) = f.start() {
        g.set_start(s);
    }
    for s in f.state_ids() {
        for a in f.arcs(s).iter().filter(|a| !a.is_failure()) {
            g.add_arc(s, *a);
        }
        if let Some(x) = f.final_cost(s) {
            g.set_final(s, x);
        }
    }
    g
}

fn single_state() -> Wfst {
    let mut f = Wfst::new();
    f.add_state();
    f.set_start(0);
    f
}

/// Trie over unit sequences with bonus `-w` per arc and cancelling failure
/// arcs. Duplicate sequences share one path.
pub fn build_bias_trie(sequences: &[Vec<Label>], w: f64) -> Wfst {
    let mut f = single_state();
    let mut depth: Vec<usize> = vec![0];
    for seq in sequences {
        let mut s = 0;
        for &l in seq {
            s = match f.find_arc(s, l) {
                Some(a) => a.next,
                None => {
                    let n = f.add_state();
                    depth.push(depth[s as usize] + 1);
                    f.add_arc(s, Arc::new(l, l, -w, n));
                    n
                }
            };
        }
        if !seq.is_empty() {
            f.set_final(s, 0.0);
        }
    }
    decorate_failures(&mut f, &depth, w);
    f
}

/// Adds the failure arcs, visiting states parent-first so the deepest
/// accepting ancestor is known.
fn decorate_failures(f: &mut Wfst, depth: &[usize], w: f64) {
    let n = f.num_states();
    let mut kept = vec![0usize; n];
    let mut stack = vec![0 as StateId];
    while let Some(s) = stack.pop() {
        let children: Vec<StateId> = f.arcs(s).iter().filter(|a| !a.is_failure()).map(|a| a.next).collect();
        for c in children {
            kept[c as usize] = if f.is_final(c) { depth[c as usize] } else { kept[s as usize] };
            let cost = (depth[c as usize] - kept[c as usize]) as f64 * w;
            f.add_arc(c, Arc::new(FAILURE, EPSILON, cost, 0));
            stack.push(c);
        }
    }
    f.arc_sort();
}

fn expand_all<S: AsRef<str>>(
    phrases: &[Vec<S>],
    unit: Unit,
    ctx: &UnitContext<'_>,
) -> Result<Vec<Vec<Label>>, BiasError> {
    phrases
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.is_empty() || p.iter().any(|w| w.as_ref().is_empty()) {
                return Err(BiasError::EmptyPhrase(i));
            }
            Ok(ctx.expand_phrase(p, unit)?)
        })
        .collect()
}

pub fn build_contextual_fst<S: AsRef<str>>(
    phrases: &[Vec<S>],
    cfg: &BiasConfig,
    ctx: &UnitContext<'_>,
) -> Result<ContextualFst, BiasError> {
    let seqs = expand_all(phrases, cfg.unit, ctx)?;
    let mut fst = build_bias_trie(&seqs, cfg.w);
    fst.set_input_symbols(Some(ctx.symbols.clone()));
    fst.set_output_symbols(Some(ctx.symbols.clone()));
    Ok(ContextualFst { fst, units: vec![cfg.unit], phrase_count: phrases.len() })
}

/// Phoneme and wordpiece tries joined at one start state, same bonus on both.
pub fn build_parallel_bias<S: AsRef<str>>(
    phrases: &[Vec<S>],
    w: f64,
    ctx: &UnitContext<'_>,
) -> Result<ContextualFst, BiasError> {
    BiasConfig::new(Unit::Phoneme, w, 0.0)?;
    let mut seqs = expand_all(phrases, Unit::Phoneme, ctx)?;
    seqs.extend(expand_all(phrases, Unit::Wordpiece, ctx)?);
    let mut fst = build_bias_trie(&seqs, w);
    fst.set_input_symbols(Some(ctx.symbols.clone()));
    fst.set_output_symbols(Some(ctx.symbols.clone()));
    Ok(ContextualFst { fst, units: vec![Unit::Phoneme, Unit::Wordpiece], phrase_count: phrases.len() })
}

/// Word table for the distinct words of `phrases`, in first-seen order.
pub fn phrase_words<S: AsRef<str>>(phrases: &[Vec<S>]) -> SymbolTable {
    let mut seen = BTreeSet::new();
    let mut words: Vec<&str> = Vec::new();
    for w in phrases.iter().flatten() {
        if seen.insert(w.as_ref()) {
            words.push(w.as_ref());
        }
    }
    SymbolTable::for_words(words)
}

/// Word-level union acceptor over `phrases`, a trie with zero costs.
pub fn build_phrase_acceptor<S: AsRef<str>>(phrases: &[Vec<S>], words: &SymbolTable) -> Result<Wfst, BiasError> {
    let mut seqs = Vec::with_capacity(phrases.len());
    for (i, p) in phrases.iter().enumerate() {
        if p.is_empty() {
            return Err(BiasError::EmptyPhrase(i));
        }
        let ids: Option<Vec<Label>> = p.iter().map(|w| words.id(w.as_ref())).collect();
        seqs.push(ids.ok_or(BiasError::Malformed("phrase word missing from the word table"))?);
    }
    let mut f = single_state();
    for seq in &seqs {
        let mut s = 0;
        for &l in seq {
            s = match f.find_arc(s, l) {
                Some(a) => a.next,
                None => {
                    let n = f.add_state();
                    f.add_arc(s, Arc::new(l, l, 0.0, n));
                    n
                }
            };
        }
        f.set_final(s, 0.0);
    }
    f.arc_sort();
    f.set_input_symbols(Some(words.clone()));
    f.set_output_symbols(Some(words.clone()));
    Ok(f)
}

/// Acyclic transducer from each word's unit sequence to its word label; the
/// label rides on the last unit arc and every unit arc costs `arc_cost`.
pub fn build_lexicon_fst<S: AsRef<str>>(
    words: &[S],
    unit: Unit,
    ctx: &UnitContext<'_>,
    word_table: &SymbolTable,
    arc_cost: Cost,
) -> Result<Wfst, BiasError> {
    let mut f = single_state();
    let end = f.add_state();
    f.set_final(end, 0.0);
    for w in words {
        let w = w.as_ref();
        let units = ctx.expand(w, unit)?;
        if units.is_empty() {
            return Err(BiasError::Expansion(ExpansionFailure {
                word: String::from(w),
                unit,
                reason: String::from("empty expansion"),
            }));
        }
        let label = word_table.id(w).ok_or(BiasError::Malformed("word missing from the word table"))?;
        let mut s = 0;
        for (i, &u) in units.iter().enumerate() {
            let last = i + 1 == units.len();
            let n = if last { end } else { f.add_state() };
            f.add_arc(s, Arc::new(u, if last { label } else { EPSILON }, arc_cost, n));
            s = n;
        }
    }
    f.set_input_symbols(Some(ctx.symbols.clone()));
    f.set_output_symbols(Some(word_table.clone()));
    Ok(f)
}

/// Speller S: the lexicon transducer closed under `<eow>`-separated
/// repetition, so it spells word sequences.
pub fn build_speller<S: AsRef<str>>(
    words: &[S],
    unit: Unit,
    ctx: &UnitContext<'_>,
    word_table: &SymbolTable,
    arc_cost: Cost,
) -> Result<Wfst, BiasError> {
    let mut f = build_lexicon_fst(words, unit, ctx, word_table, arc_cost)?;
    f.add_arc(1, Arc::new(ctx.symbols.eow(), EPSILON, arc_cost, 0));
    Ok(f)
}

/// `min(det(S ∘ G))` with `-w` on every unit arc of the speller, projected
/// onto units first so homophonous phrases stay determinizable.
pub fn build_reference_contextual<S: AsRef<str>>(
    phrases: &[Vec<S>],
    cfg: &BiasConfig,
    ctx: &UnitContext<'_>,
) -> Result<Wfst, BiasError> {
    let table = phrase_words(phrases);
    let g = build_phrase_acceptor(phrases, &table)?;
    let words: Vec<&str> = table.iter().filter(|e| e.2 == SymbolKind::Word).map(|e| e.1).collect();
    let s = build_speller(&words, cfg.unit, ctx, &table, -cfg.w)?;
    let sg = compose(&s, &g)?.project_input();
    Ok(minimize_acyclic(&determinize_acyclic(&sg)?)?)
}

/// Dynamic-class grammar: `det(L) ∘ G`.
pub fn build_dynamic_class_lm(l: &Wfst, g: &Wfst) -> Result<Wfst, BiasError> {
    Ok(compose(&determinize_acyclic(l)?, g)?)
}
