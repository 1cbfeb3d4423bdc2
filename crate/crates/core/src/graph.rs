//! Decoding graph: wordpiece loops at a hub plus a pronunciation prefix tree.
//!
//! State 0 is the hub. Every wordpiece and `<eow>` loops on it, emitting
//! itself. Biasing words hang off the hub as a phoneme trie with `phoneme:ε`
//! arcs; after a word's last phoneme a chain of `ε:wordpiece` arcs spells the
//! word and returns to the hub.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::symbols::{SymbolKind, SymbolTable};
use crate::units::{ExpansionFailure, UnitContext};
use crate::wfst::{Arc, FstError, Label, StateId, Wfst, EPSILON};

pub const HUB: StateId = 0;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    Expansion(ExpansionFailure),
    MalformedGraph(&'static str),
    /// More than one epsilon path leaves the state (homophonous words).
    AmbiguousClosure(StateId),
    Fst(FstError),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::Expansion(e) => e.fmt(f),
            GraphError::MalformedGraph(s) => write!(f, "malformed decoding graph: {s}"),
            GraphError::AmbiguousClosure(s) => write!(f, "state {s} has several epsilon completions"),
            GraphError::Fst(e) => e.fmt(f),
        }
    }
}

impl core::error::Error for GraphError {}

impl From<ExpansionFailure> for GraphError {
    fn from(e: ExpansionFailure) -> Self {
        GraphError::Expansion(e)
    }
}

impl From<FstError> for GraphError {
    fn from(e: FstError) -> Self {
        GraphError::Fst(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphWord {
    pub word: String,
    pub pronunciation: Vec<Label>,
    pub wordpieces: Vec<Label>,
}

/// One way to drain the epsilon arcs leaving a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub state: StateId,
    pub outputs: Vec<Label>,
}

#[derive(Debug, Clone)]
pub struct DecodingGraph {
    fst: Wfst,
    symbols: SymbolTable,
    words: Vec<GraphWord>,
    tree_states: usize,
    chain_states: usize,
    closures: Vec<Vec<Closure>>,
}

pub fn build_decoding_graph<S: AsRef<str>>(
    bias_words: &[S],
    ctx: &UnitContext<'_>,
) -> Result<DecodingGraph, GraphError> {
    let symbols = ctx.symbols;
    let mut fst = Wfst::new();
    let hub = fst.add_state();
    fst.set_start(hub);
    fst.set_final(hub, 0.0);
    for (id, _, kind) in symbols.iter() {
        if kind == SymbolKind::Wordpiece || id == symbols.eow() {
            fst.add_arc(hub, Arc::new(id, id, 0.0, hub));
        }
    }

    let mut seen = BTreeSet::new();
    let mut words = Vec::new();
    let (mut tree_states, mut chain_states) = (0, 0);
    for w in bias_words {
        let w = w.as_ref();
        if !seen.insert(w) {
            continue;
        }
        let pronunciation = ctx.phonemes(w)?;
        let wordpieces = ctx.wordpieces(w)?;
        if pronunciation.is_empty() || wordpieces.is_empty() {
            return Err(GraphError::MalformedGraph("word with an empty expansion"));
        }
        let mut s = hub;
        for &p in &pronunciation {
            let hit = fst.find_arcs(s, p).find(|a| a.olabel == EPSILON).map(|a| a.next);
            s = match hit {
                Some(n) => n,
                None => {
                    let n = fst.add_state();
                    tree_states += 1;
                    fst.add_arc(s, Arc::new(p, EPSILON, 0.0, n));
                    n
                }
            };
        }
        for (i, &wp) in wordpieces.iter().enumerate() {
            let n = if i + 1 == wordpieces.len() {
                hub
            } else {
                chain_states += 1;
                fst.add_state()
            };
            fst.add_arc(s, Arc::new(EPSILON, wp, 0.0, n));
            s = n;
        }
        words.push(GraphWord { word: String::from(w), pronunciation, wordpieces });
    }
    fst.arc_sort();
    fst.set_input_symbols(Some(symbols.clone()));
    fst.set_output_symbols(Some(symbols.clone()));
    let closures = all_closures(&fst)?;
    Ok(DecodingGraph { fst, symbols: symbols.clone(), words, tree_states, chain_states, closures })
}

fn all_closures(fst: &Wfst) -> Result<Vec<Vec<Closure>>, GraphError> {
    let n = fst.num_states();
    let mut out = Vec::with_capacity(n);
    for s in fst.state_ids() {
        let mut found = Vec::new();
        let mut stack = vec![(s, Vec::new(), 0usize)];
        while let Some((q, outs, depth)) = stack.pop() {
            if depth > n {
                return Err(GraphError::MalformedGraph("epsilon cycle"));
            }
            let eps: Vec<&Arc> = fst.find_arcs(q, EPSILON).collect();
            if eps.is_empty() {
                found.push(Closure { state: q, outputs: outs });
                continue;
            }
            for a in eps.into_iter().rev() {
                let mut o = outs.clone();
                if a.olabel != EPSILON {
                    o.push(a.olabel);
                }
                stack.push((a.next, o, depth + 1));
            }
        }
        out.push(found);
    }
    Ok(out)
}

impl DecodingGraph {
    /// Wraps a serialized graph whose start state is the hub.
    pub fn from_wfst(mut fst: Wfst, symbols: SymbolTable) -> Result<Self, GraphError> {
        fst.validate()?;
        if fst.start() != Some(HUB) {
            return Err(GraphError::MalformedGraph("hub must be state 0 and the start"));
        }
        let n = symbols.len() as Label;
        for s in fst.state_ids() {
            if fst.arcs(s).iter().any(|a| a.ilabel >= n || a.olabel >= n) {
                return Err(GraphError::MalformedGraph("label outside the symbol table"));
            }
        }
        fst.arc_sort();
        fst.set_input_symbols(Some(symbols.clone()));
        fst.set_output_symbols(Some(symbols.clone()));
        let closures = all_closures(&fst)?;
        let mut on_chain = vec![false; fst.num_states()];
        for s in fst.state_ids() {
            for a in fst.arcs(s).iter().filter(|a| a.ilabel == EPSILON) {
                on_chain[a.next as usize] = true;
            }
        }
        on_chain[HUB as usize] = false;
        let chain_states = on_chain.iter().filter(|&&c| c).count();
        let tree_states = fst.num_states() - 1 - chain_states;
        Ok(DecodingGraph { fst, symbols, words: Vec::new(), tree_states, chain_states, closures })
    }

    pub fn fst(&self) -> &Wfst {
        &self.fst
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn hub(&self) -> StateId {
        HUB
    }

    /// Biasing words in build order; empty for graphs read from disk.
    pub fn words(&self) -> &[GraphWord] {
        &self.words
    }

    /// Pronunciation-prefix states, hub excluded.
    pub fn tree_state_count(&self) -> usize {
        self.tree_states
    }

    /// Interior states of the wordpiece emission chains.
    pub fn chain_state_count(&self) -> usize {
        self.chain_states
    }

    pub fn has_pending_epsilon(&self, s: StateId) -> bool {
        self.fst.find_arc(s, EPSILON).is_some()
    }

    /// Non-epsilon arcs leaving `s` with input `label`.
    pub fn arcs_for(&self, s: StateId, label: Label) -> impl Iterator<Item = &Arc> + '_ {
        let hit = label != EPSILON;
        self.fst.find_arcs(s, label).filter(move |_| hit)
    }

    /// Every terminal state reachable over epsilon arcs with the outputs
    /// collected on the way; a state without epsilon arcs is its own closure.
    pub fn epsilon_closures(&self, s: StateId) -> &[Closure] {
        &self.closures[s as usize]
    }

    pub fn epsilon_closure_outputs(&self, s: StateId) -> Result<(StateId, Vec<Label>), GraphError> {
        match self.closures.get(s as usize).map(Vec::as_slice) {
            None => Err(GraphError::Fst(FstError::InvalidState(s))),
            Some([c]) => Ok((c.state, c.outputs.clone())),
            Some(_) => Err(GraphError::AmbiguousClosure(s)),
        }
    }
}
