//! Label-synchronous beam search with shallow-fusion biasing.
//!
//! Each step consumes exactly one input symbol. A hypothesis moves along the
//! decoding graph, and when a biasing FST is present it also advances a
//! failure-arc matcher over the same input symbols. Ranking uses
//! `model_cost + λ·bias_cost`.

mod synthetic;

pub use synthetic::{generate_synthetic_emissions, synthetic_reference};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::bias::ContextualFst;
use crate::graph::DecodingGraph;
use crate::symbols::SymbolTable;
use crate::tokenize::{detokenize, is_word_initial};
use crate::wfst::{Cost, FstError, Label, StateId, EPSILON, FAILURE};

/// Tolerance on the per-step probability mass.
pub const MASS_TOLERANCE: f64 = 1e-6;

pub const DEFAULT_BEAM: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum DecodeError {
    InvalidEmissions { step: usize, reason: &'static str },
    AlphabetMismatch(Label),
    NoCompleteHypothesis,
    InvalidConfig(&'static str),
    Bias(FstError),
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::InvalidEmissions { step, reason } => write!(f, "step {step}: {reason}"),
            DecodeError::AlphabetMismatch(l) => write!(f, "symbol {l} is not in the graph alphabet"),
            DecodeError::NoCompleteHypothesis => f.write_str("no hypothesis reached a word boundary"),
            DecodeError::InvalidConfig(s) => write!(f, "invalid decoder config: {s}"),
            DecodeError::Bias(e) => write!(f, "biasing fst: {e}"),
        }
    }
}

impl core::error::Error for DecodeError {}

impl From<FstError> for DecodeError {
    fn from(e: FstError) -> Self {
        DecodeError::Bias(e)
    }
}

/// Per-step log-posteriors. Steps are sparse: absent symbols have
/// probability 0.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionSequence {
    pub utt_id: String,
    steps: Vec<Vec<(Label, f64)>>,
}

impl EmissionSequence {
    pub fn new(utt_id: impl Into<String>, mut steps: Vec<Vec<(Label, f64)>>) -> Result<Self, DecodeError> {
        for (i, step) in steps.iter_mut().enumerate() {
            let bad = |reason| DecodeError::InvalidEmissions { step: i, reason };
            step.retain(|&(_, lp)| lp != f64::NEG_INFINITY);
            step.sort_by_key(|&(l, _)| l);
            if step.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(bad("duplicate symbol"));
            }
            if step.iter().any(|&(_, lp)| lp.is_nan() || lp > 0.0) {
                return Err(bad("log-probability above 0"));
            }
            let mass: f64 = step.iter().map(|&(_, lp)| libm::exp(lp)).sum();
            if (mass - 1.0).abs() > MASS_TOLERANCE {
                return Err(bad("probabilities do not sum to 1"));
            }
        }
        Ok(EmissionSequence { utt_id: utt_id.into(), steps })
    }

    pub fn steps(&self) -> &[Vec<(Label, f64)>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Most probable symbol at each step, lowest id on ties.
    pub fn argmax(&self) -> Vec<Label> {
        self.steps
            .iter()
            .map(|s| s.iter().fold((EPSILON, f64::NEG_INFINITY), |b, &(l, lp)| if lp > b.1 { (l, lp) } else { b }).0)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub out: Vec<Label>,
    pub inp: Vec<Label>,
    pub g_state: StateId,
    pub b_state: StateId,
    pub model_cost: Cost,
    pub bias_cost: Cost,
}

impl Hypothesis {
    pub fn initial(b_state: StateId) -> Self {
        Hypothesis { out: Vec::new(), inp: Vec::new(), g_state: 0, b_state, model_cost: 0.0, bias_cost: 0.0 }
    }

    pub fn total(&self, lambda: f64) -> Cost {
        self.model_cost + lambda * self.bias_cost
    }
}

/// Costs closer than this rank as equal and fall back to the label order.
const RANK_QUANTUM: f64 = 1e-9;

fn quantize(c: Cost) -> i64 {
    libm::round(c / RANK_QUANTUM) as i64
}

/// Beam order: total cost, then output labels, then input labels.
pub fn rank(a: &Hypothesis, b: &Hypothesis, lambda: f64) -> Ordering {
    quantize(a.total(lambda))
        .cmp(&quantize(b.total(lambda)))
        .then_with(|| a.out.cmp(&b.out))
        .then_with(|| a.inp.cmp(&b.inp))
}

/// `-ln Σ exp(-c)`, stable for large costs.
pub fn log_sum_costs(costs: impl IntoIterator<Item = Cost>) -> Cost {
    let costs: Vec<Cost> = costs.into_iter().collect();
    let m = costs.iter().copied().fold(f64::INFINITY, f64::min);
    if m == f64::INFINITY {
        return m;
    }
    m - libm::log(costs.iter().map(|&c| libm::exp(m - c)).sum::<f64>())
}

/// Merges hypotheses with equal output, graph state and bias state. The best
/// member survives carrying the group's summed probability; the difference
/// is booked on its model cost. Groups keep the order of their first member.
pub fn recombine(beam: Vec<Hypothesis>, lambda: f64) -> Vec<Hypothesis> {
    let mut groups: Vec<Vec<Hypothesis>> = Vec::new();
    let mut index: BTreeMap<(Vec<Label>, StateId, StateId), usize> = BTreeMap::new();
    for h in beam {
        let key = (h.out.clone(), h.g_state, h.b_state);
        match index.get(&key) {
            Some(&i) => groups[i].push(h),
            None => {
                index.insert(key, groups.len());
                groups.push(alloc::vec![h]);
            }
        }
    }
    groups
        .into_iter()
        .map(|g| {
            if g.len() == 1 {
                return g.into_iter().next().unwrap();
            }
            let merged = log_sum_costs(g.iter().map(|h| h.total(lambda)));
            let mut best = g.into_iter().min_by(|a, b| rank(a, b, lambda)).unwrap();
            best.model_cost += merged - best.total(lambda);
            best
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct DecoderConfig<'a> {
    pub beam_size: usize,
    pub lambda: f64,
    pub bias: Option<&'a ContextualFst>,
    pub finalize_partial: bool,
}

impl Default for DecoderConfig<'_> {
    fn default() -> Self {
        DecoderConfig { beam_size: DEFAULT_BEAM, lambda: 1.0, bias: None, finalize_partial: false }
    }
}

impl<'a> DecoderConfig<'a> {
    pub fn with_bias(mut self, bias: &'a ContextualFst, lambda: f64) -> Self {
        self.bias = Some(bias);
        self.lambda = lambda;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeStats {
    pub steps: usize,
    pub expansions: usize,
    pub peak_beam: usize,
    /// Beam entries found resting on a state with pending epsilon arcs.
    pub eager_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub words: Vec<String>,
    pub out: Vec<Label>,
    pub inp: Vec<Label>,
    pub cost: Cost,
    pub model_cost: Cost,
    pub bias_cost: Cost,
    /// The winner ended inside a word and was closed off early.
    pub truncated: bool,
    pub stats: DecodeStats,
}

impl DecodeOutput {
    pub fn transcript(&self) -> String {
        self.words.join(" ")
    }
}

/// Appends a word boundary unless the output is empty or already ends in one.
fn push_boundary(out: &mut Vec<Label>, eow: Label) {
    if out.last().is_some_and(|&l| l != eow) {
        out.push(eow);
    }
}

/// Splits an output sequence into words at `<eow>` and at word-initial pieces.
pub fn assemble_words(out: &[Label], symbols: &SymbolTable) -> Vec<String> {
    let eow = symbols.eow();
    let mut words = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    for &l in out {
        if l == eow {
            if !cur.is_empty() {
                words.push(detokenize(&cur));
                cur.clear();
            }
            continue;
        }
        let Some(piece) = symbols.symbol(l) else { continue };
        if is_word_initial(piece) && !cur.is_empty() {
            words.push(detokenize(&cur));
            cur.clear();
        }
        cur.push(piece);
    }
    if !cur.is_empty() {
        words.push(detokenize(&cur));
    }
    words
}

fn check_alphabet(em: &EmissionSequence, g: &DecodingGraph, bias: Option<&ContextualFst>) -> Result<(), DecodeError> {
    let n = g.symbols().len() as Label;
    if let Some(table) = bias.and_then(|b| b.fst().input_symbols()) {
        if table != g.symbols() {
            return Err(DecodeError::AlphabetMismatch(EPSILON));
        }
    }
    for step in em.steps() {
        for &(l, _) in step {
            if l == EPSILON || l == FAILURE || l >= n {
                return Err(DecodeError::AlphabetMismatch(l));
            }
        }
    }
    Ok(())
}

pub fn decode(em: &EmissionSequence, g: &DecodingGraph, cfg: &DecoderConfig<'_>) -> Result<DecodeOutput, DecodeError> {
    if cfg.beam_size == 0 {
        return Err(DecodeError::InvalidConfig("beam size must be at least 1"));
    }
    if !(cfg.lambda >= 0.0 && cfg.lambda.is_finite()) {
        return Err(DecodeError::InvalidConfig("lambda must be finite and non-negative"));
    }
    // with λ = 0 the matcher state would only split recombination groups
    let bias = cfg.bias.filter(|_| cfg.lambda > 0.0);
    check_alphabet(em, g, bias)?;
    let lambda = cfg.lambda;
    let eow = g.symbols().eow();
    let mut stats = DecodeStats::default();

    let mut beam = alloc::vec![Hypothesis::initial(bias.map_or(0, ContextualFst::start))];
    for step in em.steps() {
        stats.steps += 1;
        let mut next = Vec::new();
        for h in &beam {
            for &(sym, lp) in step {
                for arc in g.arcs_for(h.g_state, sym) {
                    let (b_state, bc) = match bias {
                        Some(b) => b.step(h.b_state, sym)?,
                        None => (h.b_state, 0.0),
                    };
                    for c in g.epsilon_closures(arc.next) {
                        let mut out = h.out.clone();
                        if arc.olabel == eow {
                            push_boundary(&mut out, eow);
                        } else if arc.olabel != EPSILON {
                            out.push(arc.olabel);
                        }
                        out.extend_from_slice(&c.outputs);
                        if !c.outputs.is_empty() {
                            push_boundary(&mut out, eow);
                        }
                        let mut inp = h.inp.clone();
                        inp.push(sym);
                        stats.expansions += 1;
                        next.push(Hypothesis {
                            out,
                            inp,
                            g_state: c.state,
                            b_state,
                            model_cost: h.model_cost - lp,
                            bias_cost: h.bias_cost + bc,
                        });
                    }
                }
            }
        }
        stats.eager_violations += next.iter().filter(|h| g.has_pending_epsilon(h.g_state)).count();
        let mut merged = recombine(next, lambda);
        merged.sort_by(|a, b| rank(a, b, lambda));
        merged.truncate(cfg.beam_size);
        stats.peak_beam = stats.peak_beam.max(merged.len());
        beam = merged;
        if beam.is_empty() {
            return Err(DecodeError::NoCompleteHypothesis);
        }
    }

    let hub = g.hub();
    let finals = beam.into_iter().filter(|h| h.g_state == hub || cfg.finalize_partial).map(|mut h| {
        if let Some(b) = bias {
            h.bias_cost += b.finish_cost(h.b_state);
        }
        h
    });
    let best = finals.min_by(|a, b| rank(a, b, lambda)).ok_or(DecodeError::NoCompleteHypothesis)?;
    Ok(DecodeOutput {
        words: assemble_words(&best.out, g.symbols()),
        truncated: best.g_state != hub,
        cost: best.total(lambda),
        model_cost: best.model_cost,
        bias_cost: best.bias_cost,
        out: best.out,
        inp: best.inp,
        stats,
    })
}
