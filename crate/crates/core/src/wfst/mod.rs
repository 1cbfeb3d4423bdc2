//! Weighted finite-state transducers over the cost semiring.
//!
//! Costs are negative natural-log probabilities: path cost is the sum of arc
//! costs plus the final cost, and the better of two alternatives is the one
//! with the lower cost. Label 0 is epsilon and label 1 is the failure label;
//! an arc with the failure label on its input side is taken only when no
//! other arc matches and consumes no input.

mod compose;
mod determinize;
mod failure;
mod minimize;
mod paths;
mod rmeps;
mod shortest;
mod text;

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::symbols::SymbolTable;

pub use compose::compose;
pub use determinize::determinize_acyclic;
pub use failure::step_with_failure;
pub use minimize::{minimize_acyclic, push_costs};
pub use paths::{enumerate_paths, Path, PathSet};
pub use rmeps::remove_epsilons;
pub use shortest::shortest_path;

pub type StateId = u32;
pub type Label = u32;
/// Negative natural-log probability.
pub type Cost = f64;

pub const EPSILON: Label = 0;
pub const FAILURE: Label = 1;
pub const INFINITE_COST: Cost = f64::INFINITY;

#[derive(Debug, Clone, PartialEq)]
pub enum FstError {
    AlphabetMismatch,
    UnsupportedArcKind(&'static str),
    DivergentEpsilonCycle,
    NotAcyclic,
    NotFunctional,
    NotDeterministic,
    EmptyLanguage,
    TooManyPaths(usize),
    NoTransition {
        state: StateId,
        label: Label,
    },
    /// Failure arcs form a loop that never consumes the label.
    FailureLoop(StateId),
    NoStart,
    NegativeCostCycle,
    InvalidState(StateId),
    MultipleFailureArcs(StateId),
    Parse {
        line: usize,
        reason: String,
    },
}

impl fmt::Display for FstError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FstError::AlphabetMismatch => {
                f.write_str("output alphabet of the left machine differs from input alphabet of the right")
            }
            FstError::UnsupportedArcKind(s) => write!(f, "unsupported arc kind: {s}"),
            FstError::DivergentEpsilonCycle => f.write_str("negative-cost epsilon cycle"),
            FstError::NotAcyclic => f.write_str("machine is cyclic"),
            FstError::NotFunctional => f.write_str("transducer is not functional"),
            FstError::NotDeterministic => f.write_str("machine is not deterministic on its input"),
            FstError::EmptyLanguage => f.write_str("no accepting path"),
            FstError::TooManyPaths(n) => write!(f, "more than {n} accepting paths"),
            FstError::NoTransition { state, label } => write!(f, "no transition for label {label} from state {state}"),
            FstError::FailureLoop(s) => write!(f, "failure arcs loop at state {s}"),
            FstError::NoStart => f.write_str("machine has no start state"),
            FstError::NegativeCostCycle => f.write_str("cyclic machine with negative costs"),
            FstError::InvalidState(s) => write!(f, "state {s} does not exist"),
            FstError::MultipleFailureArcs(s) => write!(f, "state {s} has more than one failure arc"),
            FstError::Parse { line, reason } => write!(f, "line {line}: {reason}"),
        }
    }
}

impl core::error::Error for FstError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub ilabel: Label,
    pub olabel: Label,
    pub cost: Cost,
    pub next: StateId,
}

impl Arc {
    pub fn new(ilabel: Label, olabel: Label, cost: Cost, next: StateId) -> Self {
        Arc { ilabel, olabel, cost, next }
    }

    pub fn is_epsilon(&self) -> bool {
        self.ilabel == EPSILON
    }

    pub fn is_failure(&self) -> bool {
        self.ilabel == FAILURE
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct State {
    arcs: Vec<Arc>,
    final_cost: Option<Cost>,
    sorted: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Wfst {
    states: Vec<State>,
    start: Option<StateId>,
    input_symbols: Option<SymbolTable>,
    output_symbols: Option<SymbolTable>,
}

impl Wfst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(State { sorted: true, ..State::default() });
        (self.states.len() - 1) as StateId
    }

    pub fn add_states(&mut self, n: usize) {
        for _ in 0..n {
            self.add_state();
        }
    }

    pub fn set_start(&mut self, s: StateId) {
        assert!((s as usize) < self.states.len(), "start state {s} out of range");
        self.start = Some(s);
    }

    pub fn start(&self) -> Option<StateId> {
        self.start
    }

    /// Marks `s` final. An infinite cost makes it non-final.
    pub fn set_final(&mut self, s: StateId, cost: Cost) {
        self.states[s as usize].final_cost = if cost == INFINITE_COST { None } else { Some(cost) };
    }

    pub fn clear_final(&mut self, s: StateId) {
        self.states[s as usize].final_cost = None;
    }

    pub fn final_cost(&self, s: StateId) -> Option<Cost> {
        self.states[s as usize].final_cost
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.final_cost(s).is_some()
    }

    pub fn add_arc(&mut self, s: StateId, arc: Arc) {
        let st = &mut self.states[s as usize];
        if let Some(last) = st.arcs.last() {
            if (last.ilabel, last.olabel) > (arc.ilabel, arc.olabel) {
                st.sorted = false;
            }
        }
        st.arcs.push(arc);
    }

    pub fn arcs(&self, s: StateId) -> &[Arc] {
        &self.states[s as usize].arcs
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        0..self.states.len() as StateId
    }

    pub fn with_symbols(mut self, input: Option<SymbolTable>, output: Option<SymbolTable>) -> Self {
        self.input_symbols = input;
        self.output_symbols = output;
        self
    }

    pub fn set_input_symbols(&mut self, t: Option<SymbolTable>) {
        self.input_symbols = t;
    }

    pub fn set_output_symbols(&mut self, t: Option<SymbolTable>) {
        self.output_symbols = t;
    }

    pub fn input_symbols(&self) -> Option<&SymbolTable> {
        self.input_symbols.as_ref()
    }

    pub fn output_symbols(&self) -> Option<&SymbolTable> {
        self.output_symbols.as_ref()
    }

    /// Sorts every state's arcs by `(ilabel, olabel)` so input lookups can bisect.
    pub fn arc_sort(&mut self) {
        for st in &mut self.states {
            if !st.sorted {
                st.arcs.sort_by_key(|a| (a.ilabel, a.olabel));
                st.sorted = true;
            }
        }
    }

    /// Arcs of `s` with input `label`; bisects when the state is arc-sorted.
    pub fn find_arcs(&self, s: StateId, label: Label) -> impl Iterator<Item = &Arc> + '_ {
        let st = &self.states[s as usize];
        let slice = if st.sorted {
            let lo = st.arcs.partition_point(|a| a.ilabel < label);
            let hi = lo + st.arcs[lo..].partition_point(|a| a.ilabel == label);
            &st.arcs[lo..hi]
        } else {
            &st.arcs[..]
        };
        slice.iter().filter(move |a| a.ilabel == label)
    }

    pub fn find_arc(&self, s: StateId, label: Label) -> Option<&Arc> {
        self.find_arcs(s, label).next()
    }

    pub fn failure_arc(&self, s: StateId) -> Option<&Arc> {
        self.arcs(s).iter().find(|a| a.is_failure())
    }

    pub fn has_failure_arcs(&self) -> bool {
        self.states.iter().any(|s| s.arcs.iter().any(Arc::is_failure))
    }

    pub fn has_epsilon_inputs(&self) -> bool {
        self.states.iter().any(|s| s.arcs.iter().any(Arc::is_epsilon))
    }

    /// Checks arc targets, the start state and the one-failure-arc rule.
    pub fn validate(&self) -> Result<(), FstError> {
        let n = self.states.len() as StateId;
        if let Some(s) = self.start {
            if s >= n {
                return Err(FstError::InvalidState(s));
            }
        }
        for s in self.state_ids() {
            let mut failures = 0;
            for a in self.arcs(s) {
                if a.next >= n {
                    return Err(FstError::InvalidState(a.next));
                }
                failures += a.is_failure() as usize;
            }
            if failures > 1 {
                return Err(FstError::MultipleFailureArcs(s));
            }
        }
        Ok(())
    }

    /// No state has two non-epsilon, non-failure arcs sharing an input label.
    pub fn is_input_deterministic(&self) -> bool {
        let mut labels = Vec::new();
        for st in &self.states {
            labels.clear();
            labels.extend(st.arcs.iter().filter(|a| a.ilabel != EPSILON && a.ilabel != FAILURE).map(|a| a.ilabel));
            labels.sort_unstable();
            if labels.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
        }
        true
    }

    /// States reachable from the start, in BFS order.
    pub fn accessible(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        if let Some(s) = self.start {
            let mut queue = VecDeque::from([s]);
            seen[s as usize] = true;
            while let Some(q) = queue.pop_front() {
                for a in self.arcs(q) {
                    if !seen[a.next as usize] {
                        seen[a.next as usize] = true;
                        queue.push_back(a.next);
                    }
                }
            }
        }
        seen
    }

    /// States from which some final state is reachable.
    pub fn coaccessible(&self) -> Vec<bool> {
        let mut rev: Vec<Vec<StateId>> = vec![Vec::new(); self.states.len()];
        for s in self.state_ids() {
            for a in self.arcs(s) {
                rev[a.next as usize].push(s);
            }
        }
        let mut seen = vec![false; self.states.len()];
        let mut queue: VecDeque<StateId> = self.state_ids().filter(|&s| self.is_final(s)).collect();
        for &s in &queue {
            seen[s as usize] = true;
        }
        while let Some(q) = queue.pop_front() {
            for &p in &rev[q as usize] {
                if !seen[p as usize] {
                    seen[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// Copy restricted to states that are both accessible and coaccessible,
    /// renumbered in ascending order of the old ids.
    pub fn connect(&self) -> Wfst {
        let acc = self.accessible();
        let coacc = self.coaccessible();
        let keep: Vec<bool> = acc.iter().zip(&coacc).map(|(a, c)| *a && *c).collect();
        let mut out = Wfst::new().with_symbols(self.input_symbols.clone(), self.output_symbols.clone());
        let start = match self.start {
            Some(s) if keep[s as usize] => s,
            _ => return out,
        };
        let mut map = vec![StateId::MAX; self.states.len()];
        for s in self.state_ids() {
            if keep[s as usize] {
                map[s as usize] = out.add_state();
            }
        }
        for s in self.state_ids() {
            if !keep[s as usize] {
                continue;
            }
            let ns = map[s as usize];
            if let Some(c) = self.final_cost(s) {
                out.set_final(ns, c);
            }
            for a in self.arcs(s) {
                if keep[a.next as usize] {
                    out.add_arc(ns, Arc { next: map[a.next as usize], ..*a });
                }
            }
        }
        out.set_start(map[start as usize]);
        out
    }

    /// Topological order of the accessible states, or `None` if a cycle is reachable.
    pub fn topo_order(&self) -> Option<Vec<StateId>> {
        let start = match self.start {
            Some(s) => s,
            None => return Some(Vec::new()),
        };
        // iterative DFS with colors: 0 white, 1 grey, 2 black
        let mut color = vec![0u8; self.states.len()];
        let mut post = Vec::new();
        let mut stack: Vec<(StateId, usize)> = vec![(start, 0)];
        color[start as usize] = 1;
        while let Some(&mut (q, ref mut i)) = stack.last_mut() {
            let arcs = self.arcs(q);
            if *i < arcs.len() {
                let next = arcs[*i].next;
                *i += 1;
                match color[next as usize] {
                    0 => {
                        color[next as usize] = 1;
                        stack.push((next, 0));
                    }
                    1 => return None,
                    _ => {}
                }
            } else {
                color[q as usize] = 2;
                post.push(q);
                stack.pop();
            }
        }
        post.reverse();
        Some(post)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topo_order().is_some()
    }

    /// Acceptor over the input labels (output := input), keeping costs.
    pub fn project_input(&self) -> Wfst {
        let mut out = self.clone();
        for st in &mut out.states {
            for a in &mut st.arcs {
                a.olabel = a.ilabel;
            }
            st.sorted = false;
        }
        out.output_symbols = out.input_symbols.clone();
        out
    }

    /// Swaps input and output labels.
    pub fn invert(&self) -> Wfst {
        let mut out = self.clone();
        for st in &mut out.states {
            for a in &mut st.arcs {
                core::mem::swap(&mut a.ilabel, &mut a.olabel);
            }
            st.sorted = false;
        }
        core::mem::swap(&mut out.input_symbols, &mut out.output_symbols);
        out
    }

    /// Single-state identity transducer over `labels` (all final, cost 0).
    pub fn identity<I: IntoIterator<Item = Label>>(labels: I) -> Wfst {
        let mut f = Wfst::new();
        let s = f.add_state();
        f.set_start(s);
        f.set_final(s, 0.0);
        for l in labels {
            f.add_arc(s, Arc::new(l, l, 0.0, s));
        }
        f
    }

    /// Linear acceptor/transducer for one `(input, output)` string pair of equal length.
    pub fn linear(pairs: &[(Label, Label)], cost: Cost) -> Wfst {
        let mut f = Wfst::new();
        let mut s = f.add_state();
        f.set_start(s);
        for (i, &(il, ol)) in pairs.iter().enumerate() {
            let n = f.add_state();
            f.add_arc(s, Arc::new(il, ol, if i == 0 { cost } else { 0.0 }, n));
            s = n;
        }
        f.set_final(s, if pairs.is_empty() { cost } else { 0.0 });
        f
    }
}
