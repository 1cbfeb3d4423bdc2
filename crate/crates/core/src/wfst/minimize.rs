use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use super::{Arc, Cost, FstError, Label, StateId, Wfst, INFINITE_COST};

/// Grid used to compare costs in state signatures.
const COST_QUANTUM: f64 = 1e-9;

fn quantize(c: Cost) -> i64 {
    libm::round(c / COST_QUANTUM) as i64
}

/// Reweights an acyclic machine so every state's cheapest completion costs 0,
/// except at the start state, which keeps the total. Path costs are unchanged.
pub fn push_costs(a: &Wfst) -> Result<Wfst, FstError> {
    if !a.is_acyclic() {
        return Err(FstError::NotAcyclic);
    }
    let a = a.connect();
    let Some(start) = a.start() else {
        return Ok(a);
    };
    let order = a.topo_order().ok_or(FstError::NotAcyclic)?;
    let mut pot = vec![INFINITE_COST; a.num_states()];
    for &s in order.iter().rev() {
        let mut best = a.final_cost(s).unwrap_or(INFINITE_COST);
        for arc in a.arcs(s) {
            best = best.min(arc.cost + pot[arc.next as usize]);
        }
        pot[s as usize] = best;
    }
    pot[start as usize] = 0.0;
    let mut out = Wfst::new().with_symbols(a.input_symbols().cloned(), a.output_symbols().cloned());
    out.add_states(a.num_states());
    out.set_start(start);
    for s in a.state_ids() {
        let v = pot[s as usize];
        for arc in a.arcs(s) {
            out.add_arc(s, Arc { cost: arc.cost + pot[arc.next as usize] - v, ..*arc });
        }
        if let Some(f) = a.final_cost(s) {
            out.set_final(s, f - v);
        }
    }
    Ok(out)
}

type Signature = (Option<i64>, Vec<(Label, Label, i64, usize)>);

/// Minimizes a deterministic acyclic machine: costs are pushed, then states
/// with identical signatures (final cost and the labelled, costed arcs into
/// already-merged classes) are merged from the leaves upward.
pub fn minimize_acyclic(a: &Wfst) -> Result<Wfst, FstError> {
    if !a.is_input_deterministic() {
        return Err(FstError::NotDeterministic);
    }
    let p = push_costs(a)?;
    let Some(start) = p.start() else {
        return Ok(p);
    };
    let order = p.topo_order().ok_or(FstError::NotAcyclic)?;
    let mut class = vec![usize::MAX; p.num_states()];
    let mut classes: BTreeMap<Signature, usize> = BTreeMap::new();
    let mut reps: Vec<StateId> = Vec::new();
    for &s in order.iter().rev() {
        let mut arcs: Vec<(Label, Label, i64, usize)> =
            p.arcs(s).iter().map(|x| (x.ilabel, x.olabel, quantize(x.cost), class[x.next as usize])).collect();
        arcs.sort_unstable();
        arcs.dedup();
        let sig = (p.final_cost(s).map(quantize), arcs);
        let next = classes.len();
        let c = *classes.entry(sig).or_insert_with(|| {
            reps.push(s);
            next
        });
        class[s as usize] = c;
    }

    // rebuild in BFS order from the start class
    let mut out = Wfst::new().with_symbols(p.input_symbols().cloned(), p.output_symbols().cloned());
    let mut new_id = vec![StateId::MAX; reps.len()];
    let mut queue = VecDeque::new();
    new_id[class[start as usize]] = out.add_state();
    out.set_start(0);
    queue.push_back(class[start as usize]);
    while let Some(c) = queue.pop_front() {
        let rep = reps[c];
        let src = new_id[c];
        if let Some(f) = p.final_cost(rep) {
            out.set_final(src, f);
        }
        let mut seen: Vec<(Label, Label, usize)> = Vec::new();
        for x in p.arcs(rep) {
            let tc = class[x.next as usize];
            if seen.contains(&(x.ilabel, x.olabel, tc)) {
                continue;
            }
            seen.push((x.ilabel, x.olabel, tc));
            if new_id[tc] == StateId::MAX {
                new_id[tc] = out.add_state();
                queue.push_back(tc);
            }
            out.add_arc(src, Arc::new(x.ilabel, x.olabel, x.cost, new_id[tc]));
        }
    }
    Ok(out)
}
