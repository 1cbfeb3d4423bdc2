use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{Arc, Cost, FstError, Label, StateId, Wfst, EPSILON, INFINITE_COST};

/// Removes `ε:ε` arcs, folding their costs into the following arcs and
/// final costs. Parallel arcs that end up with identical labels and target
/// keep only the cheapest cost.
///
/// Epsilon-input arcs with a real output label cannot be removed without
/// moving the output and are rejected.
pub fn remove_epsilons(a: &Wfst) -> Result<Wfst, FstError> {
    let n = a.num_states();
    let mut eps: Vec<Vec<(StateId, Cost)>> = vec![Vec::new(); n];
    for s in a.state_ids() {
        for arc in a.arcs(s) {
            if arc.ilabel == EPSILON {
                if arc.olabel != EPSILON {
                    return Err(FstError::UnsupportedArcKind("epsilon input with non-epsilon output"));
                }
                eps[s as usize].push((arc.next, arc.cost));
            }
        }
    }

    let mut out = Wfst::new().with_symbols(a.input_symbols().cloned(), a.output_symbols().cloned());
    out.add_states(n);
    if let Some(s) = a.start() {
        out.set_start(s);
    }
    let mut dist = vec![INFINITE_COST; n];
    let mut touched: Vec<StateId> = Vec::new();
    for p in a.state_ids() {
        closure(&eps, p, &mut dist, &mut touched)?;
        let mut best: BTreeMap<(Label, Label, StateId), Cost> = BTreeMap::new();
        let mut fin = INFINITE_COST;
        for &q in &touched {
            let d = dist[q as usize];
            if let Some(f) = a.final_cost(q) {
                fin = fin.min(d + f);
            }
            for arc in a.arcs(q).iter().filter(|x| x.ilabel != EPSILON) {
                let c = d + arc.cost;
                best.entry((arc.ilabel, arc.olabel, arc.next)).and_modify(|e| *e = e.min(c)).or_insert(c);
            }
        }
        for ((il, ol, next), c) in best {
            out.add_arc(p, Arc::new(il, ol, c, next));
        }
        out.set_final(p, fin);
        for &q in &touched {
            dist[q as usize] = INFINITE_COST;
        }
    }
    Ok(out.connect())
}

/// Bellman-Ford over the epsilon subgraph from `p`; fills `dist` for every
/// reachable state and lists them in `touched`.
fn closure(
    eps: &[Vec<(StateId, Cost)>],
    p: StateId,
    dist: &mut [Cost],
    touched: &mut Vec<StateId>,
) -> Result<(), FstError> {
    touched.clear();
    dist[p as usize] = 0.0;
    touched.push(p);
    let mut frontier = vec![p];
    let mut rounds = 0;
    while !frontier.is_empty() {
        rounds += 1;
        if rounds > eps.len() + 1 {
            return Err(FstError::DivergentEpsilonCycle);
        }
        let mut next = Vec::new();
        for &q in &frontier {
            let dq = dist[q as usize];
            for &(r, c) in &eps[q as usize] {
                let cand = dq + c;
                let dr = &mut dist[r as usize];
                if cand < *dr {
                    if *dr == INFINITE_COST {
                        touched.push(r);
                    }
                    *dr = cand;
                    if !next.contains(&r) {
                        next.push(r);
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(())
}
