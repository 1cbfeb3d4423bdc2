use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{Cost, FstError, Path, StateId, Wfst, EPSILON};

#[derive(Clone)]
struct Best {
    cost: Cost,
    output: Vec<u32>,
    input: Vec<u32>,
}

fn better(a: &Best, b: &Best) -> bool {
    match a.cost.total_cmp(&b.cost) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => (&a.output, &a.input) < (&b.output, &b.input),
    }
}

fn extend(a: &super::Arc, suffix: &Best) -> Best {
    let mut output = Vec::with_capacity(suffix.output.len() + 1);
    if a.olabel != EPSILON {
        output.push(a.olabel);
    }
    output.extend_from_slice(&suffix.output);
    let mut input = Vec::with_capacity(suffix.input.len() + 1);
    if a.ilabel != EPSILON {
        input.push(a.ilabel);
    }
    input.extend_from_slice(&suffix.input);
    Best { cost: a.cost + suffix.cost, output, input }
}

/// Cheapest accepting path. Equal costs are broken by the lexicographically
/// smallest output id sequence, then the smallest input sequence.
///
/// Works backwards from the final states, so the suffix chosen at every state
/// is already optimal under the tie-break (prepending a common prefix keeps
/// lexicographic order). Cyclic machines need non-negative costs.
pub fn shortest_path(fst: &Wfst) -> Result<Path, FstError> {
    let start = fst.start().ok_or(FstError::EmptyLanguage)?;
    let n = fst.num_states();
    let mut best: Vec<Option<Best>> = vec![None; n];
    let final_best = |s: StateId| fst.final_cost(s).map(|c| Best { cost: c, output: Vec::new(), input: Vec::new() });

    if let Some(order) = fst.topo_order() {
        for &s in order.iter().rev() {
            let mut cur = final_best(s);
            for a in fst.arcs(s) {
                if let Some(suffix) = &best[a.next as usize] {
                    let cand = extend(a, suffix);
                    if cur.as_ref().is_none_or(|c| better(&cand, c)) {
                        cur = Some(cand);
                    }
                }
            }
            best[s as usize] = cur;
        }
    } else {
        if fst.state_ids().any(|s| fst.arcs(s).iter().any(|a| a.cost < 0.0)) {
            return Err(FstError::NegativeCostCycle);
        }
        // Dijkstra on the reversed machine; quadratic selection keeps it simple.
        let mut rev: Vec<Vec<(StateId, usize)>> = vec![Vec::new(); n];
        for s in fst.state_ids() {
            for (i, a) in fst.arcs(s).iter().enumerate() {
                rev[a.next as usize].push((s, i));
            }
        }
        let mut settled = vec![false; n];
        for s in fst.state_ids() {
            best[s as usize] = final_best(s);
        }
        loop {
            let mut pick: Option<usize> = None;
            for q in 0..n {
                if settled[q] {
                    continue;
                }
                if let Some(b) = &best[q] {
                    if pick.is_none_or(|p| better(b, best[p].as_ref().unwrap())) {
                        pick = Some(q);
                    }
                }
            }
            let Some(q) = pick else { break };
            settled[q] = true;
            let suffix = best[q].clone().unwrap();
            for &(p, i) in &rev[q] {
                if settled[p as usize] {
                    continue;
                }
                let cand = extend(&fst.arcs(p)[i], &suffix);
                if best[p as usize].as_ref().is_none_or(|c| better(&cand, c)) {
                    best[p as usize] = Some(cand);
                }
            }
        }
    }
    let b = best[start as usize].take().ok_or(FstError::EmptyLanguage)?;
    Ok(Path { input: b.input, output: b.output, cost: b.cost })
}
