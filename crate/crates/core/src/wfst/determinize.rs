use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use super::{Arc, Cost, FstError, Label, StateId, Wfst, EPSILON, INFINITE_COST};

/// Subset element: source state, residual output string, residual cost.
type Element = (StateId, Vec<Label>, Cost);
/// Hashable form of a subset; costs compared bit-exactly.
type Key = Vec<(StateId, Vec<Label>, u64)>;

fn key_of(subset: &[Element]) -> Key {
    subset.iter().map(|(q, s, c)| (*q, s.clone(), c.to_bits())).collect()
}

fn common_prefix_len(strings: &[&[Label]]) -> usize {
    let first = strings.first().copied().unwrap_or(&[]);
    let mut n = first.len();
    for s in &strings[1..] {
        n = n.min(first.iter().zip(s.iter()).take_while(|(a, b)| a == b).count());
    }
    n
}

/// Weighted subset construction for acyclic, epsilon-free acceptors and
/// functional transducers.
///
/// Each output arc carries the cheapest cost among the subset members and the
/// longest common prefix of their pending outputs; the rest stays as residual
/// on the members. A final subset whose cheapest member still has pending
/// output releases it through an `ε:out` chain into a fresh final state, so the
/// result is deterministic on every non-epsilon input label.
pub fn determinize_acyclic(a: &Wfst) -> Result<Wfst, FstError> {
    if a.has_failure_arcs() {
        return Err(FstError::UnsupportedArcKind("failure"));
    }
    if a.has_epsilon_inputs() {
        return Err(FstError::UnsupportedArcKind("epsilon input"));
    }
    if !a.is_acyclic() {
        return Err(FstError::NotAcyclic);
    }
    let a = a.connect();
    let mut out = Wfst::new().with_symbols(a.input_symbols().cloned(), a.output_symbols().cloned());
    let Some(start) = a.start() else {
        return Ok(out);
    };

    let mut ids: BTreeMap<Key, StateId> = BTreeMap::new();
    let mut queue: VecDeque<(StateId, Vec<Element>)> = VecDeque::new();
    let init = alloc::vec![(start, Vec::new(), 0.0)];
    let s0 = out.add_state();
    out.set_start(s0);
    ids.insert(key_of(&init), s0);
    queue.push_back((s0, init));

    while let Some((src, subset)) = queue.pop_front() {
        // final weight and any pending output
        let mut fin: Option<(Cost, &[Label])> = None;
        for (q, s, r) in &subset {
            if let Some(f) = a.final_cost(*q) {
                let c = r + f;
                match fin {
                    Some((_, fs)) if fs != s.as_slice() => return Err(FstError::NotFunctional),
                    Some((fc, _)) if fc <= c => {}
                    _ => fin = Some((c, s.as_slice())),
                }
            }
        }
        if let Some((c, pending)) = fin {
            if pending.is_empty() {
                out.set_final(src, c);
            } else {
                let mut cur = src;
                for (i, &l) in pending.iter().enumerate() {
                    let nxt = out.add_state();
                    out.add_arc(cur, Arc::new(EPSILON, l, if i == 0 { c } else { 0.0 }, nxt));
                    cur = nxt;
                }
                out.set_final(cur, 0.0);
            }
        }

        let mut by_label: BTreeMap<Label, Vec<Element>> = BTreeMap::new();
        for (q, s, r) in &subset {
            for arc in a.arcs(*q) {
                let mut pending = s.clone();
                if arc.olabel != EPSILON {
                    pending.push(arc.olabel);
                }
                by_label.entry(arc.ilabel).or_default().push((arc.next, pending, r + arc.cost));
            }
        }
        for (label, elems) in by_label {
            let w = elems.iter().map(|e| e.2).fold(INFINITE_COST, Cost::min);
            let strings: Vec<&[Label]> = elems.iter().map(|e| e.1.as_slice()).collect();
            let k = common_prefix_len(&strings);
            let emitted: Vec<Label> = elems[0].1[..k].to_vec();

            let mut merged: BTreeMap<StateId, (Vec<Label>, Cost)> = BTreeMap::new();
            for (q, s, c) in elems {
                let rest = s[k..].to_vec();
                let res = c - w;
                match merged.get_mut(&q) {
                    Some((rs, rc)) => {
                        if *rs != rest {
                            return Err(FstError::NotFunctional);
                        }
                        *rc = rc.min(res);
                    }
                    None => {
                        merged.insert(q, (rest, res));
                    }
                }
            }
            let next: Vec<Element> = merged.into_iter().map(|(q, (s, c))| (q, s, c)).collect();
            let key = key_of(&next);
            let dst = match ids.get(&key) {
                Some(&d) => d,
                None => {
                    let d = out.add_state();
                    ids.insert(key, d);
                    queue.push_back((d, next));
                    d
                }
            };
            // the first emitted label rides on the input arc, the rest on an ε chain
            match emitted.split_first() {
                None => out.add_arc(src, Arc::new(label, EPSILON, w, dst)),
                Some((&first, [])) => out.add_arc(src, Arc::new(label, first, w, dst)),
                Some((&first, rest)) => {
                    let mut cur = out.add_state();
                    out.add_arc(src, Arc::new(label, first, w, cur));
                    for (i, &l) in rest.iter().enumerate() {
                        let nxt = if i + 1 == rest.len() { dst } else { out.add_state() };
                        out.add_arc(cur, Arc::new(EPSILON, l, 0.0, nxt));
                        cur = nxt;
                    }
                }
            }
        }
    }
    Ok(out)
}
