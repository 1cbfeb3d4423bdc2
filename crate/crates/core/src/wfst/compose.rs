use alloc::collections::{BTreeMap, VecDeque};

use super::{Arc, FstError, StateId, Wfst, EPSILON};

type Triple = (StateId, StateId, u8);

/// Transducer composition `a ∘ b` with a sequence epsilon filter.
///
/// Between two matched moves, epsilon-output moves of `a` must precede
/// epsilon-input moves of `b`; this keeps exactly one composed path per pair
/// of component paths, so path multiplicities survive. Filter state 1 means
/// `b` has moved alone since the last match.
pub fn compose(a: &Wfst, b: &Wfst) -> Result<Wfst, FstError> {
    if let (Some(x), Some(y)) = (a.output_symbols(), b.input_symbols()) {
        if x != y {
            return Err(FstError::AlphabetMismatch);
        }
    }
    if a.has_failure_arcs() || b.has_failure_arcs() {
        return Err(FstError::UnsupportedArcKind("failure"));
    }
    let mut out = Wfst::new().with_symbols(a.input_symbols().cloned(), b.output_symbols().cloned());
    let (Some(sa), Some(sb)) = (a.start(), b.start()) else {
        return Ok(out);
    };
    let mut b = b.clone();
    b.arc_sort();

    let mut ids: BTreeMap<Triple, StateId> = BTreeMap::new();
    let mut queue: VecDeque<Triple> = VecDeque::new();
    let mut intern = |t: Triple, out: &mut Wfst, queue: &mut VecDeque<Triple>| -> StateId {
        *ids.entry(t).or_insert_with(|| {
            queue.push_back(t);
            out.add_state()
        })
    };
    let s0 = intern((sa, sb, 0), &mut out, &mut queue);
    out.set_start(s0);

    while let Some(t @ (p, q, f)) = queue.pop_front() {
        let src = intern(t, &mut out, &mut queue);
        if let (Some(x), Some(y)) = (a.final_cost(p), b.final_cost(q)) {
            out.set_final(src, x + y);
        }
        for x in a.arcs(p) {
            if x.olabel == EPSILON {
                if f == 0 {
                    let dst = intern((x.next, q, 0), &mut out, &mut queue);
                    out.add_arc(src, Arc::new(x.ilabel, EPSILON, x.cost, dst));
                }
                continue;
            }
            for y in b.find_arcs(q, x.olabel) {
                let dst = intern((x.next, y.next, 0), &mut out, &mut queue);
                out.add_arc(src, Arc::new(x.ilabel, y.olabel, x.cost + y.cost, dst));
            }
        }
        for y in b.find_arcs(q, EPSILON) {
            let dst = intern((p, y.next, 1), &mut out, &mut queue);
            out.add_arc(src, Arc::new(EPSILON, y.olabel, y.cost, dst));
        }
    }
    Ok(out.connect())
}
