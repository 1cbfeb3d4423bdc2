//! Exhaustive path enumeration, the reference oracle for the other algorithms.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{Cost, FstError, Label, StateId, Wfst, EPSILON};

/// One accepting path with epsilons removed from both label strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub input: Vec<Label>,
    pub output: Vec<Label>,
    pub cost: Cost,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Paths ordered by `(input, output, cost)`.
    pub fn sorted(mut self) -> PathSet {
        self.paths.sort_by(|a, b| (&a.input, &a.output).cmp(&(&b.input, &b.output)).then(a.cost.total_cmp(&b.cost)));
        self
    }

    /// Cheapest cost for every `(input, output)` pair.
    pub fn min_cost_map(&self) -> BTreeMap<(Vec<Label>, Vec<Label>), Cost> {
        let mut m: BTreeMap<(Vec<Label>, Vec<Label>), Cost> = BTreeMap::new();
        for p in &self.paths {
            let e = m.entry((p.input.clone(), p.output.clone())).or_insert(p.cost);
            if p.cost < *e {
                *e = p.cost;
            }
        }
        m
    }

    /// Cheapest cost for every input string, whatever the output.
    pub fn input_min_costs(&self) -> BTreeMap<Vec<Label>, Cost> {
        let mut m: BTreeMap<Vec<Label>, Cost> = BTreeMap::new();
        for p in &self.paths {
            let e = m.entry(p.input.clone()).or_insert(p.cost);
            if p.cost < *e {
                *e = p.cost;
            }
        }
        m
    }
}

/// Depth-first enumeration of every accepting path. Costs accumulate left to
/// right and the final cost is added last.
pub fn enumerate_paths(fst: &Wfst, max_paths: usize) -> Result<PathSet, FstError> {
    if !fst.is_acyclic() {
        return Err(FstError::NotAcyclic);
    }
    let mut set = PathSet::default();
    let start = match fst.start() {
        Some(s) => s,
        None => return Ok(set),
    };
    let mut input = Vec::new();
    let mut output = Vec::new();
    walk(fst, start, 0.0, &mut input, &mut output, &mut set, max_paths)?;
    Ok(set)
}

fn walk(
    fst: &Wfst,
    s: StateId,
    cost: Cost,
    input: &mut Vec<Label>,
    output: &mut Vec<Label>,
    set: &mut PathSet,
    max: usize,
) -> Result<(), FstError> {
    if let Some(f) = fst.final_cost(s) {
        if set.paths.len() == max {
            return Err(FstError::TooManyPaths(max));
        }
        set.paths.push(Path { input: input.clone(), output: output.clone(), cost: cost + f });
    }
    for a in fst.arcs(s) {
        let pi = a.ilabel != EPSILON;
        let po = a.olabel != EPSILON;
        if pi {
            input.push(a.ilabel);
        }
        if po {
            output.push(a.olabel);
        }
        walk(fst, a.next, cost + a.cost, input, output, set, max)?;
        if pi {
            input.pop();
        }
        if po {
            output.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wfst::Arc;
    use alloc::vec;

    #[test]
    fn single_arc() {
        let f = Wfst::linear(&[(2, 3)], 0.5);
        let ps = enumerate_paths(&f, 10).unwrap();
        assert_eq!(ps.paths, vec![Path { input: vec![2], output: vec![3], cost: 0.5 }]);
    }

    #[test]
    fn empty_language() {
        let mut f = Wfst::new();
        f.add_states(2);
        f.set_start(0);
        f.add_arc(0, Arc::new(2, 2, 0.0, 1));
        assert!(enumerate_paths(&f, 10).unwrap().is_empty());
        assert!(enumerate_paths(&Wfst::new(), 10).unwrap().is_empty());
    }

    #[test]
    fn trie_of_three() {
        let mut f = Wfst::new();
        f.add_states(5);
        f.set_start(0);
        f.add_arc(0, Arc::new(2, 2, 0.0, 1));
        f.add_arc(1, Arc::new(3, 3, 0.0, 2));
        f.add_arc(1, Arc::new(4, 4, 0.0, 3));
        f.add_arc(0, Arc::new(5, 5, 0.0, 4));
        for s in [2, 3, 4] {
            f.set_final(s, 0.0);
        }
        assert_eq!(enumerate_paths(&f, 10).unwrap().len(), 3);
        assert_eq!(enumerate_paths(&f, 2), Err(FstError::TooManyPaths(2)));
    }

    #[test]
    fn cyclic_rejected() {
        let f = Wfst::identity([2, 3]);
        assert_eq!(enumerate_paths(&f, 10), Err(FstError::NotAcyclic));
    }
}
