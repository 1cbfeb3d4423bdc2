//! Five-column text serialization.
//!
//! Arc lines are `src<TAB>dst<TAB>ilabel<TAB>olabel<TAB>cost`, final lines are
//! `state<TAB>cost`. The start state's lines come first, so the first line
//! names the start state.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::{Arc, Cost, FstError, Label, StateId, Wfst, INFINITE_COST};

impl Wfst {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let start = match self.start() {
            Some(s) => s,
            None => return out,
        };
        let order = core::iter::once(start).chain(self.state_ids().filter(|&s| s != start));
        for s in order {
            for a in self.arcs(s) {
                let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", s, a.next, a.ilabel, a.olabel, a.cost);
            }
            match self.final_cost(s) {
                Some(c) => {
                    let _ = writeln!(out, "{s}\t{c}");
                }
                None if s == start && self.arcs(s).is_empty() => {
                    // keeps the start state recoverable
                    let _ = writeln!(out, "{s}\t{INFINITE_COST}");
                }
                None => {}
            }
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Wfst, FstError> {
        let err = |line: usize, reason: &str| FstError::Parse { line, reason: reason.to_string() };
        let mut arcs: Vec<(StateId, Arc)> = Vec::new();
        let mut finals: Vec<(StateId, Cost)> = Vec::new();
        let mut start = None;
        let mut max_state: Option<StateId> = None;
        for (n, line) in text.lines().enumerate() {
            let lineno = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let state = |s: &str| s.trim().parse::<StateId>().map_err(|_| err(lineno, "bad state id"));
            let label = |s: &str| s.trim().parse::<Label>().map_err(|_| err(lineno, "bad label"));
            let cost = |s: &str| s.trim().parse::<Cost>().map_err(|_| err(lineno, "bad cost"));
            let src = state(cols[0])?;
            start.get_or_insert(src);
            let mut touch = |s: StateId| max_state = Some(max_state.map_or(s, |m: StateId| m.max(s)));
            touch(src);
            match cols.len() {
                1 => finals.push((src, 0.0)),
                2 => finals.push((src, cost(cols[1])?)),
                4 | 5 => {
                    let dst = state(cols[1])?;
                    touch(dst);
                    let c = if cols.len() == 5 { cost(cols[4])? } else { 0.0 };
                    if c.is_nan() || c == INFINITE_COST {
                        return Err(err(lineno, "arc cost must be finite"));
                    }
                    arcs.push((src, Arc::new(label(cols[2])?, label(cols[3])?, c, dst)));
                }
                _ => return Err(err(lineno, "expected 1, 2, 4 or 5 columns")),
            }
        }
        let mut f = Wfst::new();
        if let Some(m) = max_state {
            f.add_states(m as usize + 1);
        }
        for (s, a) in arcs {
            f.add_arc(s, a);
        }
        for (s, c) in finals {
            f.set_final(s, c);
        }
        if let Some(s) = start {
            f.set_start(s);
        }
        f.validate()?;
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wfst::{EPSILON, FAILURE};

    #[test]
    fn round_trip() {
        let mut f = Wfst::new();
        f.add_states(3);
        f.set_start(1);
        f.add_arc(1, Arc::new(3, 4, -2.0, 2));
        f.add_arc(2, Arc::new(FAILURE, EPSILON, 2.0, 1));
        f.add_arc(0, Arc::new(5, 5, 0.1, 1));
        f.set_final(2, 0.0);
        let text = f.to_text();
        assert!(text.starts_with("1\t2\t3\t4\t-2\n"));
        let g = Wfst::parse_text(&text).unwrap();
        assert_eq!(g.start(), Some(1));
        assert_eq!(g.to_text(), text);
        assert_eq!(g.arcs(0)[0].cost, 0.1);
    }

    #[test]
    fn lone_start_survives() {
        let mut f = Wfst::new();
        f.add_state();
        f.set_start(0);
        let g = Wfst::parse_text(&f.to_text()).unwrap();
        assert_eq!(g.num_states(), 1);
        assert_eq!(g.start(), Some(0));
        assert!(!g.is_final(0));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Wfst::parse_text("0\t1\tx\t2\t0"), Err(FstError::Parse { line: 1, .. })));
        assert!(matches!(Wfst::parse_text("0\t1\t2"), Err(FstError::Parse { .. })));
        assert_eq!(Wfst::parse_text("0\t1\t1\t0\t1\n0\t2\t1\t0\t1\n"), Err(FstError::MultipleFailureArcs(0)));
    }
}
