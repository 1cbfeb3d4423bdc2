use super::{Cost, FstError, Label, StateId, Wfst};

/// Advances a failure-arc matcher by one label.
///
/// A matching arc is followed directly. Otherwise the state's failure arc is
/// taken (its cost accrues, no input is consumed) and matching is retried at
/// its target. At the start state an unmatched label leaves the matcher at the
/// start; any other state without a match or a failure arc is a dead end.
pub fn step_with_failure(a: &Wfst, state: StateId, label: Label) -> Result<(StateId, Cost), FstError> {
    let start = a.start().ok_or(FstError::NoStart)?;
    let mut s = state;
    let mut acc = 0.0;
    for _ in 0..=a.num_states() {
        if let Some(arc) = a.find_arc(s, label) {
            return Ok((arc.next, acc + arc.cost));
        }
        if s == start {
            return Ok((start, acc));
        }
        match a.failure_arc(s) {
            Some(f) => {
                acc += f.cost;
                s = f.next;
            }
            None => return Err(FstError::NoTransition { state: s, label }),
        }
    }
    Err(FstError::FailureLoop(state))
}
