//! `emissions.jsonl`: one utterance per line,
//! `{"utt_id": "...", "steps": [{"sym": logp, ...}, ...]}`.
//!
//! Keys are symbol spellings; a spelling shared by several kinds is written
//! as `kind:symbol`.

use std::collections::BTreeMap;

use phonobias_core::decoder::EmissionSequence;
use phonobias_core::symbols::SymbolTable;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct Line {
    utt_id: String,
    steps: Vec<BTreeMap<String, f64>>,
}

pub fn to_jsonl(utterances: &[EmissionSequence], symbols: &SymbolTable) -> String {
    let mut out = String::new();
    for em in utterances {
        let steps = em
            .steps()
            .iter()
            .map(|step| {
                step.iter().map(|&(l, lp)| (symbols.qualified_name(l).unwrap_or_else(|| format!("#{l}")), lp)).collect()
            })
            .collect();
        let line = Line { utt_id: em.utt_id.clone(), steps };
        out.push_str(&serde_json::to_string(&line).expect("plain data serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str, symbols: &SymbolTable) -> Result<Vec<EmissionSequence>, String> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(raw).map_err(|e| format!("line {}: {e}", n + 1))?;
        let mut steps = Vec::with_capacity(line.steps.len());
        for step in line.steps {
            let mut s = Vec::with_capacity(step.len());
            for (name, lp) in step {
                let id = symbols
                    .resolve_name(&name)
                    .ok_or_else(|| format!("line {}: unknown or ambiguous symbol {name:?}", n + 1))?;
                s.push((id, lp));
            }
            steps.push(s);
        }
        out.push(EmissionSequence::new(line.utt_id, steps).map_err(|e| format!("line {}: {e}", n + 1))?);
    }
    Ok(out)
}
