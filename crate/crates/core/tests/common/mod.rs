//! Random instance generators and brute-force oracles for the property and
//! acceptance suites. Every check returns the first disagreement it finds.
#![allow(dead_code)]

use std::collections::BTreeMap;

use phonobias_core::bias::{
    build_bias_trie, build_contextual_fst, build_parallel_bias, build_reference_contextual, BiasConfig, ContextualFst,
};
use phonobias_core::decoder::{decode, DecodeError, DecoderConfig, EmissionSequence};
use phonobias_core::graph::{build_decoding_graph, DecodingGraph};
use phonobias_core::lexicon::Lexicon;
use phonobias_core::sampler::{phoneme_presentation_prob, sample_target_sequence, SamplerConfig};
use phonobias_core::symbols::{SymbolKind, SymbolTable};
use phonobias_core::tokenize::WordpieceInventory;
use phonobias_core::units::{Unit, UnitContext};
use phonobias_core::wfst::{
    compose, determinize_acyclic, enumerate_paths, minimize_acyclic, remove_epsilons, shortest_path, Arc, Label,
    StateId, Wfst, EPSILON, FAILURE,
};
use rand::seq::IndexedRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub const TOL: f64 = 1e-9;

/// Costs on a quarter grid so sums are exact and ties are real ties.
fn grid(rng: &mut Rng, lo: i32, hi: i32) -> f64 {
    rng.random_range(lo..=hi) as f64 * 0.25
}

#[derive(Clone, Copy)]
pub struct Shape {
    pub states: usize,
    pub arcs: usize,
    /// Real labels are `2..2 + alphabet`.
    pub alphabet: Label,
    pub eps_in: f64,
    pub eps_out: f64,
    pub acceptor: bool,
    pub min_cost: i32,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { states: 6, arcs: 9, alphabet: 3, eps_in: 0.15, eps_out: 0.15, acceptor: false, min_cost: 0 }
    }
}

fn label(rng: &mut Rng, shape: &Shape, eps: f64) -> Label {
    if rng.random_bool(eps) {
        EPSILON
    } else {
        2 + rng.random_range(0..shape.alphabet)
    }
}

/// Arcs only run from lower to higher state ids, so the machine is acyclic.
pub fn random_acyclic(rng: &mut Rng, shape: &Shape) -> Wfst {
    let n = rng.random_range(1..=shape.states);
    let mut f = Wfst::new();
    f.add_states(n);
    f.set_start(0);
    if n > 1 {
        for _ in 0..rng.random_range(0..=shape.arcs) {
            let s = rng.random_range(0..n - 1);
            let t = rng.random_range(s + 1..n);
            let i = label(rng, shape, shape.eps_in);
            let o = match (shape.acceptor, i) {
                (true, _) => i,
                (false, EPSILON) => EPSILON,
                (false, _) => label(rng, shape, shape.eps_out),
            };
            f.add_arc(s as StateId, Arc::new(i, o, grid(rng, shape.min_cost, 12), t as StateId));
        }
    }
    for s in 0..n {
        if s + 1 == n || rng.random_bool(0.3) {
            f.set_final(s as StateId, grid(rng, shape.min_cost.max(0), 4));
        }
    }
    f
}

pub type Triple = (Vec<Label>, Vec<Label>, f64);

/// Every accepting path with epsilons dropped from both sides.
pub fn oracle_paths(f: &Wfst) -> Vec<Triple> {
    fn go(f: &Wfst, s: StateId, i: &mut Vec<Label>, o: &mut Vec<Label>, c: f64, out: &mut Vec<Triple>) {
        if let Some(fc) = f.final_cost(s) {
            out.push((i.clone(), o.clone(), c + fc));
        }
        for a in f.arcs(s) {
            let (pi, po) = (a.ilabel != EPSILON, a.olabel != EPSILON);
            if pi {
                i.push(a.ilabel);
            }
            if po {
                o.push(a.olabel);
            }
            go(f, a.next, i, o, c + a.cost, out);
            if pi {
                i.pop();
            }
            if po {
                o.pop();
            }
        }
    }
    let mut out = Vec::new();
    if let Some(s) = f.start() {
        go(f, s, &mut Vec::new(), &mut Vec::new(), 0.0, &mut out);
    }
    out
}

pub fn min_map(paths: &[Triple]) -> BTreeMap<(Vec<Label>, Vec<Label>), f64> {
    let mut m = BTreeMap::new();
    for (i, o, c) in paths {
        let e = m.entry((i.clone(), o.clone())).or_insert(f64::INFINITY);
        *e = f64::min(*e, *c);
    }
    m
}

pub fn input_min(paths: &[Triple]) -> BTreeMap<Vec<Label>, f64> {
    let mut m = BTreeMap::new();
    for (i, _, c) in paths {
        let e = m.entry(i.clone()).or_insert(f64::INFINITY);
        *e = f64::min(*e, *c);
    }
    m
}

fn sorted(mut p: Vec<Triple>) -> Vec<Triple> {
    p.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)).then(a.2.total_cmp(&b.2)));
    p
}

pub fn same_map<K: Ord + std::fmt::Debug>(
    what: &str,
    got: &BTreeMap<K, f64>,
    want: &BTreeMap<K, f64>,
) -> Result<(), String> {
    let gk: Vec<&K> = got.keys().collect();
    let wk: Vec<&K> = want.keys().collect();
    if gk != wk {
        return Err(format!("{what}: path sets differ\n got  {gk:?}\n want {wk:?}"));
    }
    for (k, w) in want {
        if (got[k] - w).abs() > TOL {
            return Err(format!("{what}: cost of {k:?} is {} instead of {w}", got[k]));
        }
    }
    Ok(())
}

fn same_paths(what: &str, got: Vec<Triple>, want: Vec<Triple>) -> Result<(), String> {
    let (got, want) = (sorted(got), sorted(want));
    let close = got.len() == want.len()
        && got.iter().zip(&want).all(|(a, b)| a.0 == b.0 && a.1 == b.1 && (a.2 - b.2).abs() <= TOL);
    match close {
        true => Ok(()),
        false => Err(format!("{what}: path multisets differ\n got  {got:?}\n want {want:?}")),
    }
}

fn library_paths(f: &Wfst) -> Result<Vec<Triple>, String> {
    let ps = enumerate_paths(f, 1 << 16).map_err(|e| e.to_string())?;
    Ok(ps.paths.into_iter().map(|p| (p.input, p.output, p.cost)).collect())
}

/// The library enumerator against the independent one.
pub fn check_enumerate(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for case in 0..cases {
        let f = random_acyclic(&mut r, &Shape::default());
        same_paths(&format!("enumerate case {case}"), library_paths(&f)?, oracle_paths(&f))?;
    }
    Ok(())
}

/// Pairwise join of the operands' path sets on the shared middle string.
pub fn check_compose(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for case in 0..cases {
        let a = random_acyclic(&mut r, &Shape::default());
        let b = random_acyclic(&mut r, &Shape::default());
        let c = compose(&a, &b).map_err(|e| format!("compose case {case}: {e}"))?;
        let mut want = Vec::new();
        for (ai, ao, ac) in oracle_paths(&a) {
            for (bi, bo, bc) in oracle_paths(&b) {
                if ao == bi {
                    want.push((ai.clone(), bo, ac + bc));
                }
            }
        }
        same_paths(&format!("compose case {case}"), library_paths(&c)?, want)?;
    }
    Ok(())
}

pub fn check_rmeps(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let shape = Shape { eps_in: 0.35, ..Shape::default() };
    for case in 0..cases {
        let a = random_acyclic(&mut r, &shape);
        let e = remove_epsilons(&a).map_err(|e| format!("rmeps case {case}: {e}"))?;
        if e.has_epsilon_inputs() {
            return Err(format!("rmeps case {case}: epsilon arcs remain"));
        }
        same_map(&format!("rmeps case {case}"), &min_map(&library_paths(&e)?), &min_map(&oracle_paths(&a)))?;
    }
    Ok(())
}

/// A union of chains whose output is a fixed function of the input, with the
/// output labels placed at random positions along each chain.
fn random_functional(r: &mut Rng) -> Wfst {
    let mut f = Wfst::new();
    f.add_state();
    f.set_start(0);
    for _ in 0..r.random_range(1..=6) {
        let len = r.random_range(1..=4);
        let input: Vec<Label> = (0..len).map(|_| 2 + r.random_range(0..3)).collect();
        let output: Vec<Label> = input.iter().rev().filter(|&&l| l != 2).map(|l| l + 10).collect();
        let mut slots: Vec<bool> = (0..len).map(|i| i < output.len()).collect();
        slots.sort_by_key(|_| r.random::<u32>());
        let mut outs = output.into_iter();
        let mut s = 0;
        for (k, &l) in input.iter().enumerate() {
            let t = f.add_state();
            let o = if slots[k] { outs.next().unwrap() } else { EPSILON };
            f.add_arc(s, Arc::new(l, o, grid(r, 0, 8), t));
            s = t;
        }
        f.set_final(s, grid(r, 0, 4));
    }
    f
}

fn functional_output(input: &[Label]) -> Vec<Label> {
    input.iter().rev().filter(|&&l| l != 2).map(|l| l + 10).collect()
}

/// Acceptors and functional transducers: one path per input string carrying
/// the cheapest cost.
pub fn check_determinize(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let shape = Shape { eps_in: 0.0, acceptor: true, ..Shape::default() };
    for case in 0..cases {
        let transducer = case % 2 == 1;
        let a = if transducer { random_functional(&mut r) } else { random_acyclic(&mut r, &shape) };
        let what = format!("determinize case {case}");
        let d = determinize_acyclic(&a).map_err(|e| format!("{what}: {e}"))?;
        if !d.is_input_deterministic() {
            return Err(format!("{what}: result is not deterministic"));
        }
        let got = library_paths(&d)?;
        let inputs: Vec<&Vec<Label>> = got.iter().map(|p| &p.0).collect();
        if inputs.len() != input_min(&got).len() {
            return Err(format!("{what}: an input string has several paths"));
        }
        for (i, o, _) in &got {
            let want = if transducer { functional_output(i) } else { i.clone() };
            if *o != want {
                return Err(format!("{what}: output {o:?} for input {i:?}"));
            }
        }
        same_map(&what, &input_min(&got), &input_min(&oracle_paths(&a)))?;
    }
    Ok(())
}

pub fn check_minimize(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let shape = Shape { eps_in: 0.0, acceptor: true, states: 8, arcs: 14, ..Shape::default() };
    for case in 0..cases {
        let a = if case % 3 == 2 { random_functional(&mut r) } else { random_acyclic(&mut r, &shape) };
        let d = determinize_acyclic(&a).map_err(|e| format!("minimize case {case}: {e}"))?;
        let m = minimize_acyclic(&d).map_err(|e| format!("minimize case {case}: {e}"))?;
        if m.num_states() > d.connect().num_states().max(1) {
            return Err(format!("minimize case {case}: grew from {} to {} states", d.num_states(), m.num_states()));
        }
        let want = oracle_paths(&d);
        let got = library_paths(&m)?;
        if got.len() != want.len() {
            return Err(format!("minimize case {case}: {} paths instead of {}", got.len(), want.len()));
        }
        same_map(&format!("minimize case {case}"), &min_map(&got), &min_map(&want))?;
    }
    Ok(())
}

/// Cheapest path, ties to the smallest output then input string.
pub fn check_shortest(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let shape = Shape { min_cost: -4, ..Shape::default() };
    for case in 0..cases {
        let a = random_acyclic(&mut r, &shape);
        let paths = oracle_paths(&a);
        let best = paths.iter().min_by(|x, y| x.2.total_cmp(&y.2).then_with(|| (&x.1, &x.0).cmp(&(&y.1, &y.0))));
        match (shortest_path(&a), best) {
            (Err(_), None) => {}
            (Ok(p), Some((i, o, c))) => {
                if (p.cost - c).abs() > TOL || p.input != *i || p.output != *o {
                    return Err(format!(
                        "shortest case {case}: got {:?}/{:?} at {}, want {i:?}/{o:?} at {c}",
                        p.input, p.output, p.cost
                    ));
                }
            }
            (got, want) => return Err(format!("shortest case {case}: got {got:?}, want {want:?}")),
        }
    }
    Ok(())
}

/// Every FST algorithm, `cases` instances each.
pub fn check_fst_algorithms(cases: usize, seed: u64) -> Result<(), String> {
    check_enumerate(cases, seed)?;
    check_compose(cases, seed + 1)?;
    check_rmeps(cases, seed + 2)?;
    check_determinize(cases, seed + 3)?;
    check_minimize(cases, seed + 4)?;
    check_shortest(cases, seed + 5)
}

pub fn random_phrases(r: &mut Rng, max_phrases: usize, max_len: usize, alphabet: Label) -> Vec<Vec<Label>> {
    (0..r.random_range(1..=max_phrases))
        .map(|_| (0..r.random_range(1..=max_len)).map(|_| 2 + r.random_range(0..alphabet)).collect())
        .collect()
}

/// Net bonus of a failure-matcher run: each maximal run of matched labels
/// keeps `w` per label of the longest complete phrase it starts with.
pub fn expected_bias(phrases: &[Vec<Label>], seq: &[Label], w: f64) -> f64 {
    let is_prefix = |p: &[Label]| phrases.iter().any(|ph| ph.starts_with(p));
    let kept =
        |run: &[Label]| (1..=run.len()).rev().find(|&k| phrases.iter().any(|ph| ph[..] == run[..k])).unwrap_or(0);
    let mut total = 0usize;
    let mut run: Vec<Label> = Vec::new();
    for &x in seq {
        run.push(x);
        if is_prefix(&run) {
            continue;
        }
        run.pop();
        total += kept(&run);
        run.clear();
        if is_prefix(&[x]) {
            run.push(x);
        }
    }
    total += kept(&run);
    -(total as f64) * w
}

/// Bias contribution of `seq` driven through `c` and closed off at the end.
pub fn run_bias(c: &ContextualFst, seq: &[Label]) -> Result<f64, String> {
    let mut s = c.start();
    let mut total = 0.0;
    for &x in seq {
        let (t, cost) = c.step(s, x).map_err(|e| e.to_string())?;
        total += cost;
        s = t;
    }
    Ok(total + c.finish_cost(s))
}

pub fn check_cancellation(sets: usize, seqs: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for set in 0..sets {
        let alphabet = r.random_range(2..=5);
        let phrases = random_phrases(&mut r, 8, 5, alphabet);
        let w = [0.5, 1.0, 2.0, 3.0].choose(&mut r).copied().unwrap();
        let c = ContextualFst::from_wfst(build_bias_trie(&phrases, w)).map_err(|e| e.to_string())?;
        for k in 0..seqs {
            let seq: Vec<Label> = match k % 4 {
                // a phrase with a random tail and head, so completed matches are common
                0 => {
                    let p = phrases.choose(&mut r).unwrap();
                    let mut s: Vec<Label> =
                        (0..r.random_range(0..3)).map(|_| 2 + r.random_range(0..alphabet + 1)).collect();
                    s.extend(p);
                    s.extend((0..r.random_range(0..3)).map(|_| 2 + r.random_range(0..alphabet + 1)));
                    s
                }
                _ => (0..r.random_range(0..=10)).map(|_| 2 + r.random_range(0..alphabet + 1)).collect(),
            };
            let got = run_bias(&c, &seq)?;
            let want = expected_bias(&phrases, &seq, w);
            if (got - want).abs() > TOL {
                return Err(format!("set {set}: phrases {phrases:?}, sequence {seq:?}: net {got} instead of {want}"));
            }
        }
    }
    Ok(())
}

/// A toy phoneme/wordpiece world: words over `a`, `b` with random
/// pronunciations over four phonemes.
pub struct World {
    pub symbols: SymbolTable,
    pub lexicon: Lexicon,
    pub pieces: WordpieceInventory,
    pub words: Vec<String>,
}

impl World {
    pub fn context(&self) -> UnitContext<'_> {
        UnitContext::new(&self.symbols).with_lexicon(&self.lexicon).with_wordpieces(&self.pieces)
    }

    pub fn phonemes(&self) -> Vec<Label> {
        self.symbols.ids_of_kind(SymbolKind::Phoneme).collect()
    }

    pub fn alphabet(&self) -> Vec<Label> {
        let mut v = self.phonemes();
        v.extend(self.symbols.ids_of_kind(SymbolKind::Wordpiece));
        v.push(self.symbols.eow());
        v
    }
}

pub const PHONEMES: [&str; 4] = ["p", "t", "k", "s"];
pub const PIECES: [&str; 4] = ["_a", "_b", "a", "b"];

pub fn random_world(r: &mut Rng, n_words: usize, max_pron: usize) -> World {
    let mut entries: Vec<(&str, SymbolKind)> = PHONEMES.iter().map(|p| (*p, SymbolKind::Phoneme)).collect();
    entries.extend(PIECES.iter().map(|p| (*p, SymbolKind::Wordpiece)));
    let symbols = SymbolTable::with_reserved(entries).unwrap();
    let mut lexicon = Lexicon::new(symbols.clone());
    let mut words = Vec::new();
    while words.len() < n_words {
        let w: String = (0..r.random_range(1..=3)).map(|_| if r.random_bool(0.5) { 'a' } else { 'b' }).collect();
        if words.contains(&w) {
            continue;
        }
        let pron: Vec<&str> = (0..r.random_range(1..=max_pron)).map(|_| *PHONEMES.choose(r).unwrap()).collect();
        lexicon.push_symbols(&w, 1, &pron).unwrap();
        words.push(w);
    }
    World { symbols, lexicon, pieces: WordpieceInventory::new(PIECES).unwrap(), words }
}

/// Direct trie against `min(det(S ∘ G))`, compared as input-string cost maps.
pub fn check_pipeline(sets: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for set in 0..sets {
        let world = random_world(&mut r, 6, 3);
        let ctx = world.context();
        let phrases: Vec<Vec<String>> = (0..r.random_range(1..=20))
            .map(|_| (0..r.random_range(1..=2)).map(|_| world.words.choose(&mut r).unwrap().clone()).collect())
            .collect();
        let unit = [Unit::Phoneme, Unit::Wordpiece].choose(&mut r).copied().unwrap();
        let cfg = BiasConfig::new(unit, [0.5, 1.0, 2.0].choose(&mut r).copied().unwrap(), 1.0).unwrap();
        if phrases.iter().any(|p| ctx.expand_phrase(p, unit).map_or(true, |s| s.len() > 8)) {
            continue;
        }
        let what = format!("pipeline set {set} ({unit:?}, {phrases:?})");
        let trie = build_contextual_fst(&phrases, &cfg, &ctx).map_err(|e| format!("{what}: {e}"))?.trie();
        let reference = build_reference_contextual(&phrases, &cfg, &ctx).map_err(|e| format!("{what}: {e}"))?;
        same_map(&what, &input_min(&library_paths(&trie)?), &input_min(&oracle_paths(&reference)))?;
    }
    Ok(())
}

/// Emission steps over the world's alphabet with dyadic probabilities,
/// leaning towards spelling one of the graph words.
pub fn random_emissions(r: &mut Rng, world: &World, graph_words: &[String], max_steps: usize) -> EmissionSequence {
    let ctx = world.context();
    let alphabet = world.alphabet();
    let mut script: Vec<Label> = Vec::new();
    while script.len() < max_steps {
        let word = match (graph_words.choose(r), r.random_bool(0.6)) {
            (Some(w), true) => ctx.phonemes(w).unwrap(),
            _ => ctx.wordpieces(world.words.choose(r).unwrap()).unwrap(),
        };
        script.extend(word);
        script.push(world.symbols.eow());
    }
    script.truncate(r.random_range(1..=max_steps));
    let steps = script
        .iter()
        .map(|&lead| {
            let mut probs = vec![1.0f64];
            for _ in 0..r.random_range(0..4) {
                let i = r.random_range(0..probs.len());
                probs[i] /= 2.0;
                let half = probs[i];
                probs.push(half);
            }
            let mut syms = vec![lead];
            while syms.len() < probs.len() {
                let s = *alphabet.choose(r).unwrap();
                if !syms.contains(&s) {
                    syms.push(s);
                }
            }
            syms.into_iter().zip(probs).map(|(s, p)| (s, p.ln())).collect()
        })
        .collect();
    EmissionSequence::new("oracle", steps).unwrap()
}

/// Terminal states of the epsilon closure of `s` with the outputs collected.
fn closures(g: &Wfst, s: StateId) -> Vec<(StateId, Vec<Label>)> {
    let eps: Vec<&Arc> = g.arcs(s).iter().filter(|a| a.ilabel == EPSILON).collect();
    if eps.is_empty() {
        return vec![(s, Vec::new())];
    }
    let mut out = Vec::new();
    for a in eps {
        for (t, rest) in closures(g, a.next) {
            let mut o: Vec<Label> = (a.olabel != EPSILON).then_some(a.olabel).into_iter().collect();
            o.extend(rest);
            out.push((t, o));
        }
    }
    out
}

fn match_step(b: &Wfst, s: StateId, l: Label) -> (StateId, f64) {
    let start = b.start().unwrap();
    let (mut s, mut acc) = (s, 0.0);
    loop {
        if let Some(a) = b.arcs(s).iter().find(|a| a.ilabel == l) {
            return (a.next, acc + a.cost);
        }
        if s == start {
            return (s, acc);
        }
        let phi = b.arcs(s).iter().find(|a| a.ilabel == FAILURE).expect("trie states carry failure arcs");
        acc += phi.cost;
        s = phi.next;
    }
}

fn match_finish(b: &Wfst, s: StateId) -> f64 {
    if Some(s) == b.start() {
        return 0.0;
    }
    b.arcs(s).iter().find(|a| a.ilabel == FAILURE).map_or(0.0, |a| a.cost)
}

fn boundary(out: &mut Vec<Label>, eow: Label) {
    if matches!(out.last(), Some(&l) if l != eow) {
        out.push(eow);
    }
}

pub struct OracleResult {
    pub out: Vec<Label>,
    pub cost: f64,
    pub truncated: bool,
    pub inputs: Vec<Vec<Label>>,
}

/// Exhaustive shallow fusion: every complete path, probabilities summed per
/// (output, graph state, bias state), cheapest group first, ties to the
/// smaller output.
pub fn exhaustive_decode(
    em: &EmissionSequence,
    g: &DecodingGraph,
    bias: Option<&ContextualFst>,
    lambda: f64,
    finalize_partial: bool,
) -> Option<OracleResult> {
    let bias = bias.filter(|_| lambda > 0.0).map(|b| b.fst());
    let fst = g.fst();
    let eow = g.symbols().eow();
    struct P {
        out: Vec<Label>,
        inp: Vec<Label>,
        g: StateId,
        b: StateId,
        cost: f64,
    }
    let mut paths =
        vec![P { out: vec![], inp: vec![], g: g.hub(), b: bias.and_then(Wfst::start).unwrap_or(0), cost: 0.0 }];
    for step in em.steps() {
        let mut next = Vec::new();
        for p in &paths {
            for &(sym, lp) in step {
                for a in fst.arcs(p.g).iter().filter(|a| a.ilabel == sym) {
                    let (b, bc) = bias.map_or((p.b, 0.0), |f| match_step(f, p.b, sym));
                    for (t, outs) in closures(fst, a.next) {
                        let mut out = p.out.clone();
                        match a.olabel {
                            l if l == eow => boundary(&mut out, eow),
                            EPSILON => {}
                            l => out.push(l),
                        }
                        if !outs.is_empty() {
                            out.extend(&outs);
                            boundary(&mut out, eow);
                        }
                        let mut inp = p.inp.clone();
                        inp.push(sym);
                        next.push(P { out, inp, g: t, b, cost: p.cost - lp + lambda * bc });
                    }
                }
            }
        }
        paths = next;
    }
    type Group = (Vec<f64>, Vec<Vec<Label>>);
    let mut groups: BTreeMap<(Vec<Label>, StateId, StateId), Group> = BTreeMap::new();
    for p in paths.into_iter().filter(|p| p.g == g.hub() || finalize_partial) {
        let e = groups.entry((p.out, p.g, p.b)).or_default();
        e.0.push(p.cost);
        e.1.push(p.inp);
    }
    let quant = |c: f64| (c / 1e-9).round() as i64;
    groups
        .into_iter()
        .map(|((out, gs, b), (costs, inputs))| {
            let m = costs.iter().copied().fold(f64::INFINITY, f64::min);
            let sum = m - costs.iter().map(|c| (m - c).exp()).sum::<f64>().ln();
            let cost = sum + lambda * bias.map_or(0.0, |f| match_finish(f, b));
            OracleResult { out, cost, truncated: gs != g.hub(), inputs }
        })
        .min_by(|x, y| quant(x.cost).cmp(&quant(y.cost)).then_with(|| x.out.cmp(&y.out)))
}

/// Random small decoding problems against the exhaustive oracle, with a beam
/// wide enough that nothing is pruned.
pub fn check_decoder(cases: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for case in 0..cases {
        let world = random_world(&mut r, 5, 3);
        let ctx = world.context();
        let graph_words: Vec<String> = world.words.iter().filter(|_| r.random_bool(0.6)).cloned().collect();
        let g = build_decoding_graph(&graph_words, &ctx).map_err(|e| format!("decoder case {case}: {e}"))?;
        let phrases: Vec<Vec<String>> =
            world.words.iter().filter(|_| r.random_bool(0.5)).map(|w| vec![w.clone()]).collect();
        let w = [0.5, 1.0, 2.0].choose(&mut r).copied().unwrap();
        let bias = match r.random_range(0..4) {
            0 => None,
            1 => Some(build_contextual_fst(&phrases, &BiasConfig::new(Unit::Phoneme, w, 1.0).unwrap(), &ctx)),
            2 => Some(build_contextual_fst(&phrases, &BiasConfig::new(Unit::Wordpiece, w, 1.0).unwrap(), &ctx)),
            _ => Some(build_parallel_bias(&phrases, w, &ctx)),
        }
        .transpose()
        .map_err(|e| format!("decoder case {case}: {e}"))?;
        let lambda = [0.0, 0.5, 1.0, 2.0].choose(&mut r).copied().unwrap();
        let finalize_partial = r.random_bool(0.25);
        let em = random_emissions(&mut r, &world, &graph_words, 6);
        let cfg = DecoderConfig { beam_size: usize::MAX, lambda, bias: bias.as_ref(), finalize_partial };
        let what = format!("decoder case {case} (words {graph_words:?}, λ {lambda}, partial {finalize_partial})");
        match (decode(&em, &g, &cfg), exhaustive_decode(&em, &g, bias.as_ref(), lambda, finalize_partial)) {
            (Err(DecodeError::NoCompleteHypothesis), None) => {}
            (Ok(d), Some(o)) => {
                if d.out != o.out
                    || (d.cost - o.cost).abs() > TOL
                    || d.truncated != o.truncated
                    || !o.inputs.contains(&d.inp)
                {
                    return Err(format!(
                        "{what}: decoder {:?} at {} vs oracle {:?} at {}",
                        world.symbols.render(&d.out),
                        d.cost,
                        world.symbols.render(&o.out),
                        o.cost
                    ));
                }
            }
            (d, o) => return Err(format!("{what}: decoder {d:?}, oracle found {}", o.is_some())),
        }
    }
    Ok(())
}

/// Empirical phoneme-presentation rate for words seen `c` times, against
/// `p0 * min(1, T / c)` written out independently.
pub fn check_sampler(draws: usize, seed: u64) -> Result<(), String> {
    let world = {
        let mut entries: Vec<(&str, SymbolKind)> = PHONEMES.iter().map(|p| (*p, SymbolKind::Phoneme)).collect();
        entries.extend(PIECES.iter().map(|p| (*p, SymbolKind::Wordpiece)));
        SymbolTable::with_reserved(entries).unwrap()
    };
    let pieces = WordpieceInventory::new(PIECES).unwrap();
    let cfg = SamplerConfig::new(0.5, 10, seed).unwrap();
    for c in [1u64, 10, 40, 1000] {
        let mut lex = Lexicon::new(world.clone());
        lex.push_symbols("ab", c, &["p", "t"]).unwrap();
        let want = 0.5 * f64::min(1.0, 10.0 / c as f64);
        if (phoneme_presentation_prob(c, &cfg) - want).abs() > 1e-12 {
            return Err(format!("p({c}) = {} instead of {want}", phoneme_presentation_prob(c, &cfg)));
        }
        let mut r = rng(seed ^ c);
        let phonemes = world.id_of_kind("p", SymbolKind::Phoneme).unwrap();
        let mut hits = 0usize;
        for _ in 0..draws {
            let seq =
                sample_target_sequence(&["ab"], &lex, &pieces, &world, &cfg, &mut r).map_err(|e| e.to_string())?;
            hits += usize::from(seq[0] == phonemes);
        }
        let rate = hits as f64 / draws as f64;
        if (rate - want).abs() > 0.01 {
            return Err(format!("count {c}: rate {rate} vs p {want}"));
        }
    }
    Ok(())
}
