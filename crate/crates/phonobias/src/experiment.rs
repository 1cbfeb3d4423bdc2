//! Synthetic Directions experiments: "directions to X" with X drawn from a
//! foreign place-name pool, decoded with and without contextual biasing.

use std::cmp::Ordering;
use std::fmt::Write as _;

use phonobias_core::bias::{build_contextual_fst, build_parallel_bias, BiasConfig, ContextualFst};
use phonobias_core::decoder::{decode, generate_synthetic_emissions, DecoderConfig, EmissionSequence};
use phonobias_core::graph::build_decoding_graph;
use phonobias_core::lexicon::nfc;
use phonobias_core::units::{Unit, UnitContext};
use phonobias_core::wer::edit_distance;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pool::Pool;
use crate::Resources;

pub const PREFIX: [&str; 2] = ["directions", "to"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub utt_id: String,
    pub words: Vec<String>,
    /// The foreign word, absent for all-English utterances.
    pub truth: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DirectionsSet {
    pub utterances: Vec<Utterance>,
    pub pool: Pool,
}

/// Natural order on ids such as `u2` < `u10`.
pub fn utt_order(a: &str, b: &str) -> Ordering {
    let split = |s: &str| {
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, digits) = s.split_at(cut);
        (head.to_string(), digits.parse::<u128>().ok(), s.to_string())
    };
    split(a).cmp(&split(b))
}

pub fn make_directions_set(pool: &Pool, n_utts: usize, seed: u64) -> Result<DirectionsSet> {
    if pool.is_empty() {
        return Err(Error::Config("empty pool".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let utterances = (0..n_utts)
        .map(|i| {
            let truth = pool.entries[rng.random_range(0..pool.len())].word.clone();
            let mut words: Vec<String> = PREFIX.iter().map(|w| w.to_string()).collect();
            words.push(truth.clone());
            Utterance { utt_id: format!("u{i}"), words, truth: Some(truth) }
        })
        .collect();
    Ok(DirectionsSet { utterances, pool: pool.clone() })
}

const PLACES: &[&str] = &[
    "station", "airport", "hotel", "museum", "park", "bridge", "street", "city", "center", "river", "market", "bank",
    "library", "school", "hospital", "church", "beach", "harbor", "castle", "tower", "square", "garden",
];

const TEMPLATES: &[&[&str]] = &[
    &["directions", "to", "the", "nearest", "*"],
    &["take", "me", "to", "the", "*"],
    &["show", "me", "the", "*"],
    &["navigate", "to", "the", "*", "near", "home"],
];

/// English-only navigation queries; no foreign words.
pub fn make_english_set(n_utts: usize, seed: u64) -> DirectionsSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let utterances = (0..n_utts)
        .map(|i| {
            let t = TEMPLATES.choose(&mut rng).expect("templates");
            let place = PLACES.choose(&mut rng).expect("places");
            let words = t.iter().map(|w| if *w == "*" { place } else { w }).map(|w| w.to_string()).collect();
            Utterance { utt_id: format!("e{i}"), words, truth: None }
        })
        .collect();
    DirectionsSet { utterances, pool: Pool::default() }
}

impl DirectionsSet {
    /// `utt_id<TAB>transcript<TAB>truth` rows; truth is `-` when absent.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for u in &self.utterances {
            let _ = writeln!(out, "{}\t{}\t{}", u.utt_id, u.words.join(" "), u.truth.as_deref().unwrap_or("-"));
        }
        out
    }

    pub fn parse_tsv(text: &str, pool: Pool) -> std::result::Result<Self, String> {
        let mut utterances = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 {
                return Err(format!("line {}: expected utt_id<TAB>transcript[<TAB>truth]", n + 1));
            }
            let words: Vec<String> = cols[1].split_whitespace().map(nfc).collect();
            let truth = cols.get(2).map(|t| nfc(t.trim())).filter(|t| t != "-" && !t.is_empty());
            if let Some(t) = &truth {
                if !pool.words().any(|w| w == t) {
                    return Err(format!("line {}: {t:?} is not in the pool", n + 1));
                }
            }
            utterances.push(Utterance { utt_id: cols[0].to_string(), words, truth });
        }
        Ok(DirectionsSet { utterances, pool })
    }
}

/// How phrases are compiled, or no biasing at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BiasMode {
    None,
    Unit(Unit),
    /// Phoneme and wordpiece tries sharing a start state.
    Parallel,
}

impl BiasMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(BiasMode::None),
            "parallel" => Some(BiasMode::Parallel),
            _ => Unit::parse(s).map(BiasMode::Unit),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BiasMode::None => "none",
            BiasMode::Unit(u) => u.as_str(),
            BiasMode::Parallel => "parallel",
        }
    }
}

pub fn compile_bias<S: AsRef<str>>(
    mode: BiasMode,
    phrases: &[Vec<S>],
    w: f64,
    ctx: &UnitContext<'_>,
) -> Result<Option<ContextualFst>> {
    let fst = match mode {
        BiasMode::None => return Ok(None),
        BiasMode::Unit(u) => {
            let cfg = BiasConfig::new(u, w, 1.0).map_err(|e| Error::Config(e.to_string()))?;
            build_contextual_fst(phrases, &cfg, ctx)
        }
        BiasMode::Parallel => build_parallel_bias(phrases, w, ctx),
    };
    fst.map(Some).map_err(|e| Error::Input(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    /// Biasing words per utterance: the truth plus distractors.
    pub n_bias: usize,
    pub mode: BiasMode,
    pub bonus: f64,
    pub lambda: f64,
    pub noise: f64,
    pub beam: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_bias: 1,
            mode: BiasMode::Unit(Unit::Phoneme),
            bonus: phonobias_core::bias::DEFAULT_BONUS,
            lambda: 1.0,
            noise: 0.2,
            beam: phonobias_core::decoder::DEFAULT_BEAM,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UttResult {
    pub utt_id: String,
    pub reference: String,
    pub hypothesis: String,
    pub edits: usize,
    pub ref_words: usize,
    pub cost: Option<f64>,
    pub flags: Vec<&'static str>,
    pub eager_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<UttResult>,
}

impl ExperimentReport {
    pub fn edits(&self) -> usize {
        self.rows.iter().map(|r| r.edits).sum()
    }

    pub fn ref_words(&self) -> usize {
        self.rows.iter().map(|r| r.ref_words).sum()
    }

    /// Corpus WER: total edits over total reference words.
    pub fn wer(&self) -> f64 {
        match self.ref_words() {
            0 => self.edits() as f64,
            n => self.edits() as f64 / n as f64,
        }
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.cost.is_none()).count()
    }

    pub fn eager_violations(&self) -> usize {
        self.rows.iter().map(|r| r.eager_violations).sum()
    }

    /// Per-utterance WER, in row order.
    pub fn utterance_wers(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| if r.ref_words == 0 { r.edits as f64 } else { r.edits as f64 / r.ref_words as f64 })
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("utt_id\treference\thypothesis\tedits\tref_words\tcost\tflags\n");
        for r in &self.rows {
            let cost = r.cost.map_or_else(|| "inf".to_string(), |c| format!("{c:.6}"));
            let flags = if r.flags.is_empty() { "-".to_string() } else { r.flags.join(",") };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{cost}\t{flags}",
                r.utt_id, r.reference, r.hypothesis, r.edits, r.ref_words
            );
        }
        out
    }

    pub fn to_jsonl(&self) -> String {
        self.rows.iter().map(|r| serde_json::to_string(r).expect("plain data serializes") + "\n").collect()
    }
}

/// Independent random streams per utterance: even for distractors, odd for
/// emissions, so the noise is shared by every configuration of one seed.
fn stream(seed: u64, utt: usize, which: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * utt as u64 + which);
    rng
}

/// Truth first, then distractors in a per-utterance order that does not
/// depend on `n`, so lists for growing `n` are nested.
fn bias_words(set: &DirectionsSet, utt: usize, n: usize, seed: u64) -> Result<Vec<&str>> {
    let u = &set.utterances[utt];
    let mut words: Vec<&str> = u.truth.iter().map(String::as_str).take(n).collect();
    let mut others: Vec<&str> = set.pool.words().filter(|w| Some(*w) != u.truth.as_deref()).collect();
    let wanted = n - words.len();
    if wanted > others.len() {
        return Err(Error::Config(format!("{n} biasing words requested but the pool offers {}", others.len() + 1)));
    }
    others.shuffle(&mut stream(seed, utt, 0));
    words.extend(&others[..wanted]);
    Ok(words)
}

pub fn synthesize(set: &DirectionsSet, res: &Resources, noise: f64, seed: u64) -> Result<Vec<EmissionSequence>> {
    if !(0.0..1.0).contains(&noise) {
        return Err(Error::Config("noise must lie in [0, 1)".into()));
    }
    let foreign = set.pool.lexicon(&res.source).map_err(Error::Input)?;
    let ctx = res.context(&foreign);
    set.utterances
        .par_iter()
        .enumerate()
        .map(|(i, u)| {
            let truth: Vec<&str> = u.truth.iter().map(String::as_str).collect();
            generate_synthetic_emissions(&u.utt_id, &u.words, &truth, &ctx, noise, &mut stream(seed, i, 1))
                .map_err(|e| Error::Input(e.to_string()))
        })
        .collect()
}

pub fn run_bias_experiment(set: &DirectionsSet, res: &Resources, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.beam == 0 {
        return Err(Error::Config("beam must be at least 1".into()));
    }
    let emissions = synthesize(set, res, cfg.noise, cfg.seed)?;
    let foreign = set.pool.lexicon(&res.source).map_err(Error::Input)?;
    let ctx = res.context(&foreign);
    let mut rows = set
        .utterances
        .par_iter()
        .zip(&emissions)
        .enumerate()
        .map(|(i, (u, em))| {
            let words = match cfg.mode {
                BiasMode::None => Vec::new(),
                _ => bias_words(set, i, cfg.n_bias, cfg.seed)?,
            };
            let graph = build_decoding_graph(&words, &ctx).map_err(|e| Error::Input(e.to_string()))?;
            let phrases: Vec<Vec<&str>> = words.iter().map(|w| vec![*w]).collect();
            let bias = compile_bias(cfg.mode, &phrases, cfg.bonus, &ctx)?;
            let dcfg =
                DecoderConfig { beam_size: cfg.beam, lambda: cfg.lambda, bias: bias.as_ref(), finalize_partial: false };
            Ok(score(u, decode(em, &graph, &dcfg)))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| utt_order(&a.utt_id, &b.utt_id));
    Ok(ExperimentReport { rows })
}

fn score(
    u: &Utterance,
    result: std::result::Result<phonobias_core::decoder::DecodeOutput, phonobias_core::decoder::DecodeError>,
) -> UttResult {
    let (words, cost, flags, eager) = match result {
        Ok(out) => {
            let flags = if out.truncated { vec!["truncated"] } else { vec![] };
            (out.words, Some(out.cost), flags, out.stats.eager_violations)
        }
        Err(_) => (Vec::new(), None, vec!["no-hypothesis"], 0),
    };
    UttResult {
        utt_id: u.utt_id.clone(),
        reference: u.words.join(" "),
        hypothesis: words.join(" "),
        edits: edit_distance(&u.words, &words),
        ref_words: u.words.len(),
        cost,
        flags,
        eager_violations: eager,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n_bias: usize,
    pub wer: f64,
    pub utterances: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub reports: Vec<ExperimentReport>,
}

impl SweepReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("n_bias\twer\tutterances\tseed\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}\t{:.6}\t{}\t{}", r.n_bias, r.wer, r.utterances, r.seed);
        }
        out
    }

    pub fn to_jsonl(&self) -> String {
        self.rows.iter().map(|r| serde_json::to_string(r).expect("plain data serializes") + "\n").collect()
    }
}

/// One experiment per biasing-list size, all sharing `cfg.seed`.
pub fn distractor_sweep(
    set: &DirectionsSet,
    res: &Resources,
    cfg: &ExperimentConfig,
    n_list: &[usize],
) -> Result<SweepReport> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::Config("sweep sizes must be a non-empty list of positive integers".into()));
    }
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &n in n_list {
        let report = run_bias_experiment(set, res, &ExperimentConfig { n_bias: n, ..*cfg })?;
        rows.push(SweepRow { n_bias: n, wer: report.wer(), utterances: report.rows.len(), seed: cfg.seed });
        reports.push(report);
    }
    Ok(SweepReport { rows, reports })
}
