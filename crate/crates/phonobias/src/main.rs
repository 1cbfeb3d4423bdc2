use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phonobias::emissions;
use phonobias::error::{Error, Result};
use phonobias::experiment::{self, BiasMode, DirectionsSet, ExperimentConfig};
use phonobias::io;
use phonobias::pool::{self, Pool};
use phonobias::resources::{self, Resources};
use phonobias_core::bias::{ContextualFst, DEFAULT_BONUS};
use phonobias_core::decoder::{decode, DecoderConfig, DEFAULT_BEAM};
use phonobias_core::graph::{build_decoding_graph, DecodingGraph};
use phonobias_core::lexicon::{nfc, Lexicon};
use phonobias_core::sampler::{sample_target_sequence, SamplerConfig};
use phonobias_core::symbols::SymbolTable;
use phonobias_core::wer::edit_distance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Args, Clone)]
struct Tables {
    /// Directory holding the default tables.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Decoder symbol table (English phonemes, wordpieces, graphemes).
    #[arg(long, global = true)]
    symbols: Option<PathBuf>,
    /// Symbol table of the pronunciation lexicon's phonemes.
    #[arg(long, global = true)]
    lexicon_symbols: Option<PathBuf>,
    #[arg(long, global = true)]
    map: Option<PathBuf>,
    #[arg(long, global = true)]
    wordpieces: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Render a corpus as mixed phoneme/wordpiece training targets.
    SampleTargets {
        /// `utt_id<TAB>transcript` or bare transcript lines.
        #[arg(long)]
        corpus: PathBuf,
        /// `word<TAB>count<TAB>phonemes` over the decoder table.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        p0: f64,
        #[arg(long = "T", default_value_t = 10)]
        t: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a phrase list into a contextual biasing FST.
    BuildBiasFst {
        #[arg(long)]
        phrases: PathBuf,
        /// phoneme, wordpiece, grapheme or parallel.
        #[arg(long, default_value = "phoneme")]
        unit: String,
        #[arg(long, default_value_t = DEFAULT_BONUS)]
        bonus: f64,
        /// Foreign pronunciations: `word<TAB>phonemes` or `word<TAB>count<TAB>phonemes`.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the hub-and-tree decoding graph for a biasing word list.
    BuildDecodeGraph {
        #[arg(long)]
        bias_words: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Beam-search decode emissions against a graph, optionally biased.
    Decode {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        emissions: PathBuf,
        #[arg(long)]
        bias: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = DEFAULT_BEAM)]
        beam: usize,
        /// Accept hypotheses that stop inside the pronunciation tree.
        #[arg(long)]
        finalize_partial: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize noisy emissions for a Directions set.
    Synth {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long, default_value_t = 0.2)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a synthetic Directions set from a place-name pool.
    MakeSet {
        #[arg(long)]
        pool: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// All-English navigation queries instead of foreign destinations.
        #[arg(long)]
        english: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a place-name pool: curated names, then pseudo-names.
    MakePool {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one biasing experiment and report per-utterance WER.
    Run {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 1)]
        n_bias: usize,
    },
    /// Run one experiment per biasing-list size.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,10,100,500,1000")]
        n_list: Vec<usize>,
    },
    /// Score hypotheses against references (`utt_id<TAB>transcript` files).
    Wer {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    set: PathBuf,
    #[arg(long)]
    pool: Option<PathBuf>,
    /// none, phoneme, wordpiece, grapheme or parallel.
    #[arg(long, default_value = "phoneme")]
    unit: String,
    #[arg(long, value_delimiter = ',', default_value = "2.0")]
    bonus: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.2)]
    noise: f64,
    #[arg(long, default_value_t = DEFAULT_BEAM)]
    beam: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write JSON lines instead of TSV.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
#[command(name = "phonobias", version, about = "Cross-lingual phoneme contextual biasing toolkit")]
struct Cli {
    #[command(flatten)]
    tables: Tables,
    #[command(subcommand)]
    command: Command,
}

impl Tables {
    fn dir(&self) -> PathBuf {
        self.data.clone().unwrap_or_else(Resources::bundled_dir)
    }

    fn path(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.dir().join(name))
    }

    fn resources(&self) -> Result<Resources> {
        let symbols = io::load_symbol_table(&self.path(&self.symbols, resources::EN_SYMBOLS))?;
        let source = io::load_symbol_table(&self.path(&self.lexicon_symbols, resources::FR_SYMBOLS))?;
        let map = io::load_phoneme_map(&self.path(&self.map, resources::FR_EN_MAP), &symbols)?;
        let wordpieces = io::load_wordpieces(&self.path(&self.wordpieces, resources::WORDPIECES))?;
        let lexicon = io::load_lexicon(&self.dir().join(resources::EN_LEXICON), &symbols)?;
        Ok(Resources { symbols, source, map, wordpieces, lexicon })
    }

    fn symbols(&self) -> Result<SymbolTable> {
        io::load_symbol_table(&self.path(&self.symbols, resources::EN_SYMBOLS))
    }

    fn pool(&self, explicit: &Option<PathBuf>) -> Result<Pool> {
        let path = self.path(explicit, resources::POOL);
        Pool::parse_tsv(&io::read_text(&path)?).map_err(|e| Error::format(&path, e))
    }

    /// Two-column files are pools; three-column files are counted lexica.
    fn foreign_lexicon(&self, explicit: &Option<PathBuf>, res: &Resources) -> Result<Lexicon> {
        let path = self.path(explicit, resources::POOL);
        let text = io::read_text(&path)?;
        let columns = text.lines().find(|l| !l.trim().is_empty()).map_or(2, |l| l.split('\t').count());
        if columns == 3 {
            return Lexicon::parse_tsv(&text, res.source.clone()).map_err(|e| Error::format(&path, e));
        }
        let pool = Pool::parse_tsv(&text).map_err(|e| Error::format(&path, e))?;
        pool.lexicon(&res.source).map_err(|e| Error::format(&path, e))
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => io::write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `utt_id<TAB>transcript…` rows keyed by id; extra columns are ignored.
fn load_transcripts(path: &Path) -> Result<Vec<(String, Vec<String>)>> {
    let text = io::read_text(path)?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || (n == 0 && line.starts_with("utt_id\t")) {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 {
            return Err(Error::format(path, format!("line {}: expected utt_id<TAB>transcript", n + 1)));
        }
        rows.push((cols[0].to_string(), cols[1].split_whitespace().map(nfc).collect()));
    }
    Ok(rows)
}

fn run(tables: &Tables, command: Command) -> Result<()> {
    match command {
        Command::SampleTargets { corpus, lexicon, p0, t, seed, out } => {
            let res = tables.resources()?;
            let lex = match &lexicon {
                Some(path) => io::load_lexicon(path, &res.symbols)?,
                None => res.lexicon.clone(),
            };
            let cfg = SamplerConfig::new(p0, t, seed).map_err(|e| Error::Config(e.to_string()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let text = io::read_text(&corpus)?;
            let mut report = String::new();
            for (n, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
                let (id, words) = match line.split_once('\t') {
                    Some((id, words)) => (id.to_string(), words),
                    None => (format!("u{n}"), line),
                };
                let words: Vec<String> = words.split_whitespace().map(nfc).collect();
                let ids = sample_target_sequence(&words, &lex, &res.wordpieces, &res.symbols, &cfg, &mut rng)
                    .map_err(|e| Error::format(&corpus, format!("{id}: {e}")))?;
                let syms: Vec<String> =
                    ids.iter().map(|&l| res.symbols.qualified_name(l).unwrap_or_default()).collect();
                let _ = writeln!(report, "{id}\t{}", syms.join(" "));
            }
            emit(&out, &report)
        }
        Command::BuildBiasFst { phrases, unit, bonus, lexicon, out } => {
            let res = tables.resources()?;
            let mode = BiasMode::parse(&unit)
                .filter(|m| *m != BiasMode::None)
                .ok_or_else(|| Error::Config(format!("unknown unit {unit:?}")))?;
            let foreign = tables.foreign_lexicon(&lexicon, &res)?;
            let phrases = io::load_phrases(&phrases)?;
            let fst = experiment::compile_bias(mode, &phrases, bonus, &res.context(&foreign))?.expect("biasing mode");
            emit(&out, &fst.fst().to_text())
        }
        Command::BuildDecodeGraph { bias_words, lexicon, out } => {
            let res = tables.resources()?;
            let foreign = tables.foreign_lexicon(&lexicon, &res)?;
            let words: Vec<String> = io::load_phrases(&bias_words)?.into_iter().map(|p| p.join(" ")).collect();
            let graph =
                build_decoding_graph(&words, &res.context(&foreign)).map_err(|e| Error::Input(e.to_string()))?;
            emit(&out, &graph.fst().to_text())
        }
        Command::Decode { graph, emissions: em_path, bias, lambda, beam, finalize_partial, out } => {
            let symbols = tables.symbols()?;
            let graph_path = graph;
            let graph = DecodingGraph::from_wfst(io::load_fst(&graph_path)?, symbols.clone())
                .map_err(|e| Error::format(&graph_path, e))?;
            let bias = match &bias {
                Some(path) => Some(ContextualFst::from_wfst(io::load_fst(path)?).map_err(|e| Error::format(path, e))?),
                None => None,
            };
            let utts =
                emissions::parse_jsonl(&io::read_text(&em_path)?, &symbols).map_err(|e| Error::format(&em_path, e))?;
            let cfg = DecoderConfig { beam_size: beam, lambda, bias: bias.as_ref(), finalize_partial };
            let mut report = String::new();
            let mut failed = Vec::new();
            for em in &utts {
                match decode(em, &graph, &cfg) {
                    Ok(o) => {
                        let flags = if o.truncated { "truncated" } else { "-" };
                        let _ = writeln!(report, "{}\t{}\t{:.6}\t{flags}", em.utt_id, o.transcript(), o.cost);
                    }
                    Err(e) => {
                        let _ = writeln!(report, "{}\t\tinf\tno-hypothesis", em.utt_id);
                        failed.push(format!("{}: {e}", em.utt_id));
                    }
                }
            }
            emit(&out, &report)?;
            match failed.is_empty() {
                true => Ok(()),
                false => Err(Error::Decode(failed.join("; "))),
            }
        }
        Command::Synth { set, pool, noise, seed, out } => {
            let res = tables.resources()?;
            let set = load_set(tables, &set, &pool)?;
            let em = experiment::synthesize(&set, &res, noise, seed)?;
            emit(&out, &emissions::to_jsonl(&em, &res.symbols))
        }
        Command::MakeSet { pool, n, english, seed, out } => {
            let set = match english {
                true => experiment::make_english_set(n, seed),
                false => experiment::make_directions_set(&tables.pool(&pool)?, n, seed)?,
            };
            emit(&out, &set.to_tsv())
        }
        Command::MakePool { n, seed, out } => {
            let res = tables.resources()?;
            emit(&out, &pool::generate_pool(n, seed, &res.map).to_tsv())
        }
        Command::Run { exp, n_bias } => {
            let (res, set, cfgs) = experiment_inputs(tables, &exp)?;
            let mut text = String::new();
            for cfg in cfgs {
                let report = experiment::run_bias_experiment(&set, &res, &ExperimentConfig { n_bias, ..cfg })?;
                eprintln!("bonus {} wer {:.6} over {} utterances", cfg.bonus, report.wer(), report.rows.len());
                text.push_str(&if exp.json { report.to_jsonl() } else { report.to_tsv() });
            }
            emit(&exp.out, &text)
        }
        Command::Sweep { exp, n_list } => {
            let (res, set, cfgs) = experiment_inputs(tables, &exp)?;
            let mut text = String::new();
            for cfg in cfgs {
                let report = experiment::distractor_sweep(&set, &res, &cfg, &n_list)?;
                text.push_str(&if exp.json { report.to_jsonl() } else { report.to_tsv() });
            }
            emit(&exp.out, &text)
        }
        Command::Wer { reference, hyp, out } => {
            let refs = load_transcripts(&reference)?;
            let hyps: std::collections::HashMap<String, Vec<String>> = load_transcripts(&hyp)?.into_iter().collect();
            let mut text = String::from("utt_id\tedits\tref_words\twer\n");
            let (mut edits, mut words) = (0usize, 0usize);
            for (id, r) in &refs {
                let h = hyps.get(id).map(Vec::as_slice).unwrap_or(&[]);
                let e = edit_distance(r, h);
                edits += e;
                words += r.len();
                let _ = writeln!(text, "{id}\t{e}\t{}\t{:.6}", r.len(), phonobias_core::wer::wer(r, h));
            }
            let total = if words == 0 { edits as f64 } else { edits as f64 / words as f64 };
            let _ = writeln!(text, "total\t{edits}\t{words}\t{total:.6}");
            emit(&out, &text)
        }
    }
}

fn load_set(tables: &Tables, set: &Path, pool: &Option<PathBuf>) -> Result<DirectionsSet> {
    let text = io::read_text(set)?;
    let english =
        text.lines().filter(|l| !l.trim().is_empty()).all(|l| l.split('\t').nth(2).is_none_or(|t| t.trim() == "-"));
    let pool = if english && pool.is_none() { Pool::default() } else { tables.pool(pool)? };
    DirectionsSet::parse_tsv(&text, pool).map_err(|e| Error::format(set, e))
}

fn experiment_inputs(
    tables: &Tables,
    exp: &ExperimentArgs,
) -> Result<(Resources, DirectionsSet, Vec<ExperimentConfig>)> {
    let res = tables.resources()?;
    let set = load_set(tables, &exp.set, &exp.pool)?;
    let mode = BiasMode::parse(&exp.unit).ok_or_else(|| Error::Config(format!("unknown unit {:?}", exp.unit)))?;
    let cfgs = exp
        .bonus
        .iter()
        .map(|&bonus| ExperimentConfig {
            n_bias: 1,
            mode,
            bonus,
            lambda: exp.lambda,
            noise: exp.noise,
            beam: exp.beam,
            seed: exp.seed,
        })
        .collect();
    Ok((res, set, cfgs))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.tables, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phonobias: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
