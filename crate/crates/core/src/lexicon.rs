//! Pronunciation lexica and cross-lingual phoneme maps.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use unicode_normalization::UnicodeNormalization;

use crate::symbols::{SymbolKind, SymbolTable};
use crate::wfst::Label;

/// NFC-normalizes `s`.
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum LexiconError {
    UnknownSymbol(String),
    BadFrequency { line: usize, value: String },
    BadLine { line: usize, reason: String },
    DuplicateSource(String),
    UnmappedPhoneme(String),
}

impl fmt::Display for LexiconError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexiconError::UnknownSymbol(s) => write!(f, "unknown phoneme symbol {s:?}"),
            LexiconError::BadFrequency { line, value } => write!(f, "line {line}: bad frequency {value:?}"),
            LexiconError::BadLine { line, reason } => write!(f, "line {line}: {reason}"),
            LexiconError::DuplicateSource(s) => write!(f, "duplicate source phoneme {s:?}"),
            LexiconError::UnmappedPhoneme(s) => write!(f, "phoneme {s:?} is not covered by the map"),
        }
    }
}

impl core::error::Error for LexiconError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub word: String,
    pub frequency: u64,
    pub pronunciation: Vec<Label>,
}

/// Words with corpus frequencies and phoneme pronunciations, bound to the
/// symbol table the pronunciation ids come from.
///
/// A word may appear on several rows (pronunciation variants) until the
/// lexicon is trimmed.
#[derive(Debug, Clone)]
pub struct Lexicon {
    symbols: SymbolTable,
    entries: Vec<LexEntry>,
    by_word: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrimReport {
    /// Words removed because another word shares one of their pronunciations.
    pub homophones: Vec<String>,
    /// Words removed because they have more than one pronunciation row.
    pub variants: Vec<String>,
}

impl TrimReport {
    pub fn removed(&self) -> usize {
        self.homophones.len() + self.variants.len()
    }
}

impl Lexicon {
    pub fn new(symbols: SymbolTable) -> Self {
        Lexicon { symbols, entries: Vec::new(), by_word: BTreeMap::new() }
    }

    /// Adds a row. The word is NFC-normalized; every pronunciation id must be a
    /// phoneme of the bound table.
    pub fn push(&mut self, word: &str, frequency: u64, pronunciation: Vec<Label>) -> Result<(), LexiconError> {
        for &id in &pronunciation {
            if self.symbols.kind(id) != Some(SymbolKind::Phoneme) {
                return Err(LexiconError::UnknownSymbol(alloc::format!("#{id}")));
            }
        }
        let word = nfc(word);
        self.by_word.entry(word.clone()).or_default().push(self.entries.len());
        self.entries.push(LexEntry { word, frequency, pronunciation });
        Ok(())
    }

    /// Adds a row whose pronunciation is given as phoneme strings.
    pub fn push_symbols(&mut self, word: &str, frequency: u64, phonemes: &[&str]) -> Result<(), LexiconError> {
        let pron = phonemes
            .iter()
            .map(|p| {
                self.symbols
                    .id_of_kind(p, SymbolKind::Phoneme)
                    .ok_or_else(|| LexiconError::UnknownSymbol(p.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.push(word, frequency, pron)
    }

    /// Parses `word<TAB>frequency<TAB>phonemes` lines (phonemes space-separated).
    pub fn parse_tsv(text: &str, symbols: SymbolTable) -> Result<Self, LexiconError> {
        let mut lex = Lexicon::new(symbols);
        for (n, line) in text.lines().enumerate() {
            let lineno = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(LexiconError::BadLine { line: lineno, reason: "expected 3 tab-separated columns".into() });
            }
            let freq: i64 = cols[1]
                .trim()
                .parse()
                .map_err(|_| LexiconError::BadFrequency { line: lineno, value: cols[1].to_string() })?;
            if freq < 0 {
                return Err(LexiconError::BadFrequency { line: lineno, value: cols[1].to_string() });
            }
            let phones: Vec<&str> = cols[2].split_whitespace().collect();
            if phones.is_empty() {
                return Err(LexiconError::BadLine { line: lineno, reason: "empty pronunciation".into() });
            }
            if cols[0].is_empty() {
                return Err(LexiconError::BadLine { line: lineno, reason: "empty word".into() });
            }
            lex.push_symbols(cols[0], freq as u64, &phones)?;
        }
        Ok(lex)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.word);
            out.push('\t');
            out.push_str(&e.frequency.to_string());
            out.push('\t');
            out.push_str(&self.symbols.render(&e.pronunciation));
            out.push('\n');
        }
        out
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn entries(&self) -> &[LexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// First entry for `word` (looked up after NFC normalization).
    pub fn get(&self, word: &str) -> Option<&LexEntry> {
        let idx = match self.by_word.get(word) {
            Some(v) => v,
            None => self.by_word.get(&nfc(word))?,
        };
        idx.first().map(|&i| &self.entries[i])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.get(word).is_some()
    }

    /// Pronunciation of `word` as phoneme strings of the bound table.
    pub fn pronunciation_symbols(&self, word: &str) -> Option<Vec<&str>> {
        let e = self.get(word)?;
        e.pronunciation.iter().map(|&id| self.symbols.symbol(id)).collect()
    }

    /// Drops every word that participates in a homophone group or has more
    /// than one pronunciation row. Both rules look at the untrimmed rows, so a
    /// word sharing a pronunciation with a variant of another word also goes.
    pub fn trim(&self) -> (Lexicon, TrimReport) {
        let mut by_pron: BTreeMap<&[Label], BTreeSet<&str>> = BTreeMap::new();
        for e in &self.entries {
            by_pron.entry(&e.pronunciation).or_default().insert(&e.word);
        }
        let mut report = TrimReport::default();
        let mut variants = BTreeSet::new();
        for (word, rows) in &self.by_word {
            if rows.len() > 1 {
                variants.insert(word.as_str());
                report.variants.push(word.clone());
            }
        }
        let mut homophones = BTreeSet::new();
        for words in by_pron.values() {
            if words.len() > 1 {
                for w in words {
                    if !variants.contains(w) {
                        homophones.insert(*w);
                    }
                }
            }
        }
        report.homophones = homophones.iter().map(|w| w.to_string()).collect();

        let mut out = Lexicon::new(self.symbols.clone());
        for e in &self.entries {
            if variants.contains(e.word.as_str()) || homophones.contains(e.word.as_str()) {
                continue;
            }
            out.by_word.entry(e.word.clone()).or_default().push(out.entries.len());
            out.entries.push(e.clone());
        }
        (out, report)
    }

    /// True when every word has one row and no two words share a pronunciation.
    pub fn is_trimmed(&self) -> bool {
        let mut prons = BTreeSet::new();
        self.by_word.values().all(|rows| rows.len() == 1)
            && self.entries.iter().all(|e| prons.insert(e.pronunciation.as_slice()))
    }
}

/// Source-language phoneme to target-language phoneme sequence dictionary.
#[derive(Debug, Clone)]
pub struct PhonemeMap {
    target: SymbolTable,
    pairs: BTreeMap<String, Vec<Label>>,
}

impl PhonemeMap {
    pub fn new(target: SymbolTable) -> Self {
        PhonemeMap { target, pairs: BTreeMap::new() }
    }

    pub fn insert(&mut self, source: &str, targets: &[&str]) -> Result<(), LexiconError> {
        if self.pairs.contains_key(source) {
            return Err(LexiconError::DuplicateSource(source.to_string()));
        }
        if targets.is_empty() {
            return Err(LexiconError::BadLine { line: 0, reason: alloc::format!("empty target for {source:?}") });
        }
        let ids = targets
            .iter()
            .map(|t| {
                self.target.id_of_kind(t, SymbolKind::Phoneme).ok_or_else(|| LexiconError::UnknownSymbol(t.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.pairs.insert(source.to_string(), ids);
        Ok(())
    }

    /// Identity map over every phoneme of `target`.
    pub fn identity(target: SymbolTable) -> Self {
        let mut map = PhonemeMap::new(target.clone());
        for (id, sym, kind) in target.iter() {
            if kind == SymbolKind::Phoneme {
                map.pairs.insert(sym.to_string(), alloc::vec![id]);
            }
        }
        map
    }

    /// Parses `src<TAB>tgt [tgt…]` lines.
    pub fn parse_tsv(text: &str, target: SymbolTable) -> Result<Self, LexiconError> {
        let mut map = PhonemeMap::new(target);
        for (n, line) in text.lines().enumerate() {
            let lineno = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (src, tgt) = line
                .split_once('\t')
                .ok_or_else(|| LexiconError::BadLine { line: lineno, reason: "expected src<TAB>targets".into() })?;
            let tgts: Vec<&str> = tgt.split_whitespace().collect();
            if src.is_empty() || tgts.is_empty() {
                return Err(LexiconError::BadLine { line: lineno, reason: "empty source or target".into() });
            }
            map.insert(src, &tgts)?;
        }
        Ok(map)
    }

    pub fn target(&self) -> &SymbolTable {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, source: &str) -> Option<&[Label]> {
        self.pairs.get(source).map(Vec::as_slice)
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.pairs.keys().map(String::as_str)
    }

    /// Maps a source phoneme sequence symbol by symbol and concatenates the
    /// target sequences.
    pub fn map_phonemes<S: AsRef<str>>(&self, src: &[S]) -> Result<Vec<Label>, LexiconError> {
        let mut out = Vec::with_capacity(src.len());
        for s in src {
            let s = s.as_ref();
            let tgt = self.pairs.get(s).ok_or_else(|| LexiconError::UnmappedPhoneme(s.to_string()))?;
            out.extend_from_slice(tgt);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn table(phones: &[&str]) -> SymbolTable {
        SymbolTable::with_reserved(phones.iter().map(|p| (*p, SymbolKind::Phoneme))).unwrap()
    }

    fn fr() -> SymbolTable {
        table(&["k", "R", "e", "t", "E", "j", "S"])
    }

    fn en() -> SymbolTable {
        table(&["k", "r\\", "E", "t", "j", "S", "f", "l", "aU", "@`", "i", "aI", "D"])
    }

    #[test]
    fn load_french_entry() {
        let lex = Lexicon::parse_tsv("créteil\t3\tk R e t E j\n", fr()).unwrap();
        let e = lex.get("créteil").unwrap();
        assert_eq!(e.frequency, 3);
        assert_eq!(lex.pronunciation_symbols("créteil").unwrap(), vec!["k", "R", "e", "t", "E", "j"]);
    }

    #[test]
    fn load_english_entry() {
        let t = en();
        let lex = Lexicon::parse_tsv("crèche\t12\tk r\\ E S\n", t.clone()).unwrap();
        let ids: Vec<_> = ["k", "r\\", "E", "S"].iter().map(|p| t.id(p).unwrap()).collect();
        assert_eq!(lex.get("crèche").unwrap().pronunciation, ids);
    }

    #[test]
    fn words_are_nfc() {
        // "e" + combining acute
        let lex = Lexicon::parse_tsv("cre\u{301}teil\t1\tk R e t E j\n", fr()).unwrap();
        assert!(lex.contains("créteil"));
        assert_eq!(lex.entries()[0].word, "créteil");
    }

    #[test]
    fn unknown_symbol_and_bad_frequency() {
        assert_eq!(Lexicon::parse_tsv("foo\t1\tzz\n", fr()).unwrap_err(), LexiconError::UnknownSymbol("zz".into()));
        assert!(matches!(Lexicon::parse_tsv("foo\t-1\tk\n", fr()), Err(LexiconError::BadFrequency { .. })));
    }

    #[test]
    fn trim_homophones_and_variants() {
        let text = "flower\t10\tf l aU @`\nflour\t5\tf l aU @`\neither\t7\ti D @`\neither\t7\taI D @`\nkit\t1\tk i t\n";
        let lex = Lexicon::parse_tsv(text, en()).unwrap();
        let (trimmed, report) = lex.trim();
        assert_eq!(report.homophones, vec!["flour".to_string(), "flower".to_string()]);
        assert_eq!(report.variants, vec!["either".to_string()]);
        assert_eq!(trimmed.len(), 1);
        assert!(trimmed.contains("kit"));
        assert!(trimmed.is_trimmed());
        assert!(!lex.is_trimmed());
    }

    #[test]
    fn unique_word_kept() {
        let lex = Lexicon::parse_tsv("kit\t1\tk i t\n", en()).unwrap();
        let (trimmed, report) = lex.trim();
        assert_eq!(report.removed(), 0);
        assert_eq!(trimmed.entries(), lex.entries());
    }

    #[test]
    fn map_french_to_english() {
        let map = PhonemeMap::parse_tsv("R\tr\\\ne\tE\nk\tk\nt\tt\nE\tE\nj\tj\n", en()).unwrap();
        let t = en();
        let want: Vec<_> = ["k", "r\\", "E", "t", "E", "j"].iter().map(|p| t.id(p).unwrap()).collect();
        assert_eq!(map.map_phonemes(&["k", "R", "e", "t", "E", "j"]).unwrap(), want);
        assert!(map.map_phonemes::<&str>(&[]).unwrap().is_empty());
        assert_eq!(map.map_phonemes(&["k", "ZZ"]).unwrap_err(), LexiconError::UnmappedPhoneme("ZZ".into()));
    }

    #[test]
    fn map_errors() {
        assert_eq!(PhonemeMap::parse_tsv("R\tqq\n", en()).unwrap_err(), LexiconError::UnknownSymbol("qq".into()));
        assert_eq!(
            PhonemeMap::parse_tsv("R\tr\\\nR\tk\n", en()).unwrap_err(),
            LexiconError::DuplicateSource("R".into())
        );
    }

    #[test]
    fn identity_map_and_one_to_many() {
        let t = en();
        let id = PhonemeMap::identity(t.clone());
        assert_eq!(id.map_phonemes(&["k", "E"]).unwrap(), vec![t.id("k").unwrap(), t.id("E").unwrap()]);
        let map = PhonemeMap::parse_tsv("J\tk j\n", t.clone()).unwrap();
        assert_eq!(map.map_phonemes(&["J"]).unwrap(), vec![t.id("k").unwrap(), t.id("j").unwrap()]);
    }
}
