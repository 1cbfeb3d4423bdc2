//! Expansion of words into modeling units (phonemes, wordpieces, graphemes).

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::lexicon::{nfc, Lexicon, PhonemeMap};
use crate::symbols::{SymbolKind, SymbolTable};
use crate::tokenize::WordpieceInventory;
use crate::wfst::Label;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Unit {
    Phoneme,
    Wordpiece,
    Grapheme,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Phoneme => "phoneme",
            Unit::Wordpiece => "wordpiece",
            Unit::Grapheme => "grapheme",
        }
    }

    pub fn parse(s: &str) -> Option<Unit> {
        match s {
            "phoneme" => Some(Unit::Phoneme),
            "wordpiece" => Some(Unit::Wordpiece),
            "grapheme" => Some(Unit::Grapheme),
            _ => None,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A word could not be written in the requested unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionFailure {
    pub word: String,
    pub unit: Unit,
    pub reason: String,
}

impl fmt::Display for ExpansionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cannot expand {:?} into {}s: {}", self.word, self.unit, self.reason)
    }
}

impl core::error::Error for ExpansionFailure {}

/// Re-expresses ids of `from` as ids of `to` by symbol string, requiring `kind`.
pub fn rebind(ids: &[Label], from: &SymbolTable, to: &SymbolTable, kind: SymbolKind) -> Result<Vec<Label>, String> {
    if from == to {
        return Ok(ids.to_vec());
    }
    ids.iter()
        .map(|&id| {
            let sym = from.symbol(id).ok_or_else(|| alloc::format!("id {id} unknown"))?;
            to.id_of_kind(sym, kind).ok_or_else(|| alloc::format!("{sym:?} is not a {kind} of the target table"))
        })
        .collect()
}

/// Everything needed to spell a word in any unit over one target table.
#[derive(Clone, Copy)]
pub struct UnitContext<'a> {
    /// Table the expanded ids refer to.
    pub symbols: &'a SymbolTable,
    pub lexicon: Option<&'a Lexicon>,
    /// Applied to lexicon pronunciations when present (foreign lexica).
    pub map: Option<&'a PhonemeMap>,
    pub wordpieces: Option<&'a WordpieceInventory>,
}

impl<'a> UnitContext<'a> {
    pub fn new(symbols: &'a SymbolTable) -> Self {
        UnitContext { symbols, lexicon: None, map: None, wordpieces: None }
    }

    pub fn with_lexicon(mut self, lexicon: &'a Lexicon) -> Self {
        self.lexicon = Some(lexicon);
        self
    }

    pub fn with_map(mut self, map: &'a PhonemeMap) -> Self {
        self.map = Some(map);
        self
    }

    pub fn with_wordpieces(mut self, inv: &'a WordpieceInventory) -> Self {
        self.wordpieces = Some(inv);
        self
    }

    fn fail(word: &str, unit: Unit, reason: impl Into<String>) -> ExpansionFailure {
        ExpansionFailure { word: word.to_string(), unit, reason: reason.into() }
    }

    /// Target-table phonemes of `word`, mapped through the phoneme map if set.
    pub fn phonemes(&self, word: &str) -> Result<Vec<Label>, ExpansionFailure> {
        let lex = self.lexicon.ok_or_else(|| Self::fail(word, Unit::Phoneme, "no lexicon"))?;
        let entry = lex.get(word).ok_or_else(|| Self::fail(word, Unit::Phoneme, "not in lexicon"))?;
        match self.map {
            Some(map) => {
                let src: Vec<&str> =
                    entry.pronunciation.iter().map(|&id| lex.symbols().symbol(id).unwrap_or("")).collect();
                let ids = map.map_phonemes(&src).map_err(|e| Self::fail(word, Unit::Phoneme, e.to_string()))?;
                rebind(&ids, map.target(), self.symbols, SymbolKind::Phoneme)
                    .map_err(|e| Self::fail(word, Unit::Phoneme, e))
            }
            None => rebind(&entry.pronunciation, lex.symbols(), self.symbols, SymbolKind::Phoneme)
                .map_err(|e| Self::fail(word, Unit::Phoneme, e)),
        }
    }

    pub fn wordpieces(&self, word: &str) -> Result<Vec<Label>, ExpansionFailure> {
        let inv = self.wordpieces.ok_or_else(|| Self::fail(word, Unit::Wordpiece, "no wordpiece inventory"))?;
        inv.tokenize_ids(&nfc(word), self.symbols).map_err(|e| Self::fail(word, Unit::Wordpiece, e.to_string()))
    }

    /// One grapheme symbol per Unicode scalar value of the NFC spelling.
    pub fn graphemes(&self, word: &str) -> Result<Vec<Label>, ExpansionFailure> {
        let word = nfc(word);
        if word.is_empty() {
            return Err(Self::fail(&word, Unit::Grapheme, "empty word"));
        }
        let mut buf = [0u8; 4];
        word.chars()
            .map(|c| {
                self.symbols
                    .id_of_kind(c.encode_utf8(&mut buf), SymbolKind::Grapheme)
                    .ok_or_else(|| Self::fail(&word, Unit::Grapheme, alloc::format!("no grapheme symbol {c:?}")))
            })
            .collect()
    }

    pub fn expand(&self, word: &str, unit: Unit) -> Result<Vec<Label>, ExpansionFailure> {
        match unit {
            Unit::Phoneme => self.phonemes(word),
            Unit::Wordpiece => self.wordpieces(word),
            Unit::Grapheme => self.graphemes(word),
        }
    }

    /// Unit sequence of a multi-word phrase, `<eow>` between words.
    pub fn expand_phrase<S: AsRef<str>>(&self, phrase: &[S], unit: Unit) -> Result<Vec<Label>, ExpansionFailure> {
        let mut out = Vec::new();
        for (i, w) in phrase.iter().enumerate() {
            if i > 0 {
                out.push(self.symbols.eow());
            }
            out.extend(self.expand(w.as_ref(), unit)?);
        }
        Ok(out)
    }
}

/// Splits a bias list into phrases: one per non-blank line, NFC, whitespace-separated words.
pub fn parse_phrases(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| nfc(l.trim()))
        .filter(|l| !l.is_empty())
        .map(|l| l.split_whitespace().map(ToString::to_string).collect())
        .collect()
}
