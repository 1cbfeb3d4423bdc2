//! Loaders and writers for the plain-text formats.

use std::fs;
use std::path::Path;

use phonobias_core::lexicon::{Lexicon, PhonemeMap};
use phonobias_core::symbols::SymbolTable;
use phonobias_core::tokenize::WordpieceInventory;
use phonobias_core::units::parse_phrases;
use phonobias_core::wfst::Wfst;

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_owned(), source })
}

pub fn load_symbol_table(path: &Path) -> Result<SymbolTable> {
    SymbolTable::parse_tsv(&read_text(path)?).map_err(|e| Error::format(path, e))
}

pub fn write_symbol_table(table: &SymbolTable, path: &Path) -> Result<()> {
    write_text(path, &table.to_tsv())
}

/// Pronunciations resolve against `symbols`; the result is untrimmed.
pub fn load_lexicon(path: &Path, symbols: &SymbolTable) -> Result<Lexicon> {
    Lexicon::parse_tsv(&read_text(path)?, symbols.clone()).map_err(|e| Error::format(path, e))
}

pub fn load_phoneme_map(path: &Path, target: &SymbolTable) -> Result<PhonemeMap> {
    PhonemeMap::parse_tsv(&read_text(path)?, target.clone()).map_err(|e| Error::format(path, e))
}

pub fn load_wordpieces(path: &Path) -> Result<WordpieceInventory> {
    WordpieceInventory::parse_lines(&read_text(path)?).map_err(|e| Error::format(path, e))
}

pub fn load_phrases(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(parse_phrases(&read_text(path)?))
}

pub fn load_fst(path: &Path) -> Result<Wfst> {
    Wfst::parse_text(&read_text(path)?).map_err(|e| Error::format(path, e))
}

pub fn write_fst(fst: &Wfst, path: &Path) -> Result<()> {
    write_text(path, &fst.to_text())
}
