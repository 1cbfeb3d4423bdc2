//! Wordpiece segmentation and lexicon lookup.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::lexicon::Lexicon;
use crate::symbols::{SymbolKind, SymbolTable};
use crate::wfst::Label;

/// Prefix marking a word-initial wordpiece.
pub const WORD_START: char = '_';

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenizeError {
    EmptyWord,
    UnsegmentableWord {
        word: String,
        grapheme: char,
    },
    OutOfLexicon(String),
    /// A wordpiece of the inventory has no id in the symbol table.
    UnknownPiece(String),
    EmptyPiece,
}

impl fmt::Display for TokenizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenizeError::EmptyWord => f.write_str("cannot segment an empty word"),
            TokenizeError::UnsegmentableWord { word, grapheme } => {
                write!(f, "no wordpiece covers {grapheme:?} in {word:?}")
            }
            TokenizeError::OutOfLexicon(w) => write!(f, "{w:?} is not in the lexicon"),
            TokenizeError::UnknownPiece(p) => write!(f, "wordpiece {p:?} has no symbol id"),
            TokenizeError::EmptyPiece => f.write_str("empty wordpiece"),
        }
    }
}

impl core::error::Error for TokenizeError {}

/// Strips the word-initial marker, if any.
pub fn strip_marker(piece: &str) -> &str {
    piece.strip_prefix(WORD_START).unwrap_or(piece)
}

pub fn is_word_initial(piece: &str) -> bool {
    piece.starts_with(WORD_START) && piece.len() > WORD_START.len_utf8()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordpieceInventory {
    pieces: BTreeSet<String>,
    max_chars: usize,
}

impl WordpieceInventory {
    pub fn new<I, S>(pieces: I) -> Result<Self, TokenizeError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut inv = WordpieceInventory::default();
        for p in pieces {
            let p = p.into();
            if strip_marker(&p).is_empty() {
                return Err(TokenizeError::EmptyPiece);
            }
            inv.max_chars = inv.max_chars.max(strip_marker(&p).chars().count());
            inv.pieces.insert(p);
        }
        Ok(inv)
    }

    /// One piece per line; blank lines skipped.
    pub fn parse_lines(text: &str) -> Result<Self, TokenizeError> {
        Self::new(text.lines().map(str::trim_end).filter(|l| !l.is_empty()).map(ToString::to_string))
    }

    /// Every wordpiece-kind symbol of `symbols`.
    pub fn from_symbols(symbols: &SymbolTable) -> Self {
        Self::new(symbols.iter().filter(|e| e.2 == SymbolKind::Wordpiece).map(|e| e.1.to_string()))
            .expect("symbol tables hold no empty symbols")
    }

    pub fn contains(&self, piece: &str) -> bool {
        self.pieces.contains(piece)
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.pieces.iter().map(String::as_str)
    }

    /// Greedy longest-match segmentation, left to right. At the first position
    /// a marked piece wins over an unmarked piece of the same length.
    pub fn tokenize(&self, word: &str) -> Result<Vec<String>, TokenizeError> {
        let chars: Vec<char> = word.chars().collect();
        if chars.is_empty() {
            return Err(TokenizeError::EmptyWord);
        }
        let mut out = Vec::new();
        let mut pos = 0;
        let mut buf = String::new();
        while pos < chars.len() {
            let longest = self.max_chars.min(chars.len() - pos);
            let mut found = None;
            for len in (1..=longest).rev() {
                buf.clear();
                if pos == 0 {
                    buf.push(WORD_START);
                    buf.extend(&chars[pos..pos + len]);
                    if self.pieces.contains(&buf) {
                        found = Some((buf.clone(), len));
                        break;
                    }
                    buf.clear();
                }
                buf.extend(&chars[pos..pos + len]);
                if self.pieces.contains(&buf) {
                    found = Some((buf.clone(), len));
                    break;
                }
            }
            match found {
                Some((piece, len)) => {
                    out.push(piece);
                    pos += len;
                }
                None => return Err(TokenizeError::UnsegmentableWord { word: word.to_string(), grapheme: chars[pos] }),
            }
        }
        Ok(out)
    }

    /// Segments `word` and resolves the pieces to wordpiece ids of `symbols`.
    pub fn tokenize_ids(&self, word: &str, symbols: &SymbolTable) -> Result<Vec<Label>, TokenizeError> {
        self.tokenize(word)?
            .into_iter()
            .map(|p| symbols.id_of_kind(&p, SymbolKind::Wordpiece).ok_or(TokenizeError::UnknownPiece(p)))
            .collect()
    }
}

/// Joins wordpieces back into a word, dropping markers.
pub fn detokenize<S: AsRef<str>>(pieces: &[S]) -> String {
    pieces.iter().map(|p| strip_marker(p.as_ref())).collect()
}

/// Stored pronunciation of `word`.
pub fn word_to_phonemes(word: &str, lex: &Lexicon) -> Result<Vec<Label>, TokenizeError> {
    lex.get(word).map(|e| e.pronunciation.clone()).ok_or_else(|| TokenizeError::OutOfLexicon(word.to_string()))
}
