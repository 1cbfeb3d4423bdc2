//! Dense symbol tables shared by every transducer in the crate.
//!
//! Ids are dense and start at zero. Id 0 is always `<eps>`, id 1 is always
//! `<phi>` (the failure label) and `<eow>` must be present with kind
//! [`SymbolKind::Special`].

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::wfst::Label;

pub const EPS_SYMBOL: &str = "<eps>";
pub const PHI_SYMBOL: &str = "<phi>";
pub const EOW_SYMBOL: &str = "<eow>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolKind {
    Phoneme,
    Wordpiece,
    Grapheme,
    Special,
    /// Word labels on the output side of spellers and lexicon transducers.
    Word,
}

impl SymbolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolKind::Phoneme => "phoneme",
            SymbolKind::Wordpiece => "wordpiece",
            SymbolKind::Grapheme => "grapheme",
            SymbolKind::Special => "special",
            SymbolKind::Word => "word",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "phoneme" => SymbolKind::Phoneme,
            "wordpiece" => SymbolKind::Wordpiece,
            "grapheme" => SymbolKind::Grapheme,
            "special" => SymbolKind::Special,
            "word" => SymbolKind::Word,
            _ => return None,
        })
    }
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolError {
    DuplicateSymbol {
        symbol: String,
        id: Label,
    },
    MissingReserved(&'static str),
    /// Ids are not dense `0..N`.
    NonDenseIds {
        missing: Label,
    },
    InvalidPhoneme(String),
    BadLine {
        line: usize,
        reason: String,
    },
    UnknownSymbol(String),
}

impl fmt::Display for SymbolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolError::DuplicateSymbol { symbol, id } => {
                write!(f, "duplicate symbol {symbol:?} or id {id}")
            }
            SymbolError::MissingReserved(s) => write!(f, "reserved symbol {s} missing or misplaced"),
            SymbolError::NonDenseIds { missing } => write!(f, "symbol ids are not dense: {missing} is missing"),
            SymbolError::InvalidPhoneme(s) => write!(f, "{s:?} is not a valid X-SAMPA token"),
            SymbolError::BadLine { line, reason } => write!(f, "line {line}: {reason}"),
            SymbolError::UnknownSymbol(s) => write!(f, "unknown symbol {s:?}"),
        }
    }
}

impl core::error::Error for SymbolError {}

#[derive(Debug, PartialEq, Eq)]
struct Inner {
    symbols: Vec<(String, SymbolKind)>,
    index: BTreeMap<(String, SymbolKind), Label>,
}

/// Bijection between `(symbol, kind)` pairs and dense integer ids.
///
/// One string may appear under several kinds (the phoneme `t` next to the
/// wordpiece `t`); reserved symbols are unique across all kinds.
///
/// Cloning is cheap; the entries are shared and immutable.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    inner: Arc<Inner>,
}

impl PartialEq for SymbolTable {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl Eq for SymbolTable {}

/// X-SAMPA tokens are printable ASCII without whitespace or tabs.
pub fn is_xsampa_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_graphic())
}

impl SymbolTable {
    /// Builds a table from `(symbol, kind)` pairs in id order. The reserved
    /// symbols must already be in place.
    pub fn from_entries<I, S>(entries: I) -> Result<Self, SymbolError>
    where
        I: IntoIterator<Item = (S, SymbolKind)>,
        S: Into<String>,
    {
        let mut symbols = Vec::new();
        let mut index = BTreeMap::new();
        for (sym, kind) in entries {
            let sym = sym.into();
            let id = symbols.len() as Label;
            let reserved = [EPS_SYMBOL, PHI_SYMBOL, EOW_SYMBOL].contains(&sym.as_str());
            let clash = if reserved {
                index.keys().any(|(s, _): &(String, SymbolKind)| *s == sym)
            } else {
                index.contains_key(&(sym.clone(), kind)) || index.contains_key(&(sym.clone(), SymbolKind::Special))
            };
            if clash {
                return Err(SymbolError::DuplicateSymbol { symbol: sym, id });
            }
            if kind == SymbolKind::Phoneme && !is_xsampa_token(&sym) {
                return Err(SymbolError::InvalidPhoneme(sym));
            }
            index.insert((sym.clone(), kind), id);
            symbols.push((sym, kind));
        }
        let table = SymbolTable { inner: Arc::new(Inner { symbols, index }) };
        table.check_reserved()?;
        Ok(table)
    }

    /// A table holding only the reserved symbols followed by `extra`.
    pub fn with_reserved<I, S>(extra: I) -> Result<Self, SymbolError>
    where
        I: IntoIterator<Item = (S, SymbolKind)>,
        S: Into<String>,
    {
        let reserved = [
            (String::from(EPS_SYMBOL), SymbolKind::Special),
            (String::from(PHI_SYMBOL), SymbolKind::Special),
            (String::from(EOW_SYMBOL), SymbolKind::Special),
        ];
        Self::from_entries(reserved.into_iter().chain(extra.into_iter().map(|(s, k)| (s.into(), k))))
    }

    /// Word label table: reserved symbols, then `words` in order (duplicates skipped).
    pub fn for_words<'a, I: IntoIterator<Item = &'a str>>(words: I) -> Self {
        let mut seen = BTreeMap::new();
        let mut extra = Vec::new();
        for w in words {
            if [EPS_SYMBOL, PHI_SYMBOL, EOW_SYMBOL].contains(&w) {
                continue;
            }
            if seen.insert(w.to_string(), ()).is_none() {
                extra.push((w.to_string(), SymbolKind::Word));
            }
        }
        Self::with_reserved(extra).expect("reserved-prefixed word table is valid")
    }

    fn check_reserved(&self) -> Result<(), SymbolError> {
        let s = &self.inner.symbols;
        if s.first().map(|e| e.0.as_str()) != Some(EPS_SYMBOL) {
            return Err(SymbolError::MissingReserved(EPS_SYMBOL));
        }
        if s.get(1).map(|e| e.0.as_str()) != Some(PHI_SYMBOL) {
            return Err(SymbolError::MissingReserved(PHI_SYMBOL));
        }
        match self.id(EOW_SYMBOL) {
            Some(id) if self.kind(id) == Some(SymbolKind::Special) => Ok(()),
            _ => Err(SymbolError::MissingReserved(EOW_SYMBOL)),
        }
    }

    /// Parses `symbol<TAB>id<TAB>kind` lines. Blank lines are ignored.
    pub fn parse_tsv(text: &str) -> Result<Self, SymbolError> {
        let mut rows: BTreeMap<Label, (String, SymbolKind)> = BTreeMap::new();
        let mut seen: BTreeMap<(String, SymbolKind), Label> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let lineno = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(SymbolError::BadLine { line: lineno, reason: "expected 3 tab-separated columns".into() });
            }
            let id: Label = cols[1]
                .parse()
                .map_err(|_| SymbolError::BadLine { line: lineno, reason: alloc::format!("bad id {:?}", cols[1]) })?;
            let kind = SymbolKind::parse(cols[2]).ok_or_else(|| SymbolError::BadLine {
                line: lineno,
                reason: alloc::format!("bad kind {:?}", cols[2]),
            })?;
            let sym = cols[0].to_string();
            if seen.contains_key(&(sym.clone(), kind)) || rows.contains_key(&id) {
                return Err(SymbolError::DuplicateSymbol { symbol: sym, id });
            }
            seen.insert((sym.clone(), kind), id);
            rows.insert(id, (sym, kind));
        }
        for (expect, id) in rows.keys().enumerate() {
            if *id != expect as Label {
                return Err(SymbolError::NonDenseIds { missing: expect as Label });
            }
        }
        Self::from_entries(rows.into_values())
    }

    /// Canonical `symbol<TAB>id<TAB>kind` serialization in id order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (id, (sym, kind)) in self.inner.symbols.iter().enumerate() {
            out.push_str(sym);
            out.push('\t');
            out.push_str(&id.to_string());
            out.push('\t');
            out.push_str(kind.as_str());
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.inner.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.symbols.is_empty()
    }

    /// Lowest id spelled `symbol`, whatever its kind.
    pub fn id(&self, symbol: &str) -> Option<Label> {
        let lo = (String::from(symbol), SymbolKind::Phoneme);
        let hi = (String::from(symbol), SymbolKind::Word);
        self.inner.index.range(lo..=hi).map(|(_, &id)| id).min()
    }

    pub fn symbol(&self, id: Label) -> Option<&str> {
        self.inner.symbols.get(id as usize).map(|e| e.0.as_str())
    }

    pub fn kind(&self, id: Label) -> Option<SymbolKind> {
        self.inner.symbols.get(id as usize).map(|e| e.1)
    }

    /// Looks up `symbol` and requires it to carry `kind`.
    pub fn id_of_kind(&self, symbol: &str, kind: SymbolKind) -> Option<Label> {
        self.inner.index.get(&(String::from(symbol), kind)).copied()
    }

    pub fn eow(&self) -> Label {
        self.id(EOW_SYMBOL).expect("validated at construction")
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, &str, SymbolKind)> + '_ {
        self.inner.symbols.iter().enumerate().map(|(i, (s, k))| (i as Label, s.as_str(), *k))
    }

    pub fn ids_of_kind(&self, kind: SymbolKind) -> impl Iterator<Item = Label> + '_ {
        self.iter().filter(move |e| e.2 == kind).map(|e| e.0)
    }

    /// Kinds under which `symbol` is spelled.
    pub fn kinds_of(&self, symbol: &str) -> impl Iterator<Item = SymbolKind> + '_ {
        let lo = (String::from(symbol), SymbolKind::Phoneme);
        let hi = (String::from(symbol), SymbolKind::Word);
        self.inner.index.range(lo..=hi).map(|((_, k), _)| *k)
    }

    /// Spelling that names `id` unambiguously: the bare symbol, or
    /// `kind:symbol` when the spelling is shared by several kinds.
    pub fn qualified_name(&self, id: Label) -> Option<String> {
        let (sym, kind) = self.inner.symbols.get(id as usize)?;
        if self.kinds_of(sym).count() > 1 {
            Some(alloc::format!("{}:{sym}", kind.as_str()))
        } else {
            Some(sym.clone())
        }
    }

    /// Inverse of [`qualified_name`](Self::qualified_name). A bare spelling
    /// shared by several kinds does not resolve.
    pub fn resolve_name(&self, name: &str) -> Option<Label> {
        if let Some((k, sym)) = name.split_once(':') {
            if let Some(kind) = SymbolKind::parse(k) {
                if let Some(id) = self.id_of_kind(sym, kind) {
                    return Some(id);
                }
            }
        }
        let mut kinds = self.kinds_of(name);
        match (kinds.next(), kinds.next()) {
            (Some(k), None) => self.id_of_kind(name, k),
            _ => None,
        }
    }

    /// Renders ids as space-joined symbols; unknown ids print as `#id`.
    pub fn render(&self, ids: &[Label]) -> String {
        let mut out = String::new();
        for (i, &id) in ids.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            match self.symbol(id) {
                Some(s) => out.push_str(s),
                None => {
                    out.push('#');
                    out.push_str(&id.to_string());
                }
            }
        }
        out
    }
}
