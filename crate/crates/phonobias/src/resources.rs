//! The bundle of tables a Directions experiment runs against.

use std::path::{Path, PathBuf};

use phonobias_core::lexicon::{Lexicon, PhonemeMap};
use phonobias_core::symbols::SymbolTable;
use phonobias_core::tokenize::WordpieceInventory;
use phonobias_core::units::UnitContext;

use crate::error::Result;
use crate::io;

pub const EN_SYMBOLS: &str = "en_symbols.tsv";
pub const FR_SYMBOLS: &str = "fr_symbols.tsv";
pub const FR_EN_MAP: &str = "fr_en_map.tsv";
pub const WORDPIECES: &str = "wordpieces.txt";
pub const EN_LEXICON: &str = "en_lexicon.tsv";
pub const POOL: &str = "pool.tsv";

#[derive(Debug, Clone)]
pub struct Resources {
    /// Decoder alphabet: English phonemes, wordpieces, graphemes, `<eow>`.
    pub symbols: SymbolTable,
    /// Source-language phonemes of the foreign words.
    pub source: SymbolTable,
    pub map: PhonemeMap,
    pub wordpieces: WordpieceInventory,
    pub lexicon: Lexicon,
}

impl Resources {
    pub fn load(dir: &Path) -> Result<Self> {
        let symbols = io::load_symbol_table(&dir.join(EN_SYMBOLS))?;
        let source = io::load_symbol_table(&dir.join(FR_SYMBOLS))?;
        let map = io::load_phoneme_map(&dir.join(FR_EN_MAP), &symbols)?;
        let wordpieces = io::load_wordpieces(&dir.join(WORDPIECES))?;
        let lexicon = io::load_lexicon(&dir.join(EN_LEXICON), &symbols)?;
        Ok(Resources { symbols, source, map, wordpieces, lexicon })
    }

    /// The `data/` directory shipped with the repository.
    pub fn bundled_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
    }

    pub fn bundled() -> Result<Self> {
        Self::load(&Self::bundled_dir())
    }

    /// Expansion context for foreign words whose source pronunciations live
    /// in `foreign`.
    pub fn context<'a>(&'a self, foreign: &'a Lexicon) -> UnitContext<'a> {
        UnitContext::new(&self.symbols).with_lexicon(foreign).with_map(&self.map).with_wordpieces(&self.wordpieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use phonobias_core::symbols::SymbolKind;

    #[test]
    fn bundled_tables_load() {
        let r = Resources::bundled().unwrap();
        assert_eq!(r.symbols.ids_of_kind(SymbolKind::Phoneme).count(), 41);
        let t = r.symbols.id_of_kind("t", SymbolKind::Phoneme).unwrap();
        assert_ne!(Some(t), r.symbols.id_of_kind("t", SymbolKind::Wordpiece));
        assert_eq!(r.map.map_phonemes(&["k", "R", "e", "t", "E", "j"]).unwrap().len(), 6);
        let (trimmed, report) = r.lexicon.trim();
        assert!(!trimmed.contains("flower") && !trimmed.contains("flour") && !trimmed.contains("either"));
        assert_eq!(report.removed(), 3);
    }
}
