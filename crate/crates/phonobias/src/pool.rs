//! Foreign place-name pools: `word<TAB>source pronunciation`.

use std::collections::BTreeSet;

use phonobias_core::lexicon::{nfc, Lexicon, PhonemeMap};
use phonobias_core::symbols::SymbolTable;
use phonobias_core::wfst::Label;
use rand::seq::IndexedRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolEntry {
    pub word: String,
    pub pronunciation: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pool {
    pub entries: Vec<PoolEntry>,
}

impl Pool {
    pub fn parse_tsv(text: &str) -> Result<Self, String> {
        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (word, pron) =
                line.split_once('\t').ok_or_else(|| format!("line {}: expected word<TAB>pronunciation", n + 1))?;
            let word = nfc(word.trim());
            let pronunciation: Vec<String> = pron.split_whitespace().map(str::to_string).collect();
            if word.is_empty() || pronunciation.is_empty() {
                return Err(format!("line {}: empty word or pronunciation", n + 1));
            }
            if !seen.insert(word.clone()) {
                return Err(format!("line {}: duplicate word {word:?}", n + 1));
            }
            entries.push(PoolEntry { word, pronunciation });
        }
        Ok(Pool { entries })
    }

    pub fn to_tsv(&self) -> String {
        self.entries.iter().map(|e| format!("{}\t{}\n", e.word, e.pronunciation.join(" "))).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.word.as_str())
    }

    /// Source-language lexicon over `source`, frequency 1 per word.
    pub fn lexicon(&self, source: &SymbolTable) -> Result<Lexicon, String> {
        let mut lex = Lexicon::new(source.clone());
        for e in &self.entries {
            let syms: Vec<&str> = e.pronunciation.iter().map(String::as_str).collect();
            lex.push_symbols(&e.word, 1, &syms).map_err(|err| format!("{}: {err}", e.word))?;
        }
        Ok(lex)
    }
}

/// Hand-picked French place names in X-SAMPA.
const CURATED: &[(&str, &str)] = &[
    ("créteil", "k R e t E j"),
    ("paris", "p a R i"),
    ("lyon", "l j o~"),
    ("marseille", "m a R s E j"),
    ("toulouse", "t u l u z"),
    ("nice", "n i s"),
    ("nantes", "n a~ t"),
    ("strasbourg", "s t R a s b u R"),
    ("montpellier", "m o~ p E l j e"),
    ("bordeaux", "b O R d o"),
    ("lille", "l i l"),
    ("rennes", "R E n"),
    ("reims", "R e~ s"),
    ("toulon", "t u l o~"),
    ("grenoble", "g R @ n O b l"),
    ("dijon", "d i Z o~"),
    ("angers", "a~ Z e"),
    ("nîmes", "n i m"),
    ("villeurbanne", "v i l 9 R b a n"),
    ("clermont-ferrand", "k l E R m o~ f E R a~"),
    ("lens", "l a~ s"),
    ("saint-étienne", "s e~ t e t j E n"),
    ("brest", "b R E s t"),
    ("limoges", "l i m O Z"),
    ("amiens", "a m j e~"),
    ("perpignan", "p E R p i J a~"),
    ("metz", "m E s"),
    ("besançon", "b @ z a~ s o~"),
    ("orléans", "O R l e a~"),
    ("rouen", "R w a~"),
    ("mulhouse", "m y l u z"),
    ("caen", "k a~"),
    ("nancy", "n a~ s i"),
    ("argenteuil", "a R Z a~ t 9 j"),
    ("montreuil", "m o~ t R 9 j"),
    ("roubaix", "R u b E"),
    ("tourcoing", "t u R k w e~"),
    ("avignon", "a v i J o~"),
    ("versailles", "v E R s a j"),
    ("poitiers", "p w a t j e"),
    ("pau", "p o"),
    ("colmar", "k O l m a R"),
    ("chartres", "S a R t R"),
    ("annecy", "a n s i"),
    ("vincennes", "v e~ s E n"),
    ("champs-élysées", "S a~ z e l i z e"),
    ("montmartre", "m o~ m a R t R"),
    ("beauvais", "b o v E"),
    ("calais", "k a l E"),
    ("cannes", "k a n"),
    ("antibes", "a~ t i b"),
    ("arles", "a R l"),
    ("bayonne", "b a j O n"),
    ("biarritz", "b j a R i t s"),
    ("chamonix", "S a m O n i"),
    ("deauville", "d o v i l"),
    ("fontainebleau", "f o~ t E n b l o"),
    ("giverny", "Z i v E R n i"),
    ("lourdes", "l u R d"),
    ("honfleur", "o~ f l 9 R"),
    ("saint-malo", "s e~ m a l o"),
    ("vichy", "v i S i"),
    ("sète", "s E t"),
    ("troyes", "t R w a"),
];

/// Onset spelling before back vowels, before front vowels, and pronunciation.
const ONSETS: &[(&str, &str, &str)] = &[
    ("b", "b", "b"),
    ("d", "d", "d"),
    ("f", "f", "f"),
    ("l", "l", "l"),
    ("m", "m", "m"),
    ("n", "n", "n"),
    ("p", "p", "p"),
    ("r", "r", "R"),
    ("t", "t", "t"),
    ("v", "v", "v"),
    ("ch", "ch", "S"),
    ("j", "j", "Z"),
    ("c", "qu", "k"),
    ("g", "gu", "g"),
    ("s", "s", "s"),
];

/// Vowel spelling, pronunciation, front (softens c/g), nasal (word-final only).
const VOWELS: &[(&str, &str, bool, bool)] = &[
    ("a", "a", false, false),
    ("o", "o", false, false),
    ("ou", "u", false, false),
    ("i", "i", true, false),
    ("é", "e", true, false),
    ("u", "y", false, false),
    ("eu", "2", true, false),
    ("an", "a~", false, true),
    ("on", "o~", false, true),
    ("in", "e~", true, true),
];

const SUFFIXES: &[(&str, &str)] = &[
    ("ville", "v i l"),
    ("court", "k u R"),
    ("mont", "m o~"),
    ("bourg", "b u R"),
    ("lac", "l a k"),
    ("val", "v a l"),
    ("font", "f o~"),
];

fn pseudo_name(rng: &mut ChaCha8Rng) -> (String, Vec<String>) {
    let syllables = rng.random_range(2..=3);
    let suffix = rng.random_bool(0.35);
    let (mut word, mut pron) = (String::new(), Vec::new());
    for i in 0..syllables {
        let last = i + 1 == syllables && !suffix;
        let vowels: Vec<_> = VOWELS.iter().filter(|v| last || !v.3).collect();
        let &&(vs, vp, front, _) = vowels.choose(rng).expect("vowel table is non-empty");
        let &(back, soft, op) = ONSETS.choose(rng).expect("onset table is non-empty");
        let onset = match (back, i > 0) {
            ("s", true) => "ss",
            _ if front => soft,
            _ => back,
        };
        word.push_str(onset);
        word.push_str(vs);
        pron.push(op.to_string());
        pron.extend(vp.split(' ').map(str::to_string));
    }
    if suffix {
        let &(s, p) = SUFFIXES.choose(rng).expect("suffix table is non-empty");
        word.push_str(s);
        pron.extend(p.split(' ').map(str::to_string));
    }
    (word, pron)
}

fn prefix_related(a: &[Label], b: &[Label]) -> bool {
    let n = a.len().min(b.len());
    a[..n] == b[..n]
}

/// Curated names followed by generated pseudo-names up to `n` entries.
///
/// Entries whose mapped pronunciation equals, extends or is extended by an
/// earlier entry's are skipped, so the decoding tree never holds a word
/// ending inside another.
pub fn generate_pool(n: usize, seed: u64, map: &PhonemeMap) -> Pool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries: Vec<PoolEntry> = Vec::new();
    let mut prons: Vec<Vec<Label>> = Vec::new();
    let mut spellings = BTreeSet::new();
    let mut offer = |word: String, pronunciation: Vec<String>| {
        if entries.len() >= n || spellings.contains(&word) {
            return;
        }
        let Ok(mapped) = map.map_phonemes(&pronunciation) else { return };
        if prons.iter().any(|p| prefix_related(p, &mapped)) {
            return;
        }
        spellings.insert(word.clone());
        prons.push(mapped);
        entries.push(PoolEntry { word, pronunciation });
    };
    for &(w, p) in CURATED {
        offer(nfc(w), p.split(' ').map(str::to_string).collect());
    }
    let mut attempts = 0usize;
    while attempts < 200 * n.max(1) {
        attempts += 1;
        let (w, p) = pseudo_name(&mut rng);
        offer(w, p);
    }
    Pool { entries }
}
