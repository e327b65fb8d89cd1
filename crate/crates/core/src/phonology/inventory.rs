use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::PhonologyError;

/// The word-edge symbol padding every string on both sides.
pub const BOUNDARY: &str = "#";

/// Index of a symbol in a [`PhonemeInventory`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phoneme(pub u16);

impl Phoneme {
    pub fn index(self) -> usize {
        usize::from(self.0)
    }
}

/// A non-empty sequence of phonemes, implicitly bracketed by [`BOUNDARY`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhonemeString(Vec<Phoneme>);

impl PhonemeString {
    pub fn new(phonemes: Vec<Phoneme>) -> Result<Self, PhonologyError> {
        if phonemes.is_empty() {
            return Err(PhonologyError::EmptyString);
        }
        Ok(Self(phonemes))
    }

    pub fn phonemes(&self) -> &[Phoneme] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Phoneme {
        self.0[self.0.len() - 1]
    }

    /// Returns `self` followed by `suffix`.
    pub fn concat(&self, suffix: &[Phoneme]) -> Self {
        let mut out = self.0.clone();
        out.extend_from_slice(suffix);
        Self(out)
    }

    pub fn into_vec(self) -> Vec<Phoneme> {
        self.0
    }
}

impl AsRef<[Phoneme]> for PhonemeString {
    fn as_ref(&self) -> &[Phoneme] {
        &self.0
    }
}

/// An ordered set of (possibly multi-character) IPA phoneme symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhonemeInventory {
    symbols: Vec<String>,
    index: BTreeMap<String, Phoneme>,
    max_chars: usize,
}

/// Symbols of the bundled English inventory, in index order.
pub const ENGLISH_SYMBOLS: &[&str] = &[
    // consonants
    "p", "b", "t", "d", "k", "g", "f", "v", "θ", "ð", "s", "z", "ʃ", "ʒ", "h", "tʃ", "dʒ", "m",
    "n", "ŋ", "l", "r", "ɹ", "w", "j", //
    // vowels and diphthongs
    "i", "iː", "ɪ", "e", "eɪ", "ɛ", "æ", "a", "aɪ", "aʊ", "ɑ", "ɑː", "ɒ", "ɔ", "ɔː", "ɔɪ", "o",
    "oʊ", "ʊ", "u", "uː", "ʌ", "ə", "ɜː", "ɝ", "ɚ",
];

impl PhonemeInventory {
    pub fn new<I, S>(symbols: I) -> Result<Self, PhonologyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Vec::new();
        let mut index = BTreeMap::new();
        let mut max_chars = 0;
        for sym in symbols {
            let sym: String = sym.into();
            if sym.is_empty() || sym.chars().any(char::is_whitespace) {
                return Err(PhonologyError::EmptySymbol);
            }
            if sym == BOUNDARY {
                return Err(PhonologyError::BoundaryInInventory);
            }
            if out.len() >= usize::from(u16::MAX) {
                return Err(PhonologyError::InventoryTooLarge);
            }
            let id = Phoneme(out.len() as u16);
            if index.insert(sym.clone(), id).is_some() {
                return Err(PhonologyError::DuplicateSymbol(sym));
            }
            max_chars = max_chars.max(sym.chars().count());
            out.push(sym);
        }
        Ok(Self {
            symbols: out,
            index,
            max_chars,
        })
    }

    /// The bundled English IPA inventory.
    pub fn english() -> Self {
        Self::new(ENGLISH_SYMBOLS.iter().copied()).expect("bundled inventory is valid")
    }

    /// Parses the one-symbol-per-line inventory format. Blank lines and
    /// lines starting with `//` are skipped.
    pub fn parse(text: &str) -> Result<Self, PhonologyError> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with("//")),
        )
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, p: Phoneme) -> &str {
        &self.symbols[p.index()]
    }

    pub fn get(&self, symbol: &str) -> Option<Phoneme> {
        self.index.get(symbol).copied()
    }

    /// Like [`get`](Self::get) but reports a missing symbol as an error.
    pub fn require(&self, symbol: &str) -> Result<Phoneme, PhonologyError> {
        self.get(symbol).ok_or_else(|| PhonologyError::UnknownSymbol {
            symbol: symbol.to_string(),
            offset: 0,
        })
    }

    /// Longest-match, left-to-right segmentation of `raw` into inventory
    /// symbols. Whitespace between symbols is ignored; offsets are counted in
    /// characters.
    pub fn tokenize(&self, raw: &str) -> Result<PhonemeString, PhonologyError> {
        let phonemes = self.segment(raw, true)?;
        PhonemeString::new(phonemes)
    }

    /// Tokenizes, silently dropping characters that start no inventory
    /// symbol.
    pub fn tokenize_lossy(&self, raw: &str) -> Result<PhonemeString, PhonologyError> {
        let phonemes = self.segment(raw, false)?;
        PhonemeString::new(phonemes)
    }

    fn segment(&self, raw: &str, strict: bool) -> Result<Vec<Phoneme>, PhonologyError> {
        let chars: Vec<(usize, char)> = raw.char_indices().collect();
        let mut out = Vec::with_capacity(chars.len());
        let mut i = 0;
        while i < chars.len() {
            if chars[i].1.is_whitespace() {
                i += 1;
                continue;
            }
            let start = chars[i].0;
            let mut matched = None;
            let longest = self.max_chars.min(chars.len() - i);
            for n in (1..=longest).rev() {
                let end = chars.get(i + n).map_or(raw.len(), |c| c.0);
                if let Some(&p) = self.index.get(&raw[start..end]) {
                    matched = Some((p, n));
                    break;
                }
            }
            match matched {
                Some((p, n)) => {
                    out.push(p);
                    i += n;
                }
                None if strict => {
                    return Err(PhonologyError::UnknownSymbol {
                        symbol: chars[i].1.to_string(),
                        offset: i,
                    })
                }
                None => i += 1,
            }
        }
        Ok(out)
    }

    /// Renders phonemes back to IPA text with no separators.
    pub fn render(&self, phonemes: &[Phoneme]) -> String {
        let mut s = String::new();
        for &p in phonemes {
            s.push_str(self.symbol(p));
        }
        s
    }

    /// Renders phonemes separated by single spaces, which always re-tokenizes
    /// to the same sequence.
    pub fn render_spaced(&self, phonemes: &[Phoneme]) -> String {
        let mut s = String::new();
        for (i, &p) in phonemes.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(self.symbol(p));
        }
        s
    }

    /// Unspaced text when it re-tokenizes to `phonemes`, spaced text
    /// otherwise (`ɔ`+`ɪ` would read back as the diphthong `ɔɪ`).
    pub fn render_exact(&self, phonemes: &[Phoneme]) -> String {
        let plain = self.render(phonemes);
        if self.segment(&plain, true).is_ok_and(|back| back == phonemes) {
            plain
        } else {
            self.render_spaced(phonemes)
        }
    }

    /// Wraps [`render_exact`](Self::render_exact) for `Display` contexts.
    pub fn display<'a>(&'a self, phonemes: &'a [Phoneme]) -> impl fmt::Display + 'a {
        Rendered {
            inv: self,
            phonemes,
        }
    }
}

struct Rendered<'a> {
    inv: &'a PhonemeInventory,
    phonemes: &'a [Phoneme],
}

impl fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.inv.render_exact(self.phonemes))
    }
}
