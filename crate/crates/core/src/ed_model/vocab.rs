use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::EdError;
use crate::phonology::{Phoneme, PhonemeInventory};

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;

const SPECIALS: [&str; 3] = ["<PAD>", "<BOS>", "<EOS>"];

/// Input and output symbols of the encoder-decoder.
///
/// Layout: `PAD, BOS, EOS`, then the transduction tags, then one symbol per
/// phoneme in inventory order. The decoder only ever emits EOS or a
/// phoneme, so its output layer is indexed separately: output `0` is EOS and
/// output `1 + p` is phoneme `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    phonemes: Vec<String>,
    tags: Vec<String>,
}

impl Vocabulary {
    /// Tags are stored as given; by convention they look like `<PST>`.
    pub fn new<S: AsRef<str>>(inv: &PhonemeInventory, tags: &[S]) -> Result<Self, EdError> {
        Self::from_symbols(inv.symbols().to_vec(), tags.iter().map(|t| t.as_ref().to_string()).collect())
    }

    pub fn from_symbols(phonemes: Vec<String>, tags: Vec<String>) -> Result<Self, EdError> {
        for (i, tag) in tags.iter().enumerate() {
            if tag.is_empty()
                || SPECIALS.contains(&tag.as_str())
                || phonemes.contains(tag)
                || tags[..i].contains(tag)
            {
                return Err(EdError::BadTag(tag.clone()));
            }
        }
        Ok(Self { phonemes, tags })
    }

    pub fn len(&self) -> usize {
        SPECIALS.len() + self.tags.len() + self.phonemes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn phoneme_symbols(&self) -> &[String] {
        &self.phonemes
    }

    pub fn phoneme_count(&self) -> usize {
        self.phonemes.len()
    }

    /// Size of the decoder's output layer: EOS plus every phoneme.
    pub fn output_len(&self) -> usize {
        1 + self.phonemes.len()
    }

    pub fn tag(&self, name: &str) -> Result<usize, EdError> {
        self.tags
            .iter()
            .position(|t| t == name)
            .map(|i| SPECIALS.len() + i)
            .ok_or_else(|| EdError::UnknownSymbol(name.to_string()))
    }

    pub fn phoneme(&self, p: Phoneme) -> Result<usize, EdError> {
        if p.index() >= self.phonemes.len() {
            return Err(EdError::UnknownSymbol(format!("phoneme #{}", p.index())));
        }
        Ok(SPECIALS.len() + self.tags.len() + p.index())
    }

    /// Display name of any symbol.
    pub fn name(&self, symbol: usize) -> Option<&str> {
        let t = SPECIALS.len();
        let p = t + self.tags.len();
        if symbol < t {
            Some(SPECIALS[symbol])
        } else if symbol < p {
            Some(&self.tags[symbol - t])
        } else {
            self.phonemes.get(symbol - p).map(String::as_str)
        }
    }

    /// The input sequence `stem ++ tags`.
    pub fn encode_input<S: AsRef<str>>(&self, stem: &[Phoneme], tags: &[S]) -> Result<Vec<usize>, EdError> {
        let mut out = Vec::with_capacity(tags.len() + stem.len());
        for &p in stem {
            out.push(self.phoneme(p)?);
        }
        for t in tags {
            out.push(self.tag(t.as_ref())?);
        }
        Ok(out)
    }

    /// Output-layer index of a phoneme.
    pub fn output_index(&self, p: Phoneme) -> Result<usize, EdError> {
        if p.index() >= self.phonemes.len() {
            return Err(EdError::UnknownSymbol(format!("phoneme #{}", p.index())));
        }
        Ok(1 + p.index())
    }

    /// Full-vocabulary symbol for an output-layer index.
    pub fn output_symbol(&self, out: usize) -> usize {
        if out == 0 {
            EOS
        } else {
            SPECIALS.len() + self.tags.len() + out - 1
        }
    }

    /// Phoneme for an output-layer index, `None` for EOS.
    pub fn output_phoneme(&self, out: usize) -> Option<Phoneme> {
        (out > 0).then(|| Phoneme((out - 1) as u16))
    }
}
