//! Inflection corpora: the tab-separated row format, lemma-level splits,
//! task encodings for the encoder-decoder, and a synthetic English-like
//! generator.

mod split;
mod synth;
mod tsv;

pub use split::{split, SplitCorpus};
pub use synth::{synth_corpus, IrregularClass, SynthConfig};
pub use tsv::{parse_tsv, write_tsv};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::ed_model::{EdError, Example, Vocabulary};
use crate::phonology::{PhonemeString, PhonologyError};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("row {row}: {reason}")]
    Parse { row: usize, reason: String },
    #[error("row {row}: {source}")]
    UnknownSymbol { row: usize, source: PhonologyError },
    #[error("split ratios must be non-negative and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),
    #[error("cannot place {irregular} irregular verbs among {types} types")]
    TooManyIrregulars { irregular: usize, types: usize },
    #[error("inventory lacks a symbol the generator needs: {0}")]
    Inventory(PhonologyError),
}

/// The four English verb mappings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Past,
    Gerund,
    Participle,
    ThirdSingular,
}

impl Tag {
    pub const ALL: [Tag; 4] = [Tag::Past, Tag::Gerund, Tag::Participle, Tag::ThirdSingular];

    /// Column spelling in corpus files.
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Past => "PST",
            Tag::Gerund => "GER",
            Tag::Participle => "PTCP",
            Tag::ThirdSingular => "3SG",
        }
    }

    /// Input symbol in multi-task mode.
    pub fn symbol(self) -> &'static str {
        match self {
            Tag::Past => "<PST>",
            Tag::Gerund => "<GER>",
            Tag::Participle => "<PTCP>",
            Tag::ThirdSingular => "<3SG>",
        }
    }

    pub fn symbols() -> [&'static str; 4] {
        Self::ALL.map(Tag::symbol)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| alloc::format!("unknown tag {s:?}, expected PST, GER, PTCP or 3SG"))
    }
}

/// One lemma/form row.
#[derive(Clone, Debug, PartialEq)]
pub struct InflectionPair {
    pub lemma: PhonemeString,
    pub form: PhonemeString,
    pub tag: Tag,
    pub regular: bool,
    /// Token frequency, kept for round-tripping only; training weights
    /// every type equally.
    pub frequency: Option<f64>,
}

impl InflectionPair {
    pub fn new(lemma: PhonemeString, form: PhonemeString, tag: Tag, regular: bool) -> Self {
        Self {
            lemma,
            form,
            tag,
            regular,
            frequency: None,
        }
    }
}

/// Whether the encoder sees a tag symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskMode {
    /// Past tense only, lemma as input.
    Single,
    /// All tags, lemma followed by its tag symbol.
    Multi,
}

/// Vocabulary covering every tag, usable in either mode.
pub fn vocabulary(inv: &crate::phonology::PhonemeInventory) -> Result<Vocabulary, EdError> {
    Vocabulary::new(inv, &Tag::symbols())
}

/// Encoder input for `pair`: the lemma, followed by its tag symbol in
/// multi-task mode.
pub fn tagged_input(pair: &InflectionPair, vocab: &Vocabulary, mode: TaskMode) -> Result<Vec<usize>, EdError> {
    match mode {
        TaskMode::Single => vocab.encode_input::<&str>(pair.lemma.phonemes(), &[]),
        TaskMode::Multi => vocab.encode_input(pair.lemma.phonemes(), &[pair.tag.symbol()]),
    }
}

/// Training examples for `mode`: single-task keeps only past-tense rows.
pub fn examples(pairs: &[InflectionPair], vocab: &Vocabulary, mode: TaskMode) -> Result<Vec<Example>, EdError> {
    pairs
        .iter()
        .filter(|p| mode == TaskMode::Multi || p.tag == Tag::Past)
        .map(|p| {
            Ok(Example {
                input: tagged_input(p, vocab, mode)?,
                output: p.form.phonemes().to_vec(),
            })
        })
        .collect()
}
