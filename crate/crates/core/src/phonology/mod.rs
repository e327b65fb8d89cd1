//! IPA tokenization, phonological feature tables, and the Wickelphone /
//! Wickelfeature string encoding.

mod alternation;
mod features;
mod inventory;
mod wickel;

use alloc::string::String;

pub use alternation::{rime, StemChange};
pub use features::{ActiveValue, FeatureTable, FeatureValue, Segment, EDGE_FEATURE, ENGLISH_FEATURES};
pub use inventory::{Phoneme, PhonemeInventory, PhonemeString, BOUNDARY, ENGLISH_SYMBOLS};
pub use wickel::{encode, encode_text, wickelfeatures, wickelphones, WickelfeatureVector, Wickelphone};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PhonologyError {
    #[error("unknown symbol {symbol:?} at offset {offset}")]
    UnknownSymbol { symbol: String, offset: usize },
    #[error("empty phoneme string")]
    EmptyString,
    #[error("inventory symbols must be non-empty and contain no whitespace")]
    EmptySymbol,
    #[error("duplicate inventory symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("the boundary symbol '#' cannot be an inventory phoneme")]
    BoundaryInInventory,
    #[error("inventory exceeds 65535 symbols")]
    InventoryTooLarge,
    #[error("feature row for {symbol:?} has {found} values, expected {expected}")]
    RowLength {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate feature row for {0:?}")]
    DuplicateRow(String),
    #[error("no feature row for phoneme {0:?}")]
    MissingRow(String),
}
