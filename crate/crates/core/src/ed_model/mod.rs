//! Attention encoder-decoder over phoneme sequences.
//!
//! The encoder is a stack of bidirectional LSTMs over embedded input
//! symbols; each input position yields a context vector `h_k`, the
//! concatenation of the top forward and backward states. The decoder is a
//! stack of unidirectional LSTMs. At step `i` it scores every `h_k` with an
//! additive attention network conditioned on its previous top state
//! `s_{i-1}`, feeds `[emb(y_{i-1}); c_i]` through the stack to get `s_i`,
//! and predicts `y_i` from `g(y_{i-1}, s_i, c_i)`, a one-hidden-layer tanh
//! network followed by a softmax over EOS and the phonemes.
//!
//! All forward computation runs on a [`Tape`](crate::numerics::Tape), so
//! training, scoring and decoding share one implementation.

mod decode;
mod model;
mod train;
mod vocab;

pub use decode::{Decoded, Hypothesis};
pub use model::{EdConfig, EdModel};
pub use train::{EpochStats, Example, TrainConfig};
pub use vocab::{Vocabulary, BOS, EOS, PAD};

use alloc::string::String;

use crate::numerics::NumericsError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EdError {
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("invalid tag {0:?}: empty, reserved, or already a symbol")]
    BadTag(String),
    #[error("input sequence is empty")]
    EmptyInput,
    #[error("attention over an empty context")]
    EmptyContext,
    #[error("training set is empty")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    BadConfig(&'static str),
    #[error("parameter {name:?} is missing or has shape {found:?}, expected {expected:?}")]
    BadParameter {
        name: String,
        expected: alloc::vec::Vec<usize>,
        found: alloc::vec::Vec<usize>,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
