//! Morphological transduction toolkit.
//!
//! Two learners for stem-to-inflection mappings share this crate:
//!
//! * [`rm_model`]: the 1986 pattern associator over Wickelfeature vectors,
//!   trained with per-feature perceptron updates and decoded against a
//!   candidate set.
//! * [`ed_model`]: a recurrent encoder-decoder with additive attention,
//!   trained by maximum likelihood on top of the reverse-mode autodiff in
//!   [`numerics`].
//!
//! [`dataset`] handles corpora (splitting, multi-task tagging, a synthetic
//! English-like generator) and [`experiments`] holds the evaluation suite.
//!
//! The crate is `no_std` + `alloc`; file formats, checkpoints and the CLI
//! live in the `morphlab` companion crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod dataset;
pub mod ed_model;
pub mod experiments;
pub mod inflection;
pub mod numerics;
pub mod phonology;
pub mod rm_model;

/// Derives an independent sub-seed from a run seed and a fixed label.
///
/// Every random stream in a run (splitting, synthesis, initialization,
/// shuffling, dropout) is keyed this way off the single user seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, then one splitmix64 round over the mix.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
