//! Dense tensors, reverse-mode autodiff, the Adadelta optimizer and seeded
//! randomness shared by both learners.

mod adadelta;
pub mod kernels;
mod tape;
mod tensor;

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng as _, SeedableRng};

pub use adadelta::{adadelta_step, Adadelta, AdadeltaConfig, AdadeltaState};
pub use kernels::{log_sum_exp, sigmoid};
pub use tape::{Gradients, ParamGrads, ParamId, ParamSet, Tape, Var};
pub use tensor::Tensor;

/// The crate's PRNG. Always constructed from an explicit seed.
pub type Rng = rand_xoshiro::Xoshiro256PlusPlus;

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Uniform `(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform(rows: usize, cols: usize, rng: &mut Rng) -> Tensor {
    let a = libm::sqrt(6.0 / (rows + cols) as f64);
    Tensor::from_fn(&[rows, cols], |_| rng.gen_range(-a..a))
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },
    #[error("expected a scalar, got shape {0:?}")]
    NotScalar(Vec<usize>),
    #[error("shape {shape:?} does not hold {len} values")]
    DataLength { shape: Vec<usize>, len: usize },
    #[error("only rank 0-2 tensors are supported, got {0:?}")]
    Rank(Vec<usize>),
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
    #[error("{0} needs at least one input")]
    Empty(&'static str),
    #[error("duplicate parameter name {0:?}")]
    DuplicateParam(String),
}
