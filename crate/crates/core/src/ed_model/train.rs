use alloc::vec::Vec;
use core::ops::ControlFlow;

use rand::seq::SliceRandom;

use super::model::{Dropout, EdModel};
use super::EdError;
use crate::numerics::{rng, Adadelta, AdadeltaConfig, ParamGrads};
use crate::phonology::Phoneme;

/// One input/output pair in model symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    /// Full-vocabulary input symbols, tags included.
    pub input: Vec<usize>,
    /// Target phonemes; EOS is implicit.
    pub output: Vec<Phoneme>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub optimizer: AdadeltaConfig,
    /// Seeds shuffling and dropout.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch: 20,
            optimizer: AdadeltaConfig::default(),
            seed: 0,
        }
    }
}

/// Summary of one training epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Mean per-example negative log-likelihood seen during the epoch, with
    /// dropout active.
    pub mean_loss: f64,
}

impl EdModel {
    /// Minibatch Adadelta on the mean negative log-likelihood.
    ///
    /// `observer` runs after every epoch and may stop training early by
    /// returning [`ControlFlow::Break`].
    pub fn train(
        &mut self,
        data: &[Example],
        cfg: &TrainConfig,
        mut observer: impl FnMut(&EdModel, &EpochStats) -> ControlFlow<()>,
    ) -> Result<Vec<EpochStats>, EdError> {
        if data.is_empty() {
            return Err(EdError::EmptyDataset);
        }
        if cfg.batch == 0 {
            return Err(EdError::BadConfig("batch size must be at least 1"));
        }
        let mut r = rng(cfg.seed);
        let mut opt = Adadelta::new(self.params(), cfg.optimizer);
        let mut grads = ParamGrads::zeros_like(self.params());
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut history = Vec::with_capacity(cfg.epochs);
        let p = self.config().dropout;
        for epoch in 1..=cfg.epochs {
            order.shuffle(&mut r);
            let mut total = 0.0;
            for batch in order.chunks(cfg.batch) {
                grads.clear();
                let scale = 1.0 / batch.len() as f64;
                for &i in batch {
                    let ex = &data[i];
                    let mut d = Dropout { rng: &mut r, p };
                    total += self.nll_grad(&ex.input, &ex.output, Some(&mut d), &mut grads, scale)?;
                }
                opt.step(self.params_mut(), &grads)?;
            }
            let stats = EpochStats {
                epoch,
                mean_loss: total / data.len() as f64,
            };
            history.push(stats);
            if observer(self, &stats).is_break() {
                break;
            }
        }
        Ok(history)
    }

    /// Mean negative log-likelihood over `data`, dropout disabled.
    pub fn mean_nll(&self, data: &[Example]) -> Result<f64, EdError> {
        if data.is_empty() {
            return Err(EdError::EmptyDataset);
        }
        let mut total = 0.0;
        for ex in data {
            total -= self.sequence_log_prob(&ex.input, &ex.output)?;
        }
        Ok(total / data.len() as f64)
    }

    /// Fraction of `data` whose greedy decode equals the target exactly.
    pub fn greedy_accuracy(&self, data: &[Example], max_len: impl Fn(&Example) -> usize) -> Result<f64, EdError> {
        if data.is_empty() {
            return Err(EdError::EmptyDataset);
        }
        let mut hits = 0usize;
        for ex in data {
            let d = self.greedy(&ex.input, max_len(ex))?;
            if !d.truncated && d.output == ex.output {
                hits += 1;
            }
        }
        Ok(hits as f64 / data.len() as f64)
    }
}
