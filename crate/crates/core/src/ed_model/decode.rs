use alloc::vec::Vec;

use rand::Rng as _;

use super::model::{DecState, EdModel};
use super::vocab::BOS;
use super::EdError;
use crate::numerics::{Rng, Tape};
use crate::phonology::Phoneme;

/// A decoded output string.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    /// Emitted phonemes, without EOS.
    pub output: Vec<Phoneme>,
    /// Sum of per-step log-probabilities, including the EOS step when the
    /// output is complete.
    pub log_prob: f64,
    /// `true` when `max_len` steps ran out before EOS.
    pub truncated: bool,
}

/// A partial beam-search hypothesis.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    pub prefix: Vec<Phoneme>,
    pub log_prob: f64,
    state: DecState,
    prev: usize,
}

/// Index of the largest entry; ties go to the lowest index.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl EdModel {
    /// Picks the most likely symbol at every step. `max_len` bounds the
    /// number of steps, the EOS step included.
    pub fn greedy(&self, input: &[usize], max_len: usize) -> Result<Decoded, EdError> {
        self.walk(input, max_len, argmax)
    }

    /// Ancestral sampling from the model's output distribution.
    pub fn sample(&self, input: &[usize], rng: &mut Rng, max_len: usize) -> Result<Decoded, EdError> {
        self.walk(input, max_len, |lp| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (i, &l) in lp.iter().enumerate() {
                acc += libm::exp(l);
                if u < acc {
                    return i;
                }
            }
            // Rounding left a sliver of mass past the last symbol.
            lp.len() - 1
        })
    }

    fn walk(&self, input: &[usize], max_len: usize, mut choose: impl FnMut(&[f64]) -> usize) -> Result<Decoded, EdError> {
        let mut t = Tape::new(self.params());
        let enc = self.encode_on(&mut t, input, None)?;
        let mut state = enc.init.clone();
        let mut prev = BOS;
        let mut out = Decoded {
            output: Vec::new(),
            log_prob: 0.0,
            truncated: true,
        };
        for _ in 0..max_len {
            let (next, lp) = self.step_on(&mut t, &enc, &state, prev, None)?;
            let lp = t.value(lp);
            let y = choose(lp);
            out.log_prob += lp[y];
            match self.vocab().output_phoneme(y) {
                None => {
                    out.truncated = false;
                    break;
                }
                Some(p) => out.output.push(p),
            }
            state = next;
            prev = self.vocab().output_symbol(y);
        }
        Ok(out)
    }

    /// Beam search without length normalization, returning up to `k`
    /// complete outputs by descending log-probability.
    ///
    /// Each step expands every live hypothesis by every output symbol and
    /// ranks the expansions. Expansions ending in EOS among the top `k` are
    /// finished; the best `k` others stay live. Search stops once the best
    /// live score cannot beat the `k`-th finished one (scores only fall), or
    /// after `max_len` steps. If nothing finished, the live hypotheses are
    /// returned marked truncated. With `k = 1` this is exactly
    /// [`greedy`](Self::greedy).
    pub fn beam(&self, input: &[usize], k: usize, max_len: usize) -> Result<Vec<Decoded>, EdError> {
        if k == 0 {
            return Err(EdError::BadConfig("beam width must be at least 1"));
        }
        let mut t = Tape::new(self.params());
        let enc = self.encode_on(&mut t, input, None)?;
        let mut alive = alloc::vec![Hypothesis {
            prefix: Vec::new(),
            log_prob: 0.0,
            state: enc.init.clone(),
            prev: BOS,
        }];
        let mut finished: Vec<Decoded> = Vec::new();
        for _ in 0..max_len {
            let mut cands: Vec<(f64, usize, usize)> = Vec::new();
            let mut states = Vec::with_capacity(alive.len());
            for (h, hyp) in alive.iter().enumerate() {
                let (next, lp) = self.step_on(&mut t, &enc, &hyp.state, hyp.prev, None)?;
                for (y, &l) in t.value(lp).iter().enumerate() {
                    cands.push((hyp.log_prob + l, h, y));
                }
                states.push(next);
            }
            // Stable: equal scores keep hypothesis order, then symbol order.
            cands.sort_by(|a, b| b.0.total_cmp(&a.0));
            let mut next_alive = Vec::with_capacity(k);
            for (rank, &(score, h, y)) in cands.iter().enumerate() {
                match self.vocab().output_phoneme(y) {
                    None if rank < k => finished.push(Decoded {
                        output: alive[h].prefix.clone(),
                        log_prob: score,
                        truncated: false,
                    }),
                    None => {}
                    Some(p) if next_alive.len() < k => {
                        let mut prefix = alive[h].prefix.clone();
                        prefix.push(p);
                        next_alive.push(Hypothesis {
                            prefix,
                            log_prob: score,
                            state: states[h].clone(),
                            prev: self.vocab().output_symbol(y),
                        });
                    }
                    Some(_) => {}
                }
                if rank + 1 >= k && next_alive.len() >= k {
                    break;
                }
            }
            alive = next_alive;
            finished.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob));
            finished.truncate(k);
            let best_alive = alive.first().map_or(f64::NEG_INFINITY, |h| h.log_prob);
            if alive.is_empty() || (finished.len() >= k && best_alive <= finished[k - 1].log_prob) {
                break;
            }
        }
        if finished.is_empty() {
            return Ok(alive
                .into_iter()
                .map(|h| Decoded {
                    output: h.prefix,
                    log_prob: h.log_prob,
                    truncated: true,
                })
                .collect());
        }
        Ok(finished)
    }
}
