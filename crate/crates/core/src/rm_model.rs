//! The pattern associator: a single linear layer from input Wickelfeatures
//! to output Wickelfeatures, one perceptron per output feature.
//!
//! The training objective for a pair `(x, y)` of encoded strings is the L1
//! norm of the pointwise hinge `max(0, -y ⊙ (W x + b))`. Decoding
//! thresholds `W x + b` and picks the candidate string whose own encoding is
//! closest in Hamming distance.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::inflection::EnglishRules;
use crate::numerics::{Rng, Tensor};
use crate::phonology::{self, rime, FeatureTable, PhonemeString, StemChange, WickelfeatureVector};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RmError {
    #[error("vector of length {found} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("learning rate must be positive and finite, got {0}")]
    BadLearningRate(f64),
}

/// Learning-rate schedule: `lr / (1 + decay * t)` after `t` updates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RmConfig {
    pub lr: f64,
    pub decay: f64,
}

impl Default for RmConfig {
    fn default() -> Self {
        Self { lr: 1.0, decay: 0.0 }
    }
}

/// Outcome of one [`PatternAssociator::train_step`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepReport {
    /// Hinge loss on the item before the update.
    pub loss: f64,
    /// Output features whose thresholded prediction was wrong, i.e. rows
    /// that were updated.
    pub mistakes: usize,
}

/// Totals over one pass through a training set.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EpochReport {
    pub loss: f64,
    pub mistakes: usize,
}

/// `{W, b}` of the pattern associator.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternAssociator {
    dim: usize,
    weights: Tensor,
    bias: Vec<f64>,
    /// Row sums of `W`, so that `W x` for `x ∈ {-1,+1}^F` only touches the
    /// `+1` columns: `W x = 2 W[:, A] 1 - W 1`.
    row_sums: Vec<f64>,
    cfg: RmConfig,
    steps: u64,
}

impl PatternAssociator {
    pub fn new(dim: usize, cfg: RmConfig) -> Result<Self, RmError> {
        if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
            return Err(RmError::BadLearningRate(cfg.lr));
        }
        Ok(Self {
            dim,
            weights: Tensor::zeros(&[dim, dim]),
            bias: vec![0.0; dim],
            row_sums: vec![0.0; dim],
            cfg,
            steps: 0,
        })
    }

    /// Uniform `(-scale, scale)` initialization of `W` and `b`.
    pub fn random(dim: usize, cfg: RmConfig, scale: f64, rng: &mut Rng) -> Result<Self, RmError> {
        let weights = Tensor::from_fn(&[dim, dim], |_| rng.gen_range(-scale..scale));
        let bias = (0..dim).map(|_| rng.gen_range(-scale..scale)).collect();
        Self::from_parts(weights, bias, cfg)
    }

    pub fn from_parts(weights: Tensor, bias: Vec<f64>, cfg: RmConfig) -> Result<Self, RmError> {
        let dim = bias.len();
        if weights.shape() != [dim, dim] {
            return Err(RmError::DimensionMismatch {
                expected: dim,
                found: weights.shape().first().copied().unwrap_or(0),
            });
        }
        let mut model = Self::new(dim, cfg)?;
        model.row_sums = weights.data().chunks(dim.max(1)).map(|r| r.iter().sum()).collect();
        model.row_sums.resize(dim, 0.0);
        model.weights = weights;
        model.bias = bias;
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &Tensor {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn config(&self) -> RmConfig {
        self.cfg
    }

    /// Number of training steps taken so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Learning rate for the next step.
    pub fn current_lr(&self) -> f64 {
        self.cfg.lr / (1.0 + self.cfg.decay * self.steps as f64)
    }

    fn check(&self, v: &WickelfeatureVector) -> Result<(), RmError> {
        if v.len() != self.dim {
            return Err(RmError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// `W x + b`.
    pub fn scores(&self, x: &WickelfeatureVector) -> Result<Vec<f64>, RmError> {
        self.check(x)?;
        let w = self.weights.data();
        let active = x.active();
        Ok((0..self.dim)
            .map(|i| {
                let row = &w[i * self.dim..(i + 1) * self.dim];
                let on: f64 = active.iter().map(|&j| row[j as usize]).sum();
                2.0 * on - self.row_sums[i] + self.bias[i]
            })
            .collect())
    }

    /// `|| max(0, -y ⊙ (W x + b)) ||_1`
    pub fn loss(&self, x: &WickelfeatureVector, y: &WickelfeatureVector) -> Result<f64, RmError> {
        self.check(y)?;
        let s = self.scores(x)?;
        Ok(hinge(&s, y))
    }

    /// Thresholds `W x + b`: positive scores map to `+1`, everything else to
    /// `-1`.
    pub fn predict_features(&self, x: &WickelfeatureVector) -> Result<WickelfeatureVector, RmError> {
        Ok(WickelfeatureVector::from_signs(&self.scores(x)?))
    }

    /// One perceptron update on `(x, y)`.
    ///
    /// Every output feature whose thresholded score disagrees with `y_j`
    /// moves its row by `lr * y_j * x` and its bias by `lr * y_j`. This is a
    /// subgradient step on the hinge loss; at a zero score with `y_j = +1`
    /// (a threshold mistake at the kink) the `-y_j x` subgradient is used.
    pub fn train_step(&mut self, x: &WickelfeatureVector, y: &WickelfeatureVector) -> Result<StepReport, RmError> {
        self.check(y)?;
        let s = self.scores(x)?;
        let loss = hinge(&s, y);
        let lr = self.current_lr();
        let xs = x.to_signs();
        let x_sum: f64 = xs.iter().sum();
        let mut mistakes = 0;
        for (i, &si) in s.iter().enumerate() {
            let yi = f64::from(y.sign(i));
            let predicted = if si > 0.0 { 1.0 } else { -1.0 };
            if predicted == yi {
                continue;
            }
            mistakes += 1;
            let step = lr * yi;
            let row = &mut self.weights.data_mut()[i * self.dim..(i + 1) * self.dim];
            for (w, &xj) in row.iter_mut().zip(&xs) {
                *w += step * xj;
            }
            self.row_sums[i] += step * x_sum;
            self.bias[i] += step;
        }
        self.steps += 1;
        Ok(StepReport { loss, mistakes })
    }

    /// One shuffled pass over `items`.
    pub fn train_epoch(
        &mut self,
        items: &[(WickelfeatureVector, WickelfeatureVector)],
        rng: &mut Rng,
    ) -> Result<EpochReport, RmError> {
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.shuffle(rng);
        let mut report = EpochReport::default();
        for i in order {
            let (x, y) = &items[i];
            let r = self.train_step(x, y)?;
            report.loss += r.loss;
            report.mistakes += r.mistakes;
        }
        Ok(report)
    }

    /// Trains for up to `epochs` passes, stopping after the first pass with
    /// no mistakes (the model can no longer change).
    pub fn fit(
        &mut self,
        items: &[(WickelfeatureVector, WickelfeatureVector)],
        epochs: usize,
        rng: &mut Rng,
    ) -> Result<Vec<EpochReport>, RmError> {
        let mut history = Vec::new();
        for _ in 0..epochs {
            let r = self.train_epoch(items, rng)?;
            history.push(r);
            if r.mistakes == 0 {
                break;
            }
        }
        Ok(history)
    }

    /// Total hinge loss over `items`.
    pub fn total_loss(&self, items: &[(WickelfeatureVector, WickelfeatureVector)]) -> Result<f64, RmError> {
        items.iter().map(|(x, y)| self.loss(x, y)).sum()
    }

    /// Index into `cands` of the candidate whose encoding is closest to the
    /// thresholded prediction for `x`; ties go to the earliest candidate.
    pub fn decode_index(&self, x: &PhonemeString, cands: &CandidateSet, ft: &FeatureTable) -> Result<usize, RmError> {
        let predicted = self.predict_features(&phonology::encode(x, ft))?;
        let mut best = (usize::MAX, 0);
        for (i, c) in cands.iter().enumerate() {
            let enc = phonology::encode(c, ft);
            self.check(&enc)?;
            let d = enc.hamming(&predicted);
            if d < best.0 {
                best = (d, i);
            }
        }
        Ok(best.1)
    }

    pub fn decode<'c>(&self, x: &PhonemeString, cands: &'c CandidateSet, ft: &FeatureTable) -> Result<&'c PhonemeString, RmError> {
        let i = self.decode_index(x, cands, ft)?;
        Ok(&cands.candidates[i])
    }
}

/// A linearly separable problem by construction: targets are the thresholded
/// outputs of a random teacher `(W*, b*)`, resampling any input whose teacher
/// scores come within `margin` of zero.
pub fn separable_toy_set(
    items: usize,
    dim: usize,
    margin: f64,
    rng: &mut Rng,
) -> Vec<(WickelfeatureVector, WickelfeatureVector)> {
    let teacher: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let bias: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut out = Vec::with_capacity(items);
    while out.len() < items {
        let x: Vec<f64> = (0..dim).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let s: Vec<f64> = (0..dim)
            .map(|i| crate::numerics::kernels::dot(&teacher[i * dim..(i + 1) * dim], &x) + bias[i])
            .collect();
        if s.iter().any(|v| v.abs() < margin) {
            continue;
        }
        out.push((WickelfeatureVector::from_signs(&x), WickelfeatureVector::from_signs(&s)));
    }
    out
}

fn hinge(scores: &[f64], y: &WickelfeatureVector) -> f64 {
    scores
        .iter()
        .enumerate()
        .map(|(j, &s)| (-f64::from(y.sign(j)) * s).max(0.0))
        .sum()
}

/// A non-empty, duplicate-free, ordered list of output candidates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    candidates: Vec<PhonemeString>,
}

impl CandidateSet {
    /// Drops later duplicates, keeping first-occurrence order.
    pub fn new(cands: impl IntoIterator<Item = PhonemeString>) -> Result<Self, RmError> {
        let mut out: Vec<PhonemeString> = Vec::new();
        for c in cands {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        if out.is_empty() {
            return Err(RmError::EmptyCandidates);
        }
        Ok(Self { candidates: out })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PhonemeString> {
        self.candidates.iter()
    }

    pub fn contains(&self, c: &PhonemeString) -> bool {
        self.candidates.contains(c)
    }

    pub fn as_slice(&self) -> &[PhonemeString] {
        &self.candidates
    }
}

/// Fixed candidate recipe for a stem `x`: `x` itself, `x` with each of the
/// three regular past suffixes, then, for every training irregular whose
/// stem shares `x`'s final rime, that irregular's stem change applied to
/// `x`.
pub fn generate_candidates(
    x: &PhonemeString,
    irregulars: &[(PhonemeString, PhonemeString)],
    rules: &EnglishRules,
    ft: &FeatureTable,
) -> CandidateSet {
    let mut cands = vec![x.clone()];
    for suffix in rules.past_suffixes() {
        cands.push(x.concat(&suffix));
    }
    let target_rime = rime(x.phonemes(), ft);
    for (stem, form) in irregulars {
        if rime(stem.phonemes(), ft) != target_rime {
            continue;
        }
        let change = StemChange::between(stem.phonemes(), form.phonemes());
        if let Some(analog) = change.apply(x.phonemes()) {
            if let Ok(s) = PhonemeString::new(analog) {
                cands.push(s);
            }
        }
    }
    CandidateSet::new(cands).expect("identity candidate is always present")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng;
    use crate::phonology::PhonemeInventory;

    fn wfv(signs: &[f64]) -> WickelfeatureVector {
        WickelfeatureVector::from_signs(signs)
    }

    fn with_scores(scores: &[f64]) -> PatternAssociator {
        // W = 0, b = scores gives W x + b = scores for every x.
        PatternAssociator::from_parts(Tensor::zeros(&[scores.len(), scores.len()]), scores.to_vec(), RmConfig::default())
            .unwrap()
    }

    #[test]
    fn zero_model_has_zero_loss() {
        let m = PatternAssociator::new(4, RmConfig::default()).unwrap();
        let x = wfv(&[1.0, -1.0, 1.0, -1.0]);
        let y = wfv(&[-1.0, 1.0, 1.0, 1.0]);
        assert_eq!(m.loss(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn hinge_on_two_features() {
        let y = wfv(&[1.0, -1.0]);
        let x = wfv(&[1.0, 1.0]);
        assert_eq!(with_scores(&[2.0, -3.0]).loss(&x, &y).unwrap(), 0.0);
        // Direct per-coordinate evaluation: max(0, -(+1)(-2)) + max(0, -(-1)(3)).
        let oracle = (-(1.0f64) * -2.0).max(0.0) + (-(-1.0f64) * 3.0).max(0.0);
        assert_eq!(oracle, 5.0);
        assert_eq!(with_scores(&[-2.0, 3.0]).loss(&x, &y).unwrap(), oracle);
    }

    #[test]
    fn dimension_mismatch() {
        let m = PatternAssociator::new(3, RmConfig::default()).unwrap();
        let x = wfv(&[1.0, 1.0]);
        assert!(matches!(m.loss(&x, &x), Err(RmError::DimensionMismatch { expected: 3, found: 2 })));
    }

    #[test]
    fn threshold_maps_zero_to_negative() {
        let m = PatternAssociator::new(5, RmConfig::default()).unwrap();
        let x = wfv(&[1.0; 5]);
        assert!(m.predict_features(&x).unwrap().active().is_empty());
        let m = with_scores(&[0.1, 0.0, -0.1]);
        let p = m.predict_features(&wfv(&[1.0; 3])).unwrap();
        assert_eq!(p.to_signs(), vec![1.0, -1.0, -1.0]);
    }

    #[test]
    fn prediction_agrees_with_sign_oracle() {
        let mut r = rng(7);
        let dim = 24;
        let m = PatternAssociator::random(dim, RmConfig::default(), 1.0, &mut r).unwrap();
        for _ in 0..1000 {
            let signs: Vec<f64> = (0..dim).map(|_| if r.gen_bool(0.3) { 1.0 } else { -1.0 }).collect();
            let x = wfv(&signs);
            // Dense W x + b, independent of the row-sum shortcut.
            let w = m.weights().data();
            let want: Vec<f64> = (0..dim)
                .map(|i| {
                    let s: f64 = (0..dim).map(|j| w[i * dim + j] * signs[j]).sum::<f64>() + m.bias()[i];
                    if s > 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect();
            assert_eq!(m.predict_features(&x).unwrap().to_signs(), want);
        }
    }

    #[test]
    fn correct_item_leaves_model_unchanged() {
        let mut m = with_scores(&[1.0, -1.0]);
        let before = m.clone();
        let r = m.train_step(&wfv(&[1.0, -1.0]), &wfv(&[1.0, -1.0])).unwrap();
        assert_eq!(r.mistakes, 0);
        assert_eq!(m.weights(), before.weights());
        assert_eq!(m.bias(), before.bias());
    }

    #[test]
    fn violated_score_moves_toward_correct_sign() {
        let mut m = with_scores(&[-0.5, 2.0]);
        let x = wfv(&[1.0, -1.0]);
        let y = wfv(&[1.0, 1.0]);
        let before = m.scores(&x).unwrap();
        m.train_step(&x, &y).unwrap();
        let after = m.scores(&x).unwrap();
        assert!(after[0] > before[0]);
        assert_eq!(after[1], before[1]);
    }

    #[test]
    fn per_item_loss_never_increases_at_small_lr() {
        let mut r = rng(3);
        let dim = 20;
        let cfg = RmConfig { lr: 1e-3, decay: 0.0 };
        let mut m = PatternAssociator::random(dim, cfg, 0.5, &mut r).unwrap();
        for _ in 0..200 {
            let x = wfv(&(0..dim).map(|_| if r.gen_bool(0.5) { 1.0 } else { -1.0 }).collect::<Vec<_>>());
            let y = wfv(&(0..dim).map(|_| if r.gen_bool(0.5) { 1.0 } else { -1.0 }).collect::<Vec<_>>());
            let before = m.loss(&x, &y).unwrap();
            m.train_step(&x, &y).unwrap();
            assert!(m.loss(&x, &y).unwrap() <= before + 1e-12);
        }
    }

    #[test]
    fn row_sum_cache_tracks_weights() {
        let mut r = rng(11);
        let dim = 16;
        let mut m = PatternAssociator::random(dim, RmConfig::default(), 0.3, &mut r).unwrap();
        for _ in 0..50 {
            let x = wfv(&(0..dim).map(|_| if r.gen_bool(0.4) { 1.0 } else { -1.0 }).collect::<Vec<_>>());
            let y = wfv(&(0..dim).map(|_| if r.gen_bool(0.4) { 1.0 } else { -1.0 }).collect::<Vec<_>>());
            m.train_step(&x, &y).unwrap();
        }
        for i in 0..dim {
            let s: f64 = m.weights().data()[i * dim..(i + 1) * dim].iter().sum();
            assert!((s - m.row_sums[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn loss_is_jointly_convex() {
        let mut r = rng(5);
        let dim = 12;
        let data: Vec<_> = (0..6)
            .map(|_| {
                let x: Vec<f64> = (0..dim).map(|_| if r.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
                let y: Vec<f64> = (0..dim).map(|_| if r.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
                (wfv(&x), wfv(&y))
            })
            .collect();
        for _ in 0..100 {
            let a = PatternAssociator::random(dim, RmConfig::default(), 2.0, &mut r).unwrap();
            let b = PatternAssociator::random(dim, RmConfig::default(), 2.0, &mut r).unwrap();
            let lambda: f64 = r.gen_range(0.0..=1.0);
            let mix = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(u, v)| lambda * u + (1.0 - lambda) * v).collect() };
            let w = Tensor::matrix(dim, dim, mix(a.weights().data(), b.weights().data())).unwrap();
            let m = PatternAssociator::from_parts(w, mix(a.bias(), b.bias()), RmConfig::default()).unwrap();
            let lhs = m.total_loss(&data).unwrap();
            let rhs = lambda * a.total_loss(&data).unwrap() + (1.0 - lambda) * b.total_loss(&data).unwrap();
            assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
        }
    }

    #[test]
    fn separable_toy_set_reaches_zero_loss() {
        for seed in 0..10 {
            let mut r = rng(seed);
            let items = separable_toy_set(8, 16, 0.1, &mut r);
            let mut m = PatternAssociator::new(16, RmConfig { lr: 1.0, decay: 0.01 }).unwrap();
            let history = m.fit(&items, 200, &mut r).unwrap();
            assert!(history.len() <= 200);
            assert_eq!(m.total_loss(&items).unwrap(), 0.0, "seed {seed}");
        }
    }

    #[test]
    fn trained_regulars_decode_voiceless_past() {
        let inv = PhonemeInventory::english();
        let ft = FeatureTable::english(&inv).unwrap();
        let rules = EnglishRules::new(&inv).unwrap();
        let t = |s: &str| inv.tokenize(s).unwrap();
        let pairs: Vec<_> = ["sæk", "sæg", "pæt"]
            .iter()
            .map(|s| (phonology::encode(&t(s), &ft), phonology::encode(&rules.past(&t(s)), &ft)))
            .collect();
        let mut m = PatternAssociator::new(ft.wickelfeature_count(), RmConfig::default()).unwrap();
        m.fit(&pairs, 50, &mut rng(1)).unwrap();

        let x = t("sæk");
        let cands = generate_candidates(&x, &[], &rules, &ft);
        // Exhaustive oracle: Hamming distance of every candidate to the
        // thresholded prediction, computed from dense sign vectors.
        let predicted = m.predict_features(&phonology::encode(&x, &ft)).unwrap().to_signs();
        let dist: Vec<usize> = cands
            .iter()
            .map(|c| {
                let e = phonology::encode(c, &ft).to_signs();
                e.iter().zip(&predicted).filter(|(a, b)| a != b).count()
            })
            .collect();
        let best = (0..dist.len()).min_by_key(|&i| dist[i]).unwrap();
        assert_eq!(&cands.as_slice()[best], &t("sækt"));
        assert_eq!(m.decode(&x, &cands, &ft).unwrap(), &t("sækt"));
    }

    #[test]
    fn candidate_recipe() {
        let inv = PhonemeInventory::english();
        let ft = FeatureTable::english(&inv).unwrap();
        let rules = EnglishRules::new(&inv).unwrap();
        let t = |s: &str| inv.tokenize(s).unwrap();

        let c = generate_candidates(&t("wʌg"), &[], &rules, &ft);
        assert_eq!(c.len(), 4);
        assert!(c.contains(&t("wʌgd")));

        let irregulars = [(t("rɪŋ"), t("ræŋ")), (t("goʊ"), t("wɛnt")), (t("swɪm"), t("swæm"))];
        let c = generate_candidates(&t("sɪŋ"), &irregulars, &rules, &ft);
        // Oracle: scan the list for rime matches by hand.
        let rime_matches: Vec<_> = irregulars
            .iter()
            .filter(|(s, _)| rime(s.phonemes(), &ft) == rime(t("sɪŋ").phonemes(), &ft))
            .collect();
        assert_eq!(rime_matches.len(), 1);
        assert!(c.contains(&t("sæŋ")));
        assert_eq!(c.len(), 5);
        assert!(CandidateSet::new(Vec::new()).is_err());
    }

    #[test]
    fn single_candidate_is_returned() {
        let inv = PhonemeInventory::english();
        let ft = FeatureTable::english(&inv).unwrap();
        let x = inv.tokenize("kæt").unwrap();
        let m = PatternAssociator::new(ft.wickelfeature_count(), RmConfig::default()).unwrap();
        let c = CandidateSet::new([x.clone()]).unwrap();
        assert_eq!(m.decode(&x, &c, &ft).unwrap(), &x);
    }
}
