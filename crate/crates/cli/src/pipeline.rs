//! Training and evaluation runs shared by the CLI and the acceptance suite.

use std::ops::ControlFlow;

use morphlab_core::dataset::{examples, tagged_input, InflectionPair, Tag, TaskMode};
use morphlab_core::ed_model::{EdConfig, EdError, EdModel, EpochStats, TrainConfig, Vocabulary};
use morphlab_core::experiments::{
    evaluate, wug_eval, CurvePoint, EvalReport, IrregularLexicon, Stratum, WugItem, WugReport, WugScoring,
};
use morphlab_core::inflection::EnglishRules;
use morphlab_core::numerics::rng;
use morphlab_core::phonology::{encode, FeatureTable, Phoneme, PhonemeString, WickelfeatureVector};
use morphlab_core::rm_model::{generate_candidates, EpochReport, PatternAssociator, RmConfig, RmError};
use morphlab_core::derive_seed;

use crate::error::CliError;

/// Decoding budget for an input of `len` phonemes, EOS included.
pub fn max_len(len: usize) -> usize {
    len + 10
}

/// Rows the model is trained and scored on in `mode`.
pub fn task_rows(pairs: &[InflectionPair], mode: TaskMode) -> Vec<InflectionPair> {
    pairs
        .iter()
        .filter(|p| mode == TaskMode::Multi || p.tag == Tag::Past)
        .cloned()
        .collect()
}

fn past_rows(pairs: &[InflectionPair]) -> Vec<InflectionPair> {
    task_rows(pairs, TaskMode::Single)
}

/// Greedy output for one row.
pub fn ed_greedy(model: &EdModel, pair: &InflectionPair, mode: TaskMode) -> Result<Vec<Phoneme>, EdError> {
    let x = tagged_input(pair, model.vocab(), mode)?;
    Ok(model.greedy(&x, max_len(pair.lemma.len()))?.output)
}

/// Top beam output for one row; `beam = 1` is greedy.
pub fn ed_predict(model: &EdModel, pair: &InflectionPair, mode: TaskMode, beam: usize) -> Result<Vec<Phoneme>, EdError> {
    let x = tagged_input(pair, model.vocab(), mode)?;
    let best = model.beam(&x, beam, max_len(pair.lemma.len()))?;
    Ok(best.into_iter().next().map(|d| d.output).unwrap_or_default())
}

/// Outputs of a set of tracked rows at one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub epoch: usize,
    pub outputs: Vec<Vec<Phoneme>>,
}

/// How an encoder-decoder run is monitored.
#[derive(Clone, Debug, PartialEq)]
pub struct EdRunSpec {
    pub ed: EdConfig,
    pub train: TrainConfig,
    pub mode: TaskMode,
    /// Record a past-tense training-accuracy point every this many epochs;
    /// 0 disables curves.
    pub curve_every: usize,
    /// Record greedy outputs of the tracked rows every this many epochs;
    /// 0 disables snapshots.
    pub snapshot_every: usize,
    /// Stop once past-tense training accuracy reaches this value, checked
    /// at curve points.
    pub stop_at: Option<f64>,
    /// Likewise for the irregular stratum; with both set, both must hold.
    pub stop_irregular_at: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct EdRun {
    pub model: EdModel,
    pub history: Vec<EpochStats>,
    pub curve: Vec<CurvePoint>,
    pub snapshots: Vec<Snapshot>,
}

fn greedy_strata(model: &EdModel, rows: &[InflectionPair], mode: TaskMode) -> Result<(Stratum, Stratum, Stratum), EdError> {
    let (mut all, mut reg, mut irr) = (Stratum::default(), Stratum::default(), Stratum::default());
    for p in rows {
        let ok = ed_greedy(model, p, mode)? == p.form.phonemes();
        for s in [&mut all, if p.regular { &mut reg } else { &mut irr }] {
            *s = Stratum::new(s.correct + usize::from(ok), s.total + 1);
        }
    }
    Ok((all, reg, irr))
}

/// Trains a fresh encoder-decoder on `train`. Initialization and training
/// streams are derived from `seed`; `spec.train.seed` is overwritten.
/// Curves are measured on past-tense training rows in both modes, so the
/// two conditions are directly comparable.
pub fn train_ed(
    train: &[InflectionPair],
    vocab: Vocabulary,
    spec: &EdRunSpec,
    seed: u64,
    condition: &str,
    tracked: &[InflectionPair],
) -> Result<EdRun, EdError> {
    let data = examples(train, &vocab, spec.mode)?;
    let mut model = EdModel::new(vocab, spec.ed, &mut rng(derive_seed(seed, "init")))?;
    let cfg = TrainConfig {
        seed: derive_seed(seed, "train"),
        ..spec.train
    };
    let past = past_rows(train);
    let mut curve = Vec::new();
    let mut snapshots = Vec::new();
    let mut failure = None;
    let history = model.train(&data, &cfg, |m, stats| {
        let mut step = || -> Result<ControlFlow<()>, EdError> {
            let e = stats.epoch;
            if spec.snapshot_every > 0 && e % spec.snapshot_every == 0 {
                let outputs = tracked
                    .iter()
                    .map(|p| ed_greedy(m, p, spec.mode))
                    .collect::<Result<_, _>>()?;
                snapshots.push(Snapshot { epoch: e, outputs });
            }
            let last = e == cfg.epochs;
            if spec.curve_every > 0 && (e % spec.curve_every == 0 || last) {
                let (all, regular, irregular) = greedy_strata(m, &past, spec.mode)?;
                let meets = |limit: Option<f64>, s: &Stratum| limit.map(|t| s.accuracy().is_some_and(|a| a >= t));
                let checks = [meets(spec.stop_at, &all), meets(spec.stop_irregular_at, &irregular)];
                let reached = checks.iter().any(Option::is_some) && checks.iter().flatten().all(|&ok| ok);
                curve.push(CurvePoint {
                    condition: condition.to_string(),
                    epoch: e,
                    all,
                    regular,
                    irregular,
                });
                if reached {
                    return Ok(ControlFlow::Break(()));
                }
            }
            Ok(ControlFlow::Continue(()))
        };
        match step() {
            Ok(flow) => flow,
            Err(err) => {
                failure = Some(err);
                ControlFlow::Break(())
            }
        }
    })?;
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(EdRun {
        model,
        history,
        curve,
        snapshots,
    })
}

/// Scores an encoder-decoder on `pairs` with top-`beam` decoding.
pub fn eval_ed(
    model: &EdModel,
    pairs: &[InflectionPair],
    mode: TaskMode,
    beam: usize,
    lexicon: &IrregularLexicon,
    rules: &EnglishRules,
) -> Result<EvalReport, EdError> {
    let rows = task_rows(pairs, mode);
    evaluate(&rows, lexicon, rules, |p| ed_predict(model, p, mode, beam))
}

/// Scores wug items by the model's past-tense sequence probabilities.
pub fn wug_ed(model: &EdModel, mode: TaskMode, items: &[WugItem], scoring: WugScoring) -> Result<WugReport, CliError> {
    wug_eval::<CliError>(items, scoring, |stem, form| {
        let pair = InflectionPair::new(stem.clone(), form.clone(), Tag::Past, true);
        let x = tagged_input(&pair, model.vocab(), mode)?;
        Ok(model.sequence_log_prob(&x, form.phonemes())?)
    })
}

/// A trained pattern associator with what decoding needs.
#[derive(Clone, Debug)]
pub struct RmRun {
    pub model: PatternAssociator,
    pub history: Vec<EpochReport>,
    /// Irregular training pairs, the source of analogical candidates.
    pub irregulars: Vec<(PhonemeString, PhonemeString)>,
}

fn rm_items(pairs: &[InflectionPair], ft: &FeatureTable) -> Vec<(WickelfeatureVector, WickelfeatureVector)> {
    pairs.iter().map(|p| (encode(&p.lemma, ft), encode(&p.form, ft))).collect()
}

/// Trains the pattern associator on past-tense rows of `train`.
pub fn train_rm(train: &[InflectionPair], ft: &FeatureTable, cfg: RmConfig, epochs: usize, seed: u64) -> Result<RmRun, RmError> {
    let rows = past_rows(train);
    let items = rm_items(&rows, ft);
    let mut model = PatternAssociator::new(ft.wickelfeature_count(), cfg)?;
    let history = model.fit(&items, epochs, &mut rng(derive_seed(seed, "train")))?;
    let irregulars = rows
        .iter()
        .filter(|p| !p.regular)
        .map(|p| (p.lemma.clone(), p.form.clone()))
        .collect();
    Ok(RmRun {
        model,
        history,
        irregulars,
    })
}

/// Decodes one stem against its generated candidate set.
pub fn rm_predict(
    model: &PatternAssociator,
    stem: &PhonemeString,
    irregulars: &[(PhonemeString, PhonemeString)],
    rules: &EnglishRules,
    ft: &FeatureTable,
) -> Result<Vec<Phoneme>, RmError> {
    let cands = generate_candidates(stem, irregulars, rules, ft);
    Ok(model.decode(stem, &cands, ft)?.phonemes().to_vec())
}

/// Scores the pattern associator on past-tense rows of `pairs`.
pub fn eval_rm(
    run: &RmRun,
    pairs: &[InflectionPair],
    ft: &FeatureTable,
    lexicon: &IrregularLexicon,
    rules: &EnglishRules,
) -> Result<EvalReport, RmError> {
    let rows = past_rows(pairs);
    evaluate(&rows, lexicon, rules, |p| rm_predict(&run.model, &p.lemma, &run.irregulars, rules, ft))
}
