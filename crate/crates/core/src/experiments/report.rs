use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use super::{chi_squared_2x2, classify_error, ErrorLabel, ExperimentError, IrregularLexicon};
use crate::dataset::{InflectionPair, Tag};
use crate::inflection::EnglishRules;
use crate::phonology::{Phoneme, PhonemeInventory, PhonemeString};

/// Correct and total counts for one slice of the data.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stratum {
    pub correct: usize,
    pub total: usize,
}

impl Stratum {
    pub fn new(correct: usize, total: usize) -> Self {
        assert!(correct <= total, "{correct} correct out of {total}");
        Self { correct, total }
    }

    /// `None` when the stratum is empty.
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }

    fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += usize::from(correct);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub lemma: PhonemeString,
    pub tag: Tag,
    pub regular: bool,
    pub gold: PhonemeString,
    pub predicted: Vec<Phoneme>,
    pub label: ErrorLabel,
}

/// Exact-match accuracy of one model on one split.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub all: Stratum,
    pub regular: Stratum,
    pub irregular: Stratum,
    pub errors: Vec<ErrorRecord>,
}

impl EvalReport {
    /// How many errors carry `label`.
    pub fn count(&self, label: ErrorLabel) -> usize {
        self.errors.iter().filter(|e| e.label == label).count()
    }

    /// Errors on irregular items only.
    pub fn irregular_errors(&self) -> impl Iterator<Item = &ErrorRecord> {
        self.errors.iter().filter(|e| !e.regular)
    }
}

/// Scores `predict` on every pair. Past-tense errors are labelled with
/// [`classify_error`]; errors on other tags are [`ErrorLabel::Other`].
pub fn evaluate<E>(
    pairs: &[InflectionPair],
    lexicon: &IrregularLexicon,
    rules: &EnglishRules,
    mut predict: impl FnMut(&InflectionPair) -> Result<Vec<Phoneme>, E>,
) -> Result<EvalReport, E> {
    let mut report = EvalReport::default();
    for p in pairs {
        let predicted = predict(p)?;
        let correct = predicted == p.form.phonemes();
        report.all.add(correct);
        if p.regular {
            report.regular.add(correct);
        } else {
            report.irregular.add(correct);
        }
        if !correct {
            let label = match p.tag {
                Tag::Past => classify_error(p.lemma.phonemes(), p.form.phonemes(), &predicted, lexicon, rules),
                _ => ErrorLabel::Other,
            };
            report.errors.push(ErrorRecord {
                lemma: p.lemma.clone(),
                tag: p.tag,
                regular: p.regular,
                gold: p.form.clone(),
                predicted,
                label,
            });
        }
    }
    Ok(report)
}

/// Error list as `lemma, tag, class, gold, predicted, label` rows.
pub fn errors_tsv(report: &EvalReport, inv: &PhonemeInventory) -> String {
    let mut out = String::from("lemma\ttag\tclass\tgold\tpredicted\tlabel\n");
    for e in &report.errors {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            inv.display(e.lemma.phonemes()),
            e.tag,
            if e.regular { "regular" } else { "irregular" },
            inv.display(e.gold.phonemes()),
            inv.display(&e.predicted),
            e.label
        );
    }
    out
}

/// Training-set accuracy of one condition at one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub condition: String,
    pub epoch: usize,
    pub all: Stratum,
    pub regular: Stratum,
    pub irregular: Stratum,
}

fn fmt_acc(s: &Stratum) -> String {
    s.accuracy().map_or_else(String::new, |a| alloc::format!("{a:.6}"))
}

/// Curves as CSV, grouped by condition in first-appearance order and sorted
/// by epoch within each.
pub fn curves_csv(points: &[CurvePoint]) -> Result<String, ExperimentError> {
    if points.is_empty() {
        return Err(ExperimentError::Empty("curve snapshots"));
    }
    let mut conditions: Vec<&str> = Vec::new();
    for p in points {
        if !conditions.contains(&p.condition.as_str()) {
            conditions.push(&p.condition);
        }
    }
    let mut out = String::from("condition,epoch,all,regular,irregular,n_all,n_regular,n_irregular\n");
    for c in conditions {
        let mut rows: Vec<&CurvePoint> = points.iter().filter(|p| p.condition == c).collect();
        rows.sort_by_key(|p| p.epoch);
        for p in rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.condition,
                p.epoch,
                fmt_acc(&p.all),
                fmt_acc(&p.regular),
                fmt_acc(&p.irregular),
                p.all.total,
                p.regular.total,
                p.irregular.total
            );
        }
    }
    Ok(out)
}

/// First epoch at which overall accuracy reaches `threshold`.
pub fn epochs_to_threshold(points: &[CurvePoint], threshold: f64) -> Option<usize> {
    let mut sorted: Vec<&CurvePoint> = points.iter().collect();
    sorted.sort_by_key(|p| p.epoch);
    sorted
        .into_iter()
        .find(|p| p.all.accuracy().is_some_and(|a| a >= threshold))
        .map(|p| p.epoch)
}

/// Reference accuracies in percent, `[all, regular, irregular]` by
/// `[train, dev, test]`.
pub const MGL_TABLE2: [[f64; 3]; 3] = [[96.0, 96.0, 94.5], [99.9, 100.0, 100.0], [0.0, 0.0, 0.0]];
pub const ED_SINGLE_TABLE2: [[f64; 3]; 3] = [[99.8, 97.4, 95.1], [99.9, 99.2, 98.9], [97.6, 53.3, 28.6]];
pub const ED_MULTI_TABLE2: [[f64; 3]; 3] = [[100.0, 96.9, 95.1], [100.0, 99.5, 99.7], [99.2, 33.3, 28.6]];

/// One model's row: `cells[split]` for train, dev, test, any of which may
/// be missing.
#[derive(Clone, Debug, PartialEq)]
pub struct Table2Row {
    pub name: String,
    pub cells: [Option<EvalReport>; 3],
}

/// A χ² test of `s` against a reference accuracy on the same number of
/// items. `None` when the table is degenerate.
fn vs_reference(s: &Stratum, reference_pct: f64) -> Option<f64> {
    let reference = libm::round(reference_pct / 100.0 * s.total as f64) as u64;
    chi_squared_2x2(s.correct as u64, s.total as u64, reference, s.total as u64)
        .ok()
        .map(|(_, p)| p)
}

/// Text table in the layout of the reference results: all, regular and
/// irregular accuracy on train, dev and test. The reference rows come
/// first; model cells carry `†` when a χ² test against the reference
/// baseline (counts rescaled to the model's cell size) gives p < 0.05.
pub fn render_table2(rows: &[Table2Row]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24}{:>27}{:>27}{:>27}",
        "", "all", "regular", "irregular"
    );
    let _ = write!(out, "{:<24}", "");
    for _ in 0..3 {
        let _ = write!(out, "{:>9}{:>9}{:>9}", "train", "dev", "test");
    }
    out.push('\n');
    let reference = |out: &mut String, name: &str, t: &[[f64; 3]; 3]| {
        let _ = write!(out, "{name:<24}");
        for stratum in t {
            for v in stratum {
                let _ = write!(out, "{:>9}", alloc::format!("{v:.1}"));
            }
        }
        out.push('\n');
    };
    reference(&mut out, "reference MGL", &MGL_TABLE2);
    reference(&mut out, "reference ED single", &ED_SINGLE_TABLE2);
    reference(&mut out, "reference ED multi", &ED_MULTI_TABLE2);
    for row in rows {
        let _ = write!(out, "{:<24}", row.name);
        for (k, mgl) in MGL_TABLE2.iter().enumerate() {
            for (split, cell) in row.cells.iter().enumerate() {
                let text = match cell {
                    None => "-".to_string(),
                    Some(r) => {
                        let s = [r.all, r.regular, r.irregular][k];
                        match s.accuracy() {
                            None => "-".to_string(),
                            Some(a) => {
                                let mark = if vs_reference(&s, mgl[split]).is_some_and(|p| p < 0.05) { "†" } else { "" };
                                alloc::format!("{:.1}{mark}", 100.0 * a)
                            }
                        }
                    }
                };
                let _ = write!(out, "{text:>9}");
            }
        }
        out.push('\n');
    }
    out.push_str("† significantly different from the MGL reference (χ², p < 0.05)\n");
    out
}
