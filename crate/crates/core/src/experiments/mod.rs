//! Evaluation suite: stratified accuracy, the error taxonomy, learning
//! curves, micro-U-shape detection, wug-test correlations and the χ²
//! comparison against fixed reference scores.

mod report;
mod stats;
mod taxonomy;
mod ushape;
mod wug;

pub use report::{
    curves_csv, epochs_to_threshold, errors_tsv, evaluate, render_table2, CurvePoint, ErrorRecord, EvalReport,
    Stratum, Table2Row, ED_MULTI_TABLE2, ED_SINGLE_TABLE2, MGL_TABLE2,
};
pub use stats::{average_ranks, chi_squared_2x2, chi_squared_sf, gamma_q, ln_gamma, spearman_rho};
pub use taxonomy::{classify_error, ErrorLabel, IrregularLexicon};
pub use ushape::{detect_macro_ushape, detect_micro_ushape, status_changes, MacroUshape, MicroUshape};
pub use wug::{wug_eval, Correlation, WugItem, WugReport, WugScoring, MG_WUG_RHO, NETWORK_WUG_RHO};

use crate::inflection::EnglishRules;
use crate::phonology::PhonemeString;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} values, found {found}")]
    TooFew { needed: usize, found: usize },
    #[error("correlation undefined for constant input")]
    Degenerate,
    #[error("contingency table has an empty row or column")]
    DegenerateTable,
    #[error("no {0} to evaluate")]
    Empty(&'static str),
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
}

/// The regular past of `stem` under voicing agreement.
pub fn regular_past(stem: &PhonemeString, rules: &EnglishRules) -> PhonemeString {
    rules.past(stem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonology::PhonemeInventory;

    #[test]
    fn table_one_rows() {
        let inv = PhonemeInventory::english();
        let rules = EnglishRules::new(&inv).unwrap();
        for (stem, past) in [("pæt", "pætɪd"), ("sæg", "sægd"), ("sæk", "sækt"), ("pæd", "pædɪd")] {
            let got = regular_past(&inv.tokenize(stem).unwrap(), &rules);
            assert_eq!(inv.render(got.phonemes()), past);
        }
    }
}
