use alloc::vec::Vec;

use super::{spearman_rho, ExperimentError};
use crate::phonology::PhonemeString;

/// Reference Spearman correlations, `(regular, irregular)`.
pub const NETWORK_WUG_RHO: (f64, f64) = (0.48, 0.45);
pub const MG_WUG_RHO: (f64, f64) = (0.35, 0.36);

/// A nonce stem with one pre-chosen regular and one irregular past form
/// and the share of participants producing each. A missing share leaves
/// the item out of that pool.
#[derive(Clone, Debug, PartialEq)]
pub struct WugItem {
    pub stem: PhonemeString,
    pub regular_form: PhonemeString,
    pub irregular_form: PhonemeString,
    pub human_regular: Option<f64>,
    pub human_irregular: Option<f64>,
}

impl WugItem {
    pub fn new(
        stem: PhonemeString,
        regular_form: PhonemeString,
        irregular_form: PhonemeString,
        human_regular: Option<f64>,
        human_irregular: Option<f64>,
    ) -> Result<Self, ExperimentError> {
        for p in [human_regular, human_irregular].into_iter().flatten() {
            if !(0.0..=1.0).contains(&p) {
                return Err(ExperimentError::BadProbability(p));
            }
        }
        Ok(Self {
            stem,
            regular_form,
            irregular_form,
            human_regular,
            human_irregular,
        })
    }
}

/// How a form's model probability is read off.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WugScoring {
    /// `exp` of the teacher-forced log-probability.
    #[default]
    Raw,
    /// The raw probability renormalized over the item's two forms.
    Pairwise,
}

/// A correlation over one pool; `rho` is `None` when it is undefined
/// (constant ranks or fewer than three items).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correlation {
    pub rho: Option<f64>,
    pub n: usize,
}

impl Correlation {
    fn of(model: &[f64], human: &[f64]) -> Self {
        Self {
            rho: spearman_rho(model, human).ok(),
            n: model.len(),
        }
    }

    pub fn degenerate(&self) -> bool {
        self.rho.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WugReport {
    pub regular: Correlation,
    pub irregular: Correlation,
    /// Model probability of each item's regular and irregular form.
    pub model: Vec<(f64, f64)>,
}

/// Correlates model probabilities with human production rates, regular
/// and irregular pools separately. `log_prob(stem, form)` scores a form.
pub fn wug_eval<E: From<ExperimentError>>(
    items: &[WugItem],
    scoring: WugScoring,
    mut log_prob: impl FnMut(&PhonemeString, &PhonemeString) -> Result<f64, E>,
) -> Result<WugReport, E> {
    if items.is_empty() {
        return Err(ExperimentError::Empty("wug items").into());
    }
    let mut model = Vec::with_capacity(items.len());
    for it in items {
        let reg = libm::exp(log_prob(&it.stem, &it.regular_form)?);
        let irr = libm::exp(log_prob(&it.stem, &it.irregular_form)?);
        model.push(match scoring {
            WugScoring::Raw => (reg, irr),
            WugScoring::Pairwise if reg + irr > 0.0 => (reg / (reg + irr), irr / (reg + irr)),
            WugScoring::Pairwise => (0.5, 0.5),
        });
    }
    let pool = |pick: fn(&WugItem) -> Option<f64>, side: fn(&(f64, f64)) -> f64| {
        let (m, h): (Vec<f64>, Vec<f64>) = items
            .iter()
            .zip(&model)
            .filter_map(|(it, m)| pick(it).map(|h| (side(m), h)))
            .unzip();
        Correlation::of(&m, &h)
    };
    Ok(WugReport {
        regular: pool(|it| it.human_regular, |m| m.0),
        irregular: pool(|it| it.human_irregular, |m| m.1),
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonology::Phoneme;
    use alloc::vec;

    fn word(i: u16) -> PhonemeString {
        PhonemeString::new(vec![Phoneme(i)]).unwrap()
    }

    fn items(n: u16) -> Vec<WugItem> {
        (0..n)
            .map(|i| {
                let h = f64::from(i) / f64::from(n);
                WugItem::new(word(i), word(100 + i), word(200 + i), Some(h), Some(1.0 - h)).unwrap()
            })
            .collect()
    }

    #[test]
    fn model_matching_humans_correlates_perfectly() {
        let its = items(10);
        let r = wug_eval::<ExperimentError>(&its, WugScoring::Raw, |stem, form| {
            let it = its.iter().find(|it| &it.stem == stem).unwrap();
            let h = if form == &it.regular_form { it.human_regular } else { it.human_irregular };
            Ok(libm::log(h.unwrap() + 0.01))
        })
        .unwrap();
        assert_eq!(r.regular.rho, Some(1.0));
        assert_eq!(r.irregular.rho, Some(1.0));
        assert_eq!(r.regular.n, 10);
    }

    #[test]
    fn constant_model_is_degenerate() {
        let r = wug_eval::<ExperimentError>(&items(8), WugScoring::Raw, |_, _| Ok(-2.0)).unwrap();
        assert!(r.regular.degenerate() && r.irregular.degenerate());
    }

    #[test]
    fn pairwise_scoring_and_pools() {
        let mut its = items(6);
        its[0].human_regular = None;
        let r = wug_eval::<ExperimentError>(&its, WugScoring::Pairwise, |_, form| {
            Ok(if form.phonemes()[0].0 >= 200 { libm::log(0.1) } else { libm::log(0.3) })
        })
        .unwrap();
        assert!((r.model[0].0 - 0.75).abs() < 1e-12 && (r.model[0].1 - 0.25).abs() < 1e-12);
        assert_eq!((r.regular.n, r.irregular.n), (5, 6));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(wug_eval::<ExperimentError>(&[], WugScoring::Raw, |_, _| Ok(0.0)).is_err());
        assert_eq!(
            WugItem::new(word(0), word(1), word(2), Some(1.5), None),
            Err(ExperimentError::BadProbability(1.5))
        );
    }
}
