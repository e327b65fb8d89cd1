use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{DatasetError, InflectionPair};
use crate::numerics::rng;
use crate::phonology::PhonemeString;

/// Train/dev/test partition with disjoint lemma sets.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitCorpus {
    pub train: Vec<InflectionPair>,
    pub dev: Vec<InflectionPair>,
    pub test: Vec<InflectionPair>,
    pub seed: u64,
}

/// Shuffles the distinct lemmas (in first-appearance order) with `seed` and
/// cuts them `round(r0 n)`, `round(r1 n)`, rest. Every row follows its
/// lemma, and rows keep their input order within a part.
pub fn split(pairs: &[InflectionPair], seed: u64, ratios: [f64; 3]) -> Result<SplitCorpus, DatasetError> {
    if ratios.iter().any(|r| r.is_nan() || *r < 0.0) || libm::fabs(ratios.iter().sum::<f64>() - 1.0) > 1e-9 {
        return Err(DatasetError::BadRatios(ratios));
    }
    let mut seen = BTreeSet::new();
    let mut lemmas: Vec<&PhonemeString> = Vec::new();
    for p in pairs {
        if seen.insert(&p.lemma) {
            lemmas.push(&p.lemma);
        }
    }
    lemmas.shuffle(&mut rng(seed));
    let n = lemmas.len();
    let n_train = libm::round(ratios[0] * n as f64) as usize;
    let n_dev = (libm::round(ratios[1] * n as f64) as usize).min(n - n_train);
    let dev: BTreeSet<&PhonemeString> = lemmas[n_train..n_train + n_dev].iter().copied().collect();
    let test: BTreeSet<&PhonemeString> = lemmas[n_train + n_dev..].iter().copied().collect();

    let mut out = SplitCorpus {
        train: Vec::new(),
        dev: Vec::new(),
        test: Vec::new(),
        seed,
    };
    for p in pairs {
        let part = if dev.contains(&p.lemma) {
            &mut out.dev
        } else if test.contains(&p.lemma) {
            &mut out.test
        } else {
            &mut out.train
        };
        part.push(p.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Tag;
    use crate::phonology::Phoneme;

    fn corpus(lemmas: usize) -> Vec<InflectionPair> {
        let mut out = Vec::new();
        for i in 0..lemmas {
            let lemma = PhonemeString::new(alloc::vec![Phoneme((i % 7) as u16), Phoneme((i / 7) as u16)]).unwrap();
            for tag in [Tag::Past, Tag::Gerund] {
                out.push(InflectionPair::new(lemma.clone(), lemma.clone(), tag, true));
            }
        }
        out
    }

    fn lemma_count(ps: &[InflectionPair]) -> usize {
        ps.iter().map(|p| &p.lemma).collect::<BTreeSet<_>>().len()
    }

    #[test]
    fn ten_lemmas() {
        let s = split(&corpus(10), 1, [0.8, 0.1, 0.1]).unwrap();
        assert_eq!((lemma_count(&s.train), lemma_count(&s.dev), lemma_count(&s.test)), (8, 1, 1));
        assert_eq!(s.train.len(), 16);
    }

    #[test]
    fn corpus_scale_counts() {
        // 0.8 * 4039 = 3231.2 and 0.1 * 4039 = 403.9.
        let s = split(&corpus(4039), 7, [0.8, 0.1, 0.1]).unwrap();
        assert_eq!((lemma_count(&s.train), lemma_count(&s.dev), lemma_count(&s.test)), (3231, 404, 404));
    }

    #[test]
    fn deterministic_and_disjoint() {
        let c = corpus(50);
        for seed in 0..20 {
            let a = split(&c, seed, [0.8, 0.1, 0.1]).unwrap();
            assert_eq!(a, split(&c, seed, [0.8, 0.1, 0.1]).unwrap());
            let sets: Vec<BTreeSet<_>> = [&a.train, &a.dev, &a.test]
                .iter()
                .map(|ps| ps.iter().map(|p| p.lemma.clone()).collect())
                .collect();
            assert!(sets[0].is_disjoint(&sets[1]) && sets[0].is_disjoint(&sets[2]) && sets[1].is_disjoint(&sets[2]));
            assert_eq!(a.train.len() + a.dev.len() + a.test.len(), c.len());
        }
        assert_ne!(split(&c, 1, [0.8, 0.1, 0.1]).unwrap().dev, split(&c, 2, [0.8, 0.1, 0.1]).unwrap().dev);
        assert!(split(&c, 1, [0.8, 0.1, 0.2]).is_err());
    }
}
