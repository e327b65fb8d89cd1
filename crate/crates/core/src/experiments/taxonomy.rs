use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::dataset::{InflectionPair, Tag};
use crate::inflection::EnglishRules;
use crate::phonology::{Phoneme, StemChange};

/// Error categories, in the order they are tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorLabel {
    Correct,
    /// Irregular stem change plus a regular suffix (eat, ated).
    Blend,
    /// The regular past where something else was expected (throw, throwed).
    Overregularization,
    /// An attested stem change applied to a regular verb (ping, pang).
    Overirregularization,
    Other,
}

impl ErrorLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorLabel::Correct => "correct",
            ErrorLabel::Blend => "blend",
            ErrorLabel::Overregularization => "overregularization",
            ErrorLabel::Overirregularization => "overirregularization",
            ErrorLabel::Other => "other",
        }
    }
}

impl fmt::Display for ErrorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Non-identity stem changes attested among irregular past forms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IrregularLexicon {
    changes: BTreeSet<StemChange>,
}

impl IrregularLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Collects the changes of every irregular past-tense row.
    pub fn from_pairs(pairs: &[InflectionPair]) -> Self {
        let mut lex = Self::new();
        for p in pairs.iter().filter(|p| p.tag == Tag::Past && !p.regular) {
            lex.insert(p.lemma.phonemes(), p.form.phonemes());
        }
        lex
    }

    /// Records the change from `stem` to `past`; identities are ignored.
    pub fn insert(&mut self, stem: &[Phoneme], past: &[Phoneme]) {
        let change = StemChange::between(stem, past);
        if !change.is_identity() {
            self.changes.insert(change);
        }
    }

    pub fn len(&self) -> usize {
        self.changes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    pub fn changes(&self) -> impl Iterator<Item = &StemChange> {
        self.changes.iter()
    }

    /// Every form some attested change produces from `stem`.
    pub fn apply_all<'a>(&'a self, stem: &'a [Phoneme]) -> impl Iterator<Item = Vec<Phoneme>> + 'a {
        self.changes.iter().filter_map(move |c| c.apply(stem))
    }
}

fn ends_with_suffix(predicted: &[Phoneme], base: &[Phoneme], suffixes: &[Vec<Phoneme>]) -> bool {
    suffixes
        .iter()
        .any(|s| predicted.len() == base.len() + s.len() && predicted.starts_with(base) && predicted.ends_with(s))
}

/// Labels a past-tense prediction. Checks run in a fixed order, so the
/// labels are exclusive: correct, blend, overregularization,
/// overirregularization, other.
///
/// A blend is a changed stem followed by any past allomorph, where the
/// changed stem is the gold form of an irregular or the output of an
/// attested change, and differs from the stem itself.
pub fn classify_error(
    stem: &[Phoneme],
    gold: &[Phoneme],
    predicted: &[Phoneme],
    lexicon: &IrregularLexicon,
    rules: &EnglishRules,
) -> ErrorLabel {
    if predicted == gold {
        return ErrorLabel::Correct;
    }
    let mut regular = stem.to_vec();
    regular.extend(rules.past_suffix(stem));
    let gold_regular = gold == &regular[..];

    let suffixes = rules.past_suffixes();
    let gold_base = (!gold_regular && gold != stem).then_some(gold);
    let blend = gold_base.is_some_and(|b| ends_with_suffix(predicted, b, &suffixes))
        || lexicon
            .apply_all(stem)
            .any(|c| c != stem && ends_with_suffix(predicted, &c, &suffixes));
    if blend {
        return ErrorLabel::Blend;
    }
    if predicted == &regular[..] {
        return ErrorLabel::Overregularization;
    }
    if gold_regular && lexicon.apply_all(stem).any(|c| c == predicted) {
        return ErrorLabel::Overirregularization;
    }
    ErrorLabel::Other
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonology::PhonemeInventory;

    struct Fixture {
        inv: PhonemeInventory,
        rules: EnglishRules,
        lex: IrregularLexicon,
    }

    impl Fixture {
        fn new(irregulars: &[(&str, &str)]) -> Self {
            let inv = PhonemeInventory::english();
            let rules = EnglishRules::new(&inv).unwrap();
            let mut lex = IrregularLexicon::new();
            for (s, p) in irregulars {
                lex.insert(&tok(&inv, s), &tok(&inv, p));
            }
            Self { inv, rules, lex }
        }

        fn label(&self, stem: &str, gold: &str, predicted: &str) -> ErrorLabel {
            let t = |s| tok(&self.inv, s);
            classify_error(&t(stem), &t(gold), &t(predicted), &self.lex, &self.rules)
        }
    }

    fn tok(inv: &PhonemeInventory, s: &str) -> Vec<Phoneme> {
        inv.tokenize(s).unwrap().into_vec()
    }

    #[test]
    fn reference_examples() {
        let f = Fixture::new(&[("sɪŋ", "sæŋ"), ("θɹoʊ", "θɹuː"), ("iːt", "eɪt")]);
        assert_eq!(f.label("θɹoʊ", "θɹuː", "θɹoʊd"), ErrorLabel::Overregularization);
        assert_eq!(f.label("iːt", "eɪt", "eɪtɪd"), ErrorLabel::Blend);
        assert_eq!(f.label("pɪŋ", "pɪŋd", "pæŋ"), ErrorLabel::Overirregularization);
        assert_eq!(f.label("θɹoʊ", "θɹuː", "θɹuː"), ErrorLabel::Correct);
        assert_eq!(f.label("θɹoʊ", "θɹuː", "θɹæk"), ErrorLabel::Other);
    }

    #[test]
    fn blends_from_the_lexicon_alone() {
        // "brang" + d for bring: the change comes from sing, not from gold.
        let f = Fixture::new(&[("sɪŋ", "sæŋ")]);
        assert_eq!(f.label("bɹɪŋ", "bɹɔt", "bɹæŋd"), ErrorLabel::Blend);
    }

    #[test]
    fn no_change_verbs_overregularize_rather_than_blend() {
        let f = Fixture::new(&[("hɪt", "hɪt")]);
        assert!(f.lex.is_empty());
        assert_eq!(f.label("hɪt", "hɪt", "hɪtɪd"), ErrorLabel::Overregularization);
    }

    #[test]
    fn regular_gold_is_never_a_blend_base() {
        let f = Fixture::new(&[]);
        assert_eq!(f.label("wɔk", "wɔkt", "wɔktɪd"), ErrorLabel::Other);
    }

    #[test]
    fn labels_are_total_and_correct_only_on_match() {
        use rand::Rng as _;
        let f = Fixture::new(&[("sɪŋ", "sæŋ"), ("ɹaɪd", "ɹoʊd")]);
        let mut r = crate::numerics::rng(5);
        let n = f.inv.len() as u16;
        for _ in 0..2000 {
            let word = |r: &mut crate::numerics::Rng, len: usize| -> Vec<Phoneme> {
                (0..len).map(|_| Phoneme(r.gen_range(0..n))).collect()
            };
            let stem = word(&mut r, 3);
            let gold = word(&mut r, 4);
            let pred = if r.gen_bool(0.2) { gold.clone() } else { word(&mut r, 4) };
            let label = classify_error(&stem, &gold, &pred, &f.lex, &f.rules);
            assert_eq!(label == ErrorLabel::Correct, pred == gold);
        }
    }

    #[test]
    fn lexicon_from_corpus_rows() {
        let inv = PhonemeInventory::english();
        let t = |s| inv.tokenize(s).unwrap();
        let pairs = [
            InflectionPair::new(t("sɪŋ"), t("sæŋ"), Tag::Past, false),
            InflectionPair::new(t("sɪŋ"), t("sʌŋ"), Tag::Participle, false),
            InflectionPair::new(t("wɔk"), t("wɔkt"), Tag::Past, true),
        ];
        let lex = IrregularLexicon::from_pairs(&pairs);
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.apply_all(&tok(&inv, "ɹɪŋ")).collect::<Vec<_>>(), [tok(&inv, "ɹæŋ")]);
    }
}
