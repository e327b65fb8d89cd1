//! Deterministic English suffixation rules.

use alloc::vec::Vec;

use crate::phonology::{Phoneme, PhonemeInventory, PhonemeString, PhonologyError};

const VOICELESS: &[&str] = &["p", "t", "k", "f", "θ", "s", "ʃ", "tʃ", "h"];
const SIBILANTS: &[&str] = &["s", "z", "ʃ", "ʒ", "tʃ", "dʒ"];

/// The regular English suffix allomorphs, resolved against one inventory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnglishRules {
    t: Phoneme,
    d: Phoneme,
    s: Phoneme,
    z: Phoneme,
    short_i: Phoneme,
    eng: Phoneme,
    voiceless: Vec<Phoneme>,
    sibilants: Vec<Phoneme>,
}

impl EnglishRules {
    /// Fails if the inventory lacks `t`, `d`, `s`, `z`, `ɪ` or `ŋ`.
    pub fn new(inv: &PhonemeInventory) -> Result<Self, PhonologyError> {
        let pick = |set: &[&str]| set.iter().filter_map(|s| inv.get(s)).collect();
        Ok(Self {
            t: inv.require("t")?,
            d: inv.require("d")?,
            s: inv.require("s")?,
            z: inv.require("z")?,
            short_i: inv.require("ɪ")?,
            eng: inv.require("ŋ")?,
            voiceless: pick(VOICELESS),
            sibilants: pick(SIBILANTS),
        })
    }

    pub fn is_voiceless(&self, p: Phoneme) -> bool {
        self.voiceless.contains(&p)
    }

    pub fn is_sibilant(&self, p: Phoneme) -> bool {
        self.sibilants.contains(&p)
    }

    /// The three past-tense allomorphs `[-t]`, `[-d]`, `[-ɪd]`.
    pub fn past_suffixes(&self) -> [Vec<Phoneme>; 3] {
        [alloc::vec![self.t], alloc::vec![self.d], alloc::vec![self.short_i, self.d]]
    }

    /// `[-ɪd]` after t/d, `[-t]` after other voiceless segments, `[-d]`
    /// otherwise (voiced consonants and vowels).
    pub fn past_suffix(&self, stem: &[Phoneme]) -> Vec<Phoneme> {
        match stem.last() {
            Some(&p) if p == self.t || p == self.d => alloc::vec![self.short_i, self.d],
            Some(&p) if self.is_voiceless(p) => alloc::vec![self.t],
            _ => alloc::vec![self.d],
        }
    }

    pub fn past(&self, stem: &PhonemeString) -> PhonemeString {
        stem.concat(&self.past_suffix(stem.phonemes()))
    }

    /// `[-ɪz]` after sibilants, `[-s]` after voiceless, `[-z]` otherwise.
    pub fn third_singular(&self, stem: &PhonemeString) -> PhonemeString {
        let last = stem.last();
        let suffix = if self.is_sibilant(last) {
            alloc::vec![self.short_i, self.z]
        } else if self.is_voiceless(last) {
            alloc::vec![self.s]
        } else {
            alloc::vec![self.z]
        };
        stem.concat(&suffix)
    }

    pub fn gerund(&self, stem: &PhonemeString) -> PhonemeString {
        stem.concat(&[self.short_i, self.eng])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(inv: &PhonemeInventory, f: impl Fn(&PhonemeString) -> PhonemeString, stem: &str, want: &str) {
        let got = f(&inv.tokenize(stem).unwrap());
        assert_eq!(inv.render(got.phonemes()), want, "{stem}");
    }

    #[test]
    fn past_allomorphs() {
        let inv = PhonemeInventory::english();
        let r = EnglishRules::new(&inv).unwrap();
        for (stem, past) in [
            ("pæt", "pætɪd"),
            ("pæd", "pædɪd"),
            ("sæg", "sægd"),
            ("sæk", "sækt"),
            ("ʃoʊ", "ʃoʊd"),
            ("wʌg", "wʌgd"),
            ("wɔtʃ", "wɔtʃt"),
        ] {
            check(&inv, |s| r.past(s), stem, past);
        }
    }

    #[test]
    fn third_singular_and_gerund() {
        let inv = PhonemeInventory::english();
        let r = EnglishRules::new(&inv).unwrap();
        check(&inv, |s| r.third_singular(s), "wɔk", "wɔks");
        check(&inv, |s| r.third_singular(s), "sæg", "sægz");
        check(&inv, |s| r.third_singular(s), "wɔtʃ", "wɔtʃɪz");
        check(&inv, |s| r.third_singular(s), "goʊ", "goʊz");
        check(&inv, |s| r.gerund(s), "wɔk", "wɔkɪŋ");
    }

    #[test]
    fn missing_rule_phoneme_is_reported() {
        let inv = PhonemeInventory::new(["a", "t"]).unwrap();
        assert!(EnglishRules::new(&inv).is_err());
    }
}
