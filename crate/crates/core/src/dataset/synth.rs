use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::{DatasetError, InflectionPair, Tag};
use crate::inflection::EnglishRules;
use crate::numerics::{rng, Rng};
use crate::phonology::{Phoneme, PhonemeInventory, PhonemeString};

const ONSETS: &[&str] = &[
    "p", "b", "t", "d", "k", "g", "f", "v", "s", "z", "ʃ", "h", "m", "n", "l", "ɹ", "w", "j", "tʃ", "dʒ", "θ", "pl",
    "pɹ", "bl", "bɹ", "tɹ", "dɹ", "kl", "kɹ", "gl", "gɹ", "fl", "fɹ", "sl", "sp", "st", "sk", "sm", "sn", "sw", "θɹ",
    "ʃɹ", "spɹ", "stɹ", "skɹ", "tw", "kw",
];
const LAX_VOWELS: &[&str] = &["ɪ", "ɛ", "æ", "ʌ", "ʊ", "ɑ"];
const TENSE_VOWELS: &[&str] = &["i", "eɪ", "ɔ", "oʊ", "uː", "aɪ", "aʊ", "ɔɪ"];
const CODAS: &[&str] = &[
    "p", "b", "t", "d", "k", "g", "f", "v", "θ", "s", "z", "ʃ", "tʃ", "dʒ", "m", "n", "ŋ", "l", "ɹ", "st", "sk", "mp",
    "nt", "nd", "ŋk", "lp", "lt", "ld", "lk", "ɹt", "ɹd", "ɹk", "ɹm", "ɹn", "ks", "ft", "ʃt",
];
const PREFIXES: &[&str] = &["ə", "bɪ", "dɪ", "ɹi", "kən", "ɪn", "ɛk", "ɑd", "pɹə", "ʌn"];

/// The sub-regular patterns the generator plants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IrregularClass {
    /// `ɪ` before a nasal: `ɪ → æ` in the past, `ʌ` in the participle
    /// (sing, sang, sung).
    NasalAblaut,
    /// `ɪ` before a velar: `ɪ → ʌ` in both (dig, dug).
    VelarAblaut,
    /// `aɪ` + consonant: past `oʊ`, participle `ɪ ... ən` (ride, rode,
    /// ridden).
    RiseRose,
    /// `eɪk`: past `ʊk`, participle `+ən` (take, took, taken).
    TakeTook,
    /// Final `oʊ`: past `uː`, participle `+n` (blow, blew, blown).
    BlowBlew,
    /// Lax vowel + `t`/`d`: all forms identical (hit, hit, hit).
    NoChange,
    /// Unrelated past and participle (go, went, gone).
    Suppletive,
}

impl IrregularClass {
    pub const ALL: [IrregularClass; 7] = [
        IrregularClass::NasalAblaut,
        IrregularClass::VelarAblaut,
        IrregularClass::RiseRose,
        IrregularClass::TakeTook,
        IrregularClass::BlowBlew,
        IrregularClass::NoChange,
        IrregularClass::Suppletive,
    ];

    /// Relative frequency among generated irregulars, in percent.
    fn weight(self) -> u32 {
        match self {
            IrregularClass::NasalAblaut => 20,
            IrregularClass::VelarAblaut => 15,
            IrregularClass::RiseRose => 20,
            IrregularClass::TakeTook => 10,
            IrregularClass::BlowBlew => 15,
            IrregularClass::NoChange => 15,
            IrregularClass::Suppletive => 5,
        }
    }
}

/// Size and composition of a synthetic corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthConfig {
    /// Verb types (lemmas); each yields one row per tag.
    pub types: usize,
    /// How many of them are irregular.
    pub irregular: usize,
    pub seed: u64,
}

impl SynthConfig {
    /// 4039 types of which 168 irregular.
    pub fn paper_profile(seed: u64) -> Self {
        Self {
            types: 4039,
            irregular: 168,
            seed,
        }
    }
}

struct Pieces<'a> {
    inv: &'a PhonemeInventory,
}

impl Pieces<'_> {
    fn get(&self, s: &str) -> Result<Vec<Phoneme>, DatasetError> {
        if s.is_empty() {
            return Ok(Vec::new());
        }
        Ok(self.inv.tokenize(s).map_err(DatasetError::Inventory)?.into_vec())
    }

    fn pick(&self, r: &mut Rng, set: &[&str]) -> Result<Vec<Phoneme>, DatasetError> {
        self.get(set.choose(r).expect("non-empty piece list"))
    }

    fn join(parts: &[&[Phoneme]]) -> Vec<Phoneme> {
        parts.concat()
    }

    /// Onset + vowel + optional coda, sometimes after an unstressed prefix.
    fn regular_stem(&self, r: &mut Rng) -> Result<Vec<Phoneme>, DatasetError> {
        let prefix = if r.gen_bool(0.25) { self.pick(r, PREFIXES)? } else { Vec::new() };
        let onset = if r.gen_bool(0.9) { self.pick(r, ONSETS)? } else { Vec::new() };
        let (vowel, coda) = if r.gen_bool(0.15) {
            (self.pick(r, TENSE_VOWELS)?, Vec::new())
        } else if r.gen_bool(0.6) {
            (self.pick(r, LAX_VOWELS)?, self.pick(r, CODAS)?)
        } else {
            (self.pick(r, TENSE_VOWELS)?, self.pick(r, CODAS)?)
        };
        if prefix.is_empty() && onset.is_empty() && coda.is_empty() {
            return self.regular_stem(r);
        }
        Ok(Self::join(&[&prefix, &onset, &vowel, &coda]))
    }

    /// Stem, past and participle for one irregular class.
    fn irregular(&self, r: &mut Rng, class: IrregularClass) -> Result<[Vec<Phoneme>; 3], DatasetError> {
        let onset = self.pick(r, ONSETS)?;
        let g = |s| self.get(s);
        Ok(match class {
            IrregularClass::NasalAblaut => {
                let coda = self.pick(r, &["ŋ", "m", "n"])?;
                [
                    Self::join(&[&onset, &g("ɪ")?, &coda]),
                    Self::join(&[&onset, &g("æ")?, &coda]),
                    Self::join(&[&onset, &g("ʌ")?, &coda]),
                ]
            }
            IrregularClass::VelarAblaut => {
                let coda = self.pick(r, &["k", "g", "ŋk"])?;
                let past = Self::join(&[&onset, &g("ʌ")?, &coda]);
                [Self::join(&[&onset, &g("ɪ")?, &coda]), past.clone(), past]
            }
            IrregularClass::RiseRose => {
                let coda = self.pick(r, &["v", "d", "z", "t", "m"])?;
                [
                    Self::join(&[&onset, &g("aɪ")?, &coda]),
                    Self::join(&[&onset, &g("oʊ")?, &coda]),
                    Self::join(&[&onset, &g("ɪ")?, &coda, &g("ən")?]),
                ]
            }
            IrregularClass::TakeTook => {
                let stem = Self::join(&[&onset, &g("eɪk")?]);
                [
                    stem.clone(),
                    Self::join(&[&onset, &g("ʊk")?]),
                    Self::join(&[&stem, &g("ən")?]),
                ]
            }
            IrregularClass::BlowBlew => {
                let stem = Self::join(&[&onset, &g("oʊ")?]);
                [stem.clone(), Self::join(&[&onset, &g("uː")?]), Self::join(&[&stem, &g("n")?])]
            }
            IrregularClass::NoChange => {
                let stem = Self::join(&[&onset, &self.pick(r, &["ɪ", "ʌ", "ɛ", "æ"])?, &self.pick(r, &["t", "d"])?]);
                [stem.clone(), stem.clone(), stem]
            }
            IrregularClass::Suppletive => {
                let stem = self.regular_stem(r)?;
                let past = self.regular_stem(r)?;
                let participle = if r.gen_bool(0.5) { past.clone() } else { self.regular_stem(r)? };
                [stem, past, participle]
            }
        })
    }
}

fn pick_class(r: &mut Rng) -> IrregularClass {
    let total: u32 = IrregularClass::ALL.iter().map(|c| c.weight()).sum();
    let mut x = r.gen_range(0..total);
    for c in IrregularClass::ALL {
        if x < c.weight() {
            return c;
        }
        x -= c.weight();
    }
    unreachable!("weights cover the range")
}

fn ps(v: Vec<Phoneme>) -> PhonemeString {
    PhonemeString::new(v).expect("generated strings are non-empty")
}

/// English-like verbs with all four tags. Regular verbs follow the suffix
/// rules; irregulars are drawn from [`IrregularClass`] and keep regular
/// gerunds and third-singular forms. Lemmas are distinct; an irregular
/// whose regular past would coincide with its listed past is redrawn.
/// Output order is lemma by lemma, tags in [`Tag::ALL`] order.
pub fn synth_corpus(cfg: &SynthConfig, inv: &PhonemeInventory) -> Result<Vec<InflectionPair>, DatasetError> {
    if cfg.irregular > cfg.types {
        return Err(DatasetError::TooManyIrregulars {
            irregular: cfg.irregular,
            types: cfg.types,
        });
    }
    let rules = EnglishRules::new(inv).map_err(DatasetError::Inventory)?;
    let pieces = Pieces { inv };
    let mut r = rng(cfg.seed);
    let mut irregular_slots: Vec<bool> = (0..cfg.types).map(|i| i < cfg.irregular).collect();
    irregular_slots.shuffle(&mut r);

    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(4 * cfg.types);
    for irregular in irregular_slots {
        let (stem, past, participle) = loop {
            if irregular {
                let class = pick_class(&mut r);
                let [stem, past, participle] = pieces.irregular(&mut r, class)?;
                let stem = ps(stem);
                if rules.past(&stem).phonemes() == &past[..] || seen.contains(&stem) {
                    continue;
                }
                break (stem, ps(past), ps(participle));
            }
            let stem = ps(pieces.regular_stem(&mut r)?);
            if seen.contains(&stem) {
                continue;
            }
            let past = rules.past(&stem);
            break (stem, past.clone(), past);
        };
        seen.insert(stem.clone());
        let regular = !irregular;
        out.push(InflectionPair::new(stem.clone(), past, Tag::Past, regular));
        out.push(InflectionPair::new(stem.clone(), rules.gerund(&stem), Tag::Gerund, true));
        out.push(InflectionPair::new(stem.clone(), participle, Tag::Participle, regular));
        out.push(InflectionPair::new(stem.clone(), rules.third_singular(&stem), Tag::ThirdSingular, true));
    }
    Ok(out)
}
