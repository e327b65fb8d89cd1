use alloc::vec::Vec;

use super::{FeatureTable, Phoneme};

/// A string rewrite `from -> to` anchored before a fixed right context at
/// the end of the word, extracted from one stem/form pair.
///
/// `sɪŋ -> sæŋ` gives `ɪ -> æ / _ŋ#`; `goʊ -> wɛnt` gives a whole-word
/// replacement; `hɪt -> hɪt` gives the identity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StemChange {
    pub from: Vec<Phoneme>,
    pub to: Vec<Phoneme>,
    pub context: Vec<Phoneme>,
}

impl StemChange {
    /// Strips the longest common prefix, then the longest common suffix of
    /// what remains.
    pub fn between(stem: &[Phoneme], form: &[Phoneme]) -> Self {
        let prefix = stem.iter().zip(form).take_while(|(a, b)| a == b).count();
        let (s, f) = (&stem[prefix..], &form[prefix..]);
        let suffix = s
            .iter()
            .rev()
            .zip(f.iter().rev())
            .take_while(|(a, b)| a == b)
            .count();
        Self {
            from: s[..s.len() - suffix].to_vec(),
            to: f[..f.len() - suffix].to_vec(),
            context: s[s.len() - suffix..].to_vec(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.from == self.to
    }

    /// Rewrites `stem` if it ends in `from ++ context`.
    pub fn apply(&self, stem: &[Phoneme]) -> Option<Vec<Phoneme>> {
        let tail = self.from.len() + self.context.len();
        if stem.len() < tail {
            return None;
        }
        let cut = stem.len() - tail;
        if stem[cut..cut + self.from.len()] != self.from[..] || stem[cut + self.from.len()..] != self.context[..] {
            return None;
        }
        let mut out = stem[..cut].to_vec();
        out.extend_from_slice(&self.to);
        out.extend_from_slice(&self.context);
        Some(out)
    }
}

/// The final vowel and everything after it; the whole string when it has no
/// vowel.
pub fn rime<'a>(x: &'a [Phoneme], ft: &FeatureTable) -> &'a [Phoneme] {
    match x.iter().rposition(|&p| ft.is_vowel(p)) {
        Some(i) => &x[i..],
        None => x,
    }
}
