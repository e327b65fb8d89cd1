use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{Phoneme, PhonemeInventory, PhonologyError, BOUNDARY};

/// Name of the feature reserved for the word edge.
pub const EDGE_FEATURE: &str = "edge";

/// A ternary phonological feature value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureValue {
    Plus,
    Minus,
    Zero,
}

impl FeatureValue {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "+" => Some(Self::Plus),
            "-" | "−" => Some(Self::Minus),
            "0" => Some(Self::Zero),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Plus => "+",
            Self::Minus => "-",
            Self::Zero => "0",
        }
    }
}

/// Either a phoneme or the word boundary, i.e. one slot of a Wickelphone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Segment {
    Boundary,
    Phoneme(Phoneme),
}

/// One attested signed feature value, e.g. `+voiced`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActiveValue {
    pub feature: u16,
    pub positive: bool,
}

/// Phonological feature rows for every inventory phoneme and the boundary.
///
/// The non-zero `(feature, sign)` pairs attested anywhere in the table are
/// numbered once at construction; a Wickelfeature is then a triple of those
/// numbers, so `|F| = values³`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureTable {
    names: Vec<String>,
    /// One row per inventory phoneme, then the boundary row.
    rows: Vec<Vec<FeatureValue>>,
    values: Vec<ActiveValue>,
    /// Per segment (same order as `rows`), ids into `values`.
    active: Vec<Vec<u16>>,
}

impl FeatureTable {
    /// Builds a table over `inv` from named rows.
    ///
    /// Rows for symbols outside the inventory are ignored. When the
    /// boundary row is absent an `edge` feature is appended, zero for every
    /// phoneme and `+` for the boundary.
    pub fn new(
        inv: &PhonemeInventory,
        names: Vec<String>,
        rows: Vec<(String, Vec<FeatureValue>)>,
    ) -> Result<Self, PhonologyError> {
        let width = names.len();
        let mut slots: Vec<Option<Vec<FeatureValue>>> = vec![None; inv.len() + 1];
        for (sym, row) in rows {
            if row.len() != width {
                return Err(PhonologyError::RowLength {
                    symbol: sym,
                    expected: width,
                    found: row.len(),
                });
            }
            let slot = if sym == BOUNDARY {
                inv.len()
            } else {
                match inv.get(&sym) {
                    Some(p) => p.index(),
                    None => continue,
                }
            };
            if slots[slot].is_some() {
                return Err(PhonologyError::DuplicateRow(sym));
            }
            slots[slot] = Some(row);
        }

        let mut names = names;
        if slots[inv.len()].is_none() {
            let edge = match names.iter().position(|n| n == EDGE_FEATURE) {
                Some(i) => i,
                None => {
                    names.push(EDGE_FEATURE.to_string());
                    for row in slots.iter_mut().flatten() {
                        row.push(FeatureValue::Zero);
                    }
                    names.len() - 1
                }
            };
            let mut row = vec![FeatureValue::Zero; names.len()];
            row[edge] = FeatureValue::Plus;
            slots[inv.len()] = Some(row);
        }

        let mut rows = Vec::with_capacity(slots.len());
        for (i, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(r) => rows.push(r),
                None => {
                    return Err(PhonologyError::MissingRow(
                        inv.symbol(Phoneme(i as u16)).to_string(),
                    ))
                }
            }
        }
        Ok(Self::index(names, rows))
    }

    fn index(names: Vec<String>, rows: Vec<Vec<FeatureValue>>) -> Self {
        let mut values = Vec::new();
        for f in 0..names.len() {
            for positive in [true, false] {
                let want = if positive {
                    FeatureValue::Plus
                } else {
                    FeatureValue::Minus
                };
                if rows.iter().any(|r| r[f] == want) {
                    values.push(ActiveValue {
                        feature: f as u16,
                        positive,
                    });
                }
            }
        }
        let active = rows
            .iter()
            .map(|r| {
                values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| {
                        let cell = r[usize::from(v.feature)];
                        (v.positive && cell == FeatureValue::Plus)
                            || (!v.positive && cell == FeatureValue::Minus)
                    })
                    .map(|(i, _)| i as u16)
                    .collect()
            })
            .collect();
        Self {
            names,
            rows,
            values,
            active,
        }
    }

    /// The bundled 16-feature English table (plus `edge`) over
    /// [`PhonemeInventory::english`]-compatible symbols.
    ///
    /// Features are privative: each phoneme is `+` on its manner, class,
    /// place and voicing (or length) values and `0` elsewhere.
    pub fn english(inv: &PhonemeInventory) -> Result<Self, PhonologyError> {
        let names: Vec<String> = ENGLISH_FEATURES.iter().map(|s| s.to_string()).collect();
        let rows = ENGLISH_ROWS
            .iter()
            .map(|(sym, plus)| {
                let row = ENGLISH_FEATURES
                    .iter()
                    .map(|f| {
                        if plus.contains(f) {
                            FeatureValue::Plus
                        } else {
                            FeatureValue::Zero
                        }
                    })
                    .collect();
                (sym.to_string(), row)
            })
            .collect();
        Self::new(inv, names, rows)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Number of attested signed values per Wickelfeature slot.
    pub fn value_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[ActiveValue] {
        &self.values
    }

    /// `|F|`, the Wickelfeature vector length.
    pub fn wickelfeature_count(&self) -> usize {
        let v = self.values.len();
        v * v * v
    }

    fn slot(&self, seg: Segment) -> usize {
        match seg {
            Segment::Boundary => self.rows.len() - 1,
            Segment::Phoneme(p) => p.index(),
        }
    }

    pub fn row(&self, seg: Segment) -> &[FeatureValue] {
        &self.rows[self.slot(seg)]
    }

    /// Ids (into [`values`](Self::values)) of the signed values `seg` carries.
    pub fn active_values(&self, seg: Segment) -> &[u16] {
        &self.active[self.slot(seg)]
    }

    pub fn value(&self, seg: Segment, feature: usize) -> FeatureValue {
        self.row(seg)[feature]
    }

    /// True if the phoneme is `+` on a `vowel` (or `syllabic`) feature.
    pub fn is_vowel(&self, p: Phoneme) -> bool {
        ["vowel", "syllabic"].iter().any(|name| {
            self.feature_index(name)
                .is_some_and(|f| self.value(Segment::Phoneme(p), f) == FeatureValue::Plus)
        })
    }

    /// Flat index of the Wickelfeature `(left, center, right)`.
    pub fn triple_index(&self, left: u16, center: u16, right: u16) -> usize {
        let v = self.values.len();
        (usize::from(left) * v + usize::from(center)) * v + usize::from(right)
    }

    /// Inverse of [`triple_index`](Self::triple_index).
    pub fn triple(&self, index: usize) -> [ActiveValue; 3] {
        let v = self.values.len();
        [
            self.values[index / (v * v)],
            self.values[(index / v) % v],
            self.values[index % v],
        ]
    }

    /// Human-readable name of a signed value, e.g. `+voiced`.
    pub fn value_name(&self, value: ActiveValue) -> String {
        let mut s = String::from(if value.positive { "+" } else { "-" });
        s.push_str(&self.names[usize::from(value.feature)]);
        s
    }
}

pub const ENGLISH_FEATURES: &[&str] = &[
    "interrupted",
    "continuous",
    "vowel",
    "stop",
    "nasal",
    "fricative",
    "sonorant",
    "high",
    "low",
    "front",
    "middle",
    "back",
    "voiced",
    "unvoiced",
    "long",
    "short",
];

type Row = (&'static str, &'static [&'static str]);

#[rustfmt::skip]
const ENGLISH_ROWS: &[Row] = &[
    ("p", &["interrupted", "stop", "front", "unvoiced"]),
    ("b", &["interrupted", "stop", "front", "voiced"]),
    ("t", &["interrupted", "stop", "middle", "unvoiced"]),
    ("d", &["interrupted", "stop", "middle", "voiced"]),
    ("k", &["interrupted", "stop", "back", "unvoiced"]),
    ("g", &["interrupted", "stop", "back", "voiced"]),
    ("tʃ", &["interrupted", "stop", "fricative", "back", "unvoiced"]),
    ("dʒ", &["interrupted", "stop", "fricative", "back", "voiced"]),
    ("m", &["interrupted", "nasal", "front", "voiced"]),
    ("n", &["interrupted", "nasal", "middle", "voiced"]),
    ("ŋ", &["interrupted", "nasal", "back", "voiced"]),
    ("f", &["continuous", "fricative", "front", "unvoiced"]),
    ("v", &["continuous", "fricative", "front", "voiced"]),
    ("θ", &["continuous", "fricative", "middle", "unvoiced"]),
    ("ð", &["continuous", "fricative", "middle", "voiced"]),
    ("s", &["continuous", "fricative", "middle", "unvoiced"]),
    ("z", &["continuous", "fricative", "middle", "voiced"]),
    ("ʃ", &["continuous", "fricative", "back", "unvoiced"]),
    ("ʒ", &["continuous", "fricative", "back", "voiced"]),
    ("h", &["continuous", "fricative", "back", "unvoiced"]),
    ("l", &["continuous", "sonorant", "middle", "voiced"]),
    ("r", &["continuous", "sonorant", "middle", "voiced"]),
    ("ɹ", &["continuous", "sonorant", "middle", "voiced"]),
    ("w", &["continuous", "sonorant", "front", "voiced"]),
    ("j", &["continuous", "sonorant", "back", "voiced"]),
    ("i", &["vowel", "high", "front", "voiced", "short"]),
    ("iː", &["vowel", "high", "front", "voiced", "long"]),
    ("ɪ", &["vowel", "high", "front", "voiced", "short"]),
    ("e", &["vowel", "front", "voiced", "short"]),
    ("eɪ", &["vowel", "front", "voiced", "long"]),
    ("ɛ", &["vowel", "front", "voiced", "short"]),
    ("æ", &["vowel", "low", "front", "voiced", "short"]),
    ("a", &["vowel", "low", "middle", "voiced", "short"]),
    ("aɪ", &["vowel", "low", "middle", "voiced", "long"]),
    ("aʊ", &["vowel", "low", "back", "voiced", "long"]),
    ("ɑ", &["vowel", "low", "back", "voiced", "short"]),
    ("ɑː", &["vowel", "low", "back", "voiced", "long"]),
    ("ɒ", &["vowel", "low", "back", "voiced", "short"]),
    ("ɔ", &["vowel", "back", "voiced", "short"]),
    ("ɔː", &["vowel", "back", "voiced", "long"]),
    ("ɔɪ", &["vowel", "back", "voiced", "long"]),
    ("o", &["vowel", "back", "voiced", "short"]),
    ("oʊ", &["vowel", "back", "voiced", "long"]),
    ("ʊ", &["vowel", "high", "back", "voiced", "short"]),
    ("u", &["vowel", "high", "back", "voiced", "short"]),
    ("uː", &["vowel", "high", "back", "voiced", "long"]),
    ("ʌ", &["vowel", "middle", "voiced", "short"]),
    ("ə", &["vowel", "middle", "voiced", "short"]),
    ("ɜː", &["vowel", "middle", "voiced", "long"]),
    ("ɝ", &["vowel", "middle", "voiced", "long"]),
    ("ɚ", &["vowel", "middle", "voiced", "short"]),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn english_table_covers_inventory() {
        let inv = PhonemeInventory::english();
        let ft = FeatureTable::english(&inv).unwrap();
        assert_eq!(ft.feature_names().len(), 17);
        assert_eq!(ft.feature_names().last().unwrap(), EDGE_FEATURE);
        // 16 privative features plus edge, all attested only as `+`.
        assert_eq!(ft.value_count(), 17);
        assert_eq!(ft.wickelfeature_count(), 17 * 17 * 17);
        assert_eq!(ft.active_values(Segment::Boundary).len(), 1);
        for p in 0..inv.len() {
            let seg = Segment::Phoneme(Phoneme(p as u16));
            assert_eq!(ft.row(seg).len(), 17);
            assert!(!ft.active_values(seg).is_empty());
        }
        assert!(ft.is_vowel(inv.get("æ").unwrap()));
        assert!(!ft.is_vowel(inv.get("k").unwrap()));
    }

    #[test]
    fn missing_row_is_an_error() {
        let inv = PhonemeInventory::new(["a", "b"]).unwrap();
        let err = FeatureTable::new(
            &inv,
            alloc::vec!["vowel".into()],
            alloc::vec![("a".into(), alloc::vec![FeatureValue::Plus])],
        )
        .unwrap_err();
        assert_eq!(err, PhonologyError::MissingRow("b".into()));
    }

    #[test]
    fn minus_values_count_as_separate_slots() {
        let inv = PhonemeInventory::new(["a", "b"]).unwrap();
        let ft = FeatureTable::new(
            &inv,
            alloc::vec!["vowel".into()],
            alloc::vec![
                ("a".into(), alloc::vec![FeatureValue::Plus]),
                ("b".into(), alloc::vec![FeatureValue::Minus]),
            ],
        )
        .unwrap();
        // +vowel, -vowel, +edge
        assert_eq!(ft.value_count(), 3);
        let idx = ft.triple_index(2, 0, 1);
        let [l, c, r] = ft.triple(idx);
        assert_eq!(ft.value_name(l), "+edge");
        assert_eq!(ft.value_name(c), "+vowel");
        assert_eq!(ft.value_name(r), "-vowel");
    }
}
