use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{FeatureTable, PhonemeInventory, PhonemeString, PhonologyError, Segment};

/// A boundary-padded phoneme trigram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Wickelphone {
    pub left: Segment,
    pub center: Segment,
    pub right: Segment,
}

/// The set of Wickelphones firing on `x`: one trigram per phoneme of
/// `#x#`, deduplicated.
pub fn wickelphones(x: &PhonemeString) -> BTreeSet<Wickelphone> {
    let p = x.phonemes();
    let seg = |i: isize| -> Segment {
        if i < 0 || i as usize >= p.len() {
            Segment::Boundary
        } else {
            Segment::Phoneme(p[i as usize])
        }
    };
    (0..p.len() as isize)
        .map(|i| Wickelphone {
            left: seg(i - 1),
            center: seg(i),
            right: seg(i + 1),
        })
        .collect()
}

/// A point of `{-1, +1}^|F|`, stored as the sorted indices of its `+1`
/// entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WickelfeatureVector {
    len: usize,
    active: Vec<u32>,
}

impl WickelfeatureVector {
    /// The all-`-1` vector.
    pub fn empty(len: usize) -> Self {
        Self {
            len,
            active: Vec::new(),
        }
    }

    /// Builds a vector from the indices of its `+1` entries (any order,
    /// duplicates allowed).
    pub fn from_active(len: usize, mut active: Vec<u32>) -> Self {
        active.sort_unstable();
        active.dedup();
        assert!(
            active.last().is_none_or(|&j| (j as usize) < len),
            "active index out of range"
        );
        Self { len, active }
    }

    /// Builds a vector from a dense sign pattern; positive entries map to `+1`.
    pub fn from_signs(signs: &[f64]) -> Self {
        let active = signs
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0.0)
            .map(|(j, _)| j as u32)
            .collect();
        Self {
            len: signs.len(),
            active,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn active(&self) -> &[u32] {
        &self.active
    }

    pub fn is_active(&self, j: usize) -> bool {
        self.active.binary_search(&(j as u32)).is_ok()
    }

    /// Entry `j` as `+1` or `-1`.
    pub fn sign(&self, j: usize) -> i8 {
        if self.is_active(j) {
            1
        } else {
            -1
        }
    }

    pub fn to_signs(&self) -> Vec<f64> {
        let mut v = alloc::vec![-1.0; self.len];
        for &j in &self.active {
            v[j as usize] = 1.0;
        }
        v
    }

    /// Number of coordinates where the two vectors differ, i.e. the L0
    /// distance of their difference.
    pub fn hamming(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len, "length mismatch");
        let (a, b) = (&self.active, &other.active);
        let (mut i, mut j, mut shared) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    shared += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        a.len() + b.len() - 2 * shared
    }
}

/// Maps a Wickelphone set to its Wickelfeatures: bit `(l, c, r)` is `+1` iff
/// some Wickelphone's left, center and right segments carry values `l`, `c`
/// and `r` respectively.
pub fn wickelfeatures<'a, I>(phones: I, ft: &FeatureTable) -> WickelfeatureVector
where
    I: IntoIterator<Item = &'a Wickelphone>,
{
    let mut active = Vec::new();
    for wp in phones {
        for &l in ft.active_values(wp.left) {
            for &c in ft.active_values(wp.center) {
                for &r in ft.active_values(wp.right) {
                    active.push(ft.triple_index(l, c, r) as u32);
                }
            }
        }
    }
    WickelfeatureVector::from_active(ft.wickelfeature_count(), active)
}

/// The full string encoding: Wickelphones first, then Wickelfeatures.
pub fn encode(x: &PhonemeString, ft: &FeatureTable) -> WickelfeatureVector {
    wickelfeatures(&wickelphones(x), ft)
}

/// [`encode`] on raw IPA text.
pub fn encode_text(
    raw: &str,
    inv: &PhonemeInventory,
    ft: &FeatureTable,
) -> Result<WickelfeatureVector, PhonologyError> {
    Ok(encode(&inv.tokenize(raw)?, ft))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phonology::Phoneme;
    use proptest::prelude::*;

    fn setup() -> (PhonemeInventory, FeatureTable) {
        let inv = PhonemeInventory::english();
        let ft = FeatureTable::english(&inv).unwrap();
        (inv, ft)
    }

    fn wp(inv: &PhonemeInventory, l: &str, c: &str, r: &str) -> Wickelphone {
        let s = |x: &str| {
            if x == "#" {
                Segment::Boundary
            } else {
                Segment::Phoneme(inv.get(x).unwrap())
            }
        };
        Wickelphone {
            left: s(l),
            center: s(c),
            right: s(r),
        }
    }

    #[test]
    fn cat_has_three_wickelphones() {
        let (inv, _) = setup();
        let got = wickelphones(&inv.tokenize("kæt").unwrap());
        let want: BTreeSet<_> = [
            wp(&inv, "#", "k", "æ"),
            wp(&inv, "k", "æ", "t"),
            wp(&inv, "æ", "t", "#"),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn reduplication_is_invisible() {
        let (inv, ft) = setup();
        let a = inv.tokenize("algal").unwrap();
        let b = inv.tokenize("algalgal").unwrap();
        let want: BTreeSet<_> = [
            wp(&inv, "#", "a", "l"),
            wp(&inv, "a", "l", "g"),
            wp(&inv, "l", "g", "a"),
            wp(&inv, "g", "a", "l"),
            wp(&inv, "a", "l", "#"),
        ]
        .into_iter()
        .collect();
        assert_eq!(wickelphones(&a), want);
        assert_eq!(wickelphones(&b), want);
        assert_eq!(encode(&a, &ft), encode(&b, &ft));
    }

    #[test]
    fn metathesis_gives_disjoint_sets() {
        let (inv, _) = setup();
        let a = wickelphones(&inv.tokenize("slɪt").unwrap());
        let b = wickelphones(&inv.tokenize("sɪlt").unwrap());
        assert_eq!(a.len(), 4);
        assert_eq!(b.len(), 4);
        assert!(a.is_disjoint(&b));
    }

    #[test]
    fn empty_set_is_all_negative() {
        let (_, ft) = setup();
        let v = wickelfeatures(&BTreeSet::new(), &ft);
        assert!(v.active().is_empty());
        assert!(v.to_signs().iter().all(|&s| s == -1.0));
    }

    #[test]
    fn ipt_activates_the_textbook_triples() {
        let (inv, ft) = setup();
        let v = wickelfeatures(&[wp(&inv, "i", "p", "t")], &ft);
        let id = |name: &str| {
            let f = ft.feature_index(name).unwrap() as u16;
            ft.values()
                .iter()
                .position(|a| a.feature == f && a.positive)
                .unwrap() as u16
        };
        assert!(v.is_active(ft.triple_index(id("vowel"), id("unvoiced"), id("interrupted"))));
        assert!(v.is_active(ft.triple_index(id("high"), id("stop"), id("stop"))));
        assert!(!v.is_active(ft.triple_index(id("low"), id("stop"), id("stop"))));
    }

    #[test]
    fn single_wickelphone_sets_product_of_active_counts() {
        let (inv, ft) = setup();
        for (l, c, r) in [("#", "k", "æ"), ("s", "t", "r"), ("aɪ", "d", "#"), ("i", "p", "t")] {
            let w = wp(&inv, l, c, r);
            let v = wickelfeatures(&[w], &ft);
            // Brute force: enumerate every triple of |F| and test membership
            // against the per-slot active value lists.
            let act = |s: Segment| -> BTreeSet<u16> { ft.active_values(s).iter().copied().collect() };
            let (al, ac, ar) = (act(w.left), act(w.center), act(w.right));
            let mut brute = 0;
            for j in 0..ft.wickelfeature_count() {
                let vc = ft.value_count();
                let (a, b, c) = (j / (vc * vc), (j / vc) % vc, j % vc);
                if al.contains(&(a as u16)) && ac.contains(&(b as u16)) && ar.contains(&(c as u16)) {
                    brute += 1;
                }
            }
            assert_eq!(v.active().len(), brute);
            assert_eq!(brute, al.len() * ac.len() * ar.len());
        }
    }

    #[test]
    fn metathesis_hamming_matches_set_oracle() {
        let (inv, ft) = setup();
        let x = inv.tokenize("slɪt").unwrap();
        let y = inv.tokenize("sɪlt").unwrap();
        // Oracle: build the activated triples as sets straight from the
        // feature rows, then compare dense vectors coordinate-wise.
        let triples = |s: &PhonemeString| -> BTreeSet<usize> {
            let mut out = BTreeSet::new();
            for w in wickelphones(s) {
                for &a in ft.active_values(w.left) {
                    for &b in ft.active_values(w.center) {
                        for &c in ft.active_values(w.right) {
                            out.insert(ft.triple_index(a, b, c));
                        }
                    }
                }
            }
            out
        };
        let (tx, ty) = (triples(&x), triples(&y));
        let dense = |t: &BTreeSet<usize>| -> Vec<i8> {
            (0..ft.wickelfeature_count())
                .map(|j| if t.contains(&j) { 1 } else { -1 })
                .collect()
        };
        let (dx, dy) = (dense(&tx), dense(&ty));
        let oracle = dx.iter().zip(&dy).filter(|(a, b)| a != b).count();
        assert_eq!(encode(&x, &ft).hamming(&encode(&y, &ft)), oracle);
        assert!(oracle > 0);
    }

    fn phoneme_string(n: usize) -> impl Strategy<Value = PhonemeString> {
        let len = PhonemeInventory::english().len() as u16;
        proptest::collection::vec(0..len, 1..n)
            .prop_map(|v| PhonemeString::new(v.into_iter().map(Phoneme).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn encoding_is_pure_and_signed(x in phoneme_string(9)) {
            let (_, ft) = setup();
            let a = encode(&x, &ft);
            let b = encode(&x, &ft);
            prop_assert_eq!(&a, &b);
            prop_assert!(a.to_signs().iter().all(|&s| s == 1.0 || s == -1.0));
            prop_assert!(wickelphones(&x).len() <= x.len());
        }

        #[test]
        fn wickelfeatures_are_monotone(x in phoneme_string(8), y in phoneme_string(8)) {
            let (_, ft) = setup();
            let small = wickelphones(&x);
            let mut big = small.clone();
            big.extend(wickelphones(&y));
            let fs = wickelfeatures(&small, &ft);
            let fb = wickelfeatures(&big, &ft);
            prop_assert!(fs.active().iter().all(|&j| fb.is_active(j as usize)));
        }
    }

    #[test]
    fn encode_text_propagates_tokenizer_errors() {
        let (inv, ft) = setup();
        assert!(encode_text("kæt", &inv, &ft).is_ok());
        assert!(matches!(
            encode_text("kæ!", &inv, &ft),
            Err(PhonologyError::UnknownSymbol { offset: 2, .. })
        ));
    }
}
