use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use super::{DatasetError, InflectionPair, Tag};
use crate::phonology::PhonemeInventory;

/// Parses corpus rows: `lemma<TAB>form<TAB>tag<TAB>regular|irregular`,
/// with an optional fifth frequency column. Blank lines and lines starting
/// with `#` are skipped; `row` in errors is the 1-based line number.
pub fn parse_tsv(text: &str, inv: &PhonemeInventory) -> Result<Vec<InflectionPair>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if !(4..=5).contains(&cols.len()) {
            return Err(DatasetError::Parse {
                row,
                reason: format!("expected 4 or 5 tab-separated columns, found {}", cols.len()),
            });
        }
        let tok = |s: &str| inv.tokenize(s).map_err(|source| DatasetError::UnknownSymbol { row, source });
        let lemma = tok(cols[0])?;
        let form = tok(cols[1])?;
        let tag: Tag = cols[2].parse().map_err(|reason| DatasetError::Parse { row, reason })?;
        let regular = match cols[3] {
            "regular" => true,
            "irregular" => false,
            other => {
                return Err(DatasetError::Parse {
                    row,
                    reason: format!("regularity must be 'regular' or 'irregular', found {other:?}"),
                })
            }
        };
        let frequency = match cols.get(4) {
            None => None,
            Some(f) => Some(f.trim().parse::<f64>().map_err(|e| DatasetError::Parse {
                row,
                reason: format!("bad frequency {f:?}: {e}"),
            })?),
        };
        out.push(InflectionPair {
            lemma,
            form,
            tag,
            regular,
            frequency,
        });
    }
    Ok(out)
}

/// Inverse of [`parse_tsv`], one row per pair.
pub fn write_tsv(pairs: &[InflectionPair], inv: &PhonemeInventory) -> String {
    let mut out = String::new();
    for p in pairs {
        let _ = write!(
            out,
            "{}\t{}\t{}\t{}",
            inv.display(p.lemma.phonemes()),
            inv.display(p.form.phonemes()),
            p.tag,
            if p.regular { "regular" } else { "irregular" }
        );
        if let Some(f) = p.frequency {
            out.push('\t');
            out.push_str(&f.to_string());
        }
        out.push('\n');
    }
    out
}
