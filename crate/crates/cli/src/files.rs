//! Reading inputs and writing artifacts.

use std::fs;
use std::path::{Component, Path, PathBuf};

use morphlab_core::dataset::{parse_tsv, InflectionPair};
use morphlab_core::experiments::WugItem;
use morphlab_core::phonology::{FeatureTable, FeatureValue, Phoneme, PhonemeInventory, PhonologyError, Segment, BOUNDARY};

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The bundled English inventory, or one read from `path`.
pub fn load_inventory(path: Option<&Path>) -> Result<PhonemeInventory, CliError> {
    match path {
        None => Ok(PhonemeInventory::english()),
        Some(p) => PhonemeInventory::parse(&read_text(p)?).map_err(|source| CliError::Phonology {
            path: p.to_path_buf(),
            source,
        }),
    }
}

/// Parses a feature table: a header `symbol<TAB>name...` and one row per
/// segment with `+`, `-` or `0` cells. `#` rows describe the boundary.
/// Lines starting with `//` are comments.
pub fn parse_features(text: &str, inv: &PhonemeInventory) -> Result<FeatureTable, PhonologyError> {
    let mut lines = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty() && !l.starts_with("//"));
    let names: Vec<String> = match lines.next() {
        Some(h) => h.split('\t').skip(1).map(str::to_string).collect(),
        None => Vec::new(),
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut cells = line.split('\t');
        let sym = cells.next().unwrap_or_default().to_string();
        let row = cells
            .enumerate()
            .map(|(j, c)| {
                FeatureValue::parse(c.trim()).ok_or_else(|| PhonologyError::UnknownSymbol {
                    symbol: c.to_string(),
                    offset: j + 1,
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| match e {
                PhonologyError::UnknownSymbol { symbol, .. } => PhonologyError::UnknownSymbol { symbol, offset: i + 2 },
                e => e,
            })?;
        rows.push((sym, row));
    }
    FeatureTable::new(inv, names, rows)
}

/// Inverse of [`parse_features`], boundary row last.
pub fn render_features(ft: &FeatureTable, inv: &PhonemeInventory) -> String {
    let mut out = String::from("symbol");
    for n in ft.feature_names() {
        out.push('\t');
        out.push_str(n);
    }
    out.push('\n');
    let segments = (0..inv.len())
        .map(|i| (inv.symbol(Phoneme(i as u16)).to_string(), Segment::Phoneme(Phoneme(i as u16))))
        .chain([(BOUNDARY.to_string(), Segment::Boundary)]);
    for (sym, seg) in segments {
        out.push_str(&sym);
        for v in ft.row(seg) {
            out.push('\t');
            out.push_str(v.as_str());
        }
        out.push('\n');
    }
    out
}

/// The bundled English features, or a table read from `path`.
pub fn load_features(path: Option<&Path>, inv: &PhonemeInventory) -> Result<FeatureTable, CliError> {
    let (result, origin) = match path {
        None => (FeatureTable::english(inv), Path::new("<bundled features>")),
        Some(p) => (parse_features(&read_text(p)?, inv), p),
    };
    result.map_err(|source| CliError::Phonology {
        path: origin.to_path_buf(),
        source,
    })
}

pub fn load_corpus(path: &Path, inv: &PhonemeInventory) -> Result<Vec<InflectionPair>, CliError> {
    parse_tsv(&read_text(path)?, inv).map_err(|source| CliError::Dataset {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses `stem, regular, irregular, human_p_reg, human_p_irr` rows. An
/// empty or `NA` probability leaves the item out of that pool; a header
/// line starting with `stem` and `#` comments are skipped.
pub fn parse_wug(text: &str, inv: &PhonemeInventory, path: &Path) -> Result<Vec<WugItem>, CliError> {
    let bad = |row: usize, reason: String| CliError::Usage(format!("{}: row {row}: {reason}", path.display()));
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') || (row == 1 && line.starts_with("stem")) {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(bad(row, format!("expected 5 columns, found {}", cols.len())));
        }
        let tok = |s: &str| inv.tokenize(s.trim()).map_err(|e| bad(row, e.to_string()));
        let prob = |s: &str| -> Result<Option<f64>, CliError> {
            match s.trim() {
                "" | "NA" => Ok(None),
                v => v.parse().map(Some).map_err(|e| bad(row, format!("bad probability {v:?}: {e}"))),
            }
        };
        let item = WugItem::new(tok(cols[0])?, tok(cols[1])?, tok(cols[2])?, prob(cols[3])?, prob(cols[4])?)
            .map_err(|e| bad(row, e.to_string()))?;
        items.push(item);
    }
    Ok(items)
}

/// Artifact writer confined to one output directory.
#[derive(Clone, Debug)]
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Path of artifact `name`; only plain relative names are accepted.
    pub fn path(&self, name: &str) -> Result<PathBuf, CliError> {
        let rel = Path::new(name);
        if name.is_empty() || !rel.components().all(|c| matches!(c, Component::Normal(_))) {
            return Err(CliError::Usage(format!("artifact name {name:?} escapes the output directory")));
        }
        Ok(self.root.join(rel))
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
        let path = self.path(name)?;
        fs::write(&path, contents).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_tables_round_trip() {
        let inv = PhonemeInventory::english();
        let ft = FeatureTable::english(&inv).unwrap();
        let text = render_features(&ft, &inv);
        let back = parse_features(&text, &inv).unwrap();
        assert_eq!(back, ft);
        assert_eq!(render_features(&back, &inv), text);
    }

    #[test]
    fn small_feature_file() {
        let inv = PhonemeInventory::parse("a\nb\n").unwrap();
        let ft = parse_features("symbol\tvowel\tvoiced\na\t+\t+\nb\t-\t+\n", &inv).unwrap();
        // vowel +/-, voiced +, and the appended edge feature.
        assert_eq!(ft.value_count(), 4);
        assert!(parse_features("symbol\tvowel\na\t?\nb\t-\n", &inv).is_err());
        assert!(parse_features("symbol\tvowel\na\t+\n", &inv).is_err());
    }

    #[test]
    fn wug_rows() {
        let inv = PhonemeInventory::english();
        let text = "stem\treg\tirr\tp_reg\tp_irr\nɹaɪf\tɹaɪft\tɹoʊf\t0.5\t0.25\nspliŋ\tspliŋd\tsplʌŋ\tNA\t0.1\n";
        let items = parse_wug(text, &inv, Path::new("w.tsv")).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].human_regular, Some(0.5));
        assert_eq!(items[1].human_regular, None);
        assert!(parse_wug("ɹaɪf\tɹaɪft\tɹoʊf\t1.5\t0\n", &inv, Path::new("w.tsv")).is_err());
    }

    #[test]
    fn artifacts_stay_inside() {
        let dir = std::env::temp_dir().join(format!("morphlab-outdir-{}", std::process::id()));
        let out = OutDir::create(&dir).unwrap();
        assert!(out.path("../x").is_err());
        assert!(out.path("/etc/passwd").is_err());
        assert!(out.write("ok.txt", "hi").is_ok());
        fs::remove_dir_all(&dir).unwrap();
    }
}
