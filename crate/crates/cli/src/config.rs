//! Run configuration, layered as defaults < `--config` file < flags.

use std::path::{Path, PathBuf};

use clap::Args;
use morphlab_core::dataset::TaskMode;
use morphlab_core::ed_model::{EdConfig, TrainConfig};
use morphlab_core::experiments::WugScoring;
use morphlab_core::numerics::AdadeltaConfig;
use morphlab_core::rm_model::RmConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::files::read_text;
use crate::saved::parse_task;

/// Fully resolved settings of one run; written next to every artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub out: PathBuf,
    /// `ed` or `rm`.
    pub model: String,
    /// `single` or `multi`.
    pub task: String,

    pub data: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub split: [f64; 3],
    pub inventory: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub wug: Option<PathBuf>,
    pub snapshots: Option<PathBuf>,

    pub types: usize,
    pub irregular: usize,

    pub emb: usize,
    pub hidden: usize,
    pub layers: usize,
    pub dropout: f64,
    pub attention: usize,
    pub epochs: usize,
    pub batch: usize,
    pub beam: usize,
    /// Adadelta step scale for the encoder-decoder, perceptron rate for the
    /// pattern associator.
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    pub decay: f64,

    pub curve_every: usize,
    pub snapshot_every: usize,
    /// Stop training once past-tense training accuracy reaches this.
    pub stop_at: Option<f64>,
    /// Likewise for irregular past-tense training accuracy.
    pub stop_irregular_at: Option<f64>,
    pub errors: bool,
    /// `raw` or `pairwise`.
    pub wug_scoring: String,
    /// Tag for `decode` with a multi-task model.
    pub tag: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ed = EdConfig::default();
        let ada = AdadeltaConfig::default();
        Self {
            command: String::new(),
            seed: 0,
            out: PathBuf::from("out"),
            model: "ed".into(),
            task: "single".into(),
            data: None,
            train: None,
            dev: None,
            test: None,
            split: [0.8, 0.1, 0.1],
            inventory: None,
            features: None,
            checkpoint: None,
            wug: None,
            snapshots: None,
            types: 4039,
            irregular: 168,
            emb: ed.emb,
            hidden: ed.hidden,
            layers: ed.layers,
            dropout: ed.dropout,
            attention: ed.attention,
            epochs: 100,
            batch: 20,
            beam: 12,
            lr: ada.lr,
            rho: ada.rho,
            eps: ada.eps,
            decay: 0.0,
            curve_every: 1,
            snapshot_every: 0,
            stop_at: None,
            stop_irregular_at: None,
            errors: false,
            wug_scoring: "raw".into(),
            tag: "PST".into(),
        }
    }
}

/// Command-line overrides; unset flags leave lower layers in place.
#[derive(Clone, Debug, Default, Args, Serialize)]
pub struct Flags {
    /// TOML file with settings; flags take precedence over it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Master seed; data, split, init and training streams derive from it.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory; nothing is written outside it.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Learner: ed or rm.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// single (past tense) or multi (all tags).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,

    /// Corpus TSV, split by lemma with --seed.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    /// Pre-split training TSV (overrides --data).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dev: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
    /// Phoneme inventory, one symbol per line.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inventory: Option<PathBuf>,
    /// Feature table TSV for the pattern associator.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
    /// Model file written by `train`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    /// Wug TSV: stem, regular, irregular, human_p_reg, human_p_irr.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wug: Option<PathBuf>,
    /// Stored snapshot TSV to analyze instead of training.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<PathBuf>,

    /// Synthetic corpus size in verb types.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub types: Option<usize>,
    /// Irregular verbs among the synthetic types.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub irregular: Option<usize>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emb: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dropout: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attention: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    /// Beam width for evaluation and decoding (1: greedy).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beam: Option<usize>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    /// Learning-rate decay for the pattern associator.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,

    /// Record a training-accuracy point every N epochs (0: never).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve_every: Option<usize>,
    /// Record per-verb outputs every N epochs for U-shape analysis.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    /// Stop once past-tense training accuracy reaches this.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_at: Option<f64>,
    /// Stop once irregular past-tense training accuracy reaches this.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_irregular_at: Option<f64>,
    /// Also write per-split error tables.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub errors: bool,
    /// raw or pairwise.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wug_scoring: Option<String>,
    /// Tag to decode with a multi-task model: PST, GER, PTCP or 3SG.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        base.insert(k, v);
    }
}

impl RunConfig {
    /// Resolves defaults, then the `--config` file, then `flags`.
    pub fn resolve(command: &str, flags: &Flags) -> Result<Self, CliError> {
        let mut table = toml::Table::try_from(Self::default()).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(path) = &flags.config {
            let file: toml::Table = toml::from_str(&read_text(path)?)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            merge(&mut table, file);
        }
        merge(&mut table, toml::Table::try_from(flags).map_err(|e| CliError::Config(e.to_string()))?);
        table.insert("command".into(), toml::Value::String(command.into()));
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Config(m));
        if !matches!(self.model.as_str(), "ed" | "rm") {
            return fail(format!("model must be ed or rm, got {:?}", self.model));
        }
        if parse_task(&self.task).is_none() {
            return fail(format!("task must be single or multi, got {:?}", self.task));
        }
        if self.model == "rm" && self.task != "single" {
            return fail("the pattern associator only supports the single task".into());
        }
        if !matches!(self.wug_scoring.as_str(), "raw" | "pairwise") {
            return fail(format!("wug-scoring must be raw or pairwise, got {:?}", self.wug_scoring));
        }
        if self.beam == 0 || self.batch == 0 {
            return fail("beam and batch must be at least 1".into());
        }
        self.ed_config().validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn mode(&self) -> TaskMode {
        parse_task(&self.task).expect("validated")
    }

    pub fn ed_config(&self) -> EdConfig {
        EdConfig {
            emb: self.emb,
            hidden: self.hidden,
            layers: self.layers,
            dropout: self.dropout,
            attention: self.attention,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch: self.batch,
            optimizer: AdadeltaConfig {
                lr: self.lr,
                rho: self.rho,
                eps: self.eps,
            },
            seed: self.seed,
        }
    }

    pub fn rm_config(&self) -> RmConfig {
        RmConfig {
            lr: self.lr,
            decay: self.decay,
        }
    }

    pub fn wug_scoring(&self) -> WugScoring {
        match self.wug_scoring.as_str() {
            "pairwise" => WugScoring::Pairwise,
            _ => WugScoring::Raw,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn require<'a>(&self, value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
        value
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("{} needs --{flag}", self.command)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = std::env::temp_dir().join(format!("morphlab-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("run.toml");
        std::fs::write(&file, "seed = 5\nhidden = 32\nepochs = 7\n").unwrap();
        let flags = Flags {
            config: Some(file),
            epochs: Some(3),
            ..Flags::default()
        };
        let cfg = RunConfig::resolve("train", &flags).unwrap();
        assert_eq!((cfg.seed, cfg.hidden, cfg.epochs, cfg.emb), (5, 32, 3, 300));
        assert_eq!(cfg.command, "train");
        let again: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn bad_values_are_rejected() {
        let flags = Flags {
            model: Some("svm".into()),
            ..Flags::default()
        };
        assert!(matches!(RunConfig::resolve("train", &flags), Err(CliError::Config(_))));
        let flags = Flags {
            dropout: Some(1.5),
            ..Flags::default()
        };
        assert!(RunConfig::resolve("train", &flags).is_err());
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let dir = std::env::temp_dir().join(format!("morphlab-config-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("run.toml");
        std::fs::write(&file, "sede = 5\n").unwrap();
        let flags = Flags {
            config: Some(file),
            ..Flags::default()
        };
        assert!(RunConfig::resolve("train", &flags).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
