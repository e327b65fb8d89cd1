//! Trained models inside a checkpoint container.

use morphlab_core::dataset::TaskMode;
use morphlab_core::ed_model::{EdConfig, EdModel, Vocabulary};
use morphlab_core::numerics::{ParamSet, Tensor};
use morphlab_core::phonology::{FeatureTable, PhonemeInventory};
use morphlab_core::rm_model::{PatternAssociator, RmConfig};
use serde::{Deserialize, Serialize};

use crate::checkpoint::{CheckpointError, Container};
use crate::files::{parse_features, render_features};
use crate::pipeline::RmRun;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// `ed` or `rm`.
    pub kind: String,
    /// `single` or `multi`.
    pub task: String,
    pub seed: u64,
    pub phonemes: Vec<String>,
    pub tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ed: Option<EdSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rm: Option<RmSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdSection {
    pub emb: usize,
    pub hidden: usize,
    pub layers: usize,
    pub dropout: f64,
    pub attention: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmSection {
    pub lr: f64,
    pub decay: f64,
    /// Feature table in the feature-file format.
    pub features: String,
    /// Irregular training pairs as `[stem, past]`.
    pub irregulars: Vec<[String; 2]>,
}

pub fn task_name(mode: TaskMode) -> &'static str {
    match mode {
        TaskMode::Single => "single",
        TaskMode::Multi => "multi",
    }
}

pub fn parse_task(s: &str) -> Option<TaskMode> {
    match s {
        "single" => Some(TaskMode::Single),
        "multi" => Some(TaskMode::Multi),
        _ => None,
    }
}

/// A model read back from a checkpoint.
#[derive(Clone, Debug)]
pub enum Model {
    Ed {
        model: EdModel,
        mode: TaskMode,
    },
    Rm {
        run: RmRun,
        inv: PhonemeInventory,
        ft: FeatureTable,
    },
}

impl Model {
    /// Inventory used by the model's phoneme ids.
    pub fn inventory(&self) -> PhonemeInventory {
        match self {
            Model::Ed { model, .. } => PhonemeInventory::new(model.vocab().phoneme_symbols().iter().cloned())
                .expect("vocabulary symbols form a valid inventory"),
            Model::Rm { inv, .. } => inv.clone(),
        }
    }

    pub fn mode(&self) -> TaskMode {
        match self {
            Model::Ed { mode, .. } => *mode,
            Model::Rm { .. } => TaskMode::Single,
        }
    }
}

fn manifest_text(m: &Manifest) -> String {
    toml::to_string(m).expect("manifest is always serializable")
}

pub fn save_ed(model: &EdModel, mode: TaskMode, seed: u64) -> Container {
    let c = model.config();
    let manifest = Manifest {
        kind: "ed".into(),
        task: task_name(mode).into(),
        seed,
        phonemes: model.vocab().phoneme_symbols().to_vec(),
        tags: model.vocab().tags().to_vec(),
        ed: Some(EdSection {
            emb: c.emb,
            hidden: c.hidden,
            layers: c.layers,
            dropout: c.dropout,
            attention: c.attention,
        }),
        rm: None,
    };
    Container {
        manifest: manifest_text(&manifest),
        tensors: model
            .params()
            .iter()
            .map(|(_, name, t)| (name.to_string(), t.clone()))
            .collect(),
    }
}

pub fn save_rm(run: &RmRun, inv: &PhonemeInventory, ft: &FeatureTable, seed: u64) -> Container {
    let cfg = run.model.config();
    let manifest = Manifest {
        kind: "rm".into(),
        task: "single".into(),
        seed,
        phonemes: inv.symbols().to_vec(),
        tags: Vec::new(),
        ed: None,
        rm: Some(RmSection {
            lr: cfg.lr,
            decay: cfg.decay,
            features: render_features(ft, inv),
            irregulars: run
                .irregulars
                .iter()
                .map(|(s, p)| [inv.render_exact(s.phonemes()), inv.render_exact(p.phonemes())])
                .collect(),
        }),
    };
    Container {
        manifest: manifest_text(&manifest),
        tensors: vec![
            ("rm.w".into(), run.model.weights().clone()),
            ("rm.b".into(), Tensor::vector(run.model.bias().to_vec())),
        ],
    }
}

fn bad(msg: impl ToString) -> CheckpointError {
    CheckpointError::Manifest(msg.to_string())
}

pub fn load(c: &Container) -> Result<(Manifest, Model), CheckpointError> {
    let m: Manifest = toml::from_str(&c.manifest).map_err(bad)?;
    let mode = parse_task(&m.task).ok_or_else(|| bad(format!("unknown task {:?}", m.task)))?;
    let model = match (m.kind.as_str(), &m.ed, &m.rm) {
        ("ed", Some(e), None) => {
            let vocab = Vocabulary::from_symbols(m.phonemes.clone(), m.tags.clone()).map_err(bad)?;
            let cfg = EdConfig {
                emb: e.emb,
                hidden: e.hidden,
                layers: e.layers,
                dropout: e.dropout,
                attention: e.attention,
            };
            let mut params = ParamSet::new();
            for (name, t) in &c.tensors {
                params.insert(name.clone(), t.clone()).map_err(bad)?;
            }
            let model = EdModel::from_params(vocab, cfg, params).map_err(|e| CheckpointError::Mismatch(e.to_string()))?;
            Model::Ed { model, mode }
        }
        ("rm", None, Some(r)) => {
            let inv = PhonemeInventory::new(m.phonemes.iter().cloned()).map_err(bad)?;
            let ft = parse_features(&r.features, &inv).map_err(bad)?;
            let tensor = |name: &str| {
                c.tensors
                    .iter()
                    .find(|(n, _)| n == name)
                    .map(|(_, t)| t.clone())
                    .ok_or_else(|| bad(format!("missing tensor {name}")))
            };
            let cfg = RmConfig {
                lr: r.lr,
                decay: r.decay,
            };
            let model = PatternAssociator::from_parts(tensor("rm.w")?, tensor("rm.b")?.into_data(), cfg)
                .map_err(|e| CheckpointError::Mismatch(e.to_string()))?;
            if model.dim() != ft.wickelfeature_count() {
                return Err(CheckpointError::Mismatch(format!(
                    "weights have {} features but the feature table defines {}",
                    model.dim(),
                    ft.wickelfeature_count()
                )));
            }
            let tok = |s: &str| inv.tokenize(s).map_err(bad);
            let irregulars = r
                .irregulars
                .iter()
                .map(|[s, p]| Ok((tok(s)?, tok(p)?)))
                .collect::<Result<_, CheckpointError>>()?;
            Model::Rm {
                run: RmRun {
                    model,
                    history: Vec::new(),
                    irregulars,
                },
                inv,
                ft,
            }
        }
        (kind, _, _) => return Err(bad(format!("kind {kind:?} does not match its sections"))),
    };
    Ok((m, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use morphlab_core::dataset::vocabulary;
    use morphlab_core::numerics::rng;
    use morphlab_core::rm_model::PatternAssociator;

    #[test]
    fn ed_round_trip() {
        let inv = PhonemeInventory::english();
        let cfg = EdConfig {
            emb: 4,
            hidden: 3,
            layers: 2,
            dropout: 0.3,
            attention: 5,
        };
        let model = EdModel::new(vocabulary(&inv).unwrap(), cfg, &mut rng(1)).unwrap();
        let c = save_ed(&model, TaskMode::Multi, 9);
        let back = Container::from_bytes(&c.to_bytes()).unwrap();
        let (m, loaded) = load(&back).unwrap();
        assert_eq!((m.seed, m.task.as_str()), (9, "multi"));
        let Model::Ed { model: again, mode } = loaded else { panic!("wrong kind") };
        assert_eq!(mode, TaskMode::Multi);
        assert_eq!(again.config(), model.config());
        assert_eq!(again.params(), model.params());
        assert_eq!(save_ed(&again, mode, 9).to_bytes(), c.to_bytes());
    }

    #[test]
    fn rm_round_trip() {
        let inv = PhonemeInventory::english();
        let ft = FeatureTable::english(&inv).unwrap();
        let t = |s| inv.tokenize(s).unwrap();
        let mut model = PatternAssociator::new(ft.wickelfeature_count(), RmConfig::default()).unwrap();
        let x = morphlab_core::phonology::encode(&t("sɪŋ"), &ft);
        let y = morphlab_core::phonology::encode(&t("sæŋ"), &ft);
        model.train_step(&x, &y).unwrap();
        let run = RmRun {
            model,
            history: Vec::new(),
            irregulars: vec![(t("sɪŋ"), t("sæŋ"))],
        };
        let c = save_rm(&run, &inv, &ft, 3);
        let (_, loaded) = load(&Container::from_bytes(&c.to_bytes()).unwrap()).unwrap();
        let Model::Rm { run: again, ft: ft2, .. } = loaded else { panic!("wrong kind") };
        assert_eq!(ft2, ft);
        assert_eq!(again.model.weights(), run.model.weights());
        assert_eq!(again.irregulars, run.irregulars);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let inv = PhonemeInventory::english();
        let model = EdModel::new(vocabulary(&inv).unwrap(), EdConfig { emb: 4, hidden: 3, layers: 1, dropout: 0.0, attention: 3 }, &mut rng(1)).unwrap();
        let mut c = save_ed(&model, TaskMode::Single, 1);
        c.manifest = c.manifest.replace("hidden = 3", "hidden = 4");
        assert!(matches!(load(&c), Err(CheckpointError::Mismatch(_))));
    }
}
