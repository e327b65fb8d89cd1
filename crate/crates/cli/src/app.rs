//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::Path;

use clap::{Parser, Subcommand};
use morphlab_core::dataset::{
    split, synth_corpus, tagged_input, vocabulary, write_tsv, InflectionPair, SplitCorpus, SynthConfig, Tag, TaskMode,
};
use morphlab_core::derive_seed;
use morphlab_core::ed_model::EdModel;
use morphlab_core::experiments::{
    curves_csv, detect_macro_ushape, detect_micro_ushape, epochs_to_threshold, errors_tsv, render_table2,
    Correlation, EvalReport, IrregularLexicon, Table2Row, MG_WUG_RHO, NETWORK_WUG_RHO,
};
use morphlab_core::inflection::EnglishRules;
use morphlab_core::phonology::{Phoneme, PhonemeInventory, PhonemeString};

use crate::checkpoint::{digest, Container};
use crate::config::{Flags, RunConfig};
use crate::error::CliError;
use crate::files::{load_corpus, load_features, load_inventory, parse_wug, read_bytes, read_text, OutDir};
use crate::pipeline::{self, EdRunSpec, Snapshot};
use crate::saved::{self, Model};

#[derive(Debug, Parser)]
#[command(name = "morphlab", version, about = "Morphological transduction experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic English-like corpus.
    Synth,
    /// Split a corpus into train, dev and test by lemma.
    Split,
    /// Train a model; writes a checkpoint and per-epoch curves.
    Train,
    /// Accuracy table with error taxonomy for a checkpoint.
    Eval,
    /// Train single- and multi-task models and compare learning curves.
    Curves,
    /// Per-verb oscillation analysis from training snapshots.
    Ushape,
    /// Correlate model probabilities with human wug-test data.
    Wug,
    /// Decode stems given on the command line.
    Decode {
        /// Stems in IPA.
        stems: Vec<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Split => "split",
            Command::Train => "train",
            Command::Eval => "eval",
            Command::Curves => "curves",
            Command::Ushape => "ushape",
            Command::Wug => "wug",
            Command::Decode { .. } => "decode",
        }
    }
}

/// Runs one parsed command; returns the text printed to stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = RunConfig::resolve(cli.command.name(), &cli.flags)?;
    let out = OutDir::create(&cfg.out)?;
    let text = match &cli.command {
        Command::Synth => synth(&cfg, &out)?,
        Command::Split => split_cmd(&cfg, &out)?,
        Command::Train => train(&cfg, &out)?,
        Command::Eval => eval(&cfg, &out)?,
        Command::Curves => curves(&cfg, &out)?,
        Command::Ushape => ushape(&cfg, &out)?,
        Command::Wug => wug(&cfg, &out)?,
        Command::Decode { stems } => decode(&cfg, &out, stems)?,
    };
    out.write("config.toml", cfg.to_toml())?;
    Ok(text)
}

fn rules(inv: &PhonemeInventory) -> Result<EnglishRules, CliError> {
    EnglishRules::new(inv).map_err(|source| CliError::Phonology {
        path: "<inventory>".into(),
        source,
    })
}

fn synth(cfg: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let inv = load_inventory(cfg.inventory.as_deref())?;
    let corpus = synth_corpus(
        &SynthConfig {
            types: cfg.types,
            irregular: cfg.irregular,
            seed: derive_seed(cfg.seed, "synth"),
        },
        &inv,
    )?;
    let path = out.write("corpus.tsv", write_tsv(&corpus, &inv))?;
    Ok(format!(
        "wrote {} rows ({} types, {} irregular) to {}\n",
        corpus.len(),
        cfg.types,
        cfg.irregular,
        path.display()
    ))
}

/// Train/dev/test from `--train/--dev/--test`, or a seeded split of
/// `--data`.
fn load_splits(cfg: &RunConfig, inv: &PhonemeInventory) -> Result<SplitCorpus, CliError> {
    if let Some(train) = &cfg.train {
        let opt = |p: &Option<std::path::PathBuf>| p.as_deref().map_or(Ok(Vec::new()), |p| load_corpus(p, inv));
        return Ok(SplitCorpus {
            train: load_corpus(train, inv)?,
            dev: opt(&cfg.dev)?,
            test: opt(&cfg.test)?,
            seed: cfg.seed,
        });
    }
    let data = cfg.require(&cfg.data, "data (or --train)")?;
    let corpus = load_corpus(data, inv)?;
    Ok(split(&corpus, derive_seed(cfg.seed, "split"), cfg.split)?)
}

fn split_cmd(cfg: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let inv = load_inventory(cfg.inventory.as_deref())?;
    let data = cfg.require(&cfg.data, "data")?;
    let s = split(&load_corpus(data, &inv)?, derive_seed(cfg.seed, "split"), cfg.split)?;
    let mut text = String::new();
    for (name, part) in [("train", &s.train), ("dev", &s.dev), ("test", &s.test)] {
        out.write(&format!("{name}.tsv"), write_tsv(part, &inv))?;
        let _ = writeln!(text, "{name}: {} rows", part.len());
    }
    Ok(text)
}

fn ed_spec(cfg: &RunConfig) -> EdRunSpec {
    EdRunSpec {
        ed: cfg.ed_config(),
        train: cfg.train_config(),
        mode: cfg.mode(),
        curve_every: cfg.curve_every,
        snapshot_every: cfg.snapshot_every,
        stop_at: cfg.stop_at,
        stop_irregular_at: cfg.stop_irregular_at,
    }
}

fn condition(mode: TaskMode) -> &'static str {
    match mode {
        TaskMode::Single => "single",
        TaskMode::Multi => "multi",
    }
}

fn train(cfg: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let inv = load_inventory(cfg.inventory.as_deref())?;
    let s = load_splits(cfg, &inv)?;
    let (container, mut text) = if cfg.model == "rm" {
        let ft = load_features(cfg.features.as_deref(), &inv)?;
        let run = pipeline::train_rm(&s.train, &ft, cfg.rm_config(), cfg.epochs, cfg.seed)?;
        let mut hist = String::from("epoch,loss,mistakes\n");
        for (i, e) in run.history.iter().enumerate() {
            let _ = writeln!(hist, "{},{},{}", i + 1, e.loss, e.mistakes);
        }
        out.write("history.csv", hist)?;
        let text = format!("pattern associator: {} epochs\n", run.history.len());
        (saved::save_rm(&run, &inv, &ft, cfg.seed), text)
    } else {
        let spec = ed_spec(cfg);
        let run = pipeline::train_ed(&s.train, vocabulary(&inv)?, &spec, cfg.seed, condition(cfg.mode()), &[])?;
        let mut hist = String::from("epoch,mean_loss\n");
        for e in &run.history {
            let _ = writeln!(hist, "{},{}", e.epoch, e.mean_loss);
        }
        out.write("history.csv", hist)?;
        if !run.curve.is_empty() {
            out.write("curves.csv", curves_csv(&run.curve)?)?;
        }
        let text = format!("encoder-decoder: {} epochs\n", run.history.len());
        (saved::save_ed(&run.model, cfg.mode(), cfg.seed), text)
    };
    let bytes = container.to_bytes();
    let path = out.write("model.ckpt", &bytes)?;
    let _ = writeln!(text, "checkpoint {} sha256 {}", path.display(), digest(&bytes));
    Ok(text)
}

fn load_model(cfg: &RunConfig) -> Result<Model, CliError> {
    let path = cfg.require(&cfg.checkpoint, "checkpoint")?;
    let wrap = |source| CliError::Checkpoint {
        path: path.to_path_buf(),
        source,
    };
    let c = Container::from_bytes(&read_bytes(path)?).map_err(wrap)?;
    let (_, model) = saved::load(&c).map_err(wrap)?;
    if let Some(inv_path) = &cfg.inventory {
        if load_inventory(Some(inv_path))? != model.inventory() {
            return Err(wrap(crate::checkpoint::CheckpointError::Mismatch(format!(
                "inventory {} differs from the checkpoint vocabulary",
                inv_path.display()
            ))));
        }
    }
    Ok(model)
}

fn evaluate_model(
    model: &Model,
    pairs: &[InflectionPair],
    beam: usize,
    lexicon: &IrregularLexicon,
    rules: &EnglishRules,
) -> Result<EvalReport, CliError> {
    Ok(match model {
        Model::Ed { model, mode } => pipeline::eval_ed(model, pairs, *mode, beam, lexicon, rules)?,
        Model::Rm { run, ft, .. } => pipeline::eval_rm(run, pairs, ft, lexicon, rules)?,
    })
}

fn eval(cfg: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let model = load_model(cfg)?;
    let inv = model.inventory();
    let rules = rules(&inv)?;
    let s = load_splits(cfg, &inv)?;
    let lexicon = IrregularLexicon::from_pairs(&s.train);
    let mut cells: [Option<EvalReport>; 3] = [None, None, None];
    for (i, (name, part)) in [("train", &s.train), ("dev", &s.dev), ("test", &s.test)].into_iter().enumerate() {
        if part.is_empty() {
            continue;
        }
        let r = evaluate_model(&model, part, cfg.beam, &lexicon, &rules)?;
        if cfg.errors {
            out.write(&format!("errors_{name}.tsv"), errors_tsv(&r, &inv))?;
        }
        cells[i] = Some(r);
    }
    let name = match &model {
        Model::Ed { mode, .. } => format!("{}-task (ED)", condition(*mode)),
        Model::Rm { .. } => "single-task (RM)".to_string(),
    };
    let mut text = render_table2(&[Table2Row { name, cells: cells.clone() }]);
    text.push_str("\nerrors by label (train/dev/test):\n");
    for label in [
        morphlab_core::experiments::ErrorLabel::Overregularization,
        morphlab_core::experiments::ErrorLabel::Blend,
        morphlab_core::experiments::ErrorLabel::Overirregularization,
        morphlab_core::experiments::ErrorLabel::Other,
    ] {
        let counts: Vec<String> = cells
            .iter()
            .map(|c| c.as_ref().map_or("-".to_string(), |r| r.count(label).to_string()))
            .collect();
        let _ = writeln!(text, "  {label:<22}{}", counts.join("/"));
    }
    out.write("report.txt", &text)?;
    Ok(text)
}

fn curves(cfg: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let inv = load_inventory(cfg.inventory.as_deref())?;
    let s = load_splits(cfg, &inv)?;
    let mut points = Vec::new();
    let mut text = String::new();
    for mode in [TaskMode::Single, TaskMode::Multi] {
        let spec = EdRunSpec {
            mode,
            curve_every: cfg.curve_every.max(1),
            ..ed_spec(cfg)
        };
        let run = pipeline::train_ed(&s.train, vocabulary(&inv)?, &spec, cfg.seed, condition(mode), &[])?;
        let e90 = epochs_to_threshold(&run.curve, 0.9);
        let _ = writeln!(
            text,
            "{}: epochs to 90% past-tense train accuracy: {}",
            condition(mode),
            e90.map_or("not reached".to_string(), |e| e.to_string())
        );
        points.extend(run.curve);
    }
    out.write("curves.csv", curves_csv(&points)?)?;
    out.write("summary.txt", &text)?;
    Ok(text)
}

/// Snapshot table rows: `epoch, lemma, gold, output`.
fn snapshots_tsv(rows: &[InflectionPair], snaps: &[Snapshot], inv: &PhonemeInventory) -> String {
    let mut out = String::from("epoch\tlemma\tgold\toutput\n");
    for s in snaps {
        for (p, o) in rows.iter().zip(&s.outputs) {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                s.epoch,
                inv.display(p.lemma.phonemes()),
                inv.display(p.form.phonemes()),
                inv.display(o)
            );
        }
    }
    out
}

/// Per-verb histories from a snapshot table, in first-appearance order.
type History = (PhonemeString, PhonemeString, Vec<(usize, Vec<Phoneme>)>);

fn parse_snapshots(text: &str, inv: &PhonemeInventory, path: &Path) -> Result<Vec<History>, CliError> {
    let bad = |row: usize, m: String| CliError::Usage(format!("{}: row {row}: {m}", path.display()));
    let mut verbs: Vec<History> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(bad(i + 1, format!("expected 4 columns, found {}", cols.len())));
        }
        let epoch: usize = cols[0].parse().map_err(|e| bad(i + 1, format!("bad epoch: {e}")))?;
        let tok = |s: &str| inv.tokenize(s).map_err(|e| bad(i + 1, e.to_string()));
        let (lemma, gold) = (tok(cols[1])?, tok(cols[2])?);
        let output = if cols[3].is_empty() { Vec::new() } else { tok(cols[3])?.into_vec() };
        match verbs.iter_mut().find(|(l, g, _)| *l == lemma && *g == gold) {
            Some(v) => v.2.push((epoch, output)),
            None => verbs.push((lemma, gold, vec![(epoch, output)])),
        }
    }
    for v in &mut verbs {
        v.2.sort_by_key(|(e, _)| *e);
    }
    Ok(verbs)
}

fn ushape(cfg: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let inv = load_inventory(cfg.inventory.as_deref())?;
    let mut text = String::new();
    let histories = if let Some(path) = &cfg.snapshots {
        parse_snapshots(&read_text(path)?, &inv, path)?
    } else {
        let s = load_splits(cfg, &inv)?;
        let tracked: Vec<InflectionPair> = s.train.iter().filter(|p| p.tag == Tag::Past && !p.regular).cloned().collect();
        let spec = EdRunSpec {
            snapshot_every: cfg.snapshot_every.max(1),
            ..ed_spec(cfg)
        };
        let run = pipeline::train_ed(&s.train, vocabulary(&inv)?, &spec, cfg.seed, condition(cfg.mode()), &tracked)?;
        let table = snapshots_tsv(&tracked, &run.snapshots, &inv);
        out.write("snapshots.tsv", &table)?;
        let irregular: Vec<f64> = run.curve.iter().filter_map(|c| c.irregular.accuracy()).collect();
        if let Some(m) = detect_macro_ushape(&irregular, 0.05) {
            let _ = writeln!(
                text,
                "macro U-shape on irregular train accuracy: {} (largest dip {:.3} at point {})",
                if m.detected { "detected" } else { "not detected" },
                m.depth,
                m.trough
            );
        }
        parse_snapshots(&table, &inv, Path::new("snapshots.tsv"))?
    };
    let mut table = String::from("lemma\tgold\tflagged\texcursions\tchange_points\toutputs_at_changes\n");
    let mut flagged = 0;
    for (lemma, gold, snaps) in &histories {
        let Ok(u) = detect_micro_ushape(gold.phonemes(), snaps) else { continue };
        flagged += usize::from(u.flagged);
        let outputs: Vec<String> = u
            .change_points
            .iter()
            .map(|e| {
                let o = &snaps.iter().find(|(x, _)| x == e).expect("change point is a snapshot").1;
                format!("{e}:{}", inv.render(o))
            })
            .collect();
        let points: Vec<String> = u.change_points.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            table,
            "{}\t{}\t{}\t{}\t{}\t{}",
            inv.display(lemma.phonemes()),
            inv.display(gold.phonemes()),
            u.flagged,
            u.excursions,
            points.join(";"),
            outputs.join(";")
        );
    }
    out.write("ushape.tsv", &table)?;
    let _ = writeln!(text, "{flagged} of {} tracked verbs show a micro U-shape", histories.len());
    Ok(text)
}

fn fmt_rho(c: &Correlation) -> String {
    match c.rho {
        Some(r) => format!("{r:.3} (n={})", c.n),
        None => format!("degenerate (n={})", c.n),
    }
}

fn wug(cfg: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let model = load_model(cfg)?;
    let Model::Ed { model, mode } = &model else {
        return Err(CliError::Usage("wug needs an encoder-decoder checkpoint".into()));
    };
    let inv = PhonemeInventory::new(model.vocab().phoneme_symbols().iter().cloned()).expect("valid vocabulary");
    let path = cfg.require(&cfg.wug, "wug")?;
    let items = parse_wug(&read_text(path)?, &inv, path)?;
    let report = pipeline::wug_ed(model, *mode, &items, cfg.wug_scoring())?;
    let mut text = String::new();
    let _ = writeln!(text, "spearman rho, regular:   {}", fmt_rho(&report.regular));
    let _ = writeln!(text, "spearman rho, irregular: {}", fmt_rho(&report.irregular));
    let _ = writeln!(
        text,
        "reference: network {:.2}/{:.2}, minimal generalization learner {:.2}/{:.2}",
        NETWORK_WUG_RHO.0, NETWORK_WUG_RHO.1, MG_WUG_RHO.0, MG_WUG_RHO.1
    );
    if report.regular.degenerate() || report.irregular.degenerate() {
        text.push_str("degenerate: model probabilities are constant over a pool\n");
    }
    let mut probs = String::from("stem\tp_regular\tp_irregular\n");
    for (it, (r, i)) in items.iter().zip(&report.model) {
        let _ = writeln!(probs, "{}\t{r}\t{i}", inv.display(it.stem.phonemes()));
    }
    out.write("wug_probs.tsv", probs)?;
    out.write("wug.txt", &text)?;
    Ok(text)
}

fn decode_ed(model: &EdModel, mode: TaskMode, cfg: &RunConfig, stem: &PhonemeString) -> Result<Vec<(Vec<Phoneme>, f64)>, CliError> {
    let tag: Tag = cfg.tag.parse().map_err(CliError::Usage)?;
    let pair = InflectionPair::new(stem.clone(), stem.clone(), tag, true);
    let x = tagged_input(&pair, model.vocab(), mode)?;
    let hyps = model.beam(&x, cfg.beam, pipeline::max_len(stem.len()))?;
    Ok(hyps.into_iter().map(|d| (d.output, d.log_prob)).collect())
}

fn decode(cfg: &RunConfig, out: &OutDir, stems: &[String]) -> Result<String, CliError> {
    if stems.is_empty() {
        return Err(CliError::Usage("decode needs at least one stem".into()));
    }
    let model = load_model(cfg)?;
    let inv = model.inventory();
    let mut text = String::from("stem\trank\toutput\tlog_prob\n");
    for raw in stems {
        let stem = inv
            .tokenize(raw)
            .map_err(|e| CliError::Usage(format!("stem {raw:?}: {e}")))?;
        match &model {
            Model::Ed { model, mode } => {
                for (rank, (o, lp)) in decode_ed(model, *mode, cfg, &stem)?.iter().enumerate() {
                    let _ = writeln!(text, "{raw}\t{}\t{}\t{lp:.6}", rank + 1, inv.render(o));
                }
            }
            Model::Rm { run, ft, .. } => {
                let o = pipeline::rm_predict(&run.model, &stem, &run.irregulars, &rules(&inv)?, ft)?;
                let _ = writeln!(text, "{raw}\t1\t{}\t", inv.render(&o));
            }
        }
    }
    out.write("decode.tsv", &text)?;
    Ok(text)
}
