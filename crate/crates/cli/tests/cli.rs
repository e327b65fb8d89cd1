//! End-to-end runs of the `morphlab` binary on tiny synthetic data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use morphlab_core::phonology::ENGLISH_SYMBOLS;
use tempfile::TempDir;

struct Scratch(TempDir);

impl Scratch {
    fn new(label: &str) -> Self {
        Self(tempfile::Builder::new().prefix(&format!("morphlab-{label}-")).tempdir().unwrap())
    }

    fn dir(&self) -> &Path {
        self.0.path()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir().join(name)
    }
}

fn morphlab(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphlab"))
        .current_dir(cwd)
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(name).display()))
}

const TINY: &[&str] = &["--emb", "8", "--hidden", "8", "--attention", "8", "--layers", "1", "--batch", "10"];

fn synth(s: &Scratch, seed: &str) -> PathBuf {
    ok(&morphlab(s.dir(), &["synth", "--types", "40", "--irregular", "6", "--seed", seed, "--out", "data"]));
    s.path("data/corpus.tsv")
}

fn train_ed(s: &Scratch, data: &Path, out: &str, epochs: &str) -> String {
    let mut args = vec!["train", "--data", data.to_str().unwrap(), "--epochs", epochs, "--seed", "3", "--out", out];
    args.extend_from_slice(TINY);
    ok(&morphlab(s.dir(), &args))
}

#[test]
fn missing_dataset_is_a_usage_error_naming_the_path() {
    let s = Scratch::new("missing");
    let out = morphlab(s.dir(), &["train", "--data", "no/such/corpus.tsv", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/corpus.tsv"));
}

#[test]
fn bad_settings_are_rejected() {
    let s = Scratch::new("config");
    fs::write(s.path("run.toml"), "epochz = 3\n").unwrap();
    let out = morphlab(s.dir(), &["synth", "--config", "run.toml", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epochz"));

    let out = morphlab(s.dir(), &["train", "--model", "rm", "--task", "multi", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags_and_recorded() {
    let s = Scratch::new("layers");
    fs::write(s.path("run.toml"), "types = 30\nirregular = 4\nseed = 9\n").unwrap();
    ok(&morphlab(s.dir(), &["synth", "--config", "run.toml", "--types", "20", "--out", "o"]));
    let cfg: toml::Table = toml::from_str(&read(&s.path("o"), "config.toml")).unwrap();
    assert_eq!(cfg["types"].as_integer(), Some(20));
    assert_eq!(cfg["irregular"].as_integer(), Some(4));
    assert_eq!(cfg["seed"].as_integer(), Some(9));
    assert_eq!(cfg["command"].as_str(), Some("synth"));
}

#[test]
fn synth_and_split_are_reproducible() {
    let s = Scratch::new("synth");
    let a = read(s.dir(), synth(&s, "7").to_str().unwrap());
    let b = read(s.dir(), synth(&s, "7").to_str().unwrap());
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 40 * 4);
    assert_ne!(a, read(s.dir(), synth(&s, "8").to_str().unwrap()));

    let data = s.path("data/corpus.tsv");
    let split = |out: &str| {
        ok(&morphlab(s.dir(), &["split", "--data", data.to_str().unwrap(), "--seed", "1", "--out", out]));
        ["train.tsv", "dev.tsv", "test.tsv"].map(|f| read(&s.path(out), f))
    };
    let first = split("s1");
    assert_eq!(first, split("s2"));
    let rows: usize = first.iter().map(|t| t.lines().count()).sum();
    assert_eq!(rows, 40 * 4);
}

#[test]
fn training_twice_gives_the_same_checkpoint() {
    let s = Scratch::new("determinism");
    let data = synth(&s, "1");
    let a = train_ed(&s, &data, "a", "2");
    let b = train_ed(&s, &data, "b", "2");
    let digest = |t: &str| t.split_whitespace().last().unwrap().to_string();
    assert_eq!(digest(&a), digest(&b));
    assert_eq!(fs::read(s.path("a/model.ckpt")).unwrap(), fs::read(s.path("b/model.ckpt")).unwrap());
    assert_eq!(read(&s.path("a"), "history.csv").lines().count(), 3);
    assert!(read(&s.path("a"), "curves.csv").starts_with("condition,"));
    assert!(read(&s.path("a"), "config.toml").contains("command = \"train\""));
}

#[test]
fn eval_and_decode_an_encoder_decoder() {
    let s = Scratch::new("ed");
    let data = synth(&s, "2");
    train_ed(&s, &data, "m", "2");
    let ckpt = s.path("m/model.ckpt");
    let (ckpt, data) = (ckpt.to_str().unwrap(), data.to_str().unwrap());

    let text = ok(&morphlab(s.dir(), &["eval", "--checkpoint", ckpt, "--data", data, "--errors", "--beam", "3", "--out", "e"]));
    assert!(text.contains("single-task (ED)"));
    assert_eq!(read(&s.path("e"), "report.txt"), text);
    for split in ["train", "dev", "test"] {
        assert!(read(&s.path("e"), &format!("errors_{split}.tsv")).starts_with("lemma\t"));
    }

    let text = ok(&morphlab(s.dir(), &["decode", "--checkpoint", ckpt, "--beam", "2", "--out", "d", "wɔk", "sɪŋ"]));
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(!rows.is_empty() && rows.len() <= 4);
    assert!(rows.iter().all(|r| r.starts_with("wɔk\t") || r.starts_with("sɪŋ\t")));

    let out = morphlab(s.dir(), &["decode", "--checkpoint", ckpt, "--out", "d", "wɔk!"]);
    assert_eq!(out.status.code(), Some(2));
}

/// Two binary features over the English inventory keep the pattern
/// associator small.
fn small_features() -> String {
    let mut t = String::from("symbol\tf1\tf2\n");
    for (i, sym) in ENGLISH_SYMBOLS.iter().enumerate() {
        let v = |b: bool| if b { "+" } else { "-" };
        t.push_str(&format!("{sym}\t{}\t{}\n", v(i % 2 == 0), v(i % 3 == 0)));
    }
    t.push_str("#\t0\t0\n");
    t
}

#[test]
fn pattern_associator_trains_evaluates_and_decodes() {
    let s = Scratch::new("rm");
    let data = synth(&s, "4");
    fs::write(s.path("features.tsv"), small_features()).unwrap();
    let data = data.to_str().unwrap();
    let train = ["train", "--model", "rm", "--features", "features.tsv", "--data", data, "--epochs", "3", "--out"];
    let a = ok(&morphlab(s.dir(), &[&train[..], &["a"]].concat()));
    let b = ok(&morphlab(s.dir(), &[&train[..], &["b"]].concat()));
    assert!(a.contains("pattern associator"));
    assert_eq!(a.replace("a/model", "b/model"), b);

    let ckpt = s.path("a/model.ckpt");
    let text = ok(&morphlab(s.dir(), &["eval", "--checkpoint", ckpt.to_str().unwrap(), "--data", data, "--out", "e"]));
    assert!(text.contains("single-task (RM)"));
    let text = ok(&morphlab(s.dir(), &["decode", "--checkpoint", ckpt.to_str().unwrap(), "--out", "d", "wɔk"]));
    assert_eq!(text.lines().count(), 2);

    let out = morphlab(s.dir(), &["wug", "--checkpoint", ckpt.to_str().unwrap(), "--wug", "w.tsv", "--out", "w"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ushape_reads_stored_snapshots() {
    let s = Scratch::new("ushape");
    let mut t = String::from("epoch\tlemma\tgold\toutput\n");
    let outputs = ["klɪŋd", "klʌŋ", "klɪŋd", "klʌŋ", "klʌŋ"];
    for (e, o) in outputs.iter().enumerate() {
        t.push_str(&format!("{}\tklɪŋ\tklʌŋ\t{o}\n", e + 1));
        t.push_str(&format!("{}\twɔk\twɔkt\twɔkt\n", e + 1));
    }
    fs::write(s.path("snaps.tsv"), t).unwrap();
    let text = ok(&morphlab(s.dir(), &["ushape", "--snapshots", "snaps.tsv", "--out", "u"]));
    assert!(text.contains("1 of 2 tracked verbs"));
    let table = read(&s.path("u"), "ushape.tsv");
    let cling = table.lines().find(|l| l.starts_with("klɪŋ\t")).unwrap();
    let cols: Vec<&str> = cling.split('\t').collect();
    assert_eq!(cols[2], "true");
    assert_eq!(cols[4], "2;3;4");
    assert!(table.lines().any(|l| l.starts_with("wɔk\twɔkt\tfalse")));
}

#[test]
fn ushape_from_training_writes_snapshots() {
    let s = Scratch::new("ushape-train");
    let data = synth(&s, "5");
    let mut args = vec!["ushape", "--data", data.to_str().unwrap(), "--epochs", "2", "--out", "u"];
    args.extend_from_slice(TINY);
    ok(&morphlab(s.dir(), &args));
    let snaps = read(&s.path("u"), "snapshots.tsv");
    let epochs: std::collections::BTreeSet<&str> = snaps.lines().skip(1).map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(epochs.into_iter().collect::<Vec<_>>(), ["1", "2"]);
    assert!(read(&s.path("u"), "ushape.tsv").starts_with("lemma\t"));
}

#[test]
fn wug_with_constant_human_rates_is_flagged_not_fatal() {
    let s = Scratch::new("wug");
    let data = synth(&s, "6");
    train_ed(&s, &data, "m", "1");
    fs::write(
        s.path("wug.tsv"),
        "stem\tregular\tirregular\tp_reg\tp_irr\nspliŋ\tspliŋd\tsplʌŋ\t0.5\t0.2\nɹaɪf\tɹaɪft\tɹoʊf\t0.5\t0.4\nblɪg\tblɪgd\tblʌg\t0.5\tNA\n",
    )
    .unwrap();
    let ckpt = s.path("m/model.ckpt");
    let text = ok(&morphlab(s.dir(), &["wug", "--checkpoint", ckpt.to_str().unwrap(), "--wug", "wug.tsv", "--out", "w"]));
    assert!(text.contains("regular:   degenerate (n=3)"));
    assert!(text.contains("degenerate:"));
    assert_eq!(read(&s.path("w"), "wug_probs.tsv").lines().count(), 4);
}

#[test]
fn curves_compares_both_conditions() {
    let s = Scratch::new("curves");
    let data = synth(&s, "7");
    let mut args = vec!["curves", "--data", data.to_str().unwrap(), "--epochs", "2", "--out", "c"];
    args.extend_from_slice(TINY);
    let text = ok(&morphlab(s.dir(), &args));
    assert!(text.contains("single:") && text.contains("multi:"));
    let csv = read(&s.path("c"), "curves.csv");
    assert_eq!(csv.lines().filter(|l| l.starts_with("single,")).count(), 2);
    assert_eq!(csv.lines().filter(|l| l.starts_with("multi,")).count(), 2);
}

#[test]
fn nothing_is_written_outside_the_output_directory() {
    let s = Scratch::new("confined");
    let data = synth(&s, "8");
    fs::create_dir(s.path("work")).unwrap();
    train_ed(&s, &data, "work/out", "1");
    let names: Vec<String> = fs::read_dir(s.path("work"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["out"]);
    let mut written: Vec<String> = fs::read_dir(s.path("work/out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    written.sort();
    assert_eq!(written, ["config.toml", "curves.csv", "history.csv", "model.ckpt"]);
}
