use std::collections::BTreeSet;

use morphlab_core::dataset::{parse_tsv, split, synth_corpus, write_tsv, SynthConfig, Tag};
use morphlab_core::inflection::EnglishRules;
use morphlab_core::phonology::PhonemeInventory;

fn corpus(seed: u64) -> Vec<morphlab_core::dataset::InflectionPair> {
    let cfg = SynthConfig {
        types: 300,
        irregular: 20,
        seed,
    };
    synth_corpus(&cfg, &PhonemeInventory::english()).unwrap()
}

#[test]
fn synthetic_past_tenses_follow_their_class() {
    let inv = PhonemeInventory::english();
    let rules = EnglishRules::new(&inv).unwrap();
    let rows = corpus(11);
    assert_eq!(rows.len(), 300 * Tag::ALL.len());
    let past: Vec<_> = rows.iter().filter(|p| p.tag == Tag::Past).collect();
    assert_eq!(past.len(), 300);
    assert_eq!(past.iter().filter(|p| !p.regular).count(), 20);
    for p in past {
        assert_eq!(p.form == rules.past(&p.lemma), p.regular, "{}", inv.render(p.lemma.phonemes()));
    }
}

#[test]
fn tsv_round_trips_a_synthetic_corpus() {
    let inv = PhonemeInventory::english();
    let rows = corpus(12);
    let text = write_tsv(&rows, &inv);
    assert_eq!(parse_tsv(&text, &inv).unwrap(), rows);
}

#[test]
fn splits_are_seeded_and_lemma_disjoint() {
    let rows = corpus(13);
    let a = split(&rows, 5, [0.8, 0.1, 0.1]).unwrap();
    assert_eq!(a, split(&rows, 5, [0.8, 0.1, 0.1]).unwrap());
    assert_ne!(a.train, split(&rows, 6, [0.8, 0.1, 0.1]).unwrap().train);
    let lemmas = |part: &[morphlab_core::dataset::InflectionPair]| -> BTreeSet<_> { part.iter().map(|p| p.lemma.clone()).collect() };
    let (tr, dv, te) = (lemmas(&a.train), lemmas(&a.dev), lemmas(&a.test));
    assert_eq!((tr.len(), dv.len(), te.len()), (240, 30, 30));
    assert!(tr.is_disjoint(&dv) && tr.is_disjoint(&te) && dv.is_disjoint(&te));
    assert_eq!(a.train.len() + a.dev.len() + a.test.len(), rows.len());
}
