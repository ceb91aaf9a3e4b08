mod common;

use std::collections::{BTreeMap, BTreeSet};

use booleval_core::intermediate::{
    mix_intermediate, opening_sentence_samples, read_generic_qa, read_linguistics, read_nli, Family, MixStats,
};
use booleval_core::rng::derive_rng;
use booleval_core::{load_corpus, Answer, CorpusKind};
use common::fixtures::path;

fn families() -> BTreeMap<Family, Vec<booleval_core::intermediate::IntermediateRecord>> {
    let news = load_corpus(path("intermediate/news.jsonl"), CorpusKind::Summarization).unwrap();
    [
        (Family::Nli, read_nli(path("intermediate/nli.jsonl")).unwrap()),
        (Family::SelfSupervised, opening_sentence_samples(&news, 6, &mut derive_rng(1, 0, 0)).unwrap()),
        (Family::Linguistics, read_linguistics(path("intermediate/linguistics.jsonl")).unwrap()),
        (Family::GenericQa, read_generic_qa(path("intermediate/generic_qa.jsonl")).unwrap()),
    ]
    .into()
}

#[test]
fn readers_convert_fixtures() {
    let f = families();
    let nli = &f[&Family::Nli];
    assert_eq!(nli.len(), 8);
    let yes: Vec<bool> = nli.iter().map(|r| r.answer == Answer::Yes).collect();
    assert_eq!(yes, vec![true, false, false, true, false, true, false, true]);
    assert_eq!(nli[7].source_dataset, "mnli");
    assert_eq!(nli[5].question, "Is the following question equivalent to the reference?");
    assert_eq!(f[&Family::Linguistics].len(), 5);
    // the non-boolean answer is dropped
    let qa = &f[&Family::GenericQa];
    assert_eq!(qa.len(), 4);
    assert_eq!(qa[1].context_segments.keys().collect::<Vec<_>>(), vec!["term", "description of term", "facts"]);
    let opening = &f[&Family::SelfSupervised];
    assert_eq!(opening.iter().filter(|r| r.answer == Answer::Yes).count(), 3);
}

#[test]
fn mixed_stats_match_recount() {
    let f = families();
    let all: BTreeSet<Family> = Family::ALL.into();
    let (records, stats) = mix_intermediate(&f, &all, &mut derive_rng(2, 0, 0)).unwrap();
    assert_eq!(stats.total, 8 + 6 + 5 + 4);
    let samples: Vec<String> =
        records.iter().enumerate().map(|(i, r)| serde_json::to_string(&r.to_sample(2, i as u64)).unwrap()).collect();
    let mut recount: BTreeMap<String, usize> = BTreeMap::new();
    for line in &samples {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["task"], "intermediate");
        *recount.entry(v["dimension"].as_str().unwrap().to_string()).or_default() += 1;
    }
    let from_stats: BTreeMap<String, usize> = stats.families.iter().map(|(k, v)| (k.to_string(), v.total)).collect();
    assert_eq!(recount, from_stats);
    assert_eq!(MixStats::from_records(&records), stats);

    let (subset, _) = mix_intermediate(&f, &[Family::Nli, Family::GenericQa].into(), &mut derive_rng(2, 0, 0)).unwrap();
    assert!(subset.iter().all(|r| matches!(r.family, Family::Nli | Family::GenericQa)));
    assert_eq!(subset.len(), 12);
}
