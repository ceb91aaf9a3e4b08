use std::path::PathBuf;

use booleval_core::perturb::{generate_dataset, PerturbConfig};
use booleval_core::qa_format::Aggregation;
use booleval_core::{builtin_registry, load_corpus, Answer, BooleanQASample, Corpus, CorpusKind, DimensionRegistry, Task};

pub fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn summ_corpus() -> Corpus {
    load_corpus(path("toy_summ.jsonl"), CorpusKind::Summarization).unwrap()
}

pub fn dialog_corpus() -> Corpus {
    load_corpus(path("toy_dialog.jsonl"), CorpusKind::Dialogue).unwrap()
}

pub fn corpus_for(task: &str) -> Corpus {
    if task == "summarization" { summ_corpus() } else { dialog_corpus() }
}

pub fn generate(task: &str, dim: &str, count: usize, seed: u64) -> Vec<BooleanQASample> {
    let cfg = PerturbConfig::with_seed(seed);
    generate_dataset(&Task::from(task), dim, &corpus_for(task), count, &cfg).unwrap()
}

/// Per dimension: (task, dim, aggregation, mean score of Yes minus mean of No).
pub fn oracle_separation(
    datasets: &[(String, String, Vec<BooleanQASample>)],
) -> Vec<(String, String, Aggregation, f64)> {
    use booleval_core::scorer::{score_batch, BatchOptions, LabelOracle};
    let registry: DimensionRegistry = builtin_registry();
    let all: Vec<BooleanQASample> = datasets.iter().flat_map(|d| d.2.clone()).collect();
    let oracle = LabelOracle::from_samples(&all, &registry).unwrap();
    datasets
        .iter()
        .map(|(task, dim, samples)| {
            let spec = registry.lookup(&Task::from(task.as_str()), dim).unwrap().clone();
            let instances: Vec<_> =
                samples.iter().enumerate().map(|(i, s)| s.to_instance(&format!("{i}"), &spec).unwrap()).collect();
            let out = score_batch::<f64>(&instances, std::slice::from_ref(&spec), &oracle, BatchOptions::default()).unwrap();
            assert!(out.errors.is_empty(), "{:?}", out.errors);
            let mean = |want: Answer| {
                let v: Vec<f64> = samples.iter().zip(&out.reports).filter(|(s, _)| s.answer == want).map(|(_, r)| r.score).collect();
                v.iter().sum::<f64>() / v.len() as f64
            };
            (task.clone(), dim.clone(), spec.aggregation, mean(Answer::Yes) - mean(Answer::No))
        })
        .collect()
}
