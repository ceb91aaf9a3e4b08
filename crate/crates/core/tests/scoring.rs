mod common;

use booleval_core::qa_format::Aggregation;
use booleval_core::rng::derive_rng;
use booleval_core::scorer::{score_batch, score_instance, BatchOptions, LabelOracle, MockProvider, ScoreError};
use booleval_core::{builtin_registry, Answer, DimensionSpec, EvalInstance, Task};
use common::fixtures;
use rand::seq::SliceRandom;

fn summ_specs() -> Vec<DimensionSpec> {
    builtin_registry().for_task(&Task::Summarization).cloned().collect()
}

fn instances(n: usize) -> Vec<EvalInstance> {
    let corpus = fixtures::summ_corpus();
    corpus.summaries().unwrap()[..n]
        .iter()
        .map(|r| {
            EvalInstance::new(r.id(), r.reference())
                .with_reference(r.reference())
                .with_context("document", r.document.text.as_str())
        })
        .collect()
}

#[test]
fn batch_sizes_agree_with_sequential() {
    let inst = instances(100);
    let specs = summ_specs();
    let sequential: Vec<_> = inst
        .iter()
        .flat_map(|i| specs.iter().map(move |s| (i, s)))
        .map(|(i, s)| score_instance::<f64>(i, s, &MockProvider).unwrap())
        .collect();
    for batch_size in [1, 7, 16] {
        for max_in_flight in [1, 3] {
            let out = score_batch::<f64>(&inst, &specs, &MockProvider, BatchOptions { batch_size, max_in_flight }).unwrap();
            assert!(out.is_clean());
            assert_eq!(out.reports, sequential, "batch {batch_size}, in flight {max_in_flight}");
        }
    }
}

#[test]
fn permutation_permutes_reports() {
    let inst = instances(30);
    let specs = summ_specs();
    let base = score_batch::<f64>(&inst, &specs, &MockProvider, BatchOptions::default()).unwrap().reports;
    let mut order: Vec<usize> = (0..inst.len()).collect();
    order.shuffle(&mut derive_rng(3, 0, 0));
    let shuffled: Vec<_> = order.iter().map(|&i| inst[i].clone()).collect();
    let out = score_batch::<f64>(&shuffled, &specs, &MockProvider, BatchOptions::with_batch_size(5)).unwrap().reports;
    for (pos, &i) in order.iter().enumerate() {
        assert_eq!(out[pos * specs.len()..(pos + 1) * specs.len()], base[i * specs.len()..(i + 1) * specs.len()]);
    }
}

#[test]
fn missing_context_fails_one_instance() {
    let mut inst = instances(40);
    inst[17].context.clear();
    let registry = builtin_registry();
    let spec = registry.lookup(&Task::Summarization, "coherence").unwrap().clone();
    let out = score_batch::<f64>(&inst, &[spec], &MockProvider, BatchOptions::with_batch_size(8)).unwrap();
    assert_eq!(out.reports.len(), 39);
    assert_eq!(out.errors.len(), 1);
    assert!(matches!(&out.errors[0], ScoreError::Render { instance, .. } if instance == "doc-017"));
    assert!(out.reports.iter().all(|r| r.instance_id != "doc-017"));
}

#[test]
fn label_oracle_scores_single_dimensions() {
    let registry = builtin_registry();
    for (task, dim) in [("summarization", "coherence"), ("summarization", "relevance"), ("dialogue", "groundedness")] {
        let samples = fixtures::generate(task, dim, 100, 5);
        let oracle = LabelOracle::from_samples(&samples, &registry).unwrap();
        let spec = registry.lookup(&Task::from(task), dim).unwrap().clone();
        assert_eq!(spec.aggregation, Aggregation::Single);
        let inst: Vec<_> = samples.iter().enumerate().map(|(i, s)| s.to_instance(&i.to_string(), &spec).unwrap()).collect();
        let out = score_batch::<f64>(&inst, &[spec], &oracle, BatchOptions::default()).unwrap();
        for (s, r) in samples.iter().zip(&out.reports) {
            let want = if s.answer == Answer::Yes { 0.9 } else { 0.1 };
            assert!((r.score - want).abs() < 1e-12, "{task}/{dim}");
        }
    }
}

#[test]
fn report_line_shape() {
    let registry = builtin_registry();
    let spec = registry.lookup(&Task::Summarization, "fluency").unwrap();
    let report = score_instance::<f64>(&EvalInstance::new("a", "One. Two."), spec, &MockProvider).unwrap();
    let v: serde_json::Value = serde_json::to_value(&report).unwrap();
    for key in ["instance_id", "dimension", "score", "sentence_scores", "aggregation", "provider"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["sentence_scores"][1][0], 1);
    assert_eq!(v["aggregation"], "sentence_average");
    let mean = (report.sentence_scores.as_ref().unwrap()[0].1 + report.sentence_scores.as_ref().unwrap()[1].1) / 2.0;
    assert_eq!(report.score, mean);
}
