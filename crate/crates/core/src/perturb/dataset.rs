//! Balanced pseudo-data generation for one (task, dimension).
//!
//! Sample pairs are built independently per ordinal from an RNG derived from
//! `(seed, dimension, ordinal)`, so output does not depend on thread count.
//! Pairs are emitted in ordinal order as `Yes` then `No`.

use std::sync::Arc;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::corpus::{sentence_texts, Corpus};
use crate::qa_format::{builtin_registry, resolve_segments, DimensionRegistry, DimensionSpec, EvalInstance, Task};
use crate::rng::{derive_rng, stream_id, SampleRng};
use crate::sample::{Answer, BooleanQASample, Provenance};
use crate::text::{normalize_whitespace, words};

use super::{
    coherence_negative, dialogue_negative, groundedness_pair, relevance_negative, Corruption,
    ConsistencyCorrupter, DialogueDimension, DullResponseProvider, ParaphraseProvider, PerturbConfig,
    PerturbError, SummaryPool, fluency_negative,
};

/// (task, dimension) pairs with a pseudo-data rule.
pub const GENERATABLE: &[(&str, &str)] = &[
    ("summarization", "coherence"),
    ("summarization", "consistency"),
    ("summarization", "fluency"),
    ("summarization", "relevance"),
    ("dialogue", "naturalness"),
    ("dialogue", "coherence"),
    ("dialogue", "engagingness"),
    ("dialogue", "groundedness"),
];

const REDRAWS: usize = 16;

pub fn sample_file_name(task: &Task, dimension: &str) -> String {
    format!("{task}.{dimension}.jsonl")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    SummCoherence,
    SummConsistency,
    SummFluency,
    SummRelevance,
    Dialogue(DialogueDimension),
    Groundedness,
}

fn rule_for(task: &Task, dimension: &str) -> Option<Rule> {
    Some(match (task, dimension) {
        (Task::Summarization, "coherence") => Rule::SummCoherence,
        (Task::Summarization, "consistency") => Rule::SummConsistency,
        (Task::Summarization, "fluency") => Rule::SummFluency,
        (Task::Summarization, "relevance") => Rule::SummRelevance,
        (Task::Dialogue, "groundedness") => Rule::Groundedness,
        (Task::Dialogue, d) => Rule::Dialogue(d.parse().ok()?),
        _ => return None,
    })
}

/// Candidate texts (positive, negative) plus provenance bits for one record.
struct Pair {
    positive: String,
    positive_rule: String,
    negative: Corruption,
}

pub struct PseudoDataBuilder<'a> {
    corpus: &'a Corpus,
    registry: DimensionRegistry,
    cfg: PerturbConfig,
    pool: Option<SummaryPool>,
    consistency: ConsistencyCorrupter,
    dull: Option<Arc<dyn DullResponseProvider>>,
    paraphraser: Option<Arc<dyn ParaphraseProvider>>,
}

impl<'a> PseudoDataBuilder<'a> {
    pub fn new(corpus: &'a Corpus, cfg: PerturbConfig) -> Result<Self, PerturbError> {
        cfg.validate()?;
        if corpus.is_empty() {
            return Err(PerturbError::EmptyCorpus);
        }
        let pool = match corpus.summaries() {
            Some(records) => Some(SummaryPool::from_records(records, cfg.retrieval_k)?),
            None => None,
        };
        Ok(Self {
            corpus,
            registry: builtin_registry(),
            cfg,
            pool,
            consistency: ConsistencyCorrupter::default(),
            dull: None,
            paraphraser: None,
        })
    }

    pub fn with_registry(mut self, registry: DimensionRegistry) -> Self {
        self.registry = registry;
        self
    }

    pub fn with_dull_generator(mut self, generator: Arc<dyn DullResponseProvider>) -> Self {
        self.dull = Some(generator);
        self
    }

    pub fn with_paraphraser(mut self, paraphraser: Arc<dyn ParaphraseProvider>) -> Self {
        self.paraphraser = Some(paraphraser);
        self
    }

    pub fn with_consistency(mut self, corrupter: ConsistencyCorrupter) -> Self {
        self.consistency = corrupter;
        self
    }

    fn eligible(&self, rule: Rule) -> Vec<usize> {
        match self.corpus {
            Corpus::Summarization(recs) => (0..recs.len())
                .filter(|&i| {
                    let r = recs[i].reference();
                    match rule {
                        Rule::SummCoherence => !sentence_texts(r).is_empty(),
                        Rule::SummConsistency => !self.consistency.applicable_rules(r).is_empty(),
                        Rule::SummFluency => words(r).len() >= 2,
                        Rule::SummRelevance => sentence_texts(r).len() >= 2,
                        _ => false,
                    }
                })
                .collect(),
            Corpus::Dialogue(recs) => (0..recs.len())
                .filter(|&i| match rule {
                    Rule::Dialogue(DialogueDimension::Naturalness) => words(&recs[i].gold_response).len() >= 2,
                    Rule::Dialogue(_) => true,
                    Rule::Groundedness => !sentence_texts(&recs[i].knowledge).is_empty(),
                    _ => false,
                })
                .collect(),
        }
    }

    fn pair_for(&self, rule: Rule, idx: usize, rng: &mut SampleRng) -> Result<Pair, PerturbError> {
        match self.corpus {
            Corpus::Summarization(recs) => {
                let rec = &recs[idx];
                let gold = normalize_whitespace(rec.reference());
                let pool = self.pool.as_ref().expect("summarization pool");
                let mut negative = match rule {
                    Rule::SummCoherence => coherence_negative(rec.id(), &gold, pool, rng)?,
                    Rule::SummConsistency => self.consistency.corrupt(&gold, rng)?,
                    Rule::SummFluency => fluency_negative(&gold, self.cfg.lambda_summ, rng)?,
                    Rule::SummRelevance => relevance_negative(rec.id(), &gold, pool, &self.cfg, rng)?,
                    _ => unreachable!("summarization rule"),
                };
                if negative.source_ids.is_empty() {
                    negative.source_ids.push(rec.id().to_string());
                }
                Ok(Pair { positive: gold, positive_rule: "gold".into(), negative })
            }
            Corpus::Dialogue(recs) => {
                let rec = &recs[idx];
                match rule {
                    Rule::Groundedness => {
                        let pair = groundedness_pair(rec, recs, self.paraphraser.as_deref(), rng)?;
                        Ok(Pair {
                            positive: pair.positive,
                            positive_rule: pair.positive_rule,
                            negative: Corruption {
                                text: pair.negative,
                                rule: "knowledge-other-context".into(),
                                source_ids: vec![rec.id.clone(), pair.negative_source],
                                detail: None,
                            },
                        })
                    }
                    Rule::Dialogue(dim) => {
                        let negative = dialogue_negative(rec, dim, recs, self.dull.as_deref(), &self.cfg, rng)?;
                        Ok(Pair { positive: normalize_whitespace(&rec.gold_response), positive_rule: "gold".into(), negative })
                    }
                    _ => unreachable!("dialogue rule"),
                }
            }
        }
    }

    fn instance(&self, idx: usize, candidate: &str) -> EvalInstance {
        match self.corpus {
            Corpus::Summarization(recs) => {
                let r = &recs[idx];
                EvalInstance::new(r.id(), candidate)
                    .with_reference(&normalize_whitespace(r.reference()))
                    .with_context("document", r.document.text.as_str())
            }
            Corpus::Dialogue(recs) => {
                let r = &recs[idx];
                let turns: Vec<&str> = r.history.iter().map(String::as_str).collect();
                EvalInstance::new(&r.id, candidate)
                    .with_turns("history", &turns)
                    .with_context("fact", r.knowledge.as_str())
            }
        }
    }

    fn sample(
        &self,
        spec: &DimensionSpec,
        idx: usize,
        candidate: &str,
        answer: Answer,
        provenance: Provenance,
    ) -> Result<BooleanQASample, PerturbError> {
        let segments: IndexMap<String, String> =
            resolve_segments(&self.instance(idx, candidate), spec)?.into_iter().collect();
        Ok(BooleanQASample {
            task: spec.task.to_string(),
            dimension: spec.name.clone(),
            segments,
            question: spec.question.clone(),
            answer,
            provenance,
        })
    }

    /// `count/2` positives and `count/2` negatives, interleaved by ordinal.
    pub fn generate(&self, task: &Task, dimension: &str, count: usize) -> Result<Vec<BooleanQASample>, PerturbError> {
        if count == 0 || count % 2 != 0 {
            return Err(PerturbError::OddCount(count));
        }
        let unknown = || PerturbError::UnknownDimension { task: task.to_string(), dimension: dimension.to_string() };
        let rule = rule_for(task, dimension).ok_or_else(unknown)?;
        let expected_kind = matches!(task, Task::Summarization);
        if expected_kind != self.corpus.summaries().is_some() {
            return Err(PerturbError::WrongCorpus(task.to_string()));
        }
        let spec = self.registry.lookup(task, dimension)?.clone();
        let eligible = self.eligible(rule);
        if eligible.is_empty() {
            return Err(PerturbError::NoEligible(format!("{task}/{dimension}")));
        }
        let seed = self.cfg.rng_seed;
        let stream = stream_id(&format!("{task}.{dimension}"));
        let mut order = eligible.clone();
        order.shuffle(&mut derive_rng(seed, stream, u64::MAX));
        let half = count / 2;

        let pairs: Result<Vec<[BooleanQASample; 2]>, PerturbError> = (0..half)
            .into_par_iter()
            .map(|ordinal| {
                let mut rng = derive_rng(seed, stream, ordinal as u64);
                let mut idx = order[ordinal % order.len()];
                let with_replacement = ordinal >= order.len();
                let mut last_err = None;
                for _ in 0..REDRAWS {
                    match self.pair_for(rule, idx, &mut rng) {
                        Ok(pair) => {
                            let id = self.corpus_id(idx);
                            let base = Provenance {
                                seed,
                                ordinal: ordinal as u64,
                                with_replacement,
                                ..Provenance::default()
                            };
                            let pos = self.sample(&spec, idx, &pair.positive, Answer::Yes, Provenance {
                                rule: pair.positive_rule,
                                source_ids: vec![id],
                                ..base.clone()
                            })?;
                            let neg = self.sample(&spec, idx, &pair.negative.text, Answer::No, Provenance {
                                rule: pair.negative.rule,
                                source_ids: pair.negative.source_ids,
                                detail: pair.negative.detail,
                                ..base
                            })?;
                            return Ok([pos, neg]);
                        }
                        Err(e @ PerturbError::Generator { .. }) => return Err(e),
                        Err(e) => {
                            last_err = Some(e);
                            idx = eligible[rng.random_range(0..eligible.len())];
                        }
                    }
                }
                Err(last_err.expect("at least one attempt"))
            })
            .collect();
        Ok(pairs?.into_iter().flatten().collect())
    }

    fn corpus_id(&self, idx: usize) -> String {
        match self.corpus {
            Corpus::Summarization(r) => r[idx].id().to_string(),
            Corpus::Dialogue(r) => r[idx].id.clone(),
        }
    }
}

/// Generates a balanced dataset with the built-in registry and offline fallbacks.
pub fn generate_dataset(
    task: &Task,
    dimension: &str,
    corpus: &Corpus,
    count: usize,
    cfg: &PerturbConfig,
) -> Result<Vec<BooleanQASample>, PerturbError> {
    PseudoDataBuilder::new(corpus, cfg.clone())?.generate(task, dimension, count)
}
