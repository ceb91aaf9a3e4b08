//! Multi-dimensional evaluation of generated text framed as Boolean QA.
//!
//! Each quality dimension becomes a yes/no question; a model backend supplies
//! P(Yes) and P(No) for the rendered input and the score is
//! `P(Yes) / (P(Yes) + P(No))`. The crate also builds rule-based pseudo
//! training data, converts intermediate tasks, plans training curricula and
//! meta-evaluates scores against human judgments.
//!
//! Numeric code is generic over [`num::Real`]; the aliases below fix the
//! scalar to `f64`.

pub mod corpus;
pub mod curriculum;
pub mod intermediate;
pub mod metaeval;
pub mod num;
pub mod perturb;
pub mod qa_format;
pub mod rng;
pub mod sample;
pub mod scorer;
pub mod text;

pub use corpus::{load_corpus, split_sentences, Corpus, CorpusKind, DialogueRecord, Sentence};
pub use qa_format::{builtin_registry, render, DimensionRegistry, DimensionSpec, EvalInstance, Task};
pub use sample::{Answer, BooleanQASample, Provenance};
pub use scorer::{eq1_score, score_batch, score_instance, BatchOptions, LabelOracle, MockProvider, ProbabilityProvider};

pub type Bm25Index = perturb::Bm25Index<f64>;
pub type ProbabilityPair = scorer::ProbabilityPair<f64>;
pub type ScoreReport = scorer::ScoreReport<f64>;
pub type CorrelationReport = metaeval::CorrelationReport<f64>;
pub type BenchmarkTable = metaeval::BenchmarkTable<f64>;
