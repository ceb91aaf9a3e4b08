//! Rule-based construction of positive and negative Boolean-QA samples.
//!
//! Positives use the gold text as candidate; negatives corrupt it with a
//! dimension-specific rule. Every negative differs from its positive, and
//! every corruption reports the rule it applied.

mod bm25;
mod consistency;
mod dataset;
mod dialogue;
mod fluency;
mod summary;

use thiserror::Error;

pub use bm25::{build_bm25, retrieve_similar, Bm25Index, DEFAULT_B, DEFAULT_K1};
pub use consistency::{
    consistency_negative, CapitalizedSpans, ConsistencyCorrupter, ConsistencyRule, EntityDetector,
};
pub use dataset::{generate_dataset, sample_file_name, PseudoDataBuilder, GENERATABLE};
pub use dialogue::{
    dialogue_negative, groundedness_pair, DialogueDimension, DullResponseProvider, DullStub,
    GroundednessPair, ParaphraseProvider, RuleParaphraser,
};
pub use fluency::{apply_span_op, fluency_negative, sample_span_length, SpanOp};
pub use summary::{coherence_negative, relevance_negative, relevance_replace_count, SummaryPool};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("document \"{0}\" has no tokens")]
    EmptyDocument(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no donor summary available for \"{0}\"")]
    NoDonor(String),
    #[error("no consistency rule applies")]
    NotApplicable,
    #[error("text needs at least {needed} {unit}, found {found}")]
    TooShort { needed: usize, found: usize, unit: &'static str },
    #[error("pool too small: {0}")]
    PoolTooSmall(String),
    #[error("dialogue {id}: generator failed: {message}")]
    Generator { id: String, message: String },
    #[error("dialogue {0} has no knowledge sentences")]
    EmptyKnowledge(String),
    #[error("no pseudo-data rule for {task}/{dimension}")]
    UnknownDimension { task: String, dimension: String },
    #[error("count must be a positive even number, got {0}")]
    OddCount(usize),
    #[error("no record in the corpus is eligible for {0}")]
    NoEligible(String),
    #[error("corpus kind does not match task {0}")]
    WrongCorpus(String),
    #[error(transparent)]
    Format(#[from] crate::qa_format::FormatError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbConfig {
    /// Poisson mean of fluency span lengths for summaries.
    pub lambda_summ: f64,
    /// Poisson mean for dialogue naturalness.
    pub lambda_dialog: f64,
    pub relevance_replace_min: usize,
    /// Donor candidates retrieved per reference.
    pub retrieval_k: usize,
    pub rng_seed: u64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self { lambda_summ: 5.0, lambda_dialog: 3.0, relevance_replace_min: 2, retrieval_k: 10, rng_seed: 0 }
    }
}

impl PerturbConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { rng_seed: seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), PerturbError> {
        if !(self.lambda_summ > 0.0 && self.lambda_dialog > 0.0) {
            return Err(PerturbError::InvalidConfig("lambdas must be positive".into()));
        }
        if self.relevance_replace_min < 2 {
            return Err(PerturbError::InvalidConfig("relevance_replace_min must be >= 2".into()));
        }
        if self.retrieval_k == 0 {
            return Err(PerturbError::InvalidConfig("retrieval_k must be >= 1".into()));
        }
        Ok(())
    }
}

/// A corrupted text and how it was made.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corruption {
    pub text: String,
    pub rule: String,
    pub source_ids: Vec<String>,
    pub detail: Option<String>,
}

impl Corruption {
    fn new(text: String, rule: impl Into<String>) -> Self {
        Self { text, rule: rule.into(), source_ids: Vec::new(), detail: None }
    }

    fn with_sources(mut self, ids: Vec<String>) -> Self {
        self.source_ids = ids;
        self
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}
