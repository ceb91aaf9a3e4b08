//! Dimension scores from Yes/No probabilities.
//!
//! A provider maps rendered inputs to `(P(Yes), P(No))` pairs. Single-shot
//! dimensions score `P(Yes) / (P(Yes) + P(No))` directly; sentence-level
//! dimensions score each candidate sentence against the full context and
//! average or sum the results.

mod http;
mod provider;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{mean, Real};
use crate::qa_format::{render, Aggregation, DimensionSpec, EvalInstance, FormatError, RenderedInput};

pub use http::{HttpProvider, RetryPolicy};
pub use provider::{fnv1a64, LabelOracle, MockProvider};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("invalid probability pair ({p_yes}, {p_no}): {reason}")]
    InvalidPair { p_yes: f64, p_no: f64, reason: &'static str },
    #[error("no sentence scores to aggregate")]
    EmptySentences,
    #[error("instance {instance}: {source}")]
    Render { instance: String, source: FormatError },
    #[error("instance {instance}: provider failed: {source}")]
    Provider { instance: String, source: ProviderError },
    #[error("batch size must be at least 1")]
    BatchSize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("expected {expected} pairs, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("no label known for input: {0}")]
    UnknownInput(String),
    #[error("{0}")]
    InvalidPair(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: Box<ProviderError> },
}

/// Unnormalized probabilities of the answers "Yes" and "No".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityPair<T> {
    #[serde(rename = "yes")]
    pub p_yes: T,
    #[serde(rename = "no")]
    pub p_no: T,
}

impl<T: Real> ProbabilityPair<T> {
    /// Checked constructor: both finite, non-negative, positive sum.
    pub fn new(p_yes: T, p_no: T) -> Result<Self, ScoreError> {
        let pair = Self { p_yes, p_no };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<(), ScoreError> {
        let err = |reason| {
            Err(ScoreError::InvalidPair {
                p_yes: self.p_yes.to_f64().unwrap_or(f64::NAN),
                p_no: self.p_no.to_f64().unwrap_or(f64::NAN),
                reason,
            })
        };
        if !self.p_yes.is_finite() || !self.p_no.is_finite() {
            return err("non-finite");
        }
        if self.p_yes < T::zero() || self.p_no < T::zero() {
            return err("negative");
        }
        if self.p_yes + self.p_no <= T::zero() {
            return err("zero sum");
        }
        Ok(())
    }
}

/// `p_yes / (p_yes + p_no)`.
pub fn eq1_score<T: Real>(p: ProbabilityPair<T>) -> Result<T, ScoreError> {
    p.validate()?;
    Ok(p.p_yes / (p.p_yes + p.p_no))
}

/// Mean or sum of per-sentence scores. `Single` behaves like the mean.
pub fn aggregate<T: Real>(sentence_scores: &[T], mode: Aggregation) -> Result<T, ScoreError> {
    if sentence_scores.is_empty() {
        return Err(ScoreError::EmptySentences);
    }
    Ok(match mode {
        Aggregation::SentenceSum => sentence_scores.iter().copied().sum(),
        Aggregation::SentenceAverage | Aggregation::Single => mean(sentence_scores),
    })
}

/// Maps an ordered batch of inputs to one pair per input, in order.
pub trait ProbabilityProvider<T: Real>: Send + Sync {
    /// Recorded in every report.
    fn name(&self) -> String;

    fn probabilities(&self, inputs: &[String]) -> Result<Vec<ProbabilityPair<T>>, ProviderError>;
}

impl<T: Real, P: ProbabilityProvider<T> + ?Sized> ProbabilityProvider<T> for Box<P> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn probabilities(&self, inputs: &[String]) -> Result<Vec<ProbabilityPair<T>>, ProviderError> {
        (**self).probabilities(inputs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport<T> {
    pub instance_id: String,
    pub task: String,
    pub dimension: String,
    pub score: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_scores: Option<Vec<(usize, T)>>,
    pub aggregation: Aggregation,
    pub provider: String,
}

fn checked_call<T: Real>(
    provider: &dyn ProbabilityProvider<T>,
    inputs: &[String],
) -> Result<Vec<ProbabilityPair<T>>, ProviderError> {
    let pairs = provider.probabilities(inputs)?;
    if pairs.len() != inputs.len() {
        return Err(ProviderError::LengthMismatch { expected: inputs.len(), got: pairs.len() });
    }
    for p in &pairs {
        p.validate().map_err(|e| ProviderError::InvalidPair(e.to_string()))?;
    }
    Ok(pairs)
}

fn assemble<T: Real>(
    rendered: &[RenderedInput],
    pairs: &[ProbabilityPair<T>],
    spec: &DimensionSpec,
    instance_id: &str,
    provider: String,
) -> Result<ScoreReport<T>, ScoreError> {
    let scores = pairs.iter().map(|p| eq1_score(*p)).collect::<Result<Vec<T>, _>>()?;
    let (score, sentence_scores) = match spec.aggregation {
        Aggregation::Single => (scores[0], None),
        mode => {
            let per_sentence = rendered
                .iter()
                .zip(&scores)
                .map(|(r, s)| (r.sentence_index.unwrap_or(0), *s))
                .collect();
            (aggregate(&scores, mode)?, Some(per_sentence))
        }
    };
    Ok(ScoreReport {
        instance_id: instance_id.to_string(),
        task: spec.task.to_string(),
        dimension: spec.name.clone(),
        score,
        sentence_scores,
        aggregation: spec.aggregation,
        provider,
    })
}

fn render_for(instance: &EvalInstance, spec: &DimensionSpec) -> Result<Vec<RenderedInput>, ScoreError> {
    render(instance, spec).map_err(|source| ScoreError::Render { instance: instance.id.clone(), source })
}

/// Scores one instance on one dimension with a single provider call.
pub fn score_instance<T: Real>(
    instance: &EvalInstance,
    spec: &DimensionSpec,
    provider: &dyn ProbabilityProvider<T>,
) -> Result<ScoreReport<T>, ScoreError> {
    let rendered = render_for(instance, spec)?;
    let inputs: Vec<String> = rendered.iter().map(|r| r.text.clone()).collect();
    let pairs = checked_call(provider, &inputs)
        .map_err(|source| ScoreError::Provider { instance: instance.id.clone(), source })?;
    assemble(&rendered, &pairs, spec, &instance.id, provider.name())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchOptions {
    /// Rendered inputs per provider call.
    pub batch_size: usize,
    /// Provider calls running at once.
    pub max_in_flight: usize,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self { batch_size: 16, max_in_flight: 4 }
    }
}

impl BatchOptions {
    pub fn with_batch_size(batch_size: usize) -> Self {
        Self { batch_size, ..Self::default() }
    }
}

/// Reports in input order plus the per-instance failures.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutcome<T> {
    pub reports: Vec<ScoreReport<T>>,
    pub errors: Vec<ScoreError>,
}

impl<T> BatchOutcome<T> {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Scores every instance on every spec (instance-major order).
///
/// Inputs from all jobs are flattened and cut into provider calls of
/// `batch_size`; a failed call fails exactly the jobs with an input in it.
pub fn score_batch<T: Real>(
    instances: &[EvalInstance],
    specs: &[DimensionSpec],
    provider: &dyn ProbabilityProvider<T>,
    opts: BatchOptions,
) -> Result<BatchOutcome<T>, ScoreError> {
    if opts.batch_size == 0 {
        return Err(ScoreError::BatchSize);
    }
    struct Job<'a> {
        instance: &'a EvalInstance,
        spec: &'a DimensionSpec,
        rendered: Result<Vec<RenderedInput>, ScoreError>,
        offset: usize,
    }
    let mut jobs = Vec::with_capacity(instances.len() * specs.len());
    let mut inputs: Vec<String> = Vec::new();
    for instance in instances {
        for spec in specs {
            let rendered = render_for(instance, spec);
            let offset = inputs.len();
            if let Ok(r) = &rendered {
                inputs.extend(r.iter().map(|x| x.text.clone()));
            }
            jobs.push(Job { instance, spec, rendered, offset });
        }
    }

    let chunks: Vec<&[String]> = inputs.chunks(opts.batch_size).collect();
    let results: Mutex<Vec<Option<Result<Vec<ProbabilityPair<T>>, ProviderError>>>> =
        Mutex::new(vec![None; chunks.len()]);
    let next = AtomicUsize::new(0);
    let workers = opts.max_in_flight.max(1).min(chunks.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= chunks.len() {
                    break;
                }
                let out = checked_call(provider, chunks[i]);
                results.lock().expect("result slots")[i] = Some(out);
            });
        }
    });
    let results: Vec<_> = results
        .into_inner()
        .expect("result slots")
        .into_iter()
        .map(|r| r.expect("every chunk ran"))
        .collect();

    let name = provider.name();
    let mut outcome = BatchOutcome { reports: Vec::new(), errors: Vec::new() };
    for job in jobs {
        let rendered = match job.rendered {
            Ok(r) => r,
            Err(e) => {
                outcome.errors.push(e);
                continue;
            }
        };
        let mut pairs = Vec::with_capacity(rendered.len());
        let mut failure = None;
        for k in job.offset..job.offset + rendered.len() {
            match &results[k / opts.batch_size] {
                Ok(chunk) => pairs.push(chunk[k % opts.batch_size]),
                Err(e) => {
                    failure = Some(e.clone());
                    break;
                }
            }
        }
        let result = match failure {
            Some(source) => Err(ScoreError::Provider { instance: job.instance.id.clone(), source }),
            None => assemble(&rendered, &pairs, job.spec, &job.instance.id, name.clone()),
        };
        match result {
            Ok(report) => outcome.reports.push(report),
            Err(e) => outcome.errors.push(e),
        }
    }
    Ok(outcome)
}
