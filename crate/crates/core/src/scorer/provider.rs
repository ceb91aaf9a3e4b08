use std::collections::HashMap;
use std::path::Path;

use crate::num::Real;
use crate::qa_format::{render, DimensionRegistry, FormatError, Task};
use crate::sample::{read_samples, Answer, BooleanQASample};

use super::{ProbabilityPair, ProbabilityProvider, ProviderError};

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ *b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Deterministic stand-in for a model.
///
/// `p_yes` is the top 53 bits of the FNV-1a hash of the UTF-8 input divided
/// by 2^53, and `p_no = 1 - p_yes`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockProvider;

impl MockProvider {
    pub fn p_yes(input: &str) -> f64 {
        (fnv1a64(input.as_bytes()) >> 11) as f64 / (1u64 << 53) as f64
    }
}

impl<T: Real> ProbabilityProvider<T> for MockProvider {
    fn name(&self) -> String {
        "mock-fnv1a".into()
    }

    fn probabilities(&self, inputs: &[String]) -> Result<Vec<ProbabilityPair<T>>, ProviderError> {
        Ok(inputs
            .iter()
            .map(|s| {
                let y = Self::p_yes(s);
                ProbabilityPair { p_yes: T::of(y), p_no: T::of(1.0 - y) }
            })
            .collect())
    }
}

/// Answers from known labels: Yes gives (0.9, 0.1), No gives (0.1, 0.9).
///
/// Each sample is rendered under its dimension; sentence-level dimensions
/// contribute one entry per candidate sentence. An input seen under both
/// labels answers Yes. Unknown inputs are an error.
#[derive(Debug, Clone, Default)]
pub struct LabelOracle {
    labels: HashMap<String, Answer>,
}

impl LabelOracle {
    pub const YES: (f64, f64) = (0.9, 0.1);
    pub const NO: (f64, f64) = (0.1, 0.9);

    pub fn insert(&mut self, input: String, answer: Answer) {
        let slot = self.labels.entry(input).or_insert(answer);
        if answer == Answer::Yes {
            *slot = Answer::Yes;
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, Answer)>>(pairs: I) -> Self {
        let mut oracle = Self::default();
        for (input, answer) in pairs {
            oracle.insert(input, answer);
        }
        oracle
    }

    pub fn from_samples(samples: &[BooleanQASample], registry: &DimensionRegistry) -> Result<Self, FormatError> {
        let mut oracle = Self::default();
        for (i, sample) in samples.iter().enumerate() {
            oracle.insert(sample.render_text(), sample.answer);
            let Ok(spec) = registry.lookup(&Task::from(sample.task.as_str()), &sample.dimension) else {
                continue;
            };
            let instance = sample.to_instance(&format!("oracle-{i}"), spec)?;
            for r in render(&instance, spec)? {
                oracle.insert(r.text, sample.answer);
            }
        }
        Ok(oracle)
    }

    pub fn load(path: impl AsRef<Path>, registry: &DimensionRegistry) -> Result<Self, ProviderError> {
        let samples = read_samples(path).map_err(|e| ProviderError::Malformed(e.to_string()))?;
        Self::from_samples(&samples, registry).map_err(|e| ProviderError::Malformed(e.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl<T: Real> ProbabilityProvider<T> for LabelOracle {
    fn name(&self) -> String {
        "label-oracle".into()
    }

    fn probabilities(&self, inputs: &[String]) -> Result<Vec<ProbabilityPair<T>>, ProviderError> {
        inputs
            .iter()
            .map(|s| {
                let (y, n) = match self.labels.get(s) {
                    Some(Answer::Yes) => Self::YES,
                    Some(Answer::No) => Self::NO,
                    None => return Err(ProviderError::UnknownInput(s.chars().take(80).collect())),
                };
                Ok(ProbabilityPair { p_yes: T::of(y), p_no: T::of(n) })
            })
            .collect()
    }
}
