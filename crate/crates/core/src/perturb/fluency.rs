//! Span-level disfluency: repeat, delete or shuffle one contiguous token span.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::text::words;

use super::{Corruption, PerturbError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanOp {
    Repeat,
    Delete,
    Shuffle,
}

impl SpanOp {
    pub const ALL: [SpanOp; 3] = [SpanOp::Repeat, SpanOp::Delete, SpanOp::Shuffle];

    pub fn name(self) -> &'static str {
        match self {
            Self::Repeat => "fluency-repeat",
            Self::Delete => "fluency-delete",
            Self::Shuffle => "fluency-shuffle",
        }
    }
}

/// Raw Poisson draw for a span length (before clamping).
pub fn sample_span_length<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let poisson = Poisson::new(lambda).expect("lambda validated positive");
    poisson.sample(rng) as u64
}

/// Applies `op` to tokens `start..start+len`. A shuffle that cannot change
/// the sequence (one token, or identical tokens) becomes a repeat; otherwise
/// it is resampled until the order changes. Returns the op actually applied.
pub fn apply_span_op<R: Rng + ?Sized>(
    tokens: &[&str],
    start: usize,
    len: usize,
    op: SpanOp,
    rng: &mut R,
) -> (Vec<String>, SpanOp) {
    let end = start + len;
    assert!(len >= 1 && end <= tokens.len(), "span out of range");
    let span = &tokens[start..end];
    let mut op = op;
    if op == SpanOp::Shuffle && span.iter().all(|t| *t == span[0]) {
        op = SpanOp::Repeat;
    }
    let mut out: Vec<String> = tokens[..start].iter().map(|t| t.to_string()).collect();
    match op {
        SpanOp::Repeat => {
            out.extend(span.iter().map(|t| t.to_string()));
            out.extend(span.iter().map(|t| t.to_string()));
        }
        SpanOp::Delete => {}
        SpanOp::Shuffle => {
            let mut shuffled: Vec<&str> = span.to_vec();
            while shuffled == span {
                shuffled.shuffle(rng);
            }
            out.extend(shuffled.into_iter().map(str::to_string));
        }
    }
    out.extend(tokens[end..].iter().map(|t| t.to_string()));
    (out, op)
}

pub fn fluency_negative<R: Rng + ?Sized>(text: &str, lambda: f64, rng: &mut R) -> Result<Corruption, PerturbError> {
    if !(lambda > 0.0) {
        return Err(PerturbError::InvalidConfig("lambda must be positive".into()));
    }
    let tokens = words(text);
    let n = tokens.len();
    if n < 2 {
        return Err(PerturbError::TooShort { needed: 2, found: n, unit: "tokens" });
    }
    let len = (sample_span_length(lambda, rng) as usize).clamp(1, n - 1);
    let start = rng.random_range(0..=n - len);
    let op = SpanOp::ALL[rng.random_range(0..SpanOp::ALL.len())];
    let (out, applied) = apply_span_op(&tokens, start, len, op, rng);
    Ok(Corruption::new(out.join(" "), applied.name())
        .with_detail(format!("span={}..{}", start, start + len - 1)))
}
