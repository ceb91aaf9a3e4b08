//! Sentence replacement negatives for summary coherence and relevance.
//!
//! Donor sentences come from summaries retrieved with BM25 using the whole
//! reference as the query. When retrieval finds nothing, any other summary
//! can donate.

use std::collections::{HashMap, HashSet};

use rand::seq::index;
use rand::Rng;

use crate::corpus::{sentence_texts, SummaryRecord};
use crate::num::Real;

use super::{Bm25Index, Corruption, PerturbConfig, PerturbError};

const MAX_ATTEMPTS: usize = 24;

/// Reference summaries indexed for donor retrieval.
#[derive(Debug, Clone)]
pub struct SummaryPool<T: Real = f64> {
    index: Bm25Index<T>,
    sentences: HashMap<String, Vec<String>>,
    top_k: usize,
}

impl<T: Real> SummaryPool<T> {
    pub fn new<I, S, U>(summaries: I, top_k: usize) -> Result<Self, PerturbError>
    where
        I: IntoIterator<Item = (S, U)>,
        S: Into<String>,
        U: AsRef<str>,
    {
        let items: Vec<(String, String)> =
            summaries.into_iter().map(|(i, t)| (i.into(), t.as_ref().to_string())).collect();
        let index = Bm25Index::with_defaults(items.iter().map(|(i, t)| (i.clone(), t.as_str())))?;
        let sentences = items.into_iter().map(|(i, t)| (i, sentence_texts(&t))).collect();
        Ok(Self { index, sentences, top_k: top_k.max(1) })
    }

    pub fn from_records(records: &[SummaryRecord], top_k: usize) -> Result<Self, PerturbError> {
        Self::new(records.iter().map(|r| (r.id().to_string(), r.reference())), top_k)
    }

    pub fn index(&self) -> &Bm25Index<T> {
        &self.index
    }

    pub fn sentences(&self, id: &str) -> Option<&[String]> {
        self.sentences.get(id).map(Vec::as_slice)
    }

    /// Donor ids for `reference`: the top-k retrieved others, or every other
    /// summary when none overlaps.
    pub fn donors(&self, ref_id: &str, reference: &str) -> Vec<String> {
        let exclude: HashSet<String> = [ref_id.to_string()].into();
        let hits = self.index.retrieve(reference, self.top_k, &exclude);
        if !hits.is_empty() {
            return hits.into_iter().map(|(id, _)| id).collect();
        }
        self.index.doc_ids().iter().filter(|id| id.as_str() != ref_id).cloned().collect()
    }
}

fn replace_positions<T: Real, R: Rng + ?Sized>(
    ref_id: &str,
    sentences: &[String],
    positions: &[usize],
    donors: &[String],
    pool: &SummaryPool<T>,
    rng: &mut R,
) -> Option<(Vec<String>, Vec<String>)> {
    'attempt: for _ in 0..MAX_ATTEMPTS {
        let mut out = sentences.to_vec();
        let mut used = Vec::new();
        for &pos in positions {
            let donor = &donors[rng.random_range(0..donors.len())];
            let donor_sentences = pool.sentences(donor)?;
            if donor_sentences.is_empty() {
                continue 'attempt;
            }
            let pick = &donor_sentences[rng.random_range(0..donor_sentences.len())];
            if pick == &sentences[pos] || out.iter().any(|s| s == pick) {
                continue 'attempt;
            }
            out[pos] = pick.clone();
            used.push(donor.clone());
        }
        // The result must re-segment into the same sentence slots.
        if sentence_texts(&out.join(" ")) == out {
            let mut sources = vec![ref_id.to_string()];
            sources.extend(used);
            return Some((out, sources));
        }
    }
    None
}

/// Replaces one sentence of `reference` with a sentence from a retrieved summary.
pub fn coherence_negative<T: Real, R: Rng + ?Sized>(
    ref_id: &str,
    reference: &str,
    pool: &SummaryPool<T>,
    rng: &mut R,
) -> Result<Corruption, PerturbError> {
    let sentences = sentence_texts(reference);
    if sentences.is_empty() {
        return Err(PerturbError::TooShort { needed: 1, found: 0, unit: "sentences" });
    }
    let donors = pool.donors(ref_id, reference);
    if donors.is_empty() {
        return Err(PerturbError::NoDonor(ref_id.to_string()));
    }
    for _ in 0..MAX_ATTEMPTS {
        let pos = rng.random_range(0..sentences.len());
        if let Some((out, sources)) = replace_positions(ref_id, &sentences, &[pos], &donors, pool, rng) {
            return Ok(Corruption::new(out.join(" "), "coherence-sentence-swap")
                .with_sources(sources)
                .with_detail(format!("positions={pos}")));
        }
    }
    Err(PerturbError::NoDonor(ref_id.to_string()))
}

/// Number of sentences a relevance negative replaces for an `m`-sentence reference.
pub fn relevance_replace_count(m: usize, replace_min: usize) -> usize {
    replace_min.max(m.div_ceil(2)).clamp(2, m.max(2))
}

/// Replaces `max(min, ceil(m/2))` sentences (clamped to `[2, m]`) at random positions.
pub fn relevance_negative<T: Real, R: Rng + ?Sized>(
    ref_id: &str,
    reference: &str,
    pool: &SummaryPool<T>,
    cfg: &PerturbConfig,
    rng: &mut R,
) -> Result<Corruption, PerturbError> {
    let sentences = sentence_texts(reference);
    let m = sentences.len();
    if m < 2 {
        return Err(PerturbError::TooShort { needed: 2, found: m, unit: "sentences" });
    }
    let r = relevance_replace_count(m, cfg.relevance_replace_min);
    let donors = pool.donors(ref_id, reference);
    if donors.is_empty() {
        return Err(PerturbError::NoDonor(ref_id.to_string()));
    }
    for _ in 0..MAX_ATTEMPTS {
        let mut positions = index::sample(rng, m, r).into_vec();
        positions.sort_unstable();
        if let Some((out, sources)) = replace_positions(ref_id, &sentences, &positions, &donors, pool, rng) {
            let detail = positions.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
            return Ok(Corruption::new(out.join(" "), "relevance-multi-swap")
                .with_sources(sources)
                .with_detail(format!("positions={detail}")));
        }
    }
    Err(PerturbError::NoDonor(ref_id.to_string()))
}
