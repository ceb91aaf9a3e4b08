//! Okapi BM25 over the reference summaries of a corpus.
//!
//! `score(q, d) = Σ_t idf(t) · tf·(k1+1) / (tf + k1·(1 − b + b·len/avglen))`
//! with `idf(t) = ln(1 + (N − n_t + 0.5)/(n_t + 0.5))`. Each distinct query
//! term contributes once.

use std::collections::{HashMap, HashSet};

use crate::num::Real;
use crate::text::tokenize;

use super::PerturbError;

pub const DEFAULT_K1: f64 = 1.2;
pub const DEFAULT_B: f64 = 0.75;

#[derive(Debug, Clone)]
pub struct Bm25Index<T: Real> {
    doc_ids: Vec<String>,
    postings: HashMap<String, Vec<(usize, u32)>>,
    doc_lengths: Vec<usize>,
    avg_doc_length: T,
    k1: T,
    b: T,
}

impl<T: Real> Bm25Index<T> {
    pub fn build<I, S, U>(texts: I, k1: T, b: T) -> Result<Self, PerturbError>
    where
        I: IntoIterator<Item = (S, U)>,
        S: Into<String>,
        U: AsRef<str>,
    {
        if !(k1 > T::zero()) || !(b >= T::zero() && b <= T::one()) {
            return Err(PerturbError::InvalidConfig(format!("bm25 requires k1 > 0 and 0 <= b <= 1 (k1={k1}, b={b})")));
        }
        let mut doc_ids = Vec::new();
        let mut doc_lengths = Vec::new();
        let mut postings: HashMap<String, Vec<(usize, u32)>> = HashMap::new();
        for (pos, (id, text)) in texts.into_iter().enumerate() {
            let id = id.into();
            let tokens = tokenize(text.as_ref());
            if tokens.is_empty() {
                return Err(PerturbError::EmptyDocument(id));
            }
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in &tokens {
                *tf.entry(t.clone()).or_default() += 1;
            }
            for (term, count) in tf {
                postings.entry(term).or_default().push((pos, count));
            }
            doc_lengths.push(tokens.len());
            doc_ids.push(id);
        }
        if doc_ids.is_empty() {
            return Err(PerturbError::EmptyCorpus);
        }
        let total: usize = doc_lengths.iter().sum();
        let avg_doc_length = T::of_usize(total) / T::of_usize(doc_ids.len());
        Ok(Self { doc_ids, postings, doc_lengths, avg_doc_length, k1, b })
    }

    pub fn with_defaults<I, S, U>(texts: I) -> Result<Self, PerturbError>
    where
        I: IntoIterator<Item = (S, U)>,
        S: Into<String>,
        U: AsRef<str>,
    {
        Self::build(texts, T::of(DEFAULT_K1), T::of(DEFAULT_B))
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_lengths(&self) -> &[usize] {
        &self.doc_lengths
    }

    pub fn avg_doc_length(&self) -> T {
        self.avg_doc_length
    }

    pub fn idf(&self, term: &str) -> T {
        let n = T::of_usize(self.doc_ids.len());
        let nt = T::of_usize(self.postings.get(term).map_or(0, Vec::len));
        let half = T::half();
        (T::one() + (n - nt + half) / (nt + half)).ln()
    }

    /// Scores of every document, in index order.
    pub fn scores(&self, query: &str) -> Vec<T> {
        let mut scores = vec![T::zero(); self.doc_ids.len()];
        let mut seen = HashSet::new();
        for term in tokenize(query) {
            if !seen.insert(term.clone()) {
                continue;
            }
            let Some(list) = self.postings.get(&term) else { continue };
            let idf = self.idf(&term);
            for &(doc, tf) in list {
                let tf = T::from_u32(tf).expect("u32 fits");
                let len = T::of_usize(self.doc_lengths[doc]);
                let norm = T::one() - self.b + self.b * len / self.avg_doc_length;
                scores[doc] = scores[doc] + idf * tf * (self.k1 + T::one()) / (tf + self.k1 * norm);
            }
        }
        scores
    }

    /// Top-`k` documents with positive score, best first, ties by ascending id.
    pub fn retrieve(&self, query: &str, k: usize, exclude: &HashSet<String>) -> Vec<(String, T)> {
        let scores = self.scores(query);
        let mut hits: Vec<(usize, T)> = scores
            .into_iter()
            .enumerate()
            .filter(|(i, s)| *s > T::zero() && !exclude.contains(&self.doc_ids[*i]))
            .collect();
        hits.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .expect("finite scores")
                .then_with(|| self.doc_ids[a.0].cmp(&self.doc_ids[b.0]))
        });
        hits.truncate(k);
        hits.into_iter().map(|(i, s)| (self.doc_ids[i].clone(), s)).collect()
    }
}

pub fn build_bm25<T: Real>(texts: &[(String, String)], k1: T, b: T) -> Result<Bm25Index<T>, PerturbError> {
    Bm25Index::build(texts.iter().map(|(i, t)| (i.clone(), t.as_str())), k1, b)
}

pub fn retrieve_similar<T: Real>(
    index: &Bm25Index<T>,
    query: &str,
    k: usize,
    exclude: &HashSet<String>,
) -> Vec<(String, T)> {
    index.retrieve(query, k.max(1), exclude)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    /// Direct evaluation of the formula from raw token lists.
    fn brute(corpus: &[(String, String)], query: &str, k1: f64, b: f64) -> Vec<f64> {
        let toks: Vec<Vec<String>> = corpus.iter().map(|(_, t)| tokenize(t)).collect();
        let n = toks.len() as f64;
        let avg = toks.iter().map(Vec::len).sum::<usize>() as f64 / n;
        let mut terms: Vec<String> = Vec::new();
        for t in tokenize(query) {
            if !terms.contains(&t) {
                terms.push(t);
            }
        }
        toks.iter()
            .map(|d| {
                let mut s = 0.0;
                for t in &terms {
                    let tf = d.iter().filter(|x| *x == t).count() as f64;
                    if tf == 0.0 {
                        continue;
                    }
                    let nt = toks.iter().filter(|d| d.contains(t)).count() as f64;
                    let idf = (1.0 + (n - nt + 0.5) / (nt + 0.5)).ln();
                    let norm = 1.0 - b + b * d.len() as f64 / avg;
                    s += idf * tf * (k1 + 1.0) / (tf + k1 * norm);
                }
                s
            })
            .collect()
    }

    #[test]
    fn single_doc_is_top_hit() {
        let corpus = docs(&[("only", "the cat sat")]);
        let index: Bm25Index<f64> = build_bm25(&corpus, 1.2, 0.75).unwrap();
        let hits = retrieve_similar(&index, "the cat sat", 5, &HashSet::new());
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0, "only");
    }

    #[test]
    fn three_doc_ranking_matches_formula() {
        let corpus = docs(&[("d1", "a b"), ("d2", "a c"), ("d3", "d e")]);
        let index: Bm25Index<f64> = build_bm25(&corpus, 1.2, 0.75).unwrap();
        let expected = brute(&corpus, "a b", 1.2, 0.75);
        // idf(a) = ln(1 + 1.5/2.5), idf(b) = ln(1 + 2.5/1.5); all lengths equal avg.
        let idf_a = (1.0f64 + 1.5 / 2.5).ln();
        let idf_b = (1.0f64 + 2.5 / 1.5).ln();
        approx::assert_relative_eq!(expected[0], idf_a + idf_b, epsilon = 1e-12);
        approx::assert_relative_eq!(expected[1], idf_a, epsilon = 1e-12);
        assert_eq!(expected[2], 0.0);
        let scores = index.scores("a b");
        for (s, e) in scores.iter().zip(&expected) {
            approx::assert_relative_eq!(*s, *e, epsilon = 1e-12);
        }
        let hits = index.retrieve("a b", 3, &HashSet::new());
        assert_eq!(hits.iter().map(|h| h.0.as_str()).collect::<Vec<_>>(), vec!["d1", "d2"]);
        let top2 = retrieve_similar(&index, "a b", 2, &HashSet::new());
        assert_eq!(top2.iter().map(|h| h.0.as_str()).collect::<Vec<_>>(), vec!["d1", "d2"]);
    }

    #[test]
    fn no_overlap_returns_nothing() {
        let corpus = docs(&[("d1", "a b"), ("d2", "a c")]);
        let index: Bm25Index<f32> = build_bm25(&corpus, 1.2, 0.75).unwrap();
        assert!(index.scores("zzz").iter().all(|s| *s == 0.0));
        assert!(index.retrieve("zzz", 3, &HashSet::new()).is_empty());
    }

    #[test]
    fn exclusion_and_ties() {
        let corpus = docs(&[("x2", "same words"), ("x1", "same words"), ("q", "same words here")]);
        let index: Bm25Index<f64> = build_bm25(&corpus, 1.2, 0.75).unwrap();
        let exclude: HashSet<String> = ["q".to_string()].into();
        let hits = index.retrieve("same words here", 5, &exclude);
        assert_eq!(hits.iter().map(|h| h.0.as_str()).collect::<Vec<_>>(), vec!["x1", "x2"]);
        assert!(hits.iter().all(|h| h.0 != "q"));
    }

    #[test]
    fn build_errors() {
        assert!(matches!(build_bm25::<f64>(&[], 1.2, 0.75), Err(PerturbError::EmptyCorpus)));
        let bad = docs(&[("a", "ok"), ("b", "!!")]);
        assert!(matches!(build_bm25::<f64>(&bad, 1.2, 0.75), Err(PerturbError::EmptyDocument(id)) if id == "b"));
        let good = docs(&[("a", "ok")]);
        assert!(build_bm25::<f64>(&good, 0.0, 0.75).is_err());
        assert!(build_bm25::<f64>(&good, 1.2, 1.5).is_err());
    }
}
