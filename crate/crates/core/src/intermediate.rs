//! Intermediate tasks converted to Boolean QA: NLI / paraphrase pairs,
//! opening-sentence prediction, linguistic acceptability and yes/no QA.
//!
//! Readers take line-delimited files in the schemas documented on each
//! `*Row` type. Converted records are emitted in the same line format as
//! pseudo-data with `task = "intermediate"` and `dimension = <family>`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{sentence_texts, Corpus};
use crate::sample::{Answer, BooleanQASample, Provenance};

pub const DOCNLI_QUESTION: &str = "Is this a claim consistent with the premise?";
pub const SENTENCE_PAIR_QUESTION: &str = "Is this sentence equivalent to the reference?";
pub const QUESTION_PAIR_QUESTION: &str = "Is the following question equivalent to the reference?";
pub const OPENING_SENTENCE_QUESTION: &str = "Is this sentence the coherent first sentence of the document?";
pub const LINGUISTICS_QUESTION: &str = "Is this a fluent and linguistically acceptable sentence?";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntermediateError {
    #[error("unknown label \"{0}\"")]
    UnknownLabel(String),
    #[error("unknown variant \"{0}\"")]
    UnknownVariant(String),
    #[error("unknown family \"{0}\"")]
    UnknownFamily(String),
    #[error("empty text field")]
    EmptyText,
    #[error("need at least 2 articles with 2+ sentences, found {0}")]
    CorpusTooSmall(usize),
    #[error("sample count must be a positive even number, got {0}")]
    OddCount(usize),
    #[error("include set is empty")]
    EmptyInclude,
    #[error("family {0} is included but was not provided")]
    MissingFamily(Family),
    #[error("{path} line {line}: {message}")]
    Read { path: String, line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Nli,
    SelfSupervised,
    Linguistics,
    GenericQa,
}

impl Family {
    pub const ALL: [Family; 4] = [Self::Nli, Self::SelfSupervised, Self::Linguistics, Self::GenericQa];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Nli => "nli",
            Self::SelfSupervised => "self_supervised",
            Self::Linguistics => "linguistics",
            Self::GenericQa => "generic_qa",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = IntermediateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| IntermediateError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NliLabel {
    Entailment,
    Contradiction,
    Neutral,
    ParaphrasePos,
    ParaphraseNeg,
}

impl FromStr for NliLabel {
    type Err = IntermediateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "entailment" => Self::Entailment,
            "contradiction" => Self::Contradiction,
            "neutral" | "not_entailment" => Self::Neutral,
            "paraphrase_pos" | "paraphrase" => Self::ParaphrasePos,
            "paraphrase_neg" | "not_paraphrase" => Self::ParaphraseNeg,
            other => return Err(IntermediateError::UnknownLabel(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NliVariant {
    Docnli,
    SentencePair,
    QuestionPair,
}

impl FromStr for NliVariant {
    type Err = IntermediateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "docnli" => Self::Docnli,
            "sentence_pair" => Self::SentencePair,
            "question_pair" => Self::QuestionPair,
            other => return Err(IntermediateError::UnknownVariant(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntermediateRecord {
    pub family: Family,
    pub source_dataset: String,
    pub context_segments: IndexMap<String, String>,
    pub question: String,
    pub answer: Answer,
}

impl IntermediateRecord {
    pub fn to_sample(&self, seed: u64, ordinal: u64) -> BooleanQASample {
        BooleanQASample {
            task: "intermediate".into(),
            dimension: self.family.to_string(),
            segments: self.context_segments.clone(),
            question: self.question.clone(),
            answer: self.answer,
            provenance: Provenance {
                rule: self.source_dataset.clone(),
                seed,
                ordinal,
                ..Provenance::default()
            },
        }
    }
}

fn segments(pairs: &[(&str, &str)]) -> IndexMap<String, String> {
    pairs.iter().map(|(l, t)| (l.to_string(), t.to_string())).collect()
}

/// Entailment and positive paraphrase map to Yes, everything else to No.
pub fn convert_nli(
    premise: &str,
    hypothesis: &str,
    label: NliLabel,
    variant: NliVariant,
) -> Result<IntermediateRecord, IntermediateError> {
    if premise.trim().is_empty() || hypothesis.trim().is_empty() {
        return Err(IntermediateError::EmptyText);
    }
    let answer = Answer::from_bool(matches!(label, NliLabel::Entailment | NliLabel::ParaphrasePos));
    let (question, segs, source) = match variant {
        NliVariant::Docnli => (DOCNLI_QUESTION, segments(&[("claim", hypothesis), ("premise", premise)]), "docnli"),
        NliVariant::SentencePair => {
            (SENTENCE_PAIR_QUESTION, segments(&[("sentence", hypothesis), ("reference", premise)]), "mrpc")
        }
        NliVariant::QuestionPair => {
            (QUESTION_PAIR_QUESTION, segments(&[("question", hypothesis), ("reference", premise)]), "qqp")
        }
    };
    Ok(IntermediateRecord {
        family: Family::Nli,
        source_dataset: source.into(),
        context_segments: segs,
        question: question.into(),
        answer,
    })
}

pub fn convert_linguistics(sentence: &str, acceptable: bool) -> Result<IntermediateRecord, IntermediateError> {
    if sentence.trim().is_empty() {
        return Err(IntermediateError::EmptyText);
    }
    Ok(IntermediateRecord {
        family: Family::Linguistics,
        source_dataset: "cola".into(),
        context_segments: segments(&[("sentence", sentence)]),
        question: LINGUISTICS_QUESTION.into(),
        answer: Answer::from_bool(acceptable),
    })
}

/// Maps "yes"/"true" and "no"/"false" (case and punctuation insensitive).
pub fn normalize_yes_no(answer_text: &str) -> Option<Answer> {
    let norm: String = answer_text
        .trim()
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase();
    match norm.as_str() {
        "yes" | "true" => Some(Answer::Yes),
        "no" | "false" => Some(Answer::No),
        _ => None,
    }
}

/// Keeps only questions whose answer is yes/no; the question passes through verbatim.
pub fn convert_generic_qa(
    question: &str,
    context_segments: IndexMap<String, String>,
    answer_text: &str,
) -> Option<IntermediateRecord> {
    let answer = normalize_yes_no(answer_text)?;
    Some(IntermediateRecord {
        family: Family::GenericQa,
        source_dataset: "generic_qa".into(),
        context_segments,
        question: question.to_string(),
        answer,
    })
}

/// BoolQ-style rows are boolean by construction.
pub fn convert_boolq(question: &str, passage: &str, answer: bool) -> IntermediateRecord {
    IntermediateRecord {
        family: Family::GenericQa,
        source_dataset: "boolq".into(),
        context_segments: segments(&[("context", passage)]),
        question: question.to_string(),
        answer: Answer::from_bool(answer),
    }
}

pub fn convert_strategyqa(question: &str, term: &str, description: &str, facts: &str, answer: bool) -> IntermediateRecord {
    IntermediateRecord {
        family: Family::GenericQa,
        source_dataset: "strategyqa".into(),
        context_segments: segments(&[("term", term), ("description of term", description), ("facts", facts)]),
        question: question.to_string(),
        answer: Answer::from_bool(answer),
    }
}

/// Opening-sentence prediction over news articles: `n/2` positives pair an
/// article's first sentence with the rest of it, `n/2` negatives pair the
/// remainder with another article's opener.
pub fn opening_sentence_samples<R: Rng + ?Sized>(
    news: &Corpus,
    n: usize,
    rng: &mut R,
) -> Result<Vec<IntermediateRecord>, IntermediateError> {
    if n == 0 || n % 2 != 0 {
        return Err(IntermediateError::OddCount(n));
    }
    let articles: Vec<Vec<String>> = match news {
        Corpus::Summarization(recs) => recs.iter().map(|r| sentence_texts(&r.document.text)).collect(),
        Corpus::Dialogue(_) => Vec::new(),
    };
    let usable: Vec<&Vec<String>> = articles.iter().filter(|s| s.len() >= 2).collect();
    if usable.len() < 2 {
        return Err(IntermediateError::CorpusTooSmall(usable.len()));
    }
    let half = n / 2;
    // Cycle through fresh permutations: without replacement until exhausted.
    let draw = |count: usize, rng: &mut R| -> Vec<usize> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let mut perm: Vec<usize> = (0..usable.len()).collect();
            perm.shuffle(rng);
            out.extend(perm.into_iter().take(count - out.len()));
        }
        out
    };
    let make = |sentence: &str, article: &[String], answer| IntermediateRecord {
        family: Family::SelfSupervised,
        source_dataset: "opening_sentence".into(),
        context_segments: segments(&[("sentence", sentence), ("document", &article[1..].join(" "))]),
        question: OPENING_SENTENCE_QUESTION.into(),
        answer,
    };
    let mut records = Vec::with_capacity(n);
    for a in draw(half, rng) {
        records.push(make(&usable[a][0], usable[a], Answer::Yes));
    }
    for a in draw(half, rng) {
        let opener = &usable[a][0];
        let others: Vec<usize> = (0..usable.len()).filter(|&b| b != a && usable[b][0] != *opener).collect();
        if others.is_empty() {
            return Err(IntermediateError::CorpusTooSmall(1));
        }
        let b = others[rng.random_range(0..others.len())];
        records.push(make(&usable[b][0], usable[a], Answer::No));
    }
    Ok(records)
}

/// Per-family label counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub yes: usize,
    pub no: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixStats {
    pub families: BTreeMap<Family, FamilyStats>,
    pub total: usize,
}

impl MixStats {
    pub fn from_records(records: &[IntermediateRecord]) -> Self {
        let mut stats = Self::default();
        for r in records {
            let entry = stats.families.entry(r.family).or_default();
            match r.answer {
                Answer::Yes => entry.yes += 1,
                Answer::No => entry.no += 1,
            }
            entry.total += 1;
            stats.total += 1;
        }
        stats
    }
}

/// Concatenates the included families and shuffles them.
pub fn mix_intermediate<R: Rng + ?Sized>(
    families: &BTreeMap<Family, Vec<IntermediateRecord>>,
    include: &BTreeSet<Family>,
    rng: &mut R,
) -> Result<(Vec<IntermediateRecord>, MixStats), IntermediateError> {
    if include.is_empty() {
        return Err(IntermediateError::EmptyInclude);
    }
    let mut records = Vec::new();
    for family in include {
        let list = families.get(family).ok_or(IntermediateError::MissingFamily(*family))?;
        records.extend(list.iter().filter(|r| r.family == *family).cloned());
    }
    records.shuffle(rng);
    let stats = MixStats::from_records(&records);
    Ok((records, stats))
}

/// NLI row: `{"premise", "hypothesis", "label", "variant"}`.
#[derive(Debug, Deserialize)]
pub struct NliRow {
    pub premise: String,
    pub hypothesis: String,
    pub label: String,
    #[serde(default = "default_variant")]
    pub variant: String,
    #[serde(default)]
    pub source: Option<String>,
}

fn default_variant() -> String {
    "docnli".into()
}

/// Acceptability row: `{"sentence", "acceptable": bool}`.
#[derive(Debug, Deserialize)]
pub struct LinguisticsRow {
    pub sentence: String,
    pub acceptable: bool,
}

/// Yes/no QA row: `{"question", "context": {label: text}, "answer": string | bool, "source"}`.
#[derive(Debug, Deserialize)]
pub struct GenericQaRow {
    pub question: String,
    #[serde(default)]
    pub context: IndexMap<String, String>,
    pub answer: serde_json::Value,
    #[serde(default)]
    pub source: Option<String>,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>, IntermediateError> {
    let text = std::fs::read_to_string(path).map_err(|e| IntermediateError::Read {
        path: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map(|r| (i + 1, r)).map_err(|e| IntermediateError::Read {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn at_line(path: &Path, line: usize) -> impl Fn(IntermediateError) -> IntermediateError + '_ {
    move |e| IntermediateError::Read { path: path.display().to_string(), line, message: e.to_string() }
}

pub fn read_nli(path: impl AsRef<Path>) -> Result<Vec<IntermediateRecord>, IntermediateError> {
    let path = path.as_ref();
    read_rows::<NliRow>(path)?
        .into_iter()
        .map(|(line, row)| {
            let label = row.label.parse().map_err(at_line(path, line))?;
            let variant = row.variant.parse().map_err(at_line(path, line))?;
            let mut rec = convert_nli(&row.premise, &row.hypothesis, label, variant).map_err(at_line(path, line))?;
            if let Some(source) = row.source {
                rec.source_dataset = source;
            }
            Ok(rec)
        })
        .collect()
}

pub fn read_linguistics(path: impl AsRef<Path>) -> Result<Vec<IntermediateRecord>, IntermediateError> {
    let path = path.as_ref();
    read_rows::<LinguisticsRow>(path)?
        .into_iter()
        .map(|(line, row)| convert_linguistics(&row.sentence, row.acceptable).map_err(at_line(path, line)))
        .collect()
}

/// Rows whose answer is not yes/no are dropped.
pub fn read_generic_qa(path: impl AsRef<Path>) -> Result<Vec<IntermediateRecord>, IntermediateError> {
    let path = path.as_ref();
    Ok(read_rows::<GenericQaRow>(path)?
        .into_iter()
        .filter_map(|(_, row)| {
            let answer_text = match &row.answer {
                serde_json::Value::Bool(b) => b.to_string(),
                serde_json::Value::String(s) => s.clone(),
                _ => return None,
            };
            let mut rec = convert_generic_qa(&row.question, row.context, &answer_text)?;
            if let Some(source) = row.source {
                rec.source_dataset = source;
            }
            Some(rec)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusKind;
    use crate::rng::derive_rng;

    #[test]
    fn nli_labels() {
        let yes = convert_nli("p", "h", NliLabel::Entailment, NliVariant::Docnli).unwrap();
        assert_eq!(yes.answer, Answer::Yes);
        assert_eq!(yes.question, DOCNLI_QUESTION);
        assert_eq!(yes.context_segments.keys().collect::<Vec<_>>(), vec!["claim", "premise"]);
        for label in [NliLabel::Neutral, NliLabel::Contradiction, NliLabel::ParaphraseNeg] {
            assert_eq!(convert_nli("p", "h", label, NliVariant::Docnli).unwrap().answer, Answer::No);
        }
        let qqp = convert_nli("How can I move?", "Do I need a passport?", NliLabel::ParaphrasePos, NliVariant::QuestionPair).unwrap();
        assert_eq!(qqp.question, "Is the following question equivalent to the reference?");
        assert_eq!(qqp.answer, Answer::Yes);
        assert_eq!(qqp.context_segments["question"], "Do I need a passport?");
        assert!(matches!("maybe".parse::<NliLabel>(), Err(IntermediateError::UnknownLabel(_))));
        assert_eq!(convert_nli(" ", "h", NliLabel::Entailment, NliVariant::Docnli), Err(IntermediateError::EmptyText));
    }

    #[test]
    fn linguistics() {
        assert_eq!(convert_linguistics("s", true).unwrap().answer, Answer::Yes);
        let no = convert_linguistics("s", false).unwrap();
        assert_eq!(no.answer, Answer::No);
        assert_eq!(no.question, "Is this a fluent and linguistically acceptable sentence?");
    }

    #[test]
    fn generic_qa_filter() {
        let rec = convert_generic_qa("Did it rain?", IndexMap::new(), "Yes.").unwrap();
        assert_eq!(rec.answer, Answer::Yes);
        assert_eq!(rec.question, "Did it rain?");
        assert!(convert_generic_qa("Who?", IndexMap::new(), "Susan's friends").is_none());
        assert_eq!(normalize_yes_no(" FALSE! "), Some(Answer::No));
        assert_eq!(convert_boolq("is it?", "passage", false).answer, Answer::No);
    }

    fn news(n: usize) -> Corpus {
        let lines: Vec<String> = (0..n)
            .map(|i| format!(r#"{{"id":"n{i}","document":"Opening line {i}. Body sentence {i}. More text {i}.","reference":"r."}}"#))
            .collect();
        Corpus::parse(&lines.join("\n"), CorpusKind::Summarization).unwrap()
    }

    #[test]
    fn opening_sentence_two_articles() {
        let records = opening_sentence_samples(&news(2), 4, &mut derive_rng(1, 0, 0)).unwrap();
        assert_eq!(records.len(), 4);
        for r in &records {
            let doc = &r.context_segments["document"];
            let i = doc.chars().find(|c| c.is_ascii_digit()).unwrap();
            let opener_digit = r.context_segments["sentence"].chars().find(|c| c.is_ascii_digit()).unwrap();
            assert_eq!(i == opener_digit, r.answer == Answer::Yes);
        }
        assert!(matches!(opening_sentence_samples(&news(1), 2, &mut derive_rng(0, 0, 0)), Err(IntermediateError::CorpusTooSmall(1))));
    }

    #[test]
    fn mixing_and_ablation() {
        let mk = |family: Family, n: usize| -> Vec<IntermediateRecord> {
            (0..n)
                .map(|i| IntermediateRecord {
                    family,
                    source_dataset: "fx".into(),
                    context_segments: segments(&[("sentence", &format!("{family}-{i}"))]),
                    question: "Q?".into(),
                    answer: Answer::from_bool(i % 2 == 0),
                })
                .collect()
        };
        let families: BTreeMap<_, _> = [
            (Family::Nli, mk(Family::Nli, 10)),
            (Family::SelfSupervised, mk(Family::SelfSupervised, 8)),
            (Family::Linguistics, mk(Family::Linguistics, 6)),
            (Family::GenericQa, mk(Family::GenericQa, 4)),
        ]
        .into();
        let all: BTreeSet<_> = Family::ALL.into();
        let (records, stats) = mix_intermediate(&families, &all, &mut derive_rng(3, 0, 0)).unwrap();
        assert_eq!(records.len(), 28);
        let totals: Vec<_> = stats.families.values().map(|s| s.total).collect();
        assert_eq!(totals, vec![10, 8, 6, 4]);
        let (nli_only, stats) = mix_intermediate(&families, &[Family::Nli].into(), &mut derive_rng(3, 0, 0)).unwrap();
        assert_eq!(nli_only.len(), 10);
        assert!(nli_only.iter().all(|r| r.family == Family::Nli));
        assert_eq!(stats.families[&Family::Nli], FamilyStats { yes: 5, no: 5, total: 10 });
        assert_eq!(mix_intermediate(&families, &BTreeSet::new(), &mut derive_rng(0, 0, 0)), Err(IntermediateError::EmptyInclude));
        let partial: BTreeMap<_, _> = [(Family::Nli, mk(Family::Nli, 1))].into();
        assert_eq!(
            mix_intermediate(&partial, &[Family::Linguistics].into(), &mut derive_rng(0, 0, 0)),
            Err(IntermediateError::MissingFamily(Family::Linguistics))
        );
    }
}
