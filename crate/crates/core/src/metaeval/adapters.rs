//! Converters from published benchmark releases to [`BenchmarkTable`].
//!
//! | format | input | dimensions | scale |
//! |---|---|---|---|
//! | `summeval` | line-delimited paired annotations (`id`, `model_id`, `decoded`, `references`, `text`, `expert_annotations`) | coherence, consistency, fluency, relevance | 1-5, mean of experts |
//! | `topical_chat` | JSON array of `{context, fact, responses: [{model, response, Natural, ...}]}` | naturalness, coherence, engagingness (1-3); groundedness, understandability (0-1) | mean of annotators |
//! | `qags` | line-delimited `{article, summary_sentences: [{sentence, responses: [{response}]}]}` | consistency | 0-1, share of sentences with a majority "yes" |
//! | `sfres` | CSV with `mr`, `orig_ref`, `sys_ref`, `system`, `informativeness`, `naturalness`, optional `dataset` | naturalness, informativeness | 1-6, mean of judges |

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Deserialize;

use crate::num::Real;
use crate::qa_format::{ContextValue, EvalInstance, Task};

use super::benchmark::{BenchmarkError, BenchmarkRow, BenchmarkTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Normalized,
    SummEval,
    TopicalChat,
    Qags,
    Sfres,
}

impl SourceFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Normalized => "normalized",
            Self::SummEval => "summeval",
            Self::TopicalChat => "topical_chat",
            Self::Qags => "qags",
            Self::Sfres => "sfres",
        }
    }
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "normalized" => Self::Normalized,
            "summeval" => Self::SummEval,
            "topical_chat" | "topicalchat" => Self::TopicalChat,
            "qags" => Self::Qags,
            "sfres" | "sfhot" => Self::Sfres,
            other => return Err(format!("unknown benchmark format \"{other}\"")),
        })
    }
}

/// Loads `path` in `format`. `dataset` filters rows of formats that mix
/// several sets (the `dataset` column of `sfres`).
pub fn load_benchmark<T: Real>(path: impl AsRef<Path>, format: SourceFormat, dataset: Option<&str>) -> Result<BenchmarkTable<T>, BenchmarkError> {
    let path = path.as_ref();
    match format {
        SourceFormat::Normalized => BenchmarkTable::load(path),
        SourceFormat::SummEval => summeval(&std::fs::read_to_string(path)?),
        SourceFormat::TopicalChat => topical_chat(&std::fs::read_to_string(path)?),
        SourceFormat::Qags => qags(&std::fs::read_to_string(path)?),
        SourceFormat::Sfres => sfres(std::fs::File::open(path)?, dataset),
    }
}

fn mean<T: Real>(values: &[f64]) -> Option<T> {
    (!values.is_empty()).then(|| T::of(values.iter().sum::<f64>() / values.len() as f64))
}

fn scale<T: Real>(dims: &[(&str, f64, f64)]) -> IndexMap<String, (T, T)> {
    dims.iter().map(|(d, lo, hi)| (d.to_string(), (T::of(*lo), T::of(*hi)))).collect()
}

fn json_lines<'a, R: Deserialize<'a>>(text: &'a str) -> Result<Vec<R>, BenchmarkError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| BenchmarkError::Malformed { line: i + 1, message: e.to_string() }))
        .collect()
}

#[derive(Deserialize)]
struct SummEvalLine {
    id: String,
    model_id: String,
    decoded: String,
    #[serde(default)]
    references: Vec<String>,
    #[serde(default)]
    text: String,
    expert_annotations: Vec<HashMap<String, f64>>,
}

const SUMMEVAL_DIMS: [&str; 4] = ["coherence", "consistency", "fluency", "relevance"];

pub fn summeval<T: Real>(text: &str) -> Result<BenchmarkTable<T>, BenchmarkError> {
    let lines: Vec<SummEvalLine> = json_lines(text)?;
    let mut rows = Vec::with_capacity(lines.len());
    for (i, l) in lines.into_iter().enumerate() {
        let mut human = IndexMap::new();
        for dim in SUMMEVAL_DIMS {
            let vals: Vec<f64> = l.expert_annotations.iter().filter_map(|a| a.get(dim).copied()).collect();
            let v = mean(&vals).ok_or_else(|| BenchmarkError::Malformed { line: i + 1, message: format!("no expert {dim} scores") })?;
            human.insert(dim.to_string(), v);
        }
        let mut instance = EvalInstance::new("", &l.decoded).with_context("document", l.text.as_str());
        instance.references = l.references;
        rows.push(BenchmarkRow { doc_id: l.id, system_id: l.model_id, instance, human });
    }
    BenchmarkTable::new(Task::Summarization, scale(&SUMMEVAL_DIMS.map(|d| (d, 1.0, 5.0))), rows)
}

#[derive(Deserialize)]
struct TcResponse {
    model: String,
    response: String,
    #[serde(rename = "Natural", default)]
    natural: Vec<f64>,
    #[serde(rename = "Maintains Context", default)]
    maintains_context: Vec<f64>,
    #[serde(rename = "Engaging", default)]
    engaging: Vec<f64>,
    #[serde(rename = "Uses Knowledge", default)]
    uses_knowledge: Vec<f64>,
    #[serde(rename = "Understandable", default)]
    understandable: Vec<f64>,
}

#[derive(Deserialize)]
struct TcDialogue {
    context: String,
    #[serde(default)]
    fact: String,
    responses: Vec<TcResponse>,
}

pub fn topical_chat<T: Real>(text: &str) -> Result<BenchmarkTable<T>, BenchmarkError> {
    let dialogues: Vec<TcDialogue> =
        serde_json::from_str(text).map_err(|e| BenchmarkError::Malformed { line: e.line(), message: e.to_string() })?;
    let mut rows = Vec::new();
    for (i, d) in dialogues.into_iter().enumerate() {
        let turns: Vec<String> = d.context.lines().map(str::trim).filter(|t| !t.is_empty()).map(str::to_string).collect();
        for r in d.responses {
            let mut human = IndexMap::new();
            for (dim, vals) in [
                ("naturalness", &r.natural),
                ("coherence", &r.maintains_context),
                ("engagingness", &r.engaging),
                ("groundedness", &r.uses_knowledge),
                ("understandability", &r.understandable),
            ] {
                let v = mean(vals).ok_or_else(|| BenchmarkError::Malformed {
                    line: 0,
                    message: format!("dialogue {i}, model {}: no {dim} scores", r.model),
                })?;
                human.insert(dim.to_string(), v);
            }
            let instance = EvalInstance::new("", r.response.trim())
                .with_context("history", ContextValue::Turns(turns.clone()))
                .with_context("fact", d.fact.trim());
            rows.push(BenchmarkRow { doc_id: format!("tc-{i}"), system_id: r.model, instance, human });
        }
    }
    let dims = [
        ("naturalness", 1.0, 3.0),
        ("coherence", 1.0, 3.0),
        ("engagingness", 1.0, 3.0),
        ("groundedness", 0.0, 1.0),
        ("understandability", 0.0, 1.0),
    ];
    BenchmarkTable::new(Task::Dialogue, scale(&dims), rows)
}

#[derive(Deserialize)]
struct QagsResponse {
    response: String,
}

#[derive(Deserialize)]
struct QagsSentence {
    sentence: String,
    responses: Vec<QagsResponse>,
}

#[derive(Deserialize)]
struct QagsLine {
    article: String,
    summary_sentences: Vec<QagsSentence>,
}

/// One system per article, so use the pooled protocol on these tables.
pub fn qags<T: Real>(text: &str) -> Result<BenchmarkTable<T>, BenchmarkError> {
    let lines: Vec<QagsLine> = json_lines(text)?;
    let mut rows = Vec::with_capacity(lines.len());
    for (i, l) in lines.into_iter().enumerate() {
        if l.summary_sentences.is_empty() {
            return Err(BenchmarkError::Malformed { line: i + 1, message: "summary has no sentences".into() });
        }
        let consistent = l
            .summary_sentences
            .iter()
            .filter(|s| {
                let yes = s.responses.iter().filter(|r| r.response.trim().eq_ignore_ascii_case("yes")).count();
                2 * yes > s.responses.len()
            })
            .count();
        let score = consistent as f64 / l.summary_sentences.len() as f64;
        let summary = l.summary_sentences.iter().map(|s| s.sentence.trim()).collect::<Vec<_>>().join(" ");
        let instance = EvalInstance::new("", &summary).with_context("document", l.article.as_str());
        rows.push(BenchmarkRow {
            doc_id: format!("qags-{i}"),
            system_id: "summary".into(),
            instance,
            human: [("consistency".to_string(), T::of(score))].into_iter().collect(),
        });
    }
    BenchmarkTable::new(Task::Summarization, scale(&[("consistency", 0.0, 1.0)]), rows)
}

#[derive(Deserialize)]
struct SfresRecord {
    mr: String,
    #[serde(default)]
    orig_ref: String,
    sys_ref: String,
    system: String,
    informativeness: f64,
    naturalness: f64,
    #[serde(default)]
    dataset: String,
}

pub fn sfres<T: Real, R: std::io::Read>(reader: R, dataset: Option<&str>) -> Result<BenchmarkTable<T>, BenchmarkError> {
    let mut groups: IndexMap<(String, String), (SfresRecord, Vec<f64>, Vec<f64>)> = IndexMap::new();
    for (i, rec) in csv::Reader::from_reader(reader).deserialize::<SfresRecord>().enumerate() {
        let rec = rec.map_err(|e| BenchmarkError::Malformed { line: i + 2, message: e.to_string() })?;
        if dataset.is_some_and(|d| !rec.dataset.eq_ignore_ascii_case(d)) {
            continue;
        }
        let key = (rec.mr.clone(), rec.system.clone());
        let (inf, nat) = (rec.informativeness, rec.naturalness);
        let entry = groups.entry(key).or_insert_with(|| (rec, Vec::new(), Vec::new()));
        entry.1.push(inf);
        entry.2.push(nat);
    }
    let rows = groups
        .into_iter()
        .map(|((mr, system), (rec, inf, nat))| {
            let mut instance = EvalInstance::new("", &rec.sys_ref).with_context("mr", mr.as_str());
            if !rec.orig_ref.is_empty() {
                instance.references.push(rec.orig_ref);
            }
            let human = [("naturalness".to_string(), mean(&nat).expect("non-empty group")), ("informativeness".to_string(), mean(&inf).expect("non-empty group"))]
                .into_iter()
                .collect();
            BenchmarkRow { doc_id: mr, system_id: system, instance, human }
        })
        .collect();
    BenchmarkTable::new(Task::Data2Text, scale(&[("naturalness", 1.0, 6.0), ("informativeness", 1.0, 6.0)]), rows)
}
