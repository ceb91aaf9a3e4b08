//! Canonical corpus records and line-delimited ingestion.
//!
//! Summarization lines look like `{"id", "document", "reference"}` and
//! dialogue lines like `{"id", "history": [..], "response", "knowledge"}`.
//! Any other fields on a line are kept in `extras` and written back after the
//! schema fields, so a canonical file survives a load/serialize round trip
//! byte for byte.

mod sentence;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

pub use sentence::{
    sentence_texts, split_sentences, Sentence, SentenceSplitter, DEFAULT_ABBREVIATIONS,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("duplicate id \"{id}\" on line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("corpus file {0} contains no records")]
    Empty(String),
    #[error("unknown corpus kind \"{0}\"")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    Summarization,
    Dialogue,
}

impl FromStr for CorpusKind {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "summarization" => Ok(Self::Summarization),
            "dialogue" => Ok(Self::Dialogue),
            other => Err(CorpusError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Summarization => "summarization",
            Self::Dialogue => "dialogue",
        })
    }
}

/// A source document or knowledge context.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub extras: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryPair {
    pub doc_id: String,
    pub reference_summary: String,
}

/// One summarization line: the document and its reference summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub document: Document,
    pub summary: SummaryPair,
}

impl SummaryRecord {
    pub fn id(&self) -> &str {
        &self.document.id
    }

    pub fn reference(&self) -> &str {
        &self.summary.reference_summary
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueRecord {
    pub id: String,
    pub history: Vec<String>,
    #[serde(rename = "response")]
    pub gold_response: String,
    #[serde(default)]
    pub knowledge: String,
    #[serde(flatten)]
    pub extras: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct SummarizationLine {
    id: String,
    document: String,
    reference: String,
    #[serde(flatten)]
    extras: Map<String, Value>,
}

/// An immutable, validated corpus.
#[derive(Debug, Clone, PartialEq)]
pub enum Corpus {
    Summarization(Vec<SummaryRecord>),
    Dialogue(Vec<DialogueRecord>),
}

impl Corpus {
    pub fn kind(&self) -> CorpusKind {
        match self {
            Self::Summarization(_) => CorpusKind::Summarization,
            Self::Dialogue(_) => CorpusKind::Dialogue,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Summarization(r) => r.len(),
            Self::Dialogue(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn summaries(&self) -> Option<&[SummaryRecord]> {
        match self {
            Self::Summarization(r) => Some(r),
            Self::Dialogue(_) => None,
        }
    }

    pub fn dialogues(&self) -> Option<&[DialogueRecord]> {
        match self {
            Self::Dialogue(r) => Some(r),
            Self::Summarization(_) => None,
        }
    }

    /// Parses line-delimited records. Blank lines are not allowed.
    pub fn parse(content: &str, kind: CorpusKind) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        let mut summaries = Vec::new();
        let mut dialogues = Vec::new();
        for (i, raw) in content.lines().enumerate() {
            let line = i + 1;
            let malformed = |message: String| CorpusError::Malformed { line, message };
            let id = match kind {
                CorpusKind::Summarization => {
                    let rec: SummarizationLine =
                        serde_json::from_str(raw).map_err(|e| malformed(e.to_string()))?;
                    if rec.document.trim().is_empty() {
                        return Err(malformed("empty document text".into()));
                    }
                    if rec.reference.trim().is_empty() {
                        return Err(malformed("empty reference summary".into()));
                    }
                    let id = rec.id.clone();
                    summaries.push(SummaryRecord {
                        summary: SummaryPair {
                            doc_id: rec.id.clone(),
                            reference_summary: rec.reference,
                        },
                        document: Document { id: rec.id, text: rec.document, extras: rec.extras },
                    });
                    id
                }
                CorpusKind::Dialogue => {
                    let rec: DialogueRecord =
                        serde_json::from_str(raw).map_err(|e| malformed(e.to_string()))?;
                    if rec.history.is_empty() {
                        return Err(malformed("empty dialogue history".into()));
                    }
                    if rec.gold_response.trim().is_empty() {
                        return Err(malformed("empty response".into()));
                    }
                    let id = rec.id.clone();
                    dialogues.push(rec);
                    id
                }
            };
            if id.is_empty() {
                return Err(malformed("empty id".into()));
            }
            if !seen.insert(id.clone()) {
                return Err(CorpusError::DuplicateId { id, line });
            }
        }
        Ok(match kind {
            CorpusKind::Summarization => Self::Summarization(summaries),
            CorpusKind::Dialogue => Self::Dialogue(dialogues),
        })
    }

    /// Canonical line-delimited serialization; every line ends with `\n`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        match self {
            Self::Summarization(records) => {
                for r in records {
                    let line = SummarizationLine {
                        id: r.document.id.clone(),
                        document: r.document.text.clone(),
                        reference: r.summary.reference_summary.clone(),
                        extras: r.document.extras.clone(),
                    };
                    out.push_str(&serde_json::to_string(&line).expect("serializable"));
                    out.push('\n');
                }
            }
            Self::Dialogue(records) => {
                for r in records {
                    out.push_str(&serde_json::to_string(r).expect("serializable"));
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Loads a corpus file. Duplicate ids and malformed lines are reported with
/// their 1-based line number.
pub fn load_corpus(path: impl AsRef<Path>, kind: CorpusKind) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    if content.trim().is_empty() {
        return Err(CorpusError::Empty(path.display().to_string()));
    }
    Corpus::parse(&content, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SUMM: &str = concat!(
        r#"{"id":"d1","document":"Doc one. More.","reference":"Ref one."}"#, "\n",
        r#"{"id":"d2","document":"Doc two.","reference":"Ref two.","source":"cnn"}"#, "\n",
        r#"{"id":"d3","document":"Doc three.","reference":"Ref three."}"#, "\n",
    );

    #[test]
    fn three_line_file() {
        let corpus = Corpus::parse(SUMM, CorpusKind::Summarization).unwrap();
        assert_eq!(corpus.len(), 3);
        let recs = corpus.summaries().unwrap();
        assert_eq!(recs[1].summary.doc_id, "d2");
        assert_eq!(recs[1].document.extras["source"], "cnn");
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let corpus = Corpus::parse(SUMM, CorpusKind::Summarization).unwrap();
        assert_eq!(corpus.to_jsonl(), SUMM);
        let dlg = concat!(
            r#"{"id":"c1","history":["hi","hello"],"response":"yo.","knowledge":"k.","topic":"x"}"#,
            "\n"
        );
        let corpus = Corpus::parse(dlg, CorpusKind::Dialogue).unwrap();
        assert_eq!(corpus.to_jsonl(), dlg);
    }

    #[test]
    fn duplicate_id_reports_second_line() {
        let lines = [
            r#"{"id":"d0","document":"x.","reference":"y."}"#,
            r#"{"id":"d1","document":"x.","reference":"y."}"#,
            r#"{"id":"d2","document":"x.","reference":"y."}"#,
            r#"{"id":"d3","document":"x.","reference":"y."}"#,
            r#"{"id":"d1","document":"x.","reference":"y."}"#,
        ]
        .join("\n");
        let err = Corpus::parse(&lines, CorpusKind::Summarization).unwrap_err();
        match err {
            CorpusError::DuplicateId { id, line } => {
                assert_eq!(id, "d1");
                assert_eq!(line, 5);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(Corpus::parse(&lines, CorpusKind::Summarization)
            .unwrap_err()
            .to_string()
            .contains("\"d1\""));
    }

    #[test]
    fn malformed_line_number() {
        let text = "{\"id\":\"a\",\"document\":\"x\",\"reference\":\"y\"}\nnot json\n";
        let err = Corpus::parse(text, CorpusKind::Summarization).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 2, .. }));
    }

    #[test]
    fn invariants_enforced() {
        let empty_history = r#"{"id":"a","history":[],"response":"r","knowledge":""}"#;
        assert!(Corpus::parse(empty_history, CorpusKind::Dialogue).is_err());
        let empty_doc = r#"{"id":"a","document":" ","reference":"r"}"#;
        assert!(Corpus::parse(empty_doc, CorpusKind::Summarization).is_err());
    }

    #[test]
    fn empty_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            load_corpus(&path, CorpusKind::Summarization),
            Err(CorpusError::Empty(_))
        ));
    }
}
