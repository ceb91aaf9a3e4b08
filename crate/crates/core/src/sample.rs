//! Boolean-QA training records shared by pseudo-data and intermediate tasks.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::qa_format::{format_input, ContextValue, DimensionSpec, EvalInstance, FormatError, SegmentSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn from_bool(yes: bool) -> Self {
        if yes {
            Self::Yes
        } else {
            Self::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Self::Yes
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Yes => "Yes",
            Self::No => "No",
        })
    }
}

impl FromStr for Answer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Yes" => Ok(Self::Yes),
            "No" => Ok(Self::No),
            other => Err(format!("invalid answer \"{other}\"")),
        }
    }
}

/// How a sample was produced.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub rule: String,
    pub source_ids: Vec<String>,
    pub seed: u64,
    #[serde(default)]
    pub ordinal: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub with_replacement: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BooleanQASample {
    pub task: String,
    pub dimension: String,
    pub segments: IndexMap<String, String>,
    pub question: String,
    pub answer: Answer,
    pub provenance: Provenance,
}

impl BooleanQASample {
    /// The model input string for this sample.
    pub fn render_text(&self) -> String {
        format_input(&self.question, self.segments.iter().map(|(l, t)| (l.as_str(), t.as_str())))
    }

    /// Rebuilds an evaluation instance from the rendered segments of `spec`.
    /// Segment text ending in a blank line is read back as dialogue turns.
    pub fn to_instance(&self, id: &str, spec: &DimensionSpec) -> Result<EvalInstance, FormatError> {
        let mut instance = EvalInstance { id: id.to_string(), ..EvalInstance::default() };
        for seg in &spec.segments {
            let text = self.segments.get(&seg.label).ok_or_else(|| FormatError::MissingContext {
                instance: id.to_string(),
                key: seg.label.clone(),
            })?;
            match &seg.source {
                SegmentSource::Candidate => instance.candidate = text.clone(),
                SegmentSource::Reference => instance.references = vec![text.clone()],
                SegmentSource::Context(key) => {
                    let value = match text.strip_suffix("\n\n") {
                        Some(joined) => ContextValue::Turns(joined.split('\n').map(str::to_string).collect()),
                        None => ContextValue::Text(text.clone()),
                    };
                    instance.context.insert(key.clone(), value);
                }
            }
        }
        Ok(instance)
    }

    pub fn candidate<'a>(&'a self, spec: &DimensionSpec) -> Option<&'a str> {
        spec.candidate_label().and_then(|l| self.segments.get(l)).map(String::as_str)
    }
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, records: &[T]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_samples(path: impl AsRef<Path>) -> std::io::Result<Vec<BooleanQASample>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut samples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        samples.push(serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(std::io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1))
        })?);
    }
    Ok(samples)
}
