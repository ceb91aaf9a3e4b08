//! Boolean-QA rendering of evaluation inputs.
//!
//! Each (task, dimension) pair owns a yes/no question and an ordered list of
//! labelled segments. Rendering produces
//! `question: <q> </s> <label>: <text> </s> <label>: <text> ...` where `</s>`
//! is kept as a literal four-character string.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::sentence_texts;
use crate::text::normalize_whitespace;

pub const SEPARATOR: &str = " </s> ";
pub const QUESTION_PREFIX: &str = "question: ";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("dimension {task}/{name} is not registered")]
    NotFound { task: Task, name: String },
    #[error("dimension {task}/{name} is already registered")]
    Duplicate { task: Task, name: String },
    #[error("invalid dimension {task}/{name}: {reason}")]
    InvalidSpec { task: Task, name: String, reason: String },
    #[error("instance {instance}: missing context key \"{key}\"")]
    MissingContext { instance: String, key: String },
    #[error("instance {instance}: no reference text supplied")]
    MissingReference { instance: String },
    #[error("instance {instance}: empty candidate")]
    EmptyCandidate { instance: String },
    #[error("invalid segment source \"{0}\"")]
    BadSource(String),
    #[error("registry config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Task {
    Summarization,
    Dialogue,
    Data2Text,
    Custom(String),
}

impl Task {
    pub fn as_str(&self) -> &str {
        match self {
            Self::Summarization => "summarization",
            Self::Dialogue => "dialogue",
            Self::Data2Text => "data2text",
            Self::Custom(name) => name,
        }
    }
}

impl From<String> for Task {
    fn from(s: String) -> Self {
        match s.as_str() {
            "summarization" => Self::Summarization,
            "dialogue" => Self::Dialogue,
            "data2text" => Self::Data2Text,
            _ => Self::Custom(s),
        }
    }
}

impl From<&str> for Task {
    fn from(s: &str) -> Self {
        Self::from(s.to_string())
    }
}

impl From<Task> for String {
    fn from(t: Task) -> Self {
        t.as_str().to_string()
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a segment's text comes from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SegmentSource {
    Candidate,
    Reference,
    Context(String),
}

impl FromStr for SegmentSource {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "candidate" => Ok(Self::Candidate),
            "reference" => Ok(Self::Reference),
            _ => match s.strip_prefix("context:") {
                Some(key) if !key.is_empty() => Ok(Self::Context(key.to_string())),
                _ => Err(FormatError::BadSource(s.to_string())),
            },
        }
    }
}

impl TryFrom<String> for SegmentSource {
    type Error = FormatError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SegmentSource> for String {
    fn from(s: SegmentSource) -> Self {
        match s {
            SegmentSource::Candidate => "candidate".into(),
            SegmentSource::Reference => "reference".into(),
            SegmentSource::Context(key) => format!("context:{key}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub label: String,
    pub source: SegmentSource,
}

impl Segment {
    pub fn new(label: &str, source: SegmentSource) -> Self {
        Self { label: label.to_string(), source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Single,
    SentenceAverage,
    SentenceSum,
}

impl Aggregation {
    pub fn is_sentence_level(self) -> bool {
        self != Self::Single
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub task: Task,
    pub name: String,
    pub question: String,
    pub segments: Vec<Segment>,
    pub aggregation: Aggregation,
}

impl DimensionSpec {
    pub fn new(
        task: Task,
        name: &str,
        question: &str,
        segments: Vec<Segment>,
        aggregation: Aggregation,
    ) -> Result<Self, FormatError> {
        let spec = Self {
            task,
            name: name.to_string(),
            question: question.to_string(),
            segments,
            aggregation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FormatError> {
        let invalid = |reason: &str| FormatError::InvalidSpec {
            task: self.task.clone(),
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.name.trim().is_empty() {
            return Err(invalid("empty name"));
        }
        if self.question.trim().is_empty() {
            return Err(invalid("empty question"));
        }
        let mut labels = std::collections::HashSet::new();
        for seg in &self.segments {
            if seg.label.trim().is_empty() {
                return Err(invalid("empty segment label"));
            }
            if !labels.insert(seg.label.as_str()) {
                return Err(invalid("duplicate segment label"));
            }
        }
        if self.aggregation.is_sentence_level()
            && !self.segments.iter().any(|s| s.source == SegmentSource::Candidate)
        {
            return Err(invalid("sentence-level aggregation needs a candidate segment"));
        }
        Ok(())
    }

    pub fn key(&self) -> (Task, String) {
        (self.task.clone(), self.name.clone())
    }

    pub fn candidate_label(&self) -> Option<&str> {
        self.segments
            .iter()
            .find(|s| s.source == SegmentSource::Candidate)
            .map(|s| s.label.as_str())
    }
}

/// A context value: plain text, or dialogue turns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ContextValue {
    Text(String),
    Turns(Vec<String>),
}

impl From<&str> for ContextValue {
    fn from(s: &str) -> Self {
        Self::Text(s.to_string())
    }
}

impl ContextValue {
    /// Turns are joined with `\n` and terminated by `\n\n`.
    pub fn render(&self) -> String {
        match self {
            Self::Text(t) => normalize_whitespace(t),
            Self::Turns(turns) => {
                let mut out = turns
                    .iter()
                    .map(|t| normalize_whitespace(t))
                    .collect::<Vec<_>>()
                    .join("\n");
                out.push_str("\n\n");
                out
            }
        }
    }
}

/// One (candidate, references, context) tuple to judge.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalInstance {
    #[serde(default)]
    pub id: String,
    pub candidate: String,
    #[serde(default)]
    pub references: Vec<String>,
    #[serde(default)]
    pub context: IndexMap<String, ContextValue>,
}

impl EvalInstance {
    pub fn new(id: &str, candidate: &str) -> Self {
        Self { id: id.to_string(), candidate: candidate.to_string(), ..Self::default() }
    }

    pub fn with_reference(mut self, reference: &str) -> Self {
        self.references.push(reference.to_string());
        self
    }

    pub fn with_context(mut self, key: &str, value: impl Into<ContextValue>) -> Self {
        self.context.insert(key.to_string(), value.into());
        self
    }

    pub fn with_turns(mut self, key: &str, turns: &[&str]) -> Self {
        self.context
            .insert(key.to_string(), ContextValue::Turns(turns.iter().map(|t| t.to_string()).collect()));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedInput {
    pub text: String,
    pub task: Task,
    pub dimension: String,
    pub instance_id: String,
    pub sentence_index: Option<usize>,
}

/// Joins a question and labelled segments into the model input string.
pub fn format_input<'a, I>(question: &str, segments: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut text = String::from(QUESTION_PREFIX);
    text.push_str(question);
    for (label, body) in segments {
        text.push_str(SEPARATOR);
        text.push_str(label);
        text.push_str(": ");
        text.push_str(body);
    }
    text
}

/// Resolves every segment of `spec` against `instance`, in declared order.
///
/// The candidate is whitespace-normalized; only the first reference is used.
pub fn resolve_segments(
    instance: &EvalInstance,
    spec: &DimensionSpec,
) -> Result<Vec<(String, String)>, FormatError> {
    spec.segments
        .iter()
        .map(|seg| {
            let text = match &seg.source {
                SegmentSource::Candidate => {
                    let c = normalize_whitespace(&instance.candidate);
                    if c.is_empty() {
                        return Err(FormatError::EmptyCandidate { instance: instance.id.clone() });
                    }
                    c
                }
                SegmentSource::Reference => instance
                    .references
                    .first()
                    .map(|r| normalize_whitespace(r))
                    .ok_or_else(|| FormatError::MissingReference { instance: instance.id.clone() })?,
                SegmentSource::Context(key) => instance
                    .context
                    .get(key)
                    .map(ContextValue::render)
                    .ok_or_else(|| FormatError::MissingContext {
                        instance: instance.id.clone(),
                        key: key.clone(),
                    })?,
            };
            Ok((seg.label.clone(), text))
        })
        .collect()
}

/// Renders `instance` for `spec`: one input for single-shot dimensions, one
/// per candidate sentence otherwise (other segments left intact).
pub fn render(instance: &EvalInstance, spec: &DimensionSpec) -> Result<Vec<RenderedInput>, FormatError> {
    let segments = resolve_segments(instance, spec)?;
    let make = |text: String, sentence_index| RenderedInput {
        text,
        task: spec.task.clone(),
        dimension: spec.name.clone(),
        instance_id: instance.id.clone(),
        sentence_index,
    };
    if !spec.aggregation.is_sentence_level() {
        let text = format_input(&spec.question, segments.iter().map(|(l, t)| (l.as_str(), t.as_str())));
        return Ok(vec![make(text, None)]);
    }
    let sentences = sentence_texts(&instance.candidate);
    if sentences.is_empty() {
        return Err(FormatError::EmptyCandidate { instance: instance.id.clone() });
    }
    let candidate_idx = spec
        .segments
        .iter()
        .position(|s| s.source == SegmentSource::Candidate)
        .expect("validated spec has a candidate segment");
    Ok(sentences
        .iter()
        .enumerate()
        .map(|(j, sentence)| {
            let parts = segments.iter().enumerate().map(|(i, (label, text))| {
                (label.as_str(), if i == candidate_idx { sentence.as_str() } else { text.as_str() })
            });
            make(format_input(&spec.question, parts), Some(j))
        })
        .collect())
}

/// Immutable (task, dimension) → spec map. `register` returns a new registry.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DimensionRegistry {
    specs: IndexMap<(Task, String), DimensionSpec>,
}

#[derive(Serialize, Deserialize)]
struct RegistryFile {
    #[serde(default)]
    dimension: Vec<DimensionSpec>,
}

impl DimensionRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn lookup(&self, task: &Task, name: &str) -> Result<&DimensionSpec, FormatError> {
        self.specs
            .get(&(task.clone(), name.to_string()))
            .ok_or_else(|| FormatError::NotFound { task: task.clone(), name: name.to_string() })
    }

    pub fn register(&self, spec: DimensionSpec, allow_override: bool) -> Result<Self, FormatError> {
        spec.validate()?;
        let key = spec.key();
        if !allow_override && self.specs.contains_key(&key) {
            return Err(FormatError::Duplicate { task: key.0, name: key.1 });
        }
        let mut next = self.clone();
        next.specs.insert(key, spec);
        Ok(next)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DimensionSpec> {
        self.specs.values()
    }

    pub fn for_task<'a>(&'a self, task: &'a Task) -> impl Iterator<Item = &'a DimensionSpec> + 'a {
        self.specs.values().filter(move |s| &s.task == task)
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// TOML with one `[[dimension]]` table per spec.
    pub fn to_toml(&self) -> String {
        let file = RegistryFile { dimension: self.specs.values().cloned().collect() };
        toml::to_string(&file).expect("registry is serializable")
    }

    pub fn from_toml(text: &str) -> Result<Self, FormatError> {
        Self::empty().extend_from_toml(text, false)
    }

    /// Adds every spec of a TOML config on top of `self`.
    pub fn extend_from_toml(&self, text: &str, allow_override: bool) -> Result<Self, FormatError> {
        let file: RegistryFile =
            toml::from_str(text).map_err(|e| FormatError::Config(e.to_string()))?;
        file.dimension
            .into_iter()
            .try_fold(self.clone(), |reg, spec| reg.register(spec, allow_override))
    }

    pub fn load(path: impl AsRef<Path>, allow_override: bool) -> Result<Self, FormatError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| FormatError::Config(format!("{}: {e}", path.as_ref().display())))?;
        builtin_registry().extend_from_toml(&text, allow_override)
    }
}

fn spec(task: Task, name: &str, question: &str, segments: &[(&str, &str)], agg: Aggregation) -> DimensionSpec {
    let segments = segments
        .iter()
        .map(|(label, source)| Segment::new(label, source.parse().expect("builtin source")))
        .collect();
    DimensionSpec::new(task, name, question, segments, agg).expect("builtin spec is valid")
}

/// The eleven built-in dimensions across summarization, dialogue and data-to-text.
pub fn builtin_registry() -> DimensionRegistry {
    use Aggregation::*;
    use Task::*;
    let specs = [
        spec(Summarization, "coherence", "Is this a coherent summary to the document?",
            &[("summary", "candidate"), ("document", "context:document")], Single),
        spec(Summarization, "consistency", "Is this claim consistent with the document?",
            &[("claim", "candidate"), ("document", "context:document")], SentenceAverage),
        spec(Summarization, "fluency", "Is this a fluent paragraph?",
            &[("paragraph", "candidate")], SentenceAverage),
        spec(Summarization, "relevance", "Is this summary relevant to the reference?",
            &[("summary", "candidate"), ("reference", "reference")], Single),
        spec(Dialogue, "naturalness", "Is this a natural response in the dialogue?",
            &[("response", "candidate")], Single),
        spec(Dialogue, "coherence", "Is this a coherent response given the dialogue history?",
            &[("response", "candidate"), ("dialogue history", "context:history")], Single),
        spec(Dialogue, "engagingness",
            "Is this an engaging and informative response according to the dialogue history and fact?",
            &[("response", "candidate"), ("dialogue history", "context:history"), ("fact", "context:fact")],
            SentenceSum),
        spec(Dialogue, "groundedness", "Does this response use knowledge from the fact?",
            &[("response", "candidate"), ("fact", "context:fact")], Single),
        spec(Dialogue, "understandability", "Is this an understandable response in the dialogue?",
            &[("response", "candidate")], Single),
        spec(Data2Text, "naturalness", "Is this a fluent utterance?",
            &[("utterance", "candidate")], Single),
        spec(Data2Text, "informativeness", "Is this sentence informative according to the reference?",
            &[("sentence", "candidate"), ("reference", "reference")], Single),
    ];
    let mut registry = DimensionRegistry::empty();
    for s in specs {
        registry.specs.insert(s.key(), s);
    }
    registry
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lookup(task: Task, name: &str) -> DimensionSpec {
        builtin_registry().lookup(&task, name).unwrap().clone()
    }

    #[test]
    fn builtin_questions() {
        assert_eq!(
            lookup(Task::Summarization, "coherence").question,
            "Is this a coherent summary to the document?"
        );
        assert_eq!(
            lookup(Task::Dialogue, "groundedness").question,
            "Does this response use knowledge from the fact?"
        );
        assert_eq!(builtin_registry().len(), 11);
        assert!(matches!(
            builtin_registry().lookup(&Task::Summarization, "novelty"),
            Err(FormatError::NotFound { .. })
        ));
    }

    #[test]
    fn only_relevance_uses_reference_in_summarization() {
        let registry = builtin_registry();
        let with_ref: Vec<_> = registry
            .for_task(&Task::Summarization)
            .filter(|s| s.segments.iter().any(|g| g.source == SegmentSource::Reference))
            .map(|s| s.name.as_str())
            .collect();
        assert_eq!(with_ref, vec!["relevance"]);
    }

    #[test]
    fn register_custom_and_duplicate() {
        let registry = builtin_registry();
        let custom = DimensionSpec::new(
            Task::Dialogue,
            "understandability-v2",
            "Is this response easy to follow?",
            vec![Segment::new("response", SegmentSource::Candidate)],
            Aggregation::Single,
        )
        .unwrap();
        let next = registry.register(custom, false).unwrap();
        let found = next.lookup(&Task::Dialogue, "understandability-v2").unwrap();
        assert_eq!(found.question, "Is this response easy to follow?");
        // Original registry unchanged.
        assert!(registry.lookup(&Task::Dialogue, "understandability-v2").is_err());

        let inst = EvalInstance::new("i", "Sure thing.");
        let rendered = render(&inst, found).unwrap();
        assert_eq!(rendered[0].text.matches("Is this response easy to follow?").count(), 1);

        let dup = lookup(Task::Summarization, "fluency");
        assert!(matches!(registry.register(dup.clone(), false), Err(FormatError::Duplicate { .. })));
        assert!(registry.register(dup, true).is_ok());
    }

    #[test]
    fn summarization_coherence_layout() {
        let inst = EvalInstance::new("x", "S.").with_context("document", "D.");
        let out = render(&inst, &lookup(Task::Summarization, "coherence")).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(
            out[0].text,
            "question: Is this a coherent summary to the document? </s> summary: S. </s> document: D."
        );
        assert_eq!(out[0].sentence_index, None);
    }

    #[test]
    fn dialogue_history_join() {
        let inst = EvalInstance::new("x", "sure").with_turns("history", &["hi", "hello"]);
        let out = render(&inst, &lookup(Task::Dialogue, "coherence")).unwrap();
        assert!(out[0].text.ends_with("dialogue history: hi\nhello\n\n"));
    }

    #[test]
    fn sentence_level_fluency() {
        let inst = EvalInstance::new("x", "One. Two. Three.");
        let out = render(&inst, &lookup(Task::Summarization, "fluency")).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out.iter().map(|r| r.sentence_index).collect::<Vec<_>>(), vec![Some(0), Some(1), Some(2)]);
        assert_eq!(out[1].text, "question: Is this a fluent paragraph? </s> paragraph: Two.");
    }

    #[test]
    fn sentence_level_keeps_context() {
        let inst = EvalInstance::new("x", "A b. C d.").with_context("document", "Full doc.");
        let out = render(&inst, &lookup(Task::Summarization, "consistency")).unwrap();
        assert_eq!(
            out[1].text,
            "question: Is this claim consistent with the document? </s> claim: C d. </s> document: Full doc."
        );
    }

    #[test]
    fn render_errors() {
        let coh = lookup(Task::Summarization, "coherence");
        let missing = EvalInstance::new("m", "S.");
        assert_eq!(
            render(&missing, &coh).unwrap_err(),
            FormatError::MissingContext { instance: "m".into(), key: "document".into() }
        );
        let empty = EvalInstance::new("e", "  ").with_context("document", "D");
        assert!(matches!(render(&empty, &coh), Err(FormatError::EmptyCandidate { .. })));
        let rel = lookup(Task::Summarization, "relevance");
        assert!(matches!(render(&missing, &rel), Err(FormatError::MissingReference { .. })));
    }

    #[test]
    fn only_first_reference_used() {
        let rel = lookup(Task::Summarization, "relevance");
        let inst = EvalInstance::new("r", "S.").with_reference("R1.").with_reference("R2.");
        let out = render(&inst, &rel).unwrap();
        assert!(out[0].text.ends_with("reference: R1."));
        assert!(!out[0].text.contains("R2."));
    }

    #[test]
    fn invalid_specs() {
        let bad = DimensionSpec::new(
            Task::Custom("x".into()),
            "d",
            "Q?",
            vec![Segment::new("a", SegmentSource::Candidate), Segment::new("a", SegmentSource::Reference)],
            Aggregation::Single,
        );
        assert!(bad.is_err());
        let no_candidate = DimensionSpec::new(
            Task::Custom("x".into()),
            "d",
            "Q?",
            vec![Segment::new("a", SegmentSource::Reference)],
            Aggregation::SentenceSum,
        );
        assert!(no_candidate.is_err());
        assert!("context:".parse::<SegmentSource>().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let registry = builtin_registry();
        let text = registry.to_toml();
        assert_eq!(DimensionRegistry::from_toml(&text).unwrap(), registry);
        let extra = r#"
[[dimension]]
task = "dialogue"
name = "politeness"
question = "Is this a polite response?"
aggregation = "single"
segments = [{ label = "response", source = "candidate" }]
"#;
        let extended = registry.extend_from_toml(extra, false).unwrap();
        assert_eq!(extended.len(), 12);
        assert!(extended.lookup(&Task::Dialogue, "politeness").is_ok());
    }
}
