use std::collections::{HashMap, HashSet};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;
use crate::qa_format::{DimensionSpec, EvalInstance, Task};
use crate::scorer::{score_batch, BatchOptions, ProbabilityProvider, ScoreError, ScoreReport};

use super::{correlate_units, normalize_human, Coefficient, CorrelationReport, Protocol, ProtocolError};

/// `(doc_id, system_id)`.
pub type RowKey = (String, String);

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("benchmark has no header line")]
    MissingHeader,
    #[error("duplicate row ({0}, {1})")]
    DuplicateRow(String, String),
    #[error("line {line}: {source}")]
    Human { line: usize, source: ProtocolError },
    #[error("dimension {0} has no human scores in this benchmark")]
    UnknownDimension(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow<T> {
    pub doc_id: String,
    pub system_id: String,
    pub instance: EvalInstance,
    pub human: IndexMap<String, T>,
}

impl<T> BenchmarkRow<T> {
    pub fn key(&self) -> RowKey {
        (self.doc_id.clone(), self.system_id.clone())
    }
}

#[derive(Serialize, Deserialize)]
struct Header<T> {
    task: Task,
    human_scale: IndexMap<String, (T, T)>,
}

/// Candidate outputs with raw human scores per dimension.
///
/// Line format: a header `{"task", "human_scale": {dim: [min, max]}}`
/// followed by rows `{"doc_id", "system_id", "instance", "human"}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkTable<T> {
    pub task: Task,
    pub dimensions: Vec<String>,
    pub human_scale: IndexMap<String, (T, T)>,
    pub rows: Vec<BenchmarkRow<T>>,
}

impl<T: Real> BenchmarkTable<T> {
    /// Validates uniqueness, completeness and scale bounds. Instances
    /// without an id get `doc_id::system_id`.
    pub fn new(task: Task, human_scale: IndexMap<String, (T, T)>, mut rows: Vec<BenchmarkRow<T>>) -> Result<Self, BenchmarkError> {
        let mut seen = HashSet::new();
        for (i, row) in rows.iter_mut().enumerate() {
            let line = i + 2;
            if !seen.insert(row.key()) {
                return Err(BenchmarkError::DuplicateRow(row.doc_id.clone(), row.system_id.clone()));
            }
            if row.instance.id.is_empty() {
                row.instance.id = format!("{}::{}", row.doc_id, row.system_id);
            }
            for (dim, scale) in &human_scale {
                let raw = *row.human.get(dim).ok_or_else(|| BenchmarkError::Human {
                    line,
                    source: ProtocolError::MissingHuman {
                        dimension: dim.clone(),
                        doc_id: row.doc_id.clone(),
                        system_id: row.system_id.clone(),
                    },
                })?;
                normalize_human(raw, *scale).map_err(|source| BenchmarkError::Human { line, source })?;
            }
        }
        Ok(Self { task, dimensions: human_scale.keys().cloned().collect(), human_scale, rows })
    }

    pub fn parse(text: &str) -> Result<Self, BenchmarkError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(BenchmarkError::MissingHeader)?;
        let header: Header<T> = serde_json::from_str(first).map_err(|e| BenchmarkError::Malformed { line: 1, message: e.to_string() })?;
        let rows = lines
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| BenchmarkError::Malformed { line: i + 1, message: e.to_string() }))
            .collect::<Result<Vec<BenchmarkRow<T>>, _>>()?;
        Self::new(header.task, header.human_scale, rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchmarkError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_jsonl(&self) -> String {
        let header = Header { task: self.task.clone(), human_scale: self.human_scale.clone() };
        let mut out = serde_json::to_string(&header).expect("serializable header");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&serde_json::to_string(row).expect("serializable row"));
            out.push('\n');
        }
        out
    }

    pub fn normalized_human(&self, row: &BenchmarkRow<T>, dimension: &str) -> Result<T, ProtocolError> {
        let missing = || ProtocolError::MissingHuman {
            dimension: dimension.to_string(),
            doc_id: row.doc_id.clone(),
            system_id: row.system_id.clone(),
        };
        let scale = *self.human_scale.get(dimension).ok_or_else(missing)?;
        let raw = *row.human.get(dimension).ok_or_else(missing)?;
        normalize_human(raw, scale)
    }

    pub fn instances(&self) -> Vec<EvalInstance> {
        self.rows.iter().map(|r| r.instance.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRun<T> {
    pub scores: Vec<ScoreReport<T>>,
    pub score_errors: Vec<ScoreError>,
    pub reports: Vec<CorrelationReport<T>>,
    /// Dimensions whose correlation could not be computed.
    pub failures: Vec<(String, ProtocolError)>,
}

impl<T> BenchmarkRun<T> {
    pub fn error_count(&self) -> usize {
        self.score_errors.len() + self.failures.len()
    }
}

/// Scores every row on every spec, then correlates per dimension.
/// Rows that fail to score are excluded and counted.
pub fn run_benchmark<T: Real>(
    table: &BenchmarkTable<T>,
    specs: &[DimensionSpec],
    provider: &dyn ProbabilityProvider<T>,
    protocol: Protocol,
    coefficients: &[Coefficient],
    opts: BatchOptions,
) -> Result<BenchmarkRun<T>, BenchmarkError> {
    for spec in specs {
        if !table.human_scale.contains_key(&spec.name) {
            return Err(BenchmarkError::UnknownDimension(spec.name.clone()));
        }
    }
    let instances = table.instances();
    let outcome = score_batch(&instances, specs, provider, opts)?;
    let mut run = BenchmarkRun { scores: outcome.reports, score_errors: outcome.errors, reports: Vec::new(), failures: Vec::new() };
    for spec in specs {
        let by_id: HashMap<&str, T> = run
            .scores
            .iter()
            .filter(|r| r.dimension == spec.name)
            .map(|r| (r.instance_id.as_str(), r.score))
            .collect();
        let mut triples = Vec::with_capacity(table.rows.len());
        let mut excluded = 0;
        for row in &table.rows {
            match by_id.get(row.instance.id.as_str()) {
                Some(&m) => {
                    let h = table.normalized_human(row, &spec.name).expect("validated on load");
                    triples.push((row.doc_id.clone(), m, h));
                }
                None => excluded += 1,
            }
        }
        match correlate_units(&spec.name, protocol, &triples, coefficients) {
            Ok(mut report) => {
                report.excluded_rows = excluded;
                run.reports.push(report);
            }
            Err(e) => run.failures.push((spec.name.clone(), e)),
        }
    }
    Ok(run)
}

/// Aligned text table: one row per metric, one column group per dimension
/// plus an average group.
pub fn render_table<T: Real>(rows: &[(String, Vec<CorrelationReport<T>>)], coefficients: &[Coefficient]) -> String {
    let mut dims: Vec<String> = Vec::new();
    for (_, reports) in rows {
        for r in reports {
            if !dims.contains(&r.dimension) {
                dims.push(r.dimension.clone());
            }
        }
    }
    let width = 7;
    let group = coefficients.len() * (width + 1) - 1;
    let name_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max("Metrics".len());
    let mut groups: Vec<String> = dims.iter().map(|d| capitalize(d)).collect();
    groups.push("Average".into());

    let mut out = format!("{:<name_w$}", "Metrics");
    for g in &groups {
        out.push_str(&format!(" | {g:^group$}"));
    }
    out.push('\n');
    out.push_str(&" ".repeat(name_w));
    for _ in &groups {
        out.push_str(" |");
        for c in coefficients {
            out.push_str(&format!(" {:>width$}", c.symbol()));
        }
    }
    out.push('\n');
    out.push_str(&"-".repeat(name_w + groups.len() * (group + 3)));
    out.push('\n');

    let fmt = |v: Option<T>| v.map(|v| format!("{:.3}", v.to_f64().unwrap_or(f64::NAN))).unwrap_or_else(|| "-".into());
    for (name, reports) in rows {
        out.push_str(&format!("{name:<name_w$}"));
        for d in &dims {
            let r = reports.iter().find(|r| &r.dimension == d);
            out.push_str(" |");
            for &c in coefficients {
                out.push_str(&format!(" {:>width$}", fmt(r.and_then(|r| r.get(c)))));
            }
        }
        out.push_str(" |");
        for &c in coefficients {
            let vals: Vec<T> = reports.iter().filter_map(|r| r.get(c)).collect();
            let avg = (!vals.is_empty()).then(|| vals.iter().copied().sum::<T>() / T::of_usize(vals.len()));
            out.push_str(&format!(" {:>width$}", fmt(avg)));
        }
        out.push('\n');
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = r#"{"task":"summarization","human_scale":{"coherence":[1,5]}}
{"doc_id":"d1","system_id":"s1","instance":{"candidate":"a.","context":{"document":"x"}},"human":{"coherence":1}}
{"doc_id":"d1","system_id":"s2","instance":{"candidate":"b.","context":{"document":"x"}},"human":{"coherence":5}}
"#;

    #[test]
    fn parse_and_round_trip() {
        let t = BenchmarkTable::<f64>::parse(FIXTURE).unwrap();
        assert_eq!(t.dimensions, vec!["coherence"]);
        assert_eq!(t.rows[1].instance.id, "d1::s2");
        assert_eq!(t.normalized_human(&t.rows[1], "coherence").unwrap(), 1.0);
        let again = BenchmarkTable::<f64>::parse(&t.to_jsonl()).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn rejects_bad_tables() {
        let dup = FIXTURE.replace("\"s2\"", "\"s1\"");
        assert!(matches!(BenchmarkTable::<f64>::parse(&dup), Err(BenchmarkError::DuplicateRow(..))));
        let out = FIXTURE.replace("\"coherence\":5}", "\"coherence\":6}");
        assert!(matches!(BenchmarkTable::<f64>::parse(&out), Err(BenchmarkError::Human { line: 3, .. })));
        let gap = FIXTURE.replace("\"human\":{\"coherence\":1}", "\"human\":{}");
        assert!(matches!(
            BenchmarkTable::<f64>::parse(&gap),
            Err(BenchmarkError::Human { source: ProtocolError::MissingHuman { .. }, .. })
        ));
        assert!(matches!(BenchmarkTable::<f64>::parse(""), Err(BenchmarkError::MissingHeader)));
    }

    #[test]
    fn table_layout() {
        let report = |dim: &str, rho: f64, tau: f64| CorrelationReport {
            dimension: dim.into(),
            protocol: Protocol::SummaryLevel,
            unit: "document".into(),
            pearson: None,
            spearman: Some(rho),
            kendall: Some(tau),
            n_units: 3,
            skipped_units: 0,
            excluded_rows: 0,
        };
        let text = render_table(
            &[("metric".into(), vec![report("coherence", 0.5, 0.25), report("fluency", 0.3, 0.15)])],
            &[Coefficient::Spearman, Coefficient::Kendall],
        );
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].contains("Coherence") && lines[0].contains("Fluency") && lines[0].contains("Average"));
        assert!(lines[1].contains("rho") && lines[1].contains("tau"));
        assert!(lines[3].starts_with("metric"));
        assert!(lines[3].contains("0.500") && lines[3].contains("0.400") && lines[3].contains("0.200"));
    }
}
