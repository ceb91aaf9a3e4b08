//! Agreement between metric scores and human judgments.

pub mod adapters;
mod benchmark;
mod correlation;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::Real;

pub use benchmark::{
    render_table, run_benchmark, BenchmarkError, BenchmarkRow, BenchmarkRun, BenchmarkTable, RowKey,
};
pub use correlation::{average_ranks, kendall_tau, pearson, spearman, Coefficient, CorrelationError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("degenerate scale [{min}, {max}]")]
    DegenerateScale { min: f64, max: f64 },
    #[error("human score {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("no metric score for row ({doc_id}, {system_id})")]
    MissingScore { doc_id: String, system_id: String },
    #[error("no human score for dimension {dimension} in row ({doc_id}, {system_id})")]
    MissingHuman { dimension: String, doc_id: String, system_id: String },
    #[error("dimension {dimension}: no unit has a defined correlation ({skipped} skipped)")]
    NoUsableUnits { dimension: String, skipped: usize },
    #[error("no coefficients requested")]
    NoCoefficients,
}

/// Maps `raw` from `[min, max]` onto `[0, 1]`.
pub fn normalize_human<T: Real>(raw: T, scale: (T, T)) -> Result<T, ProtocolError> {
    let (min, max) = scale;
    let f = |v: T| v.to_f64().unwrap_or(f64::NAN);
    if !(max > min) {
        return Err(ProtocolError::DegenerateScale { min: f(min), max: f(max) });
    }
    if !(raw >= min && raw <= max) {
        return Err(ProtocolError::OutOfRange { value: f(raw), min: f(min), max: f(max) });
    }
    Ok((raw - min) / (max - min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Mean over documents of the across-systems correlation.
    SummaryLevel,
    /// One correlation over all rows pooled.
    TurnLevel,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SummaryLevel => "summary_level",
            Self::TurnLevel => "turn_level",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Self::SummaryLevel => "document",
            Self::TurnLevel => "pooled",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "summary_level" | "summary" => Ok(Self::SummaryLevel),
            "turn_level" | "turn" => Ok(Self::TurnLevel),
            other => Err(format!("unknown protocol \"{other}\"")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport<T> {
    pub dimension: String,
    pub protocol: Protocol,
    /// What one correlation unit is: `document` or `pooled`.
    pub unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pearson: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spearman: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kendall: Option<T>,
    pub n_units: usize,
    pub skipped_units: usize,
    /// Rows dropped because scoring failed.
    #[serde(default)]
    pub excluded_rows: usize,
}

impl<T: Copy> CorrelationReport<T> {
    pub fn get(&self, c: Coefficient) -> Option<T> {
        match c {
            Coefficient::Pearson => self.pearson,
            Coefficient::Spearman => self.spearman,
            Coefficient::Kendall => self.kendall,
        }
    }

    fn set(&mut self, c: Coefficient, v: T) {
        match c {
            Coefficient::Pearson => self.pearson = Some(v),
            Coefficient::Spearman => self.spearman = Some(v),
            Coefficient::Kendall => self.kendall = Some(v),
        }
    }
}

/// `(doc_id, metric, human)` triples for one dimension.
pub(crate) fn correlate_units<T: Real>(
    dimension: &str,
    protocol: Protocol,
    triples: &[(String, T, T)],
    coefficients: &[Coefficient],
) -> Result<CorrelationReport<T>, ProtocolError> {
    if coefficients.is_empty() {
        return Err(ProtocolError::NoCoefficients);
    }
    let units: Vec<(Vec<T>, Vec<T>)> = match protocol {
        Protocol::TurnLevel => vec![triples.iter().map(|t| (t.1, t.2)).unzip()],
        Protocol::SummaryLevel => {
            let mut groups: IndexMap<&str, (Vec<T>, Vec<T>)> = IndexMap::new();
            for (doc, m, h) in triples {
                let g = groups.entry(doc.as_str()).or_default();
                g.0.push(*m);
                g.1.push(*h);
            }
            groups.into_values().collect()
        }
    };
    let mut sums: HashMap<Coefficient, T> = HashMap::new();
    let (mut used, mut skipped) = (0usize, 0usize);
    'unit: for (metric, human) in &units {
        let mut values = Vec::with_capacity(coefficients.len());
        for &c in coefficients {
            match c.compute(metric, human) {
                Ok(v) => values.push((c, v)),
                Err(_) => {
                    skipped += 1;
                    continue 'unit;
                }
            }
        }
        used += 1;
        for (c, v) in values {
            let slot = sums.entry(c).or_insert(T::zero());
            *slot = *slot + v;
        }
    }
    if used == 0 {
        return Err(ProtocolError::NoUsableUnits { dimension: dimension.to_string(), skipped });
    }
    let mut report = CorrelationReport {
        dimension: dimension.to_string(),
        protocol,
        unit: protocol.unit().to_string(),
        pearson: None,
        spearman: None,
        kendall: None,
        n_units: used,
        skipped_units: skipped,
        excluded_rows: 0,
    };
    for &c in coefficients {
        report.set(c, sums[&c] / T::of_usize(used));
    }
    Ok(report)
}

fn triples<T: Real>(
    table: &BenchmarkTable<T>,
    metric_scores: &HashMap<RowKey, T>,
    dimension: &str,
) -> Result<Vec<(String, T, T)>, ProtocolError> {
    table
        .rows
        .iter()
        .map(|row| {
            let key = row.key();
            let metric = *metric_scores.get(&key).ok_or_else(|| ProtocolError::MissingScore {
                doc_id: row.doc_id.clone(),
                system_id: row.system_id.clone(),
            })?;
            let human = table.normalized_human(row, dimension)?;
            Ok((row.doc_id.clone(), metric, human))
        })
        .collect()
}

/// Per-document correlation across systems, averaged over documents.
/// Documents with fewer than two systems or constant vectors are skipped.
pub fn summary_level<T: Real>(
    table: &BenchmarkTable<T>,
    metric_scores: &HashMap<RowKey, T>,
    dimension: &str,
    coefficients: &[Coefficient],
) -> Result<CorrelationReport<T>, ProtocolError> {
    let t = triples(table, metric_scores, dimension)?;
    correlate_units(dimension, Protocol::SummaryLevel, &t, coefficients)
}

/// A single correlation over all rows.
pub fn turn_level<T: Real>(
    table: &BenchmarkTable<T>,
    metric_scores: &HashMap<RowKey, T>,
    dimension: &str,
    coefficients: &[Coefficient],
) -> Result<CorrelationReport<T>, ProtocolError> {
    let t = triples(table, metric_scores, dimension)?;
    correlate_units(dimension, Protocol::TurnLevel, &t, coefficients)
}

pub fn correlate<T: Real>(
    protocol: Protocol,
    table: &BenchmarkTable<T>,
    metric_scores: &HashMap<RowKey, T>,
    dimension: &str,
    coefficients: &[Coefficient],
) -> Result<CorrelationReport<T>, ProtocolError> {
    match protocol {
        Protocol::SummaryLevel => summary_level(table, metric_scores, dimension, coefficients),
        Protocol::TurnLevel => turn_level(table, metric_scores, dimension, coefficients),
    }
}
