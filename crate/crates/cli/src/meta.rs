use std::collections::HashMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use booleval_core::metaeval::adapters::{load_benchmark, SourceFormat};
use booleval_core::metaeval::{correlate, render_table, run_benchmark, BenchmarkTable, Coefficient, Protocol, RowKey};
use booleval_core::{builtin_registry, CorrelationReport, DimensionSpec, Task};
use clap::Args;
use serde::Deserialize;

use crate::{provider, split_list, ProviderArgs, Status};

#[derive(Debug, Args)]
pub struct MetaEvalArgs {
    /// Benchmark file.
    #[arg(long)]
    benchmark: PathBuf,
    /// normalized, summeval, topical_chat, qags or sfres.
    #[arg(long, default_value = "normalized")]
    format: String,
    /// Row filter for files that mix datasets (sfres: sf-res or sf-hot).
    #[arg(long)]
    dataset: Option<String>,
    /// Comma-separated dimensions; every annotated one when omitted.
    #[arg(long)]
    dims: Option<String>,
    /// summary_level, turn_level or auto (summary_level for multi-system
    /// summarization tables, turn_level otherwise).
    #[arg(long, default_value = "auto")]
    protocol: String,
    #[arg(long, default_value = "spearman,kendall")]
    coefficients: String,
    /// Precomputed scores `{"doc_id", "system_id", "score", "dimension"?}`
    /// or score reports; used instead of a provider.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[command(flatten)]
    provider: ProviderArgs,
    /// Row label in the printed table; the provider name when omitted.
    #[arg(long)]
    name: Option<String>,
    /// Correlation reports as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct ScoreLine {
    #[serde(default)]
    doc_id: Option<String>,
    #[serde(default)]
    system_id: Option<String>,
    #[serde(default)]
    instance_id: Option<String>,
    #[serde(default)]
    dimension: Option<String>,
    score: f64,
}

/// dimension (or "" for all) -> row -> score
fn read_scores(path: &PathBuf, table: &BenchmarkTable<f64>) -> Result<HashMap<String, HashMap<RowKey, f64>>> {
    let by_instance: HashMap<&str, RowKey> = table.rows.iter().map(|r| (r.instance.id.as_str(), r.key())).collect();
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out: HashMap<String, HashMap<RowKey, f64>> = HashMap::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let at = || format!("{}:{}", path.display(), i + 1);
        let s: ScoreLine = serde_json::from_str(line).with_context(at)?;
        let key = match (s.doc_id, s.system_id, s.instance_id) {
            (Some(d), Some(sys), _) => (d, sys),
            (_, _, Some(id)) => by_instance.get(id.as_str()).cloned().with_context(|| format!("{}: unknown instance {id}", at()))?,
            _ => bail!("{}: needs doc_id and system_id, or instance_id", at()),
        };
        out.entry(s.dimension.unwrap_or_default()).or_default().insert(key, s.score);
    }
    Ok(out)
}

pub fn run(a: MetaEvalArgs) -> Result<Status> {
    let format: SourceFormat = a.format.parse().map_err(anyhow::Error::msg)?;
    let table: BenchmarkTable<f64> = load_benchmark(&a.benchmark, format, a.dataset.as_deref())
        .with_context(|| format!("loading {}", a.benchmark.display()))?;
    let coefficients: Vec<Coefficient> =
        split_list(&a.coefficients).iter().map(|c| c.parse()).collect::<Result<_, String>>().map_err(anyhow::Error::msg)?;
    let protocol = match a.protocol.as_str() {
        "auto" if table.task == Task::Summarization && format != SourceFormat::Qags => Protocol::SummaryLevel,
        "auto" => Protocol::TurnLevel,
        p => p.parse().map_err(anyhow::Error::msg)?,
    };
    let dims: Vec<String> = match &a.dims {
        Some(d) => split_list(d),
        None => table.dimensions.clone(),
    };

    let mut reports: Vec<CorrelationReport> = Vec::new();
    let mut errors = 0;
    let name;
    if let Some(path) = &a.scores {
        name = a.name.clone().unwrap_or_else(|| path.file_stem().unwrap_or_default().to_string_lossy().into());
        let scores = read_scores(path, &table)?;
        for dim in &dims {
            let Some(s) = scores.get(dim.as_str()).or_else(|| scores.get("")) else {
                eprintln!("{dim}: no scores");
                errors += 1;
                continue;
            };
            match correlate(protocol, &table, s, dim, &coefficients) {
                Ok(r) => reports.push(r),
                Err(e) => {
                    eprintln!("{dim}: {e}");
                    errors += 1;
                }
            }
        }
    } else {
        let registry = builtin_registry();
        let specs: Vec<DimensionSpec> =
            dims.iter().map(|d| registry.lookup(&table.task, d).cloned()).collect::<Result<_, _>>()?;
        let opts = provider::batch_options(&a.provider)?;
        let provider = provider::build(&a.provider, &registry)?;
        name = a.name.clone().unwrap_or_else(|| provider.name());
        let run = run_benchmark(&table, &specs, provider.as_ref(), protocol, &coefficients, opts)?;
        for e in &run.score_errors {
            eprintln!("{e}");
        }
        for (dim, e) in &run.failures {
            eprintln!("{dim}: {e}");
        }
        errors += run.error_count();
        reports = run.reports;
    }

    for r in &reports {
        if r.skipped_units > 0 || r.excluded_rows > 0 {
            eprintln!("{}: {} unit(s) skipped, {} row(s) excluded", r.dimension, r.skipped_units, r.excluded_rows);
        }
    }
    if !reports.is_empty() {
        print!("{}", render_table(&[(name.clone(), reports.clone())], &coefficients));
    }
    if let Some(out) = &a.out {
        let doc = serde_json::json!({ "metric": name, "protocol": protocol.as_str(), "reports": reports });
        std::fs::write(out, serde_json::to_string_pretty(&doc)? + "\n").with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(match (reports.len(), errors) {
        (_, 0) => Status::Clean,
        (0, n) => Status::Failed(n),
        (_, n) => Status::Partial(n),
    })
}
