//! Training shard plans: continual learning with replay, or one multi-task mix.
//!
//! Continual stage `k` holds `per_dim` samples of its new dimension plus
//! `floor(replay_fraction * per_dim)` samples of every earlier dimension,
//! redrawn independently per stage. Emission writes shard files of verbatim
//! dataset lines and a manifest with sha-256 digests of sources and shards.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rng::{derive_rng, stream_id};
use crate::sample::Answer;

pub const SUMMARIZATION_ORDER: [&str; 4] = ["coherence", "fluency", "consistency", "relevance"];
pub const DIALOGUE_ORDER: [&str; 4] = ["coherence", "naturalness", "groundedness", "engagingness"];
pub const DEFAULT_PER_DIM: usize = 30_000;
pub const DEFAULT_REPLAY_FRACTION: f64 = 0.2;
pub const DEFAULT_EPOCHS_HINT: f64 = 1.0;

#[derive(Debug, Error)]
pub enum CurriculumError {
    #[error("dimension order is empty")]
    EmptyOrder,
    #[error("dimension {0} appears more than once")]
    DuplicateDimension(String),
    #[error("replay fraction {0} outside [0, 1)")]
    ReplayFraction(f64),
    #[error("per-dimension count must be positive")]
    ZeroCount,
    #[error("no dataset for dimension {0}")]
    MissingDataset(String),
    #[error("dimension {dimension}: need {needed} samples, have {available} (short by {shortfall})")]
    Insufficient { dimension: String, needed: usize, available: usize, shortfall: usize },
    #[error("{path} line {line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("unknown preset \"{0}\"")]
    UnknownPreset(String),
    #[error("io {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest: {0}")]
    Manifest(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CurriculumError + '_ {
    move |source| CurriculumError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Continual,
    Multitask,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Continual => "continual",
            Self::Multitask => "multitask",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "continual" => Ok(Self::Continual),
            "multitask" | "multi-task" => Ok(Self::Multitask),
            other => Err(format!("unknown strategy \"{other}\"")),
        }
    }
}

/// Built-in dimension orders by task name.
pub fn preset_order(task: &str) -> Result<Vec<String>, CurriculumError> {
    let order: &[&str] = match task {
        "summarization" => &SUMMARIZATION_ORDER,
        "dialogue" => &DIALOGUE_ORDER,
        other => return Err(CurriculumError::UnknownPreset(other.to_string())),
    };
    Ok(order.iter().map(|s| s.to_string()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardPlan {
    pub stage: usize,
    pub new_dimensions: Vec<String>,
    /// Dimension to sample count; earlier dimensions first.
    pub composition: IndexMap<String, usize>,
    /// Advisory only; the trainer owns the schedule.
    pub epochs_hint: f64,
}

impl ShardPlan {
    pub fn size(&self) -> usize {
        self.composition.values().sum()
    }
}

/// `floor(fraction * per_dim)`, robust to the representation error of `fraction`.
pub fn replay_count(per_dim: usize, replay_fraction: f64) -> usize {
    (replay_fraction * per_dim as f64 + 1e-9).floor() as usize
}

fn check_dims(dims: &[String]) -> Result<(), CurriculumError> {
    if dims.is_empty() {
        return Err(CurriculumError::EmptyOrder);
    }
    let mut seen = BTreeSet::new();
    for d in dims {
        if !seen.insert(d) {
            return Err(CurriculumError::DuplicateDimension(d.clone()));
        }
    }
    Ok(())
}

pub fn plan_continual(order: &[String], per_dim: usize, replay_fraction: f64) -> Result<Vec<ShardPlan>, CurriculumError> {
    check_dims(order)?;
    if per_dim == 0 {
        return Err(CurriculumError::ZeroCount);
    }
    if !(0.0..1.0).contains(&replay_fraction) {
        return Err(CurriculumError::ReplayFraction(replay_fraction));
    }
    let replay = replay_count(per_dim, replay_fraction);
    Ok(order
        .iter()
        .enumerate()
        .map(|(k, dim)| {
            let mut composition: IndexMap<String, usize> =
                if replay > 0 { order[..k].iter().map(|d| (d.clone(), replay)).collect() } else { IndexMap::new() };
            composition.insert(dim.clone(), per_dim);
            ShardPlan { stage: k, new_dimensions: vec![dim.clone()], composition, epochs_hint: DEFAULT_EPOCHS_HINT }
        })
        .collect())
}

pub fn plan_multitask(dimensions: &[String], per_dim: usize) -> Result<ShardPlan, CurriculumError> {
    check_dims(dimensions)?;
    if per_dim == 0 {
        return Err(CurriculumError::ZeroCount);
    }
    Ok(ShardPlan {
        stage: 0,
        new_dimensions: dimensions.to_vec(),
        composition: dimensions.iter().map(|d| (d.clone(), per_dim)).collect(),
        epochs_hint: DEFAULT_EPOCHS_HINT,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A dataset file split into verbatim lines with their labels.
#[derive(Debug, Clone)]
pub struct SourceData {
    pub path: PathBuf,
    pub sha256: String,
    pub lines: Vec<String>,
    pub labels: Vec<Answer>,
}

#[derive(Deserialize)]
struct LabelOnly {
    answer: Answer,
}

impl SourceData {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CurriculumError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(io_err(path))?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| CurriculumError::Malformed {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        let mut lines = Vec::new();
        let mut labels = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed: LabelOnly = serde_json::from_str(line).map_err(|e| CurriculumError::Malformed {
                path: path.display().to_string(),
                line: i + 1,
                message: e.to_string(),
            })?;
            lines.push(line.to_string());
            labels.push(parsed.answer);
        }
        Ok(Self { path: path.to_path_buf(), sha256: sha256_hex(&bytes), lines, labels })
    }

    pub fn yes_count(&self) -> usize {
        self.labels.iter().filter(|a| a.is_yes()).count()
    }
}

/// Picks `count` distinct line indices, keeping the Yes share within one
/// sample of the source's.
pub fn stratified_draw<R: rand::Rng + ?Sized>(labels: &[Answer], count: usize, rng: &mut R) -> Vec<usize> {
    let (mut yes, mut no): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i].is_yes());
    let take_yes = (count as u128 * yes.len() as u128 / labels.len().max(1) as u128) as usize;
    let take_no = count - take_yes;
    yes.shuffle(rng);
    no.shuffle(rng);
    let mut picked: Vec<usize> = yes[..take_yes].iter().chain(&no[..take_no]).copied().collect();
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceEntry {
    pub path: String,
    pub sha256: String,
    pub lines: usize,
    pub yes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEntry {
    pub stage: usize,
    pub file: String,
    pub sha256: String,
    pub lines: usize,
    pub new_dimensions: Vec<String>,
    pub composition: IndexMap<String, usize>,
    pub epochs_hint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub strategy: Strategy,
    pub seed: u64,
    pub per_dim: usize,
    pub replay_fraction: f64,
    /// Replay is drawn per previous dimension, not from their union.
    pub replay_scope: String,
    /// Replay samples are redrawn for every stage.
    pub replay_draw: String,
    pub sources: IndexMap<String, SourceEntry>,
    pub stages: Vec<StageEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone)]
pub struct EmitOptions {
    pub strategy: Strategy,
    pub seed: u64,
    pub per_dim: usize,
    pub replay_fraction: f64,
}

fn shard_name(strategy: Strategy, stage: usize) -> String {
    match strategy {
        Strategy::Continual => format!("stage-{stage}.jsonl"),
        Strategy::Multitask => "multitask.jsonl".to_string(),
    }
}

/// Writes one shard per plan and `manifest.json` into `out_dir`.
pub fn emit_shards(
    plans: &[ShardPlan],
    datasets: &IndexMap<String, PathBuf>,
    out_dir: impl AsRef<Path>,
    opts: &EmitOptions,
) -> Result<Manifest, CurriculumError> {
    let out_dir = out_dir.as_ref();
    let mut sources: IndexMap<String, SourceData> = IndexMap::new();
    for plan in plans {
        for (dim, &needed) in &plan.composition {
            if !sources.contains_key(dim) {
                let path = datasets.get(dim).ok_or_else(|| CurriculumError::MissingDataset(dim.clone()))?;
                sources.insert(dim.clone(), SourceData::load(path)?);
            }
            let available = sources[dim].lines.len();
            if available < needed {
                return Err(CurriculumError::Insufficient {
                    dimension: dim.clone(),
                    needed,
                    available,
                    shortfall: needed - available,
                });
            }
        }
    }
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let stream = stream_id("curriculum");
    let stages = plans
        .par_iter()
        .map(|plan| {
            let mut rng = derive_rng(opts.seed, stream, plan.stage as u64);
            let mut shard: Vec<&str> = Vec::with_capacity(plan.size());
            for (dim, &count) in &plan.composition {
                let src = &sources[dim];
                shard.extend(stratified_draw(&src.labels, count, &mut rng).into_iter().map(|i| src.lines[i].as_str()));
            }
            shard.shuffle(&mut rng);
            let mut body = shard.join("\n");
            if !body.is_empty() {
                body.push('\n');
            }
            let file = shard_name(opts.strategy, plan.stage);
            let path = out_dir.join(&file);
            std::fs::write(&path, &body).map_err(io_err(&path))?;
            Ok(StageEntry {
                stage: plan.stage,
                file,
                sha256: sha256_hex(body.as_bytes()),
                lines: shard.len(),
                new_dimensions: plan.new_dimensions.clone(),
                composition: plan.composition.clone(),
                epochs_hint: plan.epochs_hint,
            })
        })
        .collect::<Result<Vec<_>, CurriculumError>>()?;

    let manifest = Manifest {
        strategy: opts.strategy,
        seed: opts.seed,
        per_dim: opts.per_dim,
        replay_fraction: opts.replay_fraction,
        replay_scope: "per_dimension".into(),
        replay_draw: "per_stage".into(),
        sources: sources
            .iter()
            .map(|(d, s)| {
                let entry = SourceEntry {
                    path: s.path.display().to_string(),
                    sha256: s.sha256.clone(),
                    lines: s.lines.len(),
                    yes: s.yes_count(),
                };
                (d.clone(), entry)
            })
            .collect(),
        stages,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&manifest).expect("serializable manifest");
    json.push('\n');
    std::fs::write(&path, json).map_err(io_err(&path))?;
    Ok(manifest)
}

/// Checks source and shard digests, per-stage line counts and that every
/// shard line is a verbatim source line of a dimension in that stage.
/// Returns the list of problems found (empty when the manifest verifies).
pub fn verify_manifest(manifest_path: impl AsRef<Path>) -> Result<Vec<String>, CurriculumError> {
    let manifest_path = manifest_path.as_ref();
    let text = std::fs::read_to_string(manifest_path).map_err(io_err(manifest_path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| CurriculumError::Manifest(e.to_string()))?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let mut problems = Vec::new();
    let mut source_lines: IndexMap<&str, std::collections::HashSet<String>> = IndexMap::new();
    for (dim, entry) in &manifest.sources {
        match std::fs::read(&entry.path) {
            Ok(bytes) => {
                if sha256_hex(&bytes) != entry.sha256 {
                    problems.push(format!("source {dim} ({}): digest mismatch", entry.path));
                }
                let lines = String::from_utf8_lossy(&bytes).lines().map(str::to_string).collect();
                source_lines.insert(dim, lines);
            }
            Err(e) => problems.push(format!("source {dim} ({}): {e}", entry.path)),
        }
    }
    for stage in &manifest.stages {
        let path = dir.join(&stage.file);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) => {
                problems.push(format!("stage {} ({}): {e}", stage.stage, stage.file));
                continue;
            }
        };
        if sha256_hex(&bytes) != stage.sha256 {
            problems.push(format!("stage {} ({}): digest mismatch", stage.stage, stage.file));
        }
        let body = String::from_utf8_lossy(&bytes);
        let lines: Vec<&str> = body.lines().collect();
        let expected: usize = stage.composition.values().sum();
        if lines.len() != expected || lines.len() != stage.lines {
            problems.push(format!("stage {}: {} lines, composition says {expected}", stage.stage, lines.len()));
        }
        for (i, line) in lines.iter().enumerate() {
            let owners = stage
                .composition
                .keys()
                .filter(|d| source_lines.get(d.as_str()).is_some_and(|s| s.contains(*line)))
                .count();
            if owners == 0 {
                problems.push(format!("stage {} line {}: not a line of any source in the stage", stage.stage, i + 1));
            }
        }
    }
    Ok(problems)
}
