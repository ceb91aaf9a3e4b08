use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use booleval_core::curriculum::{
    emit_shards, plan_continual, plan_multitask, preset_order, verify_manifest, EmitOptions, ShardPlan, Strategy,
    MANIFEST_FILE,
};
use booleval_core::perturb::sample_file_name;
use booleval_core::Task;
use clap::Args;
use indexmap::IndexMap;

use crate::{split_list, Status};

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long, default_value = "summarization")]
    task: String,
    /// continual or multitask.
    #[arg(long, default_value = "continual")]
    strategy: String,
    /// Comma-separated dimension order; the task's preset when omitted.
    #[arg(long)]
    order: Option<String>,
    /// New samples per dimension.
    #[arg(long, default_value_t = 30_000)]
    per_dim: usize,
    /// Share of per_dim replayed from each earlier dimension.
    #[arg(long, default_value_t = 0.2)]
    replay_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory holding `<task>.<dimension>.jsonl` datasets.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// `dimension=path`, repeatable; wins over --data-dir.
    #[arg(long, value_name = "DIM=PATH")]
    dataset: Vec<String>,
    /// Where shards and the manifest go. Without datasets only plan.json is written.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Check an existing manifest against its shards and sources, then exit.
    #[arg(long, value_name = "MANIFEST")]
    verify: Option<PathBuf>,
}

fn plan_json(plans: &[ShardPlan], a: &PlanArgs, strategy: Strategy) -> serde_json::Value {
    let stages: Vec<serde_json::Value> = plans
        .iter()
        .map(|p| {
            serde_json::json!({
                "stage": p.stage,
                "size": p.size(),
                "new_dimensions": p.new_dimensions,
                "composition": p.composition,
                "epochs_hint": p.epochs_hint,
            })
        })
        .collect();
    serde_json::json!({
        "strategy": strategy.to_string(),
        "seed": a.seed,
        "per_dim": a.per_dim,
        "replay_fraction": a.replay_fraction,
        "stages": stages,
    })
}

pub fn run(a: PlanArgs) -> Result<Status> {
    if let Some(manifest) = &a.verify {
        let problems = verify_manifest(manifest)?;
        for p in &problems {
            eprintln!("{p}");
        }
        println!("{}: {}", manifest.display(), if problems.is_empty() { "ok" } else { "MISMATCH" });
        return Ok(if problems.is_empty() { Status::Clean } else { Status::Failed(problems.len()) });
    }
    let strategy: Strategy = a.strategy.parse().map_err(anyhow::Error::msg)?;
    let order = match &a.order {
        Some(o) => split_list(o),
        None => preset_order(&a.task)?,
    };
    let plans = match strategy {
        Strategy::Continual => plan_continual(&order, a.per_dim, a.replay_fraction)?,
        Strategy::Multitask => vec![plan_multitask(&order, a.per_dim)?],
    };
    let summary = plan_json(&plans, &a, strategy);

    let mut datasets: IndexMap<String, PathBuf> = IndexMap::new();
    if let Some(dir) = &a.data_dir {
        let task = Task::from(a.task.as_str());
        for dim in &order {
            datasets.insert(dim.clone(), dir.join(sample_file_name(&task, dim)));
        }
    }
    for d in &a.dataset {
        let Some((dim, path)) = d.split_once('=') else { bail!("--dataset expects DIM=PATH, got \"{d}\"") };
        datasets.insert(dim.to_string(), PathBuf::from(path));
    }

    match &a.out_dir {
        Some(out) if !datasets.is_empty() => {
            for (dim, p) in &datasets {
                if !p.is_file() {
                    bail!("dataset for {dim} not found: {}", p.display());
                }
            }
            let opts = EmitOptions { strategy, seed: a.seed, per_dim: a.per_dim, replay_fraction: a.replay_fraction };
            let manifest = emit_shards(&plans, &datasets, out, &opts)?;
            for s in &manifest.stages {
                println!("{}\t{}\t{}", s.file, s.lines, s.sha256);
            }
            println!("{}", out.join(MANIFEST_FILE).display());
        }
        Some(out) => {
            std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
            let path = out.join("plan.json");
            std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        None => println!("{}", serde_json::to_string_pretty(&summary)?),
    }
    Ok(Status::Clean)
}
