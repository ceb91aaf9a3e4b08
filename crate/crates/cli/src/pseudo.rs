use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use booleval_core::perturb::{sample_file_name, PerturbConfig, PseudoDataBuilder, GENERATABLE};
use booleval_core::sample::write_jsonl;
use booleval_core::{load_corpus, Answer, CorpusKind, Task};
use clap::Args;

use crate::{split_list, Status};

#[derive(Debug, Args)]
pub struct MakePseudoArgs {
    /// Corpus JSONL (summarization or dialogue records).
    #[arg(long)]
    corpus: PathBuf,
    /// summarization or dialogue.
    #[arg(long)]
    task: String,
    /// Comma-separated dimensions; every built-in one for the task when omitted.
    #[arg(long)]
    dims: Option<String>,
    /// Samples per dimension, half positive. Must be even.
    #[arg(long, default_value_t = 30_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for `<task>.<dimension>.jsonl` files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Mean span length of summary fluency edits.
    #[arg(long, default_value_t = 5.0)]
    lambda_summ: f64,
    /// Mean span length of dialogue naturalness edits.
    #[arg(long, default_value_t = 3.0)]
    lambda_dialog: f64,
    /// Fewest sentences replaced by a relevance negative.
    #[arg(long, default_value_t = 2)]
    relevance_replace_min: usize,
    /// Donor summaries retrieved per reference.
    #[arg(long, default_value_t = 10)]
    retrieval_k: usize,
}

pub fn run(a: MakePseudoArgs) -> Result<Status> {
    let kind: CorpusKind = a.task.parse().with_context(|| format!("task \"{}\"", a.task))?;
    let task = Task::from(a.task.as_str());
    let dims: Vec<String> = match &a.dims {
        Some(d) => split_list(d),
        None => GENERATABLE.iter().filter(|(t, _)| *t == a.task).map(|(_, d)| d.to_string()).collect(),
    };
    if dims.is_empty() {
        bail!("no dimensions given");
    }
    let corpus = load_corpus(&a.corpus, kind).with_context(|| format!("loading {}", a.corpus.display()))?;
    let cfg = PerturbConfig {
        lambda_summ: a.lambda_summ,
        lambda_dialog: a.lambda_dialog,
        relevance_replace_min: a.relevance_replace_min,
        retrieval_k: a.retrieval_k,
        rng_seed: a.seed,
    };
    let builder = PseudoDataBuilder::new(&corpus, cfg)?;
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;

    let mut failed = 0;
    for dim in &dims {
        match builder.generate(&task, dim, a.count) {
            Ok(samples) => {
                let path = a.out_dir.join(sample_file_name(&task, dim));
                write_jsonl(&path, &samples).with_context(|| format!("writing {}", path.display()))?;
                let yes = samples.iter().filter(|s| s.answer == Answer::Yes).count();
                println!("{}\t{}\tyes={}\tno={}\tseed={}", path.display(), samples.len(), yes, samples.len() - yes, a.seed);
            }
            Err(e) => {
                failed += 1;
                eprintln!("{task}/{dim}: {e}");
            }
        }
    }
    Ok(match failed {
        0 => Status::Clean,
        n if n == dims.len() => Status::Failed(n),
        n => Status::Partial(n),
    })
}
