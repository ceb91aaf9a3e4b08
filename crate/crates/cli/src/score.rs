use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use booleval_core::scorer::{score_batch, ScoreError, ScoreReport};
use booleval_core::{builtin_registry, Answer, BooleanQASample, DimensionSpec, EvalInstance, Task};
use clap::Args;
use indexmap::IndexMap;

use crate::{provider, split_list, ProviderArgs, Status};

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// JSONL of instances `{"id", "candidate", "references", "context"}`,
    /// or of generated samples (scored on their own dimension).
    #[arg(long)]
    input: PathBuf,
    /// Task of plain instances.
    #[arg(long)]
    task: Option<String>,
    /// Comma-separated dimensions for plain instances; all of the task's when omitted.
    #[arg(long)]
    dims: Option<String>,
    #[command(flatten)]
    provider: ProviderArgs,
    /// Report JSONL, `-` for stdout. A summary goes to stdout when this is a file.
    #[arg(long, default_value = "-")]
    out: String,
}

enum Input {
    Instances(Vec<EvalInstance>),
    Samples(Vec<(usize, BooleanQASample)>),
}

fn read_input(path: &PathBuf) -> Result<Input> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let lines: Vec<(usize, &str)> =
        text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| (i + 1, l)).collect();
    let Some((_, first)) = lines.first() else { bail!("{} is empty", path.display()) };
    let first: serde_json::Value = serde_json::from_str(first).with_context(|| format!("{}:1", path.display()))?;
    let at = |n: usize| format!("{}:{n}", path.display());
    if first.get("segments").is_some() {
        let samples = lines
            .iter()
            .map(|(n, l)| serde_json::from_str(l).map(|s| (*n, s)).with_context(|| at(*n)))
            .collect::<Result<_>>()?;
        Ok(Input::Samples(samples))
    } else {
        let instances = lines
            .iter()
            .map(|(n, l)| {
                let mut inst: EvalInstance = serde_json::from_str(l).with_context(|| at(*n))?;
                if inst.id.is_empty() {
                    inst.id = format!("line-{n}");
                }
                Ok(inst)
            })
            .collect::<Result<_>>()?;
        Ok(Input::Instances(instances))
    }
}

fn title(dim: &str) -> String {
    let mut c = dim.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

pub fn run(a: ScoreArgs) -> Result<Status> {
    let registry = builtin_registry();
    let input = read_input(&a.input)?;
    let opts = provider::batch_options(&a.provider)?;
    let provider = provider::build(&a.provider, &registry)?;

    // (instances, specs) groups scored in turn
    let mut groups: Vec<(Vec<EvalInstance>, Vec<DimensionSpec>)> = Vec::new();
    let mut labels: IndexMap<String, Answer> = IndexMap::new();
    match &input {
        Input::Instances(instances) => {
            let Some(task) = a.task.as_deref() else { bail!("--task is required for plain instances") };
            let task = Task::from(task);
            let specs: Vec<DimensionSpec> = match &a.dims {
                Some(d) => split_list(d).iter().map(|n| registry.lookup(&task, n).cloned()).collect::<Result<_, _>>()?,
                None => registry.for_task(&task).cloned().collect(),
            };
            if specs.is_empty() {
                bail!("no dimensions registered for task {task}");
            }
            groups.push((instances.clone(), specs));
        }
        Input::Samples(samples) => {
            let mut by_dim: IndexMap<(String, String), Vec<EvalInstance>> = IndexMap::new();
            for (n, s) in samples {
                let spec = registry.lookup(&Task::from(s.task.as_str()), &s.dimension)?;
                let id = format!("line-{n}");
                let inst = s.to_instance(&id, spec).with_context(|| format!("line {n}"))?;
                labels.insert(id, s.answer);
                by_dim.entry((s.task.clone(), s.dimension.clone())).or_default().push(inst);
            }
            for ((task, dim), insts) in by_dim {
                let spec = registry.lookup(&Task::from(task.as_str()), &dim)?.clone();
                groups.push((insts, vec![spec]));
            }
        }
    }

    let mut reports: Vec<ScoreReport<f64>> = Vec::new();
    let mut errors: Vec<ScoreError> = Vec::new();
    for (instances, specs) in &groups {
        let out = score_batch(instances, specs, provider.as_ref(), opts)?;
        reports.extend(out.reports);
        errors.extend(out.errors);
    }

    let mut sink: Box<dyn Write> = if a.out == "-" {
        Box::new(std::io::stdout().lock())
    } else {
        Box::new(std::io::BufWriter::new(std::fs::File::create(&a.out).with_context(|| format!("creating {}", a.out))?))
    };
    for r in &reports {
        writeln!(sink, "{}", serde_json::to_string(r)?)?;
    }
    for e in &errors {
        eprintln!("{e}");
        writeln!(sink, "{}", serde_json::json!({ "error": e.to_string() }))?;
    }
    sink.flush()?;
    drop(sink);

    if a.out != "-" {
        match &input {
            Input::Instances(_) => {
                let mut by_id: IndexMap<&str, Vec<&ScoreReport<f64>>> = IndexMap::new();
                for r in &reports {
                    by_id.entry(r.instance_id.as_str()).or_default().push(r);
                }
                for (id, rs) in by_id {
                    let cells: Vec<String> = rs.iter().map(|r| format!("{}: {:.2}", title(&r.dimension), r.score)).collect();
                    println!("{id}\t{}", cells.join("    "));
                }
            }
            Input::Samples(_) => {
                let mut sums: IndexMap<(String, String), [(f64, usize); 2]> = IndexMap::new();
                for r in &reports {
                    let slot = sums.entry((r.task.clone(), r.dimension.clone())).or_default();
                    let k = usize::from(labels[&r.instance_id] == Answer::No);
                    slot[k].0 += r.score;
                    slot[k].1 += 1;
                }
                for ((task, dim), [(ys, yn), (ns, nn)]) in sums {
                    let mean = |s: f64, n: usize| if n == 0 { f64::NAN } else { s / n as f64 };
                    println!("{task}/{dim}\tn={}\tmean_yes={:.4}\tmean_no={:.4}", yn + nn, mean(ys, yn), mean(ns, nn));
                }
            }
        }
    }
    Ok(match (reports.len(), errors.len()) {
        (_, 0) => Status::Clean,
        (0, n) => Status::Failed(n),
        (_, n) => Status::Partial(n),
    })
}
