use booleval_core::{builtin_registry, render, EvalInstance, Task};
use serde::Deserialize;

use super::fixtures::path;

#[derive(Deserialize)]
struct Case {
    task: String,
    dimension: String,
    instance: EvalInstance,
}

/// Every built-in dimension has a golden rendering; returns mismatches.
pub fn golden_mismatches() -> Vec<String> {
    let registry = builtin_registry();
    let cases: Vec<Case> = std::fs::read_to_string(path("golden/cases.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let mut problems = Vec::new();
    for spec in registry.iter() {
        if !cases.iter().any(|c| Task::from(c.task.as_str()) == spec.task && c.dimension == spec.name) {
            problems.push(format!("no golden case for {}/{}", spec.task, spec.name));
        }
    }
    for case in &cases {
        let spec = registry.lookup(&Task::from(case.task.as_str()), &case.dimension).unwrap();
        let rendered = render(&case.instance, spec).unwrap();
        for (j, r) in rendered.iter().enumerate() {
            let file = path(&format!("golden/{}.{}.{j}.txt", case.task, case.dimension));
            match std::fs::read(&file) {
                Ok(bytes) if bytes == r.text.as_bytes() => {}
                Ok(bytes) => problems.push(format!(
                    "{}/{} #{j}:\n  want {:?}\n  got  {:?}",
                    case.task,
                    case.dimension,
                    String::from_utf8_lossy(&bytes),
                    r.text
                )),
                Err(e) => problems.push(format!("{}: {e}", file.display())),
            }
        }
        let extra = path(&format!("golden/{}.{}.{}.txt", case.task, case.dimension, rendered.len()));
        if extra.exists() {
            problems.push(format!("{}/{}: fewer inputs rendered than golden files", case.task, case.dimension));
        }
    }
    problems
}
