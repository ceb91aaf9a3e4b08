//! Config files become extra argv placed right after the subcommand name,
//! so anything typed on the command line later overrides them.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};

const SUBCOMMANDS: [&str; 5] = ["make-pseudo", "convert-intermediate", "score", "meta-eval", "plan"];

fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn value_args(key: &str, value: &toml::Value) -> Result<Vec<String>> {
    let flag = format!("--{}", key.replace('_', "-"));
    Ok(match value {
        toml::Value::Boolean(true) => vec![flag],
        toml::Value::Boolean(false) => vec![],
        toml::Value::String(s) => vec![flag, s.clone()],
        toml::Value::Integer(i) => vec![flag, i.to_string()],
        toml::Value::Float(f) => vec![flag, f.to_string()],
        toml::Value::Array(items) => {
            let parts: Result<Vec<String>> = items
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => Ok(s.clone()),
                    toml::Value::Integer(i) => Ok(i.to_string()),
                    toml::Value::Float(f) => Ok(f.to_string()),
                    other => bail!("{key}: unsupported list item {other}"),
                })
                .collect();
            vec![flag, parts?.join(",")]
        }
        other => bail!("{key}: unsupported value {other}"),
    })
}

/// Returns argv with the matching config table spliced in.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {}", path.display()))?;
    let table: toml::Table = text.parse().with_context(|| format!("parsing config {}", path.display()))?;
    let Some(pos) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(argv);
    };
    let name = argv[pos].to_string_lossy().to_string();
    let mut extra = Vec::new();
    if let Some(section) = table.get(&name) {
        let section = section.as_table().with_context(|| format!("[{name}] must be a table"))?;
        for (k, v) in section {
            extra.extend(value_args(k, v)?);
        }
    }
    let mut out: Vec<OsString> = argv[..=pos].to_vec();
    out.extend(extra.into_iter().map(OsString::from));
    out.extend(argv[pos + 1..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[plan]\nper_dim = 10\norder = [\"a\", \"b\"]\nverbose = true\n[score]\nbatch_size = 2\n").unwrap();
        let argv = os(&["booleval", "--config", p.to_str().unwrap(), "plan", "--per-dim", "5"]);
        let out: Vec<String> = expand(argv).unwrap().into_iter().map(|s| s.into_string().unwrap()).collect();
        assert_eq!(&out[3..], ["plan", "--order", "a,b", "--per-dim", "10", "--verbose", "--per-dim", "5"]);
    }

    #[test]
    fn no_config_is_identity() {
        let argv = os(&["booleval", "plan"]);
        assert_eq!(expand(argv.clone()).unwrap(), argv);
    }
}
