use std::time::Duration;

use anyhow::{bail, Context, Result};
use booleval_core::scorer::{BatchOptions, HttpProvider, LabelOracle, MockProvider, ProbabilityProvider, RetryPolicy};
use booleval_core::DimensionRegistry;

use crate::ProviderArgs;

pub fn build(args: &ProviderArgs, registry: &DimensionRegistry) -> Result<Box<dyn ProbabilityProvider<f64>>> {
    let Some(spec) = args.provider.as_deref() else {
        bail!("no provider: pass --provider or set BOOLEVAL_PROVIDER");
    };
    if spec == "mock" {
        return Ok(Box::new(MockProvider));
    }
    if let Some(path) = spec.strip_prefix("oracle:") {
        let oracle = LabelOracle::load(path, registry).with_context(|| format!("loading oracle answers {path}"))?;
        return Ok(Box::new(oracle));
    }
    if spec.starts_with("http://") || spec.starts_with("https://") {
        let retry = RetryPolicy { attempts: args.retries.max(1), ..RetryPolicy::default() };
        let http = HttpProvider::with_timeout(spec, Duration::from_secs(args.timeout)).with_retry(retry);
        // identity is best effort; scoring reports the failure if the server is down
        let http = match http.clone().probe_identity() {
            Ok(h) => h,
            Err(e) => {
                eprintln!("warning: {spec}/health: {e}");
                http
            }
        };
        return Ok(Box::new(http));
    }
    bail!("unknown provider \"{spec}\" (expected http://..., mock or oracle:<file>)")
}

pub fn batch_options(args: &ProviderArgs) -> Result<BatchOptions> {
    if args.batch_size == 0 || args.max_in_flight == 0 {
        bail!("--batch-size and --max-in-flight must be at least 1");
    }
    Ok(BatchOptions { batch_size: args.batch_size, max_in_flight: args.max_in_flight })
}
