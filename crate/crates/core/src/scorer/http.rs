use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::num::Real;

use super::{ProbabilityPair, ProbabilityProvider, ProviderError};

/// Attempt count and exponential backoff between attempts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { attempts: 3, initial_backoff: Duration::from_millis(500), multiplier: 2.0 }
    }
}

impl RetryPolicy {
    /// Delay before retry `n` (1-based).
    pub fn backoff(&self, n: u32) -> Duration {
        self.initial_backoff.mul_f64(self.multiplier.powi(n.saturating_sub(1) as i32))
    }

    pub fn none() -> Self {
        Self { attempts: 1, ..Self::default() }
    }
}

#[derive(Serialize)]
struct Request<'a> {
    inputs: &'a [String],
}

#[derive(Deserialize)]
struct WirePair {
    yes: f64,
    no: f64,
}

#[derive(Deserialize)]
struct Response {
    pairs: Vec<WirePair>,
}

/// Client for `POST {endpoint}/probabilities`.
///
/// Request `{"inputs": [..]}`, response `{"pairs": [{"yes", "no"}, ..]}`.
/// Non-200 statuses, bad bodies and length mismatches are retried.
#[derive(Debug, Clone)]
pub struct HttpProvider {
    endpoint: String,
    agent: ureq::Agent,
    retry: RetryPolicy,
    identity: Option<String>,
}

impl HttpProvider {
    pub fn new(endpoint: &str) -> Self {
        Self::with_timeout(endpoint, Duration::from_secs(120))
    }

    pub fn with_timeout(endpoint: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            agent,
            retry: RetryPolicy::default(),
            identity: None,
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// `GET {endpoint}/health` as raw JSON.
    pub fn health(&self) -> Result<serde_json::Value, ProviderError> {
        let mut resp = self
            .agent
            .get(format!("{}/health", self.endpoint))
            .call()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        if resp.status() != 200 {
            return Err(ProviderError::Status(resp.status().as_u16()));
        }
        resp.body_mut().read_json().map_err(|e| ProviderError::Malformed(e.to_string()))
    }

    /// Folds the checkpoint id and answer-token policy from `/health`
    /// into the provider name.
    pub fn probe_identity(mut self) -> Result<Self, ProviderError> {
        let h = self.health()?;
        let field = |k: &str| h.get(k).map(|v| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string()));
        let parts: Vec<String> = [("checkpoint", field("checkpoint")), ("policy", field("policy"))]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| format!("{k}={v}")))
            .collect();
        self.identity = Some(parts.join(","));
        Ok(self)
    }

    fn attempt(&self, inputs: &[String]) -> Result<Vec<WirePair>, ProviderError> {
        let mut resp = self
            .agent
            .post(format!("{}/probabilities", self.endpoint))
            .send_json(Request { inputs })
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        if resp.status() != 200 {
            return Err(ProviderError::Status(resp.status().as_u16()));
        }
        let body: Response = resp.body_mut().read_json().map_err(|e| ProviderError::Malformed(e.to_string()))?;
        if body.pairs.len() != inputs.len() {
            return Err(ProviderError::LengthMismatch { expected: inputs.len(), got: body.pairs.len() });
        }
        Ok(body.pairs)
    }
}

impl<T: Real> ProbabilityProvider<T> for HttpProvider {
    fn name(&self) -> String {
        match &self.identity {
            Some(id) if !id.is_empty() => format!("http:{} ({id})", self.endpoint),
            _ => format!("http:{}", self.endpoint),
        }
    }

    fn probabilities(&self, inputs: &[String]) -> Result<Vec<ProbabilityPair<T>>, ProviderError> {
        let attempts = self.retry.attempts.max(1);
        let mut last = None;
        for n in 0..attempts {
            if n > 0 {
                std::thread::sleep(self.retry.backoff(n));
            }
            match self.attempt(inputs) {
                Ok(pairs) => {
                    return Ok(pairs.into_iter().map(|p| ProbabilityPair { p_yes: T::of(p.yes), p_no: T::of(p.no) }).collect())
                }
                Err(e) => last = Some(e),
            }
        }
        Err(ProviderError::Exhausted { attempts, last: Box::new(last.expect("at least one attempt")) })
    }
}
