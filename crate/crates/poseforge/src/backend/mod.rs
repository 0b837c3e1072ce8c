//! Chat-completion execution: request identity, retries with exponential
//! backoff, a per-minute rate budget, bounded-concurrency batching, and a
//! content-addressed disk cache.

mod cache;
mod live;
mod mock;

pub use cache::DiskCache;
pub use live::LiveBackend;
pub use mock::{FaultKind, MockBackend};

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use poseforge_core::prompt::Message;
use serde::{Deserialize, Serialize};

use crate::files::sha256_hex;

#[derive(Debug, Clone, thiserror::Error)]
pub enum BackendError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited by provider")]
    RateLimited,
    #[error("transient failure: {0}")]
    Transient(String),
    #[error("provider rejected request: {0}")]
    Provider(String),
    #[error("retries exhausted after {attempts} attempts: {last}")]
    ExhaustedRetries { attempts: u32, last: String },
    #[error("cache error: {0}")]
    Cache(String),
}

impl BackendError {
    /// Transient failures and provider rate limits are retried; auth and
    /// semantic 4xx failures are not.
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::RateLimited | BackendError::Transient(_))
    }
}

/// One chat-completion request. `request_id` is a stable content hash of the
/// label (kind + image or item id), the prompt bytes, and the model name, so
/// identical inputs always map to the same cache entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub request_id: String,
    /// `<kind>/<image_id>` for generation, `judge/<item_id>` for judging.
    pub label: String,
    pub messages: Vec<Message>,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl CompletionRequest {
    pub fn new(
        label: impl Into<String>,
        messages: Vec<Message>,
        model_name: impl Into<String>,
        temperature: f64,
        max_output_tokens: u32,
    ) -> Self {
        let label = label.into();
        let model_name = model_name.into();
        let request_id = request_id(&label, &messages, &model_name);
        Self {
            request_id,
            label,
            messages,
            model_name,
            temperature,
            max_output_tokens,
        }
    }
}

/// Content hash for a request: label, prompt bytes, model name.
pub fn request_id(label: &str, messages: &[Message], model_name: &str) -> String {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(label.as_bytes());
    bytes.push(0);
    bytes.extend_from_slice(model_name.as_bytes());
    bytes.push(0);
    for message in messages {
        let role = match message.role {
            poseforge_core::prompt::Role::System => "system",
            poseforge_core::prompt::Role::User => "user",
            poseforge_core::prompt::Role::Assistant => "assistant",
        };
        bytes.extend_from_slice(role.as_bytes());
        bytes.push(0);
        bytes.extend_from_slice(message.content.as_bytes());
        bytes.push(0);
    }
    sha256_hex(&bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    Stop,
    Length,
    Error,
}

/// A completed request: the text, how it finished, how many attempts it
/// took, and whether it came from the cache.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub request_id: String,
    pub text: String,
    pub finish_reason: FinishReason,
    pub attempt_count: u32,
    pub from_cache: bool,
}

/// One raw reply from a backend attempt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackendReply {
    pub text: String,
    pub finish_reason: FinishReason,
}

/// A single-attempt chat-completion provider. Retries, caching, and
/// concurrency live in [`ChatClient`].
pub trait ChatBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn complete_once(&self, request: &CompletionRequest) -> Result<BackendReply, BackendError>;
}

/// Exponential backoff schedule.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub factor: u32,
    pub max_delay: Duration,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 5,
            base_delay: Duration::from_secs(1),
            factor: 2,
            max_delay: Duration::from_secs(30),
            jitter: true,
        }
    }
}

impl RetryPolicy {
    fn delay_for(&self, attempt: u32) -> Duration {
        let exp = self.factor.saturating_pow(attempt.saturating_sub(1));
        let mut delay = self
            .base_delay
            .saturating_mul(exp)
            .min(self.max_delay);
        if self.jitter {
            // Up to +25%, from the thread-local RNG; determinism of outputs
            // never depends on retry timing.
            let extra = rand::Rng::gen_range(&mut rand::thread_rng(), 0.0..0.25);
            delay = delay.mul_f64(1.0 + extra);
        }
        delay
    }
}

/// Sliding-window request budget shared by every worker.
#[derive(Debug)]
pub struct RateLimiter {
    budget: Option<u32>,
    window: Duration,
    stamps: Mutex<Vec<Instant>>,
}

impl RateLimiter {
    pub fn per_minute(budget: Option<u32>) -> Self {
        Self::with_window(budget, Duration::from_secs(60))
    }

    pub fn with_window(budget: Option<u32>, window: Duration) -> Self {
        Self {
            budget,
            window,
            stamps: Mutex::new(Vec::new()),
        }
    }

    /// Block until a request slot is available, then claim it.
    pub fn acquire(&self) {
        let Some(budget) = self.budget else { return };
        loop {
            let wait = {
                let mut stamps = self.stamps.lock().expect("limiter lock");
                let now = Instant::now();
                stamps.retain(|t| now.duration_since(*t) < self.window);
                if (stamps.len() as u32) < budget {
                    stamps.push(now);
                    return;
                }
                let oldest = *stamps.iter().min().expect("budget > 0 implies nonempty");
                self.window.saturating_sub(now.duration_since(oldest))
            };
            std::thread::sleep(wait.max(Duration::from_millis(1)));
        }
    }
}

/// Aggregate outcome of a batch: results and failures, both keyed by
/// request id. Per-request failures never abort the batch.
#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub results: BTreeMap<String, CompletionResult>,
    pub failures: BTreeMap<String, BackendError>,
}

/// Executes requests against a backend with caching, retries, rate limiting,
/// and bounded-concurrency batching.
pub struct ChatClient {
    backend: Box<dyn ChatBackend>,
    cache: DiskCache,
    retry: RetryPolicy,
    limiter: RateLimiter,
}

impl ChatClient {
    pub fn new(
        backend: Box<dyn ChatBackend>,
        cache: DiskCache,
        retry: RetryPolicy,
        limiter: RateLimiter,
    ) -> Self {
        Self { backend, cache, retry, limiter }
    }

    pub fn backend_name(&self) -> &'static str {
        self.backend.name()
    }

    /// Execute one request: cache hit short-circuits; otherwise attempt with
    /// exponential backoff on retryable failures, then persist atomically.
    pub fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        if let Some(entry) = self.cache.get(&request.request_id)? {
            return Ok(CompletionResult {
                request_id: request.request_id.clone(),
                text: entry.response.text,
                finish_reason: entry.response.finish_reason,
                attempt_count: 0,
                from_cache: true,
            });
        }

        let mut last_error: Option<BackendError> = None;
        for attempt in 1..=self.retry.max_attempts {
            self.limiter.acquire();
            match self.backend.complete_once(request) {
                Ok(reply) => {
                    self.cache.put(request, &reply)?;
                    return Ok(CompletionResult {
                        request_id: request.request_id.clone(),
                        text: reply.text,
                        finish_reason: reply.finish_reason,
                        attempt_count: attempt,
                        from_cache: false,
                    });
                }
                Err(error) if error.is_retryable() => {
                    last_error = Some(error);
                    if attempt < self.retry.max_attempts {
                        std::thread::sleep(self.retry.delay_for(attempt));
                    }
                }
                Err(error) => return Err(error),
            }
        }
        Err(BackendError::ExhaustedRetries {
            attempts: self.retry.max_attempts,
            last: last_error.map(|e| e.to_string()).unwrap_or_default(),
        })
    }

    /// Execute a batch with at most `max_in_flight` requests outstanding.
    /// Results are keyed by request id regardless of completion order.
    pub fn complete_batch(
        &self,
        requests: &[CompletionRequest],
        max_in_flight: usize,
    ) -> BatchOutcome {
        assert!(max_in_flight >= 1, "max_in_flight must be >= 1");
        let queue: Mutex<std::collections::VecDeque<&CompletionRequest>> =
            Mutex::new(requests.iter().collect());
        let collected: Mutex<Vec<(String, Result<CompletionResult, BackendError>)>> =
            Mutex::new(Vec::with_capacity(requests.len()));

        let workers = max_in_flight.min(requests.len().max(1));
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let request = {
                        let mut queue = queue.lock().expect("queue lock");
                        queue.pop_front()
                    };
                    let Some(request) = request else { break };
                    let outcome = self.complete(request);
                    collected
                        .lock()
                        .expect("results lock")
                        .push((request.request_id.clone(), outcome));
                });
            }
        });

        let mut outcome = BatchOutcome::default();
        for (id, result) in collected.into_inner().expect("results lock") {
            match result {
                Ok(result) => {
                    outcome.results.insert(id, result);
                }
                Err(error) => {
                    outcome.failures.insert(id, error);
                }
            }
        }
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use poseforge_core::prompt::Message;

    fn request(label: &str, content: &str) -> CompletionRequest {
        CompletionRequest::new(
            label,
            vec![Message::system("sys"), Message::user(content)],
            "mock-model",
            0.0,
            64,
        )
    }

    /// Client plus a probe handle into the mock's instrumentation.
    fn client(backend: MockBackend, cache_dir: &std::path::Path) -> (ChatClient, MockBackend) {
        let probe = backend.clone();
        let client = ChatClient::new(
            Box::new(backend),
            DiskCache::new(cache_dir),
            RetryPolicy {
                max_attempts: 3,
                base_delay: Duration::from_millis(1),
                factor: 2,
                max_delay: Duration::from_millis(4),
                jitter: false,
            },
            RateLimiter::per_minute(None),
        );
        (client, probe)
    }

    #[test]
    fn request_id_is_stable_content_hash() {
        let a = request("detail/1", "ctx");
        let b = request("detail/1", "ctx");
        assert_eq!(a.request_id, b.request_id);
        assert_ne!(a.request_id, request("detail/2", "ctx").request_id);
        assert_ne!(a.request_id, request("detail/1", "other").request_id);
    }

    #[test]
    fn second_identical_call_hits_cache() {
        let dir = tempfile::tempdir().unwrap();
        let (client, _) = client(MockBackend::new(), dir.path());
        let req = request("detail/1", "ctx");
        let first = client.complete(&req).unwrap();
        assert!(!first.from_cache);
        assert_eq!(first.attempt_count, 1);
        let second = client.complete(&req).unwrap();
        assert!(second.from_cache);
        assert_eq!(second.text, first.text);
    }

    #[test]
    fn transient_failures_retry_to_success() {
        let dir = tempfile::tempdir().unwrap();
        let backend = MockBackend::new();
        backend.inject_fault("detail/1", FaultKind::Transient, Some(2));
        let (client, _) = client(backend, dir.path());
        let result = client.complete(&request("detail/1", "ctx")).unwrap();
        assert_eq!(result.attempt_count, 3);
        assert_eq!(result.finish_reason, FinishReason::Stop);
        assert!(!result.from_cache);
    }

    #[test]
    fn permanent_transient_exhausts_retries() {
        let dir = tempfile::tempdir().unwrap();
        let backend = MockBackend::new();
        backend.inject_fault("detail/1", FaultKind::Transient, None);
        let (client, _) = client(backend, dir.path());
        let err = client.complete(&request("detail/1", "ctx")).unwrap_err();
        assert!(matches!(err, BackendError::ExhaustedRetries { attempts: 3, .. }));
    }

    #[test]
    fn auth_errors_do_not_retry() {
        let dir = tempfile::tempdir().unwrap();
        let backend = MockBackend::new();
        backend.inject_fault("detail/1", FaultKind::Auth, None);
        let (client, probe) = client(backend, dir.path());
        let err = client.complete(&request("detail/1", "ctx")).unwrap_err();
        assert!(matches!(err, BackendError::Auth(_)));
        assert_eq!(probe.calls(), 1);
    }

    #[test]
    fn batch_returns_all_results_keyed_by_id() {
        let dir = tempfile::tempdir().unwrap();
        let (client, _) = client(MockBackend::new().with_latency(Duration::from_millis(3)), dir.path());
        let requests: Vec<CompletionRequest> =
            (0..10).map(|i| request(&format!("detail/{i}"), "ctx")).collect();
        let outcome = client.complete_batch(&requests, 3);
        assert_eq!(outcome.results.len(), 10);
        assert!(outcome.failures.is_empty());
        for req in &requests {
            assert!(outcome.results.contains_key(&req.request_id));
        }
    }

    #[test]
    fn batch_concurrency_never_exceeds_limit() {
        let dir = tempfile::tempdir().unwrap();
        let backend = MockBackend::new().with_latency(Duration::from_millis(5));
        let (client, probe) = client(backend, dir.path());
        let requests: Vec<CompletionRequest> =
            (0..12).map(|i| request(&format!("detail/{i}"), "ctx")).collect();
        let outcome = client.complete_batch(&requests, 3);
        assert_eq!(outcome.results.len(), 12);
        assert!(probe.peak_in_flight() <= 3, "peak {}", probe.peak_in_flight());
        assert!(probe.peak_in_flight() >= 2, "latency should force overlap");
    }

    #[test]
    fn empty_batch_is_empty_outcome() {
        let dir = tempfile::tempdir().unwrap();
        let (client, _) = client(MockBackend::new(), dir.path());
        let outcome = client.complete_batch(&[], 4);
        assert!(outcome.results.is_empty());
        assert!(outcome.failures.is_empty());
    }

    #[test]
    fn poisoned_request_fails_without_aborting_batch() {
        let dir = tempfile::tempdir().unwrap();
        let backend = MockBackend::new();
        backend.inject_fault("detail/3", FaultKind::Transient, None);
        let (client, _) = client(backend, dir.path());
        let requests: Vec<CompletionRequest> =
            (0..10).map(|i| request(&format!("detail/{i}"), "ctx")).collect();
        let outcome = client.complete_batch(&requests, 4);
        assert_eq!(outcome.results.len(), 9);
        assert_eq!(outcome.failures.len(), 1);
        let failed_id = &requests[3].request_id;
        assert!(matches!(
            outcome.failures.get(failed_id),
            Some(BackendError::ExhaustedRetries { .. })
        ));
    }

    #[test]
    fn warm_cache_rerun_makes_zero_backend_calls() {
        let dir = tempfile::tempdir().unwrap();
        let requests: Vec<CompletionRequest> =
            (0..6).map(|i| request(&format!("reasoning/{i}"), "ctx")).collect();
        {
            let (client, probe) = client(MockBackend::new(), dir.path());
            client.complete_batch(&requests, 2);
            assert_eq!(probe.calls(), 6);
        }
        let (client, probe) = client(MockBackend::new(), dir.path());
        let outcome = client.complete_batch(&requests, 2);
        assert_eq!(outcome.results.len(), 6);
        assert_eq!(probe.calls(), 0);
        assert!(outcome.results.values().all(|r| r.from_cache));
    }

    #[test]
    fn rate_limiter_enforces_window_budget() {
        let limiter = RateLimiter::with_window(Some(2), Duration::from_millis(50));
        let start = Instant::now();
        for _ in 0..4 {
            limiter.acquire();
        }
        // Four acquisitions at two per 50ms window need at least one full
        // window of waiting.
        assert!(start.elapsed() >= Duration::from_millis(45), "{:?}", start.elapsed());
    }
}
