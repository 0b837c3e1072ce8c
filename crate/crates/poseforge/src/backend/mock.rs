//! Deterministic mock backend: canned text as a pure function of the request
//! id, shaped by the label prefix so downstream parsers accept it. Carries
//! instrumentation (call count, peak concurrency) and per-label fault
//! injection for contract tests.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use super::{BackendError, BackendReply, ChatBackend, CompletionRequest, FinishReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultKind {
    Transient,
    RateLimited,
    Auth,
    Provider,
}

#[derive(Debug)]
struct FaultRule {
    label_contains: String,
    kind: FaultKind,
    /// Failures left to inject; `None` fails forever.
    remaining: Option<u32>,
}

#[derive(Debug, Default)]
struct MockState {
    calls: AtomicUsize,
    in_flight: AtomicUsize,
    peak_in_flight: AtomicUsize,
    faults: Mutex<Vec<FaultRule>>,
}

/// Cloning shares the same state, so tests keep a probe handle after the
/// backend is boxed into a client.
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    state: Arc<MockState>,
    latency: Option<Duration>,
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sleep this long inside each call, so concurrency is observable.
    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = Some(latency);
        self
    }

    /// Fail requests whose label contains `label_contains`, `times` times
    /// (`None` = always), with the given error kind.
    pub fn inject_fault(&self, label_contains: &str, kind: FaultKind, times: Option<u32>) {
        self.state.faults.lock().expect("faults lock").push(FaultRule {
            label_contains: label_contains.to_string(),
            kind,
            remaining: times,
        });
    }

    pub fn calls(&self) -> usize {
        self.state.calls.load(Ordering::SeqCst)
    }

    pub fn peak_in_flight(&self) -> usize {
        self.state.peak_in_flight.load(Ordering::SeqCst)
    }

    fn check_faults(&self, label: &str) -> Option<BackendError> {
        let mut faults = self.state.faults.lock().expect("faults lock");
        for rule in faults.iter_mut() {
            if !label.contains(&rule.label_contains) {
                continue;
            }
            match &mut rule.remaining {
                None => {}
                Some(0) => continue,
                Some(n) => *n -= 1,
            }
            return Some(match rule.kind {
                FaultKind::Transient => BackendError::Transient("injected".into()),
                FaultKind::RateLimited => BackendError::RateLimited,
                FaultKind::Auth => BackendError::Auth("injected".into()),
                FaultKind::Provider => BackendError::Provider("injected".into()),
            });
        }
        None
    }
}

/// Deterministic canned text for a request: a pure function of the request
/// id, shaped by the label's kind prefix.
pub fn canned_text(request: &CompletionRequest) -> String {
    let short = &request.request_id[..8.min(request.request_id.len())];
    let kind = request.label.split('/').next().unwrap_or("");
    match kind {
        "conversation" => format!(
            "Question: What stands out about the people in scene {short}?\n\
             Answer: One person holds an active, balanced pose in the foreground while another watches from nearby, keeping a relaxed stance.\n\
             Question: How are the people positioned relative to each other?\n\
             Answer: The main figure is front and center in mid-motion, and the second person stands slightly behind them and off to one side."
        ),
        "detail" | "detailed_description" => format!(
            "In this scene, the people hold steady, deliberate poses. Variant {short}: the central figure leans into the action with knees bent and arms extended for balance, while a companion stands more upright nearby, weight settled evenly and attention fixed on the movement."
        ),
        "reasoning" | "complex_reasoning" => format!(
            "Question: Why might the main person in this scene be holding such a braced, dynamic stance?\n\
             Answer: The stance points to an activity that demands balance and quick adjustment. Variant {short}: bent knees lower the center of gravity, extended arms counterbalance shifts in weight, and the forward lean keeps momentum under control, all of which suit the action under way."
        ),
        "judge" => {
            let bytes = request.request_id.as_bytes();
            let reference = 1 + (bytes[0] % 10);
            let candidate = 1 + (bytes[1] % 10);
            format!("{reference} {candidate}\nDeterministic mock verdict {short}: scores derived from the request id.")
        }
        _ => format!("Mock completion {short}."),
    }
}

struct InFlightGuard<'a>(&'a MockState);

impl<'a> InFlightGuard<'a> {
    fn enter(state: &'a MockState) -> Self {
        let now = state.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        state.peak_in_flight.fetch_max(now, Ordering::SeqCst);
        Self(state)
    }
}

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        self.0.in_flight.fetch_sub(1, Ordering::SeqCst);
    }
}

impl ChatBackend for MockBackend {
    fn name(&self) -> &'static str {
        "mock"
    }

    fn complete_once(&self, request: &CompletionRequest) -> Result<BackendReply, BackendError> {
        let _guard = InFlightGuard::enter(&self.state);
        self.state.calls.fetch_add(1, Ordering::SeqCst);
        if let Some(latency) = self.latency {
            std::thread::sleep(latency);
        }
        if let Some(error) = self.check_faults(&request.label) {
            return Err(error);
        }
        Ok(BackendReply {
            text: canned_text(request),
            finish_reason: FinishReason::Stop,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use poseforge_core::prompt::Message;

    fn request(label: &str) -> CompletionRequest {
        CompletionRequest::new(label, vec![Message::user("ctx")], "m", 0.0, 16)
    }

    #[test]
    fn canned_text_is_pure_in_request_id() {
        let a = canned_text(&request("detail/1"));
        let b = canned_text(&request("detail/1"));
        assert_eq!(a, b);
        assert_ne!(a, canned_text(&request("detail/2")));
    }

    #[test]
    fn judge_scores_are_in_range() {
        for i in 0..50 {
            let text = canned_text(&request(&format!("judge/{i}-conversation")));
            let first = text.lines().next().unwrap();
            let scores: Vec<u8> = first
                .split_whitespace()
                .map(|t| t.parse().unwrap())
                .collect();
            assert_eq!(scores.len(), 2);
            assert!(scores.iter().all(|s| (1..=10).contains(s)), "{first}");
        }
    }

    #[test]
    fn generation_shapes_parse_downstream() {
        let conv = canned_text(&request("conversation/9"));
        assert!(poseforge_core::sample::parse_conversation(&conv).is_ok());
        let reasoning = canned_text(&request("reasoning/9"));
        assert!(poseforge_core::sample::parse_reasoning(&reasoning).is_ok());
        let detail = canned_text(&request("detail/9"));
        assert!(!poseforge_core::sample::contains_coordinate_tuple(&detail));
    }

    #[test]
    fn fault_counting_respects_times() {
        let mock = MockBackend::new();
        mock.inject_fault("detail/1", FaultKind::Transient, Some(1));
        assert!(mock.complete_once(&request("detail/1")).is_err());
        assert!(mock.complete_once(&request("detail/1")).is_ok());
        assert!(mock.complete_once(&request("detail/2")).is_ok());
        assert_eq!(mock.calls(), 3);
    }
}
