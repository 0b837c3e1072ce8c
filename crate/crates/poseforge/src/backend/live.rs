//! Live HTTPS chat-completion backend.
//!
//! Wire format: POST `{model, messages: [{role, content}], temperature,
//! max_tokens}`; reply text is read from `choices[0].message.content`.
//! Credential comes from `POSEFORGE_API_KEY`; the endpoint URL from the
//! `--endpoint` flag or `POSEFORGE_ENDPOINT`.

use std::time::Duration;

use serde::Deserialize;

use super::{BackendError, BackendReply, ChatBackend, CompletionRequest, FinishReason};

pub const API_KEY_ENV: &str = "POSEFORGE_API_KEY";
pub const ENDPOINT_ENV: &str = "POSEFORGE_ENDPOINT";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";

pub struct LiveBackend {
    endpoint: String,
    api_key: String,
    client: reqwest::blocking::Client,
}

impl LiveBackend {
    /// Build from flags + environment. The endpoint resolution order is:
    /// explicit flag, `POSEFORGE_ENDPOINT`, default.
    pub fn from_env(endpoint_flag: Option<String>) -> Result<Self, BackendError> {
        let api_key = std::env::var(API_KEY_ENV)
            .map_err(|_| BackendError::Auth(format!("{API_KEY_ENV} is not set")))?;
        let endpoint = endpoint_flag
            .or_else(|| std::env::var(ENDPOINT_ENV).ok())
            .unwrap_or_else(|| DEFAULT_ENDPOINT.to_string());
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| BackendError::Transient(e.to_string()))?;
        Ok(Self { endpoint, api_key, client })
    }
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ChoiceMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

impl ChatBackend for LiveBackend {
    fn name(&self) -> &'static str {
        "live"
    }

    fn complete_once(&self, request: &CompletionRequest) -> Result<BackendReply, BackendError> {
        let body = serde_json::json!({
            "model": request.model_name,
            "messages": request.messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        });
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| BackendError::Transient(e.to_string()))?;

        let status = response.status();
        if !status.is_success() {
            let text = response.text().unwrap_or_default();
            let detail = format!("{status}: {}", text.chars().take(300).collect::<String>());
            return Err(match status.as_u16() {
                401 | 403 => BackendError::Auth(detail),
                429 => BackendError::RateLimited,
                408 | 500..=599 => BackendError::Transient(detail),
                _ => BackendError::Provider(detail),
            });
        }

        let parsed: ChatResponse = response
            .json()
            .map_err(|e| BackendError::Provider(format!("unreadable response body: {e}")))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::Provider("response carries no choices".into()))?;
        let text = choice.message.content.unwrap_or_default();
        if text.is_empty() {
            return Err(BackendError::Provider("empty completion text".into()));
        }
        let finish_reason = match choice.finish_reason.as_deref() {
            Some("length") => FinishReason::Length,
            _ => FinishReason::Stop,
        };
        Ok(BackendReply { text, finish_reason })
    }
}
