//! Blocking chat-completion client.
//!
//! Speaks the OpenAI-compatible `POST {base_url}/chat/completions` shape.
//! The API key is read from a named environment variable only, never from
//! files. Transport failures and 5xx responses are retried with exponential
//! backoff; other non-2xx statuses fail immediately.

use std::time::Duration;

use serde_json::{json, Value};

/// Connection settings for the planner LLM.
#[derive(Debug, Clone)]
pub struct LlmConfig {
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env_var: String,
    pub timeout_seconds: u64,
    pub max_retries: u32,
    pub temperature: f64,
    /// Base delay for exponential backoff between retries.
    pub backoff_ms: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            model_name: "gpt-4".into(),
            api_key_env_var: "TIDY_LLM_API_KEY".into(),
            timeout_seconds: 60,
            max_retries: 2,
            temperature: 0.0,
            backoff_ms: 1000,
        }
    }
}

/// A completion plus how many retries it took.
#[derive(Debug, Clone, PartialEq)]
pub struct LlmResponse {
    pub text: String,
    pub retries: u32,
}

/// Errors from the LLM client.
#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("llm config error: {0}")]
    Config(String),
    #[error("llm unavailable: {0}")]
    Unavailable(String),
    #[error("llm error: status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("llm protocol error: {0}")]
    Protocol(String),
}

/// Fixed system role for every planner request.
pub const SYSTEM_ROLE: &str = "You are a meticulous tidying planner for a robot arm. \
Follow the requested output format exactly.";

enum Attempt {
    Success(String),
    RetryTransport(String),
    RetryStatus(u16, String),
}

/// Request a single completion. Retries transport errors and 5xx statuses up
/// to `max_retries` times with exponential backoff.
pub fn llm_complete(config: &LlmConfig, prompt: &str) -> Result<LlmResponse, LlmError> {
    let api_key = std::env::var(&config.api_key_env_var).map_err(|_| {
        LlmError::Config(format!(
            "API key environment variable `{}` is not set",
            config.api_key_env_var
        ))
    })?;
    let url = format!("{}/chat/completions", config.base_url.trim_end_matches('/'));
    let body = json!({
        "model": config.model_name,
        "messages": [
            {"role": "system", "content": SYSTEM_ROLE},
            {"role": "user", "content": prompt},
        ],
        "temperature": config.temperature,
    })
    .to_string();

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(config.timeout_seconds)))
        .http_status_as_error(false)
        .build()
        .into();

    let attempts = config.max_retries + 1;
    let mut last_retryable = None;
    for attempt in 0..attempts {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(config.backoff_ms << (attempt - 1)));
        }
        match send_once(&agent, &url, &api_key, &body)? {
            Attempt::Success(text) => return Ok(LlmResponse { text, retries: attempt }),
            Attempt::RetryTransport(reason) => last_retryable = Some(Err(reason)),
            Attempt::RetryStatus(status, body) => last_retryable = Some(Ok((status, body))),
        }
    }
    match last_retryable.expect("at least one attempt ran") {
        Ok((status, body)) => Err(LlmError::Status { status, body }),
        Err(reason) => Err(LlmError::Unavailable(format!(
            "{reason} (after {} retries)",
            config.max_retries
        ))),
    }
}

fn send_once(
    agent: &ureq::Agent,
    url: &str,
    api_key: &str,
    body: &str,
) -> Result<Attempt, LlmError> {
    let mut response = match agent
        .post(url)
        .header("Authorization", &format!("Bearer {api_key}"))
        .header("Content-Type", "application/json")
        .send(body)
    {
        Ok(response) => response,
        Err(e) => return Ok(Attempt::RetryTransport(e.to_string())),
    };
    let status = response.status().as_u16();
    let text = match response.body_mut().read_to_string() {
        Ok(text) => text,
        Err(e) => return Ok(Attempt::RetryTransport(format!("reading body: {e}"))),
    };
    if (500..600).contains(&status) {
        return Ok(Attempt::RetryStatus(status, text));
    }
    if !(200..300).contains(&status) {
        return Err(LlmError::Status { status, body: text });
    }
    let parsed: Value = serde_json::from_str(&text)
        .map_err(|e| LlmError::Protocol(format!("completion body is not JSON: {e}")))?;
    let content = parsed["choices"][0]["message"]["content"]
        .as_str()
        .ok_or_else(|| LlmError::Protocol("missing choices[0].message.content".into()))?;
    Ok(Attempt::Success(content.to_string()))
}


#[cfg(test)]
mod tests {
    use super::test_server::{completion_json, Fixture};
    use super::*;

    fn test_config(base_url: &str, key_var: &str) -> LlmConfig {
        LlmConfig {
            base_url: base_url.to_string(),
            api_key_env_var: key_var.to_string(),
            timeout_seconds: 5,
            backoff_ms: 10,
            ..LlmConfig::default()
        }
    }

    #[test]
    fn fixed_fixture_text_is_returned_verbatim() {
        let fixture = Fixture::serve(vec![(200, completion_json("hello plan"))]);
        std::env::set_var("TIDY_TEST_KEY_A", "k");
        let response =
            llm_complete(&test_config(&fixture.base_url, "TIDY_TEST_KEY_A"), "prompt").unwrap();
        assert_eq!(response.text, "hello plan");
        assert_eq!(response.retries, 0);
    }

    #[test]
    fn two_500s_then_200_succeeds_with_two_retries() {
        let fixture = Fixture::serve(vec![
            (500, "{}".into()),
            (500, "{}".into()),
            (200, completion_json("eventually")),
        ]);
        std::env::set_var("TIDY_TEST_KEY_B", "k");
        let response =
            llm_complete(&test_config(&fixture.base_url, "TIDY_TEST_KEY_B"), "prompt").unwrap();
        assert_eq!(response.text, "eventually");
        assert_eq!(response.retries, 2);
        assert_eq!(fixture.hit_count(), 3);
    }

    #[test]
    fn missing_key_fails_without_any_network_call() {
        let fixture = Fixture::serve(vec![]);
        let err = llm_complete(
            &test_config(&fixture.base_url, "TIDY_TEST_KEY_UNSET_XYZ"),
            "prompt",
        )
        .unwrap_err();
        assert!(matches!(err, LlmError::Config(_)));
        assert_eq!(fixture.hit_count(), 0);
    }

    #[test]
    fn client_error_status_fails_immediately() {
        let fixture = Fixture::serve(vec![(401, "{\"error\":\"bad key\"}".into())]);
        std::env::set_var("TIDY_TEST_KEY_C", "k");
        let err = llm_complete(&test_config(&fixture.base_url, "TIDY_TEST_KEY_C"), "prompt")
            .unwrap_err();
        match err {
            LlmError::Status { status, .. } => assert_eq!(status, 401),
            other => panic!("unexpected error {other:?}"),
        }
        assert_eq!(fixture.hit_count(), 1);
    }

    #[test]
    fn exhausted_retries_on_transport_report_unavailable() {
        // Nothing listens on this port; connection is refused every attempt.
        std::env::set_var("TIDY_TEST_KEY_D", "k");
        let err = llm_complete(&test_config("http://127.0.0.1:1", "TIDY_TEST_KEY_D"), "prompt")
            .unwrap_err();
        assert!(matches!(err, LlmError::Unavailable(_)));
    }

    #[test]
    fn malformed_completion_body_is_a_protocol_error() {
        let fixture = Fixture::serve(vec![(200, "{\"choices\":[]}".into())]);
        std::env::set_var("TIDY_TEST_KEY_E", "k");
        let err = llm_complete(&test_config(&fixture.base_url, "TIDY_TEST_KEY_E"), "prompt")
            .unwrap_err();
        assert!(matches!(err, LlmError::Protocol(_)));
    }
}
