use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use sha2::{Digest, Sha256};

use super::config::LlmConfig;
use super::LlmError;

/// A chat model that turns one prompt into one response.
pub trait LlmClient: Send + Sync {
    fn model_name(&self) -> &str;
    fn complete(&self, prompt: &str) -> Result<String, LlmError>;
}

/// Fixture key of a prompt: lowercase hex SHA-256 of its UTF-8 bytes.
pub fn prompt_key(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Deterministic test double backed by prompt-keyed fixtures.
///
/// Fixture directory layout, `KEY` being [`prompt_key`] of the prompt:
///
/// - `KEY.txt`: the response returned for every call with that prompt;
/// - `KEY.1.txt`, `KEY.2.txt`, …: responses for the first, second, … call;
///   the last one repeats once exhausted;
/// - `KEY.prompt.txt`: optional copy of the prompt, ignored on load.
///
/// The response to the n-th call with a given prompt is therefore a pure
/// function of (prompt, n).
#[derive(Debug, Default)]
pub struct ScriptedClient {
    model_name: String,
    responses: HashMap<String, Vec<String>>,
    calls: Mutex<HashMap<String, usize>>,
    dump_missing: Option<PathBuf>,
}

impl ScriptedClient {
    pub fn new() -> Self {
        Self {
            model_name: "scripted".into(),
            ..Self::default()
        }
    }

    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, LlmError> {
        let dir = dir.as_ref();
        let io = |e: std::io::Error| LlmError::Io(format!("{}: {e}", dir.display()));
        let mut numbered: HashMap<String, Vec<(usize, String)>> = HashMap::new();
        let mut single: HashMap<String, String> = HashMap::new();
        let mut entries: Vec<_> = fs::read_dir(dir).map_err(io)?.collect::<Result<_, _>>().map_err(io)?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let name = entry.file_name().to_string_lossy().into_owned();
            let Some(stem) = name.strip_suffix(".txt") else {
                continue;
            };
            let parts: Vec<&str> = stem.split('.').collect();
            let text = || fs::read_to_string(entry.path()).map_err(io);
            match parts.as_slice() {
                [key] => {
                    single.insert((*key).to_owned(), text()?);
                }
                [_, "prompt"] => {}
                [key, n] => {
                    let n: usize = n
                        .parse()
                        .map_err(|_| LlmError::Io(format!("bad fixture file name `{name}`")))?;
                    numbered.entry((*key).to_owned()).or_default().push((n, text()?));
                }
                _ => return Err(LlmError::Io(format!("bad fixture file name `{name}`"))),
            }
        }
        let mut client = Self::new();
        for (key, text) in single {
            client.responses.insert(key, vec![text]);
        }
        for (key, mut list) in numbered {
            list.sort_by_key(|(n, _)| *n);
            client.responses.insert(key, list.into_iter().map(|(_, t)| t).collect());
        }
        Ok(client)
    }

    /// Writes `KEY.prompt.txt` into `dir` whenever a prompt has no fixture,
    /// which makes authoring new fixtures a matter of filling in responses.
    pub fn dump_missing_to(mut self, dir: impl Into<PathBuf>) -> Self {
        self.dump_missing = Some(dir.into());
        self
    }

    /// Adds one more response for `prompt`.
    pub fn push_response(&mut self, prompt: &str, response: impl Into<String>) {
        self.responses
            .entry(prompt_key(prompt))
            .or_default()
            .push(response.into());
    }

    pub fn with_response(mut self, prompt: &str, response: impl Into<String>) -> Self {
        self.push_response(prompt, response);
        self
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

impl LlmClient for ScriptedClient {
    fn model_name(&self) -> &str {
        &self.model_name
    }

    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let key = prompt_key(prompt);
        let Some(list) = self.responses.get(&key) else {
            if let Some(dir) = &self.dump_missing {
                let _ = fs::write(dir.join(format!("{key}.prompt.txt")), prompt);
            }
            return Err(LlmError::MissingFixture(key));
        };
        let mut calls = self.calls.lock().expect("scripted client lock");
        let n = calls.entry(key).or_default();
        let response = list[(*n).min(list.len() - 1)].clone();
        *n += 1;
        Ok(response)
    }
}

/// Client backed by a closure; handy for rule-based doubles in tests.
pub struct FnClient<F>(pub F);

impl<F> LlmClient for FnClient<F>
where
    F: Fn(&str) -> Result<String, LlmError> + Send + Sync,
{
    fn model_name(&self) -> &str {
        "fn"
    }

    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        (self.0)(prompt)
    }
}

/// OpenAI-compatible chat-completions client.
pub struct LiveClient {
    agent: ureq::Agent,
    endpoint: String,
    api_key: String,
    model: String,
}

impl LiveClient {
    /// Reads the API key from the environment variable named in `config`.
    pub fn from_config(config: &LlmConfig) -> Result<Self, LlmError> {
        let api_key = std::env::var(&config.api_key_env)
            .map_err(|_| LlmError::Config(format!("environment variable {} is not set", config.api_key_env)))?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_s)))
            .build()
            .into();
        Ok(Self {
            agent,
            endpoint: config.endpoint.clone(),
            api_key,
            model: config.model.clone(),
        })
    }
}

impl LlmClient for LiveClient {
    fn model_name(&self) -> &str {
        &self.model
    }

    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut response = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(&body)
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => LlmError::LlmTimeout,
                other => LlmError::Transport(other.to_string()),
            })?;
        let value: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| LlmError::Transport(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| LlmError::Transport("response has no message content".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_sequence_then_repeat() {
        let client = ScriptedClient::new()
            .with_response("p", "first")
            .with_response("p", "second");
        assert_eq!(client.complete("p").unwrap(), "first");
        assert_eq!(client.complete("p").unwrap(), "second");
        assert_eq!(client.complete("p").unwrap(), "second");
        assert!(matches!(client.complete("q"), Err(LlmError::MissingFixture(_))));
    }

    #[test]
    fn load_fixture_directory() {
        let dir = tempfile::tempdir().unwrap();
        let key = prompt_key("hello");
        fs::write(dir.path().join(format!("{key}.txt")), "world").unwrap();
        fs::write(dir.path().join(format!("{key}.prompt.txt")), "hello").unwrap();
        let other = prompt_key("again");
        fs::write(dir.path().join(format!("{other}.2.txt")), "b").unwrap();
        fs::write(dir.path().join(format!("{other}.1.txt")), "a").unwrap();
        let client = ScriptedClient::load_dir(dir.path()).unwrap();
        assert_eq!(client.complete("hello").unwrap(), "world");
        assert_eq!(client.complete("hello").unwrap(), "world");
        assert_eq!(client.complete("again").unwrap(), "a");
        assert_eq!(client.complete("again").unwrap(), "b");
    }

    #[test]
    fn missing_prompts_are_dumped() {
        let dir = tempfile::tempdir().unwrap();
        let client = ScriptedClient::new().dump_missing_to(dir.path());
        let _ = client.complete("new prompt");
        let dumped = dir.path().join(format!("{}.prompt.txt", prompt_key("new prompt")));
        assert_eq!(fs::read_to_string(dumped).unwrap(), "new prompt");
    }
}
