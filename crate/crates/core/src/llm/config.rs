use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LlmError;

/// Orchestrator and live-client settings, loaded from a TOML file.
///
/// ```toml
/// model = "o4-mini"
/// concept_num = 3
/// mech_num = 3
/// timeout_s = 60
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub model: String,
    /// Concepts requested from the abstraction prompt per Similar press.
    pub concept_num: usize,
    /// Sub-ideas generated for a selected concept.
    pub mech_num: usize,
    pub timeout_s: u64,
    pub endpoint: String,
    pub api_key_env: String,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            model: "o4-mini".into(),
            concept_num: 3,
            mech_num: 3,
            timeout_s: 60,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            api_key_env: "OPENAI_API_KEY".into(),
        }
    }
}

impl LlmConfig {
    pub fn from_toml(text: &str) -> Result<Self, LlmError> {
        let config: Self = toml::from_str(text).map_err(|e| LlmError::Config(e.to_string()))?;
        if config.concept_num < 1 || config.mech_num < 1 {
            return Err(LlmError::Config("concept_num and mech_num must be >= 1".into()));
        }
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| LlmError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        assert_eq!(LlmConfig::from_toml("").unwrap(), LlmConfig::default());
        let config = LlmConfig::from_toml("model = \"gpt-x\"\nconcept_num = 5\ntimeout_s = 5").unwrap();
        assert_eq!(config.model, "gpt-x");
        assert_eq!(config.concept_num, 5);
        assert_eq!(config.mech_num, 3);
        assert_eq!(config.timeout_s, 5);
        assert!(LlmConfig::from_toml("mech_num = 0").is_err());
        assert!(LlmConfig::from_toml("model = [").is_err());
    }
}
