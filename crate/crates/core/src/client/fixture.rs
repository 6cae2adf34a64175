use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ClientError;

/// One recorded request/response exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub request: Value,
    pub status: u16,
    /// Response body exactly as received.
    pub response_body: String,
}

/// Record/replay store, serialized as `{"interactions": [...]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub interactions: Vec<Interaction>,
}

impl Fixture {
    pub fn load(path: &Path) -> Result<Self, ClientError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ClientError::Fixture(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ClientError::Fixture(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), ClientError> {
        let text = serde_json::to_string_pretty(self).expect("fixture serializes");
        std::fs::write(path, text + "\n").map_err(|e| ClientError::Fixture(format!("{}: {e}", path.display())))
    }

    /// First interaction whose request body equals `request`.
    pub fn lookup(&self, request: &Value) -> Option<&Interaction> {
        self.interactions.iter().find(|i| &i.request == request)
    }

    pub fn push(&mut self, interaction: Interaction) {
        self.interactions.push(interaction);
    }

    pub fn extend(&mut self, other: Fixture) {
        self.interactions.extend(other.interactions);
    }
}
