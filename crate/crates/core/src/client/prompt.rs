use serde::{Deserialize, Serialize};

use crate::route::RouteError;

pub const SYSTEM_PROMPT: &str = "You rewrite route instructions for a ground robot. \
Answer with one sentence per step, each exactly of the form \
\"Go straight to a <landmark>, then <turn left|turn right|stop>.\" \
Every step names one landmark. Only the final step ends with stop. \
Output the rewritten route and nothing else.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: "assistant".into(), content: content.into() }
    }
}

/// In-context examples shipped with the client. Hand-written for this project.
pub fn default_exemplars() -> Vec<(String, String)> {
    [
        (
            "Head down the path until you hit the mailbox and hang a right. Then the fountain is where you stop.",
            "Go straight to a mailbox, then turn right. Go straight to a fountain, then stop.",
        ),
        (
            "From here take a left at the bench, keep going past the lamp post, and the red door is the end.",
            "Go straight to a bench, then turn left. Go straight to a lamp post, then turn right. Go straight to a red door, then stop.",
        ),
        (
            "Just drive up to the orange cone and wait there.",
            "Go straight to a orange cone, then stop.",
        ),
    ]
    .into_iter()
    .map(|(u, c)| (u.to_string(), c.to_string()))
    .collect()
}

/// System prompt, then each exemplar as a user/assistant turn, then the URD.
pub(crate) fn build_messages(exemplars: &[(String, String)], urd: &str) -> Vec<ChatMessage> {
    let mut messages = Vec::with_capacity(2 * exemplars.len() + 2);
    messages.push(ChatMessage::system(SYSTEM_PROMPT));
    for (u, c) in exemplars {
        messages.push(ChatMessage::user(u.as_str()));
        messages.push(ChatMessage::assistant(c.as_str()));
    }
    messages.push(ChatMessage::user(urd));
    messages
}

pub(crate) fn reprompt(error: &RouteError) -> String {
    format!(
        "That route could not be parsed ({error}). Rewrite it using exactly the required sentence form."
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::route::parse_crd;

    #[test]
    fn exemplars_are_valid_routes() {
        for (_, crd) in default_exemplars() {
            parse_crd(&crd).unwrap();
        }
    }

    #[test]
    fn message_layout() {
        let ex = default_exemplars();
        let msgs = build_messages(&ex, "go to the box");
        assert_eq!(msgs.len(), 2 * ex.len() + 2);
        assert_eq!(msgs[0].role, "system");
        assert_eq!(msgs[1], ChatMessage::user(ex[0].0.as_str()));
        assert_eq!(msgs[2], ChatMessage::assistant(ex[0].1.as_str()));
        assert_eq!(msgs.last().unwrap(), &ChatMessage::user("go to the box"));
    }
}
