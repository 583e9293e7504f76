use std::sync::atomic::{AtomicUsize, Ordering};

use super::{ChatBackend, ChatRequest, ChatResponse, LlmError};
use crate::reasoner::inductive_instruction;

#[derive(Debug, Clone)]
pub enum Matcher {
    Any,
    Contains(String),
    AllOf(Vec<String>),
}

impl Matcher {
    fn matches(&self, text: &str) -> bool {
        match self {
            Self::Any => true,
            Self::Contains(s) => text.contains(s.as_str()),
            Self::AllOf(all) => all.iter().all(|s| text.contains(s.as_str())),
        }
    }
}

/// Ordered rules over the user text; the first match answers.
pub struct ScriptedMock {
    rules: Vec<(Matcher, String)>,
    calls: AtomicUsize,
}

impl ScriptedMock {
    pub fn new(rules: Vec<(Matcher, String)>) -> Result<Self, LlmError> {
        if rules.is_empty() {
            return Err(LlmError::Config("scripted mock needs at least one rule".into()));
        }
        Ok(Self {
            rules,
            calls: AtomicUsize::new(0),
        })
    }

    /// `"*"` is a catch-all; any other key matches as a substring.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, LlmError> {
        Self::new(
            pairs
                .into_iter()
                .map(|(k, v)| {
                    let m = if k == "*" { Matcher::Any } else { Matcher::Contains(k.to_string()) };
                    (m, v.to_string())
                })
                .collect(),
        )
    }

    pub fn always(text: &str) -> Self {
        Self::new(vec![(Matcher::Any, text.to_string())]).expect("one rule")
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ChatBackend for ScriptedMock {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.rules
            .iter()
            .find(|(m, _)| m.matches(&req.user_text))
            .map(|(_, text)| ChatResponse::complete(text.clone()))
            .ok_or(LlmError::NoRuleMatched)
    }
}

/// Answers with the most frequent example label found in the prompt
/// (lines of the form `label: X`), ties going to the label seen first.
/// Prompts with no example labels get an unparseable reply.
#[derive(Default)]
pub struct MajorityLabelMock {
    calls: AtomicUsize,
}

impl MajorityLabelMock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn majority_label(prompt: &str) -> Option<String> {
        let mut counts: Vec<(String, usize)> = Vec::new();
        for line in prompt.lines() {
            if let Some(label) = line.strip_prefix("label: ") {
                let label = label.trim();
                match counts.iter_mut().find(|(l, _)| l == label) {
                    Some((_, c)) => *c += 1,
                    None => counts.push((label.to_string(), 1)),
                }
            }
        }
        let best = counts.iter().map(|(_, c)| *c).max()?;
        counts.into_iter().find(|(_, c)| *c == best).map(|(l, _)| l)
    }
}

impl ChatBackend for MajorityLabelMock {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let text = match Self::majority_label(&req.user_text) {
            Some(label) if req.user_text.trim_end().ends_with(inductive_instruction()) => {
                format!("1. Most of the examples share the outcome {label}.")
            }
            Some(label) => format!("Weighing the examples step by step, most of them point the same way.\nAnswer: {label}"),
            None => "There is not enough information to decide.".to_string(),
        };
        Ok(ChatResponse::complete(text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catch_all() {
        let m = ScriptedMock::from_pairs([("*", "TRUE")]).unwrap();
        assert_eq!(m.complete(&ChatRequest::new("anything")).unwrap().text, "TRUE");
        assert_eq!(m.calls(), 1);
    }

    #[test]
    fn first_rule_wins() {
        let m = ScriptedMock::from_pairs([("choose either TRUE or FALSE", "TRUE"), ("*", "other")]).unwrap();
        assert_eq!(m.complete(&ChatRequest::new("... choose either TRUE or FALSE.")).unwrap().text, "TRUE");
        assert_eq!(m.complete(&ChatRequest::new("node question")).unwrap().text, "other");
        let strict = ScriptedMock::from_pairs([("x", "y")]).unwrap();
        assert!(matches!(strict.complete(&ChatRequest::new("z")), Err(LlmError::NoRuleMatched)));
        assert!(ScriptedMock::new(vec![]).is_err());
    }

    #[test]
    fn majority_counts_label_lines() {
        let prompt = "example_1:\nnode: a\n- paper | q | label: B\nlabel: A\nexample_2:\nlabel: B\nlabel: A\nlabel: B\n";
        // A and B tie at 2 (neighbour line ignored); A appears first.
        assert_eq!(MajorityLabelMock::majority_label(prompt).as_deref(), Some("A"));
        let m = MajorityLabelMock::new();
        let reply = m.complete(&ChatRequest::new("label: C\nlabel: C\nlabel: D\nquestion")).unwrap();
        assert!(reply.text.ends_with("Answer: C"));
        let induce = m.complete(&ChatRequest::new(format!("label: C\n\n{}", inductive_instruction()))).unwrap();
        assert!(induce.text.contains("C"));
        assert!(!induce.text.contains("label: "));
        assert!(m.complete(&ChatRequest::new("no examples")).unwrap().text.contains("not enough"));
    }
}
