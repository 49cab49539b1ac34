use serde::Serialize;

use crate::dsl::Pos;

use super::catalog::{Rule, Severity};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub severity: Severity,
    /// Class, object, association or transition concerned.
    pub subject: String,
    /// Name of the document the position refers to, when known.
    pub document: Option<String>,
    pub pos: Pos,
    pub message: String,
}

impl Violation {
    pub fn new(rule: Rule, subject: impl Into<String>, pos: Pos, message: impl Into<String>) -> Self {
        Violation {
            rule,
            severity: rule.severity(),
            subject: subject.into(),
            document: None,
            pos,
            message: message.into(),
        }
    }

    pub fn in_document(mut self, doc: &str) -> Self {
        self.document = Some(doc.to_string());
        self
    }

    fn key(&self) -> (Option<&str>, u32, u32, Rule, &str) {
        (self.document.as_deref(), self.pos.line, self.pos.col, self.rule, &self.subject)
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(d) = &self.document {
            write!(f, "{d}:")?;
        }
        write!(f, "{}: {} [{}] {}", self.pos, self.rule, self.subject, self.message)
    }
}

/// Sorts by document and source position, then rule; drops exact repeats.
pub fn normalize(vs: &mut Vec<Violation>) {
    vs.sort_by(|a, b| a.key().cmp(&b.key()).then_with(|| a.message.cmp(&b.message)));
    vs.dedup();
}
