use std::fmt;

use super::ast::Pos;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DslError {
    #[error("{pos}: syntax error: expected {}, found {found}", ExpectedList(.expected))]
    Syntax {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    #[error("{pos}: cannot resolve `{name}`: {message}")]
    Resolve {
        name: String,
        pos: Pos,
        message: String,
    },
}

impl DslError {
    pub fn syntax(pos: Pos, expected: &[&str], found: &str) -> Self {
        DslError::Syntax {
            pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.to_string(),
        }
    }

    pub fn resolve(name: &str, pos: Pos, message: impl Into<String>) -> Self {
        DslError::Resolve {
            name: name.to_string(),
            pos,
            message: message.into(),
        }
    }

    pub fn pos(&self) -> Pos {
        match self {
            DslError::Syntax { pos, .. } | DslError::Resolve { pos, .. } => *pos,
        }
    }
}

struct ExpectedList<'a>(&'a [String]);

impl fmt::Display for ExpectedList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            [] => write!(f, "nothing"),
            [one] => write!(f, "{one}"),
            many => {
                let (last, rest) = many.split_last().unwrap();
                write!(f, "one of {} or {last}", rest.join(", "))
            }
        }
    }
}
