//! The rule catalog. Identifiers are stable; descriptions are informative.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    S001,
    S002,
    S003,
    S004,
    S005,
    S006,
    D001,
    D002,
    D003,
    D004,
    D005,
    C001,
    C002,
    C003,
    R001,
    R002,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    /// The check ran out of budget before reaching a verdict.
    Inconclusive,
}

impl Rule {
    pub const ALL: [Rule; 16] = [
        Rule::S001,
        Rule::S002,
        Rule::S003,
        Rule::S004,
        Rule::S005,
        Rule::S006,
        Rule::D001,
        Rule::D002,
        Rule::D003,
        Rule::D004,
        Rule::D005,
        Rule::C001,
        Rule::C002,
        Rule::C003,
        Rule::R001,
        Rule::R002,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Rule::S001 => "S001",
            Rule::S002 => "S002",
            Rule::S003 => "S003",
            Rule::S004 => "S004",
            Rule::S005 => "S005",
            Rule::S006 => "S006",
            Rule::D001 => "D001",
            Rule::D002 => "D002",
            Rule::D003 => "D003",
            Rule::D004 => "D004",
            Rule::D005 => "D005",
            Rule::C001 => "C001",
            Rule::C002 => "C002",
            Rule::C003 => "C003",
            Rule::R001 => "R001",
            Rule::R002 => "R002",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Rule::S001 => "subclass signature does not extend its superclass signature",
            Rule::S002 => "generalization cycle",
            Rule::S003 => "instance of an abstract class",
            Rule::S004 => "composition allows more than one aggregate per part",
            Rule::S005 => "state diagram event is not a method of the owning class",
            Rule::S006 => "ill-formed declaration",
            Rule::D001 => "link count outside the association end's multiplicity",
            Rule::D002 => "link recorded at one end only",
            Rule::D003 => "part shared by several aggregates of a composition",
            Rule::D004 => "constraint predicate is false",
            Rule::D005 => "no initial state agrees with the object's attribute values",
            Rule::C001 => "sequence diagram not realized by any execution within the bound",
            Rule::C002 => "sequence diagram conformance inconclusive at the bound",
            Rule::C003 => "interaction has no corresponding concrete transition",
            Rule::R001 => "refinement violated within the bound",
            Rule::R002 => "refinement inconclusive at the bound",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Rule::C002 | Rule::R002 => Severity::Inconclusive,
            _ => Severity::Error,
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}
