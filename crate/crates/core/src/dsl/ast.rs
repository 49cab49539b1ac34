//! Syntax trees for the four document kinds.
//!
//! Every node carries the [`Pos`] of its first token. Positions never take part
//! in equality, so two trees parsed from differently formatted but equivalent
//! text compare equal.

use std::fmt;

use serde::Serialize;

/// 1-based line and column of a token.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Pos {}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Literal {
    Int(i64),
    Bool(bool),
    Str(String),
    /// Reference to a named object (snapshots only).
    Object(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TypeRef {
    Int,
    Bool,
    Str,
    Class(String),
}

/// Finite value domain attached to an attribute; required for attributes that
/// appear in guards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Domain {
    Range(i64, i64),
    Values(Vec<Literal>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Multiplicity {
    pub lower: u32,
    /// `None` is `*`.
    pub upper: Option<u32>,
}

impl Multiplicity {
    pub const MANY: Multiplicity = Multiplicity {
        lower: 0,
        upper: None,
    };

    pub fn exactly(n: u32) -> Self {
        Multiplicity {
            lower: n,
            upper: Some(n),
        }
    }

    pub fn admits(&self, n: usize) -> bool {
        n as u64 >= self.lower as u64 && self.upper.is_none_or(|u| n as u64 <= u as u64)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.upper {
            Some(u) if u == self.lower => write!(f, "{u}"),
            Some(u) => write!(f, "{}..{u}", self.lower),
            None if self.lower == 0 => write!(f, "*"),
            None => write!(f, "{}..*", self.lower),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AssocKind {
    Plain,
    /// Shared aggregation, `o--`; the left end is the aggregate.
    Aggregate,
    /// Composition, `*--`; the left end is the whole.
    Composition,
}

// ---------------------------------------------------------------------------
// Expressions (guards, constraints, send arguments)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Expr {
    Lit(Literal, Pos),
    /// Attribute, event binder, or `self`.
    Name(String, Pos),
    /// `#linkset`: cardinality of a link set.
    Count(String, Pos),
    Not(Box<Expr>, Pos),
    Neg(Box<Expr>, Pos),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn pos(&self) -> Pos {
        match self {
            Expr::Lit(_, p) | Expr::Name(_, p) | Expr::Count(_, p) | Expr::Not(_, p) | Expr::Neg(_, p) => *p,
            Expr::Bin(_, l, _) => l.pos(),
        }
    }

    /// Names referenced anywhere in the expression, in occurrence order.
    pub fn names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Name(n, _) => out.push(n),
            Expr::Lit(..) | Expr::Count(..) => {}
            Expr::Not(e, _) | Expr::Neg(e, _) => e.collect_names(out),
            Expr::Bin(_, l, r) => {
                l.collect_names(out);
                r.collect_names(out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Class models
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct ClassModelAst {
    pub packages: Vec<PackageDecl>,
    pub classes: Vec<ClassDecl>,
    pub associations: Vec<AssocDecl>,
    pub generalizations: Vec<GenDecl>,
    pub constraints: Vec<ConstraintDecl>,
}

impl ClassModelAst {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn association(&self, name: &str) -> Option<&AssocDecl> {
        self.associations.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PackageDecl {
    /// Fully qualified, `Outer::Inner`.
    pub name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassDecl {
    /// Fully qualified name.
    pub name: String,
    pub package: Option<String>,
    pub is_abstract: bool,
    pub attributes: Vec<AttrDecl>,
    pub operations: Vec<OpDecl>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttrDecl {
    pub name: String,
    pub ty: TypeRef,
    pub domain: Option<Domain>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpDecl {
    pub name: String,
    pub params: Vec<TypeRef>,
    pub result: Option<TypeRef>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssocEnd {
    pub class: String,
    pub mult: Multiplicity,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssocDecl {
    pub name: String,
    pub left: AssocEnd,
    pub right: AssocEnd,
    pub kind: AssocKind,
    pub attributes: Vec<AttrDecl>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenDecl {
    pub sub: String,
    pub sup: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintDecl {
    pub name: String,
    pub class: String,
    pub expr: Expr,
    pub pos: Pos,
}

// ---------------------------------------------------------------------------
// State diagrams
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum UnhandledPolicy {
    /// Unmatched events leave the state unchanged.
    #[default]
    Ignore,
    /// Unmatched events may lead anywhere with any bounded output.
    Chaos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct StateDiagramAst {
    pub owner: Option<String>,
    pub unhandled: Option<UnhandledPolicy>,
    /// Top-level states; together they form the implicit root OR-state.
    pub states: Vec<StateNode>,
    pub initial: Option<String>,
    pub transitions: Vec<TransitionDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateNode {
    pub name: String,
    pub anonymous: bool,
    pub kind: StateKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum StateKind {
    Simple,
    Or {
        initial: Option<String>,
        children: Vec<StateNode>,
    },
    /// Each region is an `Or` node.
    And { regions: Vec<StateNode> },
}

impl StateNode {
    pub fn children(&self) -> &[StateNode] {
        match &self.kind {
            StateKind::Simple => &[],
            StateKind::Or { children, .. } => children,
            StateKind::And { regions } => regions,
        }
    }
}

impl StateDiagramAst {
    /// Depth-first, document-order walk over every state node.
    pub fn walk(&self) -> Vec<&StateNode> {
        fn go<'a>(n: &'a StateNode, out: &mut Vec<&'a StateNode>) {
            out.push(n);
            for c in n.children() {
                go(c, out);
            }
        }
        let mut out = Vec::new();
        for s in &self.states {
            go(s, &mut out);
        }
        out
    }

    pub fn find(&self, name: &str) -> Option<&StateNode> {
        self.walk().into_iter().find(|n| n.name == name)
    }

    /// Nesting depth of diagram states: 0 for an empty diagram, 1 when all
    /// states are simple. Regions of an AND-state are not separate levels.
    pub fn depth(&self) -> usize {
        fn d(n: &StateNode) -> usize {
            let inner = match &n.kind {
                StateKind::And { regions } => regions
                    .iter()
                    .flat_map(|r| r.children())
                    .map(d)
                    .max(),
                _ => n.children().iter().map(d).max(),
            };
            1 + inner.unwrap_or(0)
        }
        self.states.iter().map(d).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Pattern {
    Bind(String),
    Lit(Literal),
    Wild,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventDecl {
    pub selector: String,
    pub params: Vec<Pattern>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SendTarget {
    /// Link-set key, event binder, or `sender`; resolved during elaboration.
    Name(String),
    /// Creation of a fresh object of the class.
    New(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SendDecl {
    pub target: SendTarget,
    pub selector: String,
    pub args: Vec<Expr>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionDecl {
    pub source: String,
    pub target: String,
    /// `None` marks a spontaneous transition.
    pub event: Option<EventDecl>,
    pub guard: Option<Expr>,
    pub sends: Vec<SendDecl>,
    pub pos: Pos,
}

// ---------------------------------------------------------------------------
// Sequence diagrams
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct SequenceDiagramAst {
    pub name: String,
    pub lifelines: Vec<Lifeline>,
    pub interactions: Vec<Interaction>,
}

impl SequenceDiagramAst {
    pub fn lifeline(&self, role: &str) -> Option<&Lifeline> {
        self.lifelines.iter().find(|l| l.role == role)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lifeline {
    pub role: String,
    pub class: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ArgPattern {
    Lit(Literal),
    Wild,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interaction {
    pub from: String,
    pub to: String,
    pub selector: String,
    pub args: Vec<ArgPattern>,
    pub pos: Pos,
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct SnapshotAst {
    pub name: Option<String>,
    pub objects: Vec<ObjectDecl>,
    pub links: Vec<LinkDecl>,
}

impl SnapshotAst {
    pub fn object(&self, name: &str) -> Option<&ObjectDecl> {
        self.objects.iter().find(|o| o.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObjectDecl {
    pub name: String,
    pub anonymous: bool,
    pub class: String,
    pub bindings: Vec<Binding>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub attr: String,
    pub value: Literal,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkDecl {
    pub assoc: String,
    pub from: String,
    pub to: String,
    /// `--` installs both directions, `->` only `from`'s side.
    pub bidirectional: bool,
    pub pos: Pos,
}
