//! Resolved expressions used for guards, constraints and send arguments.

use std::collections::BTreeMap;
use std::fmt;

use crate::dsl::BinOp;

use super::value::Value;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Lit(Value),
    Attr(String),
    Binder(String),
    SelfRef,
    Sender,
    /// Cardinality of a link set.
    Count(String),
    Not(Box<Term>),
    Neg(Box<Term>),
    Bin(BinOp, Box<Term>, Box<Term>),
}

/// Supplies values for the free names of a [`Term`]. `None` means unknown.
pub trait Env {
    fn attr(&self, name: &str) -> Option<Value>;
    fn binder(&self, _name: &str) -> Option<Value> {
        None
    }
    fn link_count(&self, _key: &str) -> Option<i64> {
        None
    }
    fn self_id(&self) -> Option<Value> {
        None
    }
    fn sender(&self) -> Option<Value> {
        None
    }
}

pub type Bindings = BTreeMap<String, Value>;

/// Environment with nothing known.
pub struct Opaque;

impl Env for Opaque {
    fn attr(&self, _: &str) -> Option<Value> {
        None
    }
}

impl Term {
    /// Three-valued evaluation: `None` when the result depends on something
    /// the environment does not know or on an ill-typed operation.
    pub fn eval(&self, env: &dyn Env) -> Option<Value> {
        match self {
            Term::Lit(v) => Some(v.clone()),
            Term::Attr(a) => env.attr(a),
            Term::Binder(b) => env.binder(b),
            Term::SelfRef => env.self_id(),
            Term::Sender => env.sender(),
            Term::Count(k) => env.link_count(k).map(Value::Int),
            Term::Not(t) => t.eval(env)?.as_bool().map(|b| Value::Bool(!b)),
            Term::Neg(t) => t.eval(env)?.as_int().map(|n| Value::Int(-n)),
            Term::Bin(BinOp::And, l, r) => {
                let (l, r) = (l.eval(env).and_then(|v| v.as_bool()), r.eval(env).and_then(|v| v.as_bool()));
                match (l, r) {
                    (Some(false), _) | (_, Some(false)) => Some(Value::Bool(false)),
                    (Some(true), Some(true)) => Some(Value::Bool(true)),
                    _ => None,
                }
            }
            Term::Bin(BinOp::Or, l, r) => {
                let (l, r) = (l.eval(env).and_then(|v| v.as_bool()), r.eval(env).and_then(|v| v.as_bool()));
                match (l, r) {
                    (Some(true), _) | (_, Some(true)) => Some(Value::Bool(true)),
                    (Some(false), Some(false)) => Some(Value::Bool(false)),
                    _ => None,
                }
            }
            Term::Bin(op, l, r) => {
                let (l, r) = (l.eval(env)?, r.eval(env)?);
                match op {
                    BinOp::Eq => Some(Value::Bool(l == r)),
                    BinOp::Ne => Some(Value::Bool(l != r)),
                    _ => {
                        let (a, b) = (l.as_int()?, r.as_int()?);
                        Some(match op {
                            BinOp::Add => Value::Int(a.checked_add(b)?),
                            BinOp::Sub => Value::Int(a.checked_sub(b)?),
                            BinOp::Lt => Value::Bool(a < b),
                            BinOp::Le => Value::Bool(a <= b),
                            BinOp::Gt => Value::Bool(a > b),
                            BinOp::Ge => Value::Bool(a >= b),
                            BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or => unreachable!(),
                        })
                    }
                }
            }
        }
    }

    pub fn holds(&self, env: &dyn Env) -> Option<bool> {
        self.eval(env).and_then(|v| v.as_bool())
    }

    /// Attribute names read by the term.
    pub fn attrs(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let Term::Attr(a) = t {
                out.push(a.as_str());
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Not(t) | Term::Neg(t) => t.visit(f),
            Term::Bin(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            _ => {}
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn sub(t: &Term) -> String {
            match t {
                Term::Bin(..) => format!("({t})"),
                _ => t.to_string(),
            }
        }
        match self {
            Term::Lit(v) => write!(f, "{v}"),
            Term::Attr(a) | Term::Binder(a) => write!(f, "{a}"),
            Term::SelfRef => write!(f, "self"),
            Term::Sender => write!(f, "sender"),
            Term::Count(k) => write!(f, "#{k}"),
            Term::Not(t) => write!(f, "not ({t})"),
            Term::Neg(t) => write!(f, "-({t})"),
            Term::Bin(op, l, r) => write!(f, "{} {} {}", sub(l), op.symbol(), sub(r)),
        }
    }
}
