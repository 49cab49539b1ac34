//! Compilation of surface expressions into typed [`Term`]s.

use crate::dsl::{BinOp, Expr, Literal, Pos};
use crate::model::{Term, Value, ValueType};

use super::ElabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Ty {
    Int,
    Bool,
    Str,
    Ref,
}

impl Ty {
    pub(crate) fn of(t: &ValueType) -> Ty {
        match t {
            ValueType::Int => Ty::Int,
            ValueType::Bool => Ty::Bool,
            ValueType::Str => Ty::Str,
            ValueType::Class(_) => Ty::Ref,
        }
    }
}

/// Name resolution for one compilation context.
pub(crate) trait Scope {
    fn name(&self, name: &str) -> Option<(Term, Ty)>;
    /// Resolves the key of a `#link` term; `None` when counts are not allowed
    /// or the key is unknown.
    fn link_key(&self, key: &str) -> Result<String, String>;
}

pub(crate) fn literal_value(l: &Literal) -> Option<Value> {
    match l {
        Literal::Int(n) => Some(Value::Int(*n)),
        Literal::Bool(b) => Some(Value::Bool(*b)),
        Literal::Str(s) => Some(Value::Str(s.clone())),
        Literal::Object(_) => None,
    }
}

fn type_error(pos: Pos, message: impl Into<String>) -> ElabError {
    ElabError::GuardTypeError {
        message: message.into(),
        pos,
    }
}

pub(crate) fn compile(e: &Expr, scope: &dyn Scope) -> Result<(Term, Ty), ElabError> {
    match e {
        Expr::Lit(l, pos) => {
            let v = literal_value(l).ok_or_else(|| type_error(*pos, "object literal in expression"))?;
            let ty = match v {
                Value::Int(_) => Ty::Int,
                Value::Bool(_) => Ty::Bool,
                _ => Ty::Str,
            };
            Ok((Term::Lit(v), ty))
        }
        Expr::Name(n, pos) => scope.name(n).ok_or_else(|| ElabError::UnknownName {
            name: n.clone(),
            pos: *pos,
        }),
        Expr::Count(k, pos) => {
            let key = scope.link_key(k).map_err(|m| type_error(*pos, m))?;
            Ok((Term::Count(key), Ty::Int))
        }
        Expr::Not(inner, pos) => {
            let (t, ty) = compile(inner, scope)?;
            if ty != Ty::Bool {
                return Err(type_error(*pos, "`not` needs a boolean operand"));
            }
            Ok((Term::Not(Box::new(t)), Ty::Bool))
        }
        Expr::Neg(inner, pos) => {
            let (t, ty) = compile(inner, scope)?;
            if ty != Ty::Int {
                return Err(type_error(*pos, "negation needs an integer operand"));
            }
            Ok((Term::Neg(Box::new(t)), Ty::Int))
        }
        Expr::Bin(op, l, r) => {
            let pos = l.pos();
            let (lt, lty) = compile(l, scope)?;
            let (rt, rty) = compile(r, scope)?;
            let ty = match op {
                BinOp::Add | BinOp::Sub if lty == Ty::Int && rty == Ty::Int => Ty::Int,
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge if lty == Ty::Int && rty == Ty::Int => Ty::Bool,
                BinOp::Eq | BinOp::Ne if lty == rty => Ty::Bool,
                BinOp::And | BinOp::Or if lty == Ty::Bool && rty == Ty::Bool => Ty::Bool,
                _ => {
                    return Err(type_error(
                        pos,
                        format!("operator `{}` does not apply to {lty:?} and {rty:?}", op.symbol()),
                    ))
                }
            };
            Ok((Term::Bin(*op, Box::new(lt), Box::new(rt)), ty))
        }
    }
}
