use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::syntax::{BinOp, Expr};

/// A ground value. Relations, functions and sequences are sets of pairs.
/// Sets are ordered, which makes equality extensional.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Pair(Box<Value>, Box<Value>),
    Set(BTreeSet<Value>),
}

impl Value {
    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn set(items: impl IntoIterator<Item = Value>) -> Value {
        Value::Set(items.into_iter().collect())
    }

    /// `{1 |-> v1, ..., n |-> vn}`.
    pub fn sequence(items: impl IntoIterator<Item = Value>) -> Value {
        Value::set(
            items
                .into_iter()
                .enumerate()
                .map(|(i, v)| Value::pair(Value::Int(i as i64 + 1), v)),
        )
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&BTreeSet<Value>> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Bool(_) => "boolean",
            Value::Pair(_, _) => "pair",
            Value::Set(_) => "set",
        }
    }

    /// An expression denoting this value.
    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Int(n) => Expr::Int(*n),
            Value::Bool(b) => Expr::Bool(*b),
            Value::Pair(a, b) => Expr::binary(BinOp::Maplet, a.to_expr(), b.to_expr()),
            Value::Set(items) => Expr::SetExt(items.iter().map(Value::to_expr).collect()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
            Value::Pair(a, b) => write!(f, "({a} |-> {b})"),
            Value::Set(items) => {
                f.write_str("{")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
