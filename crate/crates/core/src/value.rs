//! Runtime values shared by the parallel and the sequential language.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

/// A memory location identifier. Locations are named by their declaration
/// in the `memory` block; the only operation on them is equality.
pub type Loc = String;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    Loc(Loc),
}

impl Value {
    pub fn int(n: impl Into<BigInt>) -> Value {
        Value::Int(n.into())
    }

    pub fn loc(name: impl Into<String>) -> Value {
        Value::Loc(name.into())
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Int(_) => ValueKind::Int,
            Value::Bool(_) => ValueKind::Bool,
            Value::Loc(_) => ValueKind::Loc,
        }
    }

    /// Zero is the termination sentinel for program counters; every other
    /// value (including booleans and locations) counts as nonzero.
    pub fn is_zero(&self) -> bool {
        matches!(self, Value::Int(n) if n.is_zero())
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_loc(&self) -> Option<&str> {
        match self {
            Value::Loc(l) => Some(l),
            _ => None,
        }
    }

    /// Interprets the value as an array offset or a thread identifier.
    pub fn as_index(&self) -> Option<usize> {
        self.as_int().and_then(|n| n.to_usize())
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(BigInt::from(n))
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Loc(l) => write!(f, "&{l}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Int,
    Bool,
    Loc,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Int => "int",
            ValueKind::Bool => "bool",
            ValueKind::Loc => "location",
        })
    }
}

/// Expression operators. There is no division and no pointer arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    And,
    Or,
    Not,
}

impl Operator {
    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Add => "+",
            Operator::Sub => "-",
            Operator::Mul => "*",
            Operator::Eq => "=",
            Operator::Ne => "!=",
            Operator::Lt => "<",
            Operator::Le => "<=",
            Operator::And => "&&",
            Operator::Or => "||",
            Operator::Not => "!",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Operator::Not => 1,
            _ => 2,
        }
    }

    /// Binding strength used by the parser and the printer. Higher binds
    /// tighter.
    pub fn precedence(self) -> u8 {
        match self {
            Operator::Or => 1,
            Operator::And => 2,
            Operator::Eq | Operator::Ne | Operator::Lt | Operator::Le => 3,
            Operator::Add | Operator::Sub => 4,
            Operator::Mul => 5,
            Operator::Not => 6,
        }
    }

    /// Applies the operator to already evaluated arguments.
    pub fn apply(self, args: &[Value]) -> Result<Value, OpError> {
        if args.len() != self.arity() {
            return Err(OpError::Arity {
                op: self,
                expected: self.arity(),
                found: args.len(),
            });
        }
        let mismatch = || OpError::Kind {
            op: self,
            kinds: args.iter().map(Value::kind).collect(),
        };
        match self {
            Operator::Not => match &args[0] {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                _ => Err(mismatch()),
            },
            Operator::Eq | Operator::Ne => {
                if args[0].kind() != args[1].kind() {
                    return Err(mismatch());
                }
                let eq = args[0] == args[1];
                Ok(Value::Bool(if self == Operator::Eq { eq } else { !eq }))
            }
            Operator::And | Operator::Or => match (&args[0], &args[1]) {
                (Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(if self == Operator::And {
                    *a && *b
                } else {
                    *a || *b
                })),
                _ => Err(mismatch()),
            },
            Operator::Add | Operator::Sub | Operator::Mul | Operator::Lt | Operator::Le => {
                let (Value::Int(a), Value::Int(b)) = (&args[0], &args[1]) else {
                    return Err(mismatch());
                };
                Ok(match self {
                    Operator::Add => Value::Int(a + b),
                    Operator::Sub => Value::Int(a - b),
                    Operator::Mul => Value::Int(a * b),
                    Operator::Lt => Value::Bool(a < b),
                    Operator::Le => Value::Bool(a <= b),
                    _ => unreachable!(),
                })
            }
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OpError {
    #[error("operator `{op}` expects {expected} operand(s), found {found}")]
    Arity {
        op: Operator,
        expected: usize,
        found: usize,
    },
    #[error("operator `{op}` cannot be applied to {}", fmt_kinds(.kinds))]
    Kind { op: Operator, kinds: Vec<ValueKind> },
}

fn fmt_kinds(kinds: &[ValueKind]) -> String {
    kinds
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}
