//! Deterministic small-step semantics.
//!
//! Assignments and skip each consume one step; guard resolution of
//! if/while and sequencing are structural and take no time. A fully
//! reduced program becomes the halt configuration, which admits no step.

use super::ast::{BinOp, Expr, Stmt, UnOp};
use super::LangError;
use crate::value::Value;
use std::collections::BTreeMap;
use std::sync::Arc as Rc;

pub type Store = BTreeMap<String, Value>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    /// `None` is the halt marker.
    pub residual: Option<Rc<Stmt>>,
    pub store: Store,
}

impl Config {
    pub fn new(program: Rc<Stmt>, store: Store) -> Config {
        Config {
            residual: Some(program),
            store,
        }
    }

    pub fn halted(&self) -> bool {
        self.residual.is_none()
    }
}

pub fn eval_expr(e: &Expr, store: &Store) -> Result<Value, LangError> {
    match e {
        Expr::Lit(v) => Ok(v.clone()),
        Expr::Var(name) => store
            .get(name)
            .cloned()
            .ok_or_else(|| LangError::UndeclaredVariable(name.clone())),
        Expr::Un(op, e) => {
            let v = eval_expr(e, store)?;
            match op {
                UnOp::Not => {
                    let b = v.truthy().ok_or_else(|| type_err("!", &v))?;
                    Ok(Value::bool(!b))
                }
                UnOp::Neg => {
                    let n = v.as_int().ok_or_else(|| type_err("-", &v))?;
                    Ok(Value::Int(n.wrapping_neg()))
                }
            }
        }
        Expr::Bin(op, a, b) => {
            let va = eval_expr(a, store)?;
            let vb = eval_expr(b, store)?;
            eval_binop(*op, va, vb)
        }
        Expr::Head(e) => match eval_expr(e, store)? {
            Value::List(xs) => xs
                .first()
                .cloned()
                .ok_or(LangError::EmptyStream { op: "head" }),
            v => Err(type_err("head", &v)),
        },
        Expr::Tail(e) => match eval_expr(e, store)? {
            Value::List(xs) => {
                if xs.is_empty() {
                    Err(LangError::EmptyStream { op: "tail" })
                } else {
                    Ok(Value::List(xs[1..].to_vec()))
                }
            }
            v => Err(type_err("tail", &v)),
        },
        Expr::SetOf(xs) => Ok(Value::Set(
            xs.iter()
                .map(|x| eval_expr(x, store))
                .collect::<Result<_, _>>()?,
        )),
        Expr::PairOf(a, b) => Ok(Value::Pair(
            Box::new(eval_expr(a, store)?),
            Box::new(eval_expr(b, store)?),
        )),
    }
}

fn type_err(op: &str, v: &Value) -> LangError {
    LangError::TypeError {
        op: op.to_string(),
        value: v.to_string(),
    }
}

fn eval_binop(op: BinOp, a: Value, b: Value) -> Result<Value, LangError> {
    use BinOp::*;
    match op {
        Eq => Ok(Value::bool(a == b)),
        Ne => Ok(Value::bool(a != b)),
        Cons => match b {
            Value::List(mut xs) => {
                xs.insert(0, a);
                Ok(Value::List(xs))
            }
            other => Err(type_err("::", &other)),
        },
        Union => match (a, b) {
            (Value::Set(mut x), Value::Set(y)) => {
                x.extend(y);
                Ok(Value::Set(x))
            }
            (Value::Set(_), other) | (other, _) => Err(type_err("union", &other)),
        },
        And | Or | Xor => {
            let x = a.truthy().ok_or_else(|| type_err("bool op", &a))?;
            let y = b.truthy().ok_or_else(|| type_err("bool op", &b))?;
            Ok(Value::bool(match op {
                And => x && y,
                Or => x || y,
                _ => x != y,
            }))
        }
        Add | Sub | Mul | Lt => {
            let x = a.as_int().ok_or_else(|| type_err("arith", &a))?;
            let y = b.as_int().ok_or_else(|| type_err("arith", &b))?;
            Ok(match op {
                Add => Value::Int(x.wrapping_add(y)),
                Sub => Value::Int(x.wrapping_sub(y)),
                Mul => Value::Int(x.wrapping_mul(y)),
                _ => Value::bool(x < y),
            })
        }
    }
}

/// The atomic action located by structural normalization.
enum Cont {
    Act {
        assign: Option<(String, Value)>,
        rest: Option<Rc<Stmt>>,
    },
    /// No atomic action remains (e.g. `while false do ...`).
    Done,
    /// A while-true whose body makes no atomic action: the configuration
    /// spins in place forever.
    Spin,
}

fn norm(s: &Rc<Stmt>, store: &Store) -> Result<Cont, LangError> {
    match &**s {
        Stmt::Skip => Ok(Cont::Act {
            assign: None,
            rest: None,
        }),
        Stmt::Assign(x, e) => {
            if !store.contains_key(x) {
                return Err(LangError::UndeclaredVariable(x.clone()));
            }
            let v = eval_expr(e, store)?;
            Ok(Cont::Act {
                assign: Some((x.clone(), v)),
                rest: None,
            })
        }
        Stmt::Seq(a, b) => match norm(a, store)? {
            Cont::Act { assign, rest } => Ok(Cont::Act {
                assign,
                rest: Some(match rest {
                    Some(r) => Stmt::seq(r, b.clone()),
                    None => b.clone(),
                }),
            }),
            Cont::Done => norm(b, store),
            Cont::Spin => Ok(Cont::Spin),
        },
        Stmt::If(e, a, b) => {
            let guard = eval_expr(e, store)?;
            let taken = guard
                .truthy()
                .ok_or_else(|| type_err("if guard", &guard))?;
            norm(if taken { a } else { b }, store)
        }
        Stmt::While(e, body) => {
            let guard = eval_expr(e, store)?;
            let taken = guard
                .truthy()
                .ok_or_else(|| type_err("while guard", &guard))?;
            if !taken {
                return Ok(Cont::Done);
            }
            match norm(body, store)? {
                Cont::Act { assign, rest } => Ok(Cont::Act {
                    assign,
                    rest: Some(match rest {
                        Some(r) => Stmt::seq(r, s.clone()),
                        None => s.clone(),
                    }),
                }),
                // action-free body under a true guard: the store can never
                // change again, so the configuration spins silently
                Cont::Done | Cont::Spin => Ok(Cont::Spin),
            }
        }
        other => Err(LangError::Undesugared(other.to_string())),
    }
}

/// One deterministic step. Precondition: `!config.halted()`.
pub fn step(config: &Config) -> Result<Config, LangError> {
    let residual = config
        .residual
        .as_ref()
        .expect("step called on a halted configuration");
    match norm(residual, &config.store)? {
        Cont::Act { assign, rest } => {
            let mut store = config.store.clone();
            if let Some((x, v)) = assign {
                store.insert(x, v);
            }
            Ok(Config {
                residual: rest,
                store,
            })
        }
        Cont::Done => Ok(Config {
            residual: None,
            store: config.store.clone(),
        }),
        Cont::Spin => Ok(config.clone()),
    }
}
