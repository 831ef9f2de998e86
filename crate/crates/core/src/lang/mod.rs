//! The imperative while-language: parsing, sugar elimination and
//! deterministic small-step execution.

pub mod ast;
pub mod desugar;
pub mod lexer;
pub mod parser;
pub mod step;

pub use ast::{BinOp, Expr, Stmt, UnOp};
pub use desugar::{desugar, END_VAR, IN_VAR, OUT_VAR};
pub use parser::parse;
pub use step::{eval_expr, step, Config, Store};

use crate::value::Value;
use std::collections::BTreeMap;
use std::sync::Arc as Rc;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LangError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("reference to undeclared variable '{0}'")]
    UndeclaredVariable(String),
    #[error("reserved variable '{0}' collides with a user variable")]
    ReservedCollision(String),
    #[error("type error: {op} applied to {value}")]
    TypeError { op: String, value: String },
    #[error("{op} of empty input stream")]
    EmptyStream { op: &'static str },
    #[error("construct '{0}' must be desugared before execution")]
    Undesugared(String),
}

/// A parsed, desugared program bound to its variable domains.
#[derive(Clone, Debug)]
pub struct Program {
    pub text: String,
    pub ast: Rc<Stmt>,
    /// Declared variables in canonical order (policy order, then any
    /// auto-declared reserved channel variables).
    pub vars: Vec<String>,
    pub domains: BTreeMap<String, Vec<Value>>,
}

impl Program {
    /// Parse and desugar `text`, binding variables to the declared domains.
    /// `declared` fixes the canonical variable order.
    pub fn new(text: &str, declared: &[(String, Vec<Value>)]) -> Result<Program, LangError> {
        let raw = parse(text)?;

        // reserved-variable collision: the source may either use the sugar
        // or mention the channel variable directly, not both
        let raw_vars = raw.vars_in_order();
        for (reserved, used) in [
            (OUT_VAR, raw.uses_output()),
            (IN_VAR, raw.uses_input()),
            (END_VAR, raw.uses_endorse()),
        ] {
            if used && raw_vars.iter().any(|v| v == reserved) {
                return Err(LangError::ReservedCollision(reserved.to_string()));
            }
        }

        let ast = desugar(&raw);

        let mut vars: Vec<String> = declared.iter().map(|(v, _)| v.clone()).collect();
        let mut domains: BTreeMap<String, Vec<Value>> = declared
            .iter()
            .map(|(v, d)| {
                let mut d = d.clone();
                d.sort();
                d.dedup();
                (v.clone(), d)
            })
            .collect();

        // auto-declare reserved channel variables on first use
        let mut auto = |name: &str, default: Value| {
            if !domains.contains_key(name) {
                vars.push(name.to_string());
                domains.insert(name.to_string(), vec![default]);
            }
        };
        if raw.uses_output() {
            auto(OUT_VAR, Value::empty_list());
        }
        if raw.uses_input() {
            auto(IN_VAR, Value::empty_list());
        }
        if raw.uses_endorse() {
            auto(END_VAR, Value::empty_set());
        }

        for v in ast.vars_in_order() {
            if !domains.contains_key(&v) {
                return Err(LangError::UndeclaredVariable(v));
            }
        }
        for (v, d) in &domains {
            if d.is_empty() {
                return Err(LangError::Syntax {
                    line: 0,
                    col: 0,
                    msg: format!("domain of '{v}' is empty"),
                });
            }
        }

        Ok(Program {
            text: text.to_string(),
            ast,
            vars,
            domains,
        })
    }

    /// Convenience constructor with every program variable ranging over {0,1}.
    pub fn boolean(text: &str) -> Result<Program, LangError> {
        let raw = parse(text)?;
        let desugared = desugar(&raw);
        let declared: Vec<(String, Vec<Value>)> = desugared
            .vars_in_order()
            .into_iter()
            .map(|v| (v, vec![Value::Int(0), Value::Int(1)]))
            .collect();
        Program::new(text, &declared)
    }
}
