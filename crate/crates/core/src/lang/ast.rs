//! Statement and expression trees for the imperative while-language.

use crate::value::Value;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc as Rc;

pub type Var = String;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    And,
    Or,
    Xor,
    Cons,
    Union,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(Value),
    Var(Var),
    Un(UnOp, Rc<Expr>),
    Bin(BinOp, Rc<Expr>, Rc<Expr>),
    Head(Rc<Expr>),
    Tail(Rc<Expr>),
    SetOf(Vec<Expr>),
    PairOf(Rc<Expr>, Rc<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Stmt {
    Skip,
    Assign(Var, Expr),
    Seq(Rc<Stmt>, Rc<Stmt>),
    /// The parser fills in an implicit `skip` else-branch.
    If(Expr, Rc<Stmt>, Rc<Stmt>),
    While(Expr, Rc<Stmt>),
    // Sugar, removed by desugaring:
    For {
        var: Var,
        from: Expr,
        to: Expr,
        body: Rc<Stmt>,
    },
    Loop,
    Endorse {
        agent: String,
        var: Var,
    },
    Output(Expr),
    Input(Var),
}

impl Expr {
    pub fn lit(n: i64) -> Expr {
        Expr::Lit(Value::Int(n))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Rc::new(a), Rc::new(b))
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Un(_, e) | Expr::Head(e) | Expr::Tail(e) => e.collect_vars(out),
            Expr::Bin(_, a, b) | Expr::PairOf(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::SetOf(xs) => {
                for x in xs {
                    x.collect_vars(out);
                }
            }
        }
    }
}

impl Stmt {
    pub fn seq(a: Rc<Stmt>, b: Rc<Stmt>) -> Rc<Stmt> {
        Rc::new(Stmt::Seq(a, b))
    }

    /// Variables mentioned anywhere in the statement, in first-occurrence order.
    pub fn vars_in_order(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut order = Vec::new();
        self.walk_vars(&mut |v| {
            if seen.insert(v.to_string()) {
                order.push(v.to_string());
            }
        });
        order
    }

    fn walk_vars(&self, f: &mut dyn FnMut(&str)) {
        fn expr_vars(e: &Expr, f: &mut dyn FnMut(&str)) {
            let mut set = BTreeSet::new();
            e.collect_vars(&mut set);
            // first-occurrence order inside a single expression is not
            // significant; reuse the sorted set.
            for v in set {
                f(&v);
            }
        }
        match self {
            Stmt::Skip | Stmt::Loop => {}
            Stmt::Assign(v, e) => {
                f(v);
                expr_vars(e, f);
            }
            Stmt::Seq(a, b) => {
                a.walk_vars(f);
                b.walk_vars(f);
            }
            Stmt::If(e, a, b) => {
                expr_vars(e, f);
                a.walk_vars(f);
                b.walk_vars(f);
            }
            Stmt::While(e, s) => {
                expr_vars(e, f);
                s.walk_vars(f);
            }
            Stmt::For {
                var,
                from,
                to,
                body,
            } => {
                f(var);
                expr_vars(from, f);
                expr_vars(to, f);
                body.walk_vars(f);
            }
            Stmt::Endorse { var, .. } => f(var),
            Stmt::Output(e) => expr_vars(e, f),
            Stmt::Input(v) => f(v),
        }
    }

    pub fn uses_output(&self) -> bool {
        self.any(&|s| matches!(s, Stmt::Output(_)))
    }

    pub fn uses_input(&self) -> bool {
        self.any(&|s| matches!(s, Stmt::Input(_)))
    }

    pub fn uses_endorse(&self) -> bool {
        self.any(&|s| matches!(s, Stmt::Endorse { .. }))
    }

    pub fn any(&self, pred: &dyn Fn(&Stmt) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Stmt::Seq(a, b) | Stmt::If(_, a, b) => a.any(pred) || b.any(pred),
            Stmt::While(_, s) | Stmt::For { body: s, .. } => s.any(pred),
            _ => false,
        }
    }
}

fn prec(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::Xor => 2,
        BinOp::And => 3,
        BinOp::Eq | BinOp::Ne | BinOp::Lt => 4,
        BinOp::Cons | BinOp::Union => 5,
        BinOp::Add | BinOp::Sub => 6,
        BinOp::Mul => 7,
    }
}

fn op_str(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Eq => "=",
        BinOp::Ne => "!=",
        BinOp::Lt => "<",
        BinOp::And => "&&",
        BinOp::Or => "||",
        BinOp::Xor => "^",
        BinOp::Cons => "::",
        BinOp::Union => "\\/",
    }
}

impl Expr {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, outer: u8) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Un(UnOp::Not, e) => {
                write!(f, "!")?;
                e.fmt_prec(f, 8)
            }
            Expr::Un(UnOp::Neg, e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 8)
            }
            Expr::Bin(op, a, b) => {
                let p = prec(*op);
                if p < outer {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, p)?;
                write!(f, " {} ", op_str(*op))?;
                b.fmt_prec(f, p + 1)?;
                if p < outer {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Expr::Head(e) => {
                write!(f, "head(")?;
                e.fmt_prec(f, 0)?;
                write!(f, ")")
            }
            Expr::Tail(e) => {
                write!(f, "tail(")?;
                e.fmt_prec(f, 0)?;
                write!(f, ")")
            }
            Expr::SetOf(xs) => {
                write!(f, "{{")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    x.fmt_prec(f, 0)?;
                }
                write!(f, "}}")
            }
            Expr::PairOf(a, b) => {
                write!(f, "(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ", ")?;
                b.fmt_prec(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Skip => write!(f, "skip"),
            Stmt::Assign(v, e) => write!(f, "{v} := {e}"),
            Stmt::Seq(a, b) => write!(f, "{a}; {b}"),
            Stmt::If(e, a, b) => {
                if matches!(**b, Stmt::Skip) {
                    write!(f, "if {e} then {{ {a} }}")
                } else {
                    write!(f, "if {e} then {{ {a} }} else {{ {b} }}")
                }
            }
            Stmt::While(e, s) => write!(f, "while {e} do {{ {s} }}"),
            Stmt::For {
                var,
                from,
                to,
                body,
            } => write!(f, "for {var} = {from} .. {to} do {{ {body} }}"),
            Stmt::Loop => write!(f, "loop"),
            Stmt::Endorse { agent, var } => write!(f, "endorse({agent}, {var})"),
            Stmt::Output(e) => write!(f, "output({e})"),
            Stmt::Input(v) => write!(f, "input({v})"),
        }
    }
}
