//! Sugar elimination.
//!
//! output(e)      =>  O := e :: O
//! input(x)       =>  x := head(I); I := tail(I)
//! endorse(A, x)  =>  E := E \/ {(A, x)}
//! loop           =>  while true do skip
//! for x=a..b do s => counted while; the final iteration is unrolled so the
//!                    counter never exceeds b (no wrap-around on small domains).

use super::ast::{BinOp, Expr, Stmt};
use crate::value::Value;
use std::sync::Arc as Rc;

pub const OUT_VAR: &str = "O";
pub const IN_VAR: &str = "I";
pub const END_VAR: &str = "E";

pub fn desugar(s: &Rc<Stmt>) -> Rc<Stmt> {
    match &**s {
        Stmt::Skip | Stmt::Assign(..) => s.clone(),
        Stmt::Seq(a, b) => Stmt::seq(desugar(a), desugar(b)),
        Stmt::If(e, a, b) => Rc::new(Stmt::If(e.clone(), desugar(a), desugar(b))),
        Stmt::While(e, body) => Rc::new(Stmt::While(e.clone(), desugar(body))),
        Stmt::Loop => Rc::new(Stmt::While(Expr::lit(1), Rc::new(Stmt::Skip))),
        Stmt::Output(e) => Rc::new(Stmt::Assign(
            OUT_VAR.to_string(),
            Expr::bin(BinOp::Cons, e.clone(), Expr::var(OUT_VAR)),
        )),
        Stmt::Input(x) => Stmt::seq(
            Rc::new(Stmt::Assign(
                x.clone(),
                Expr::Head(Rc::new(Expr::var(IN_VAR))),
            )),
            Rc::new(Stmt::Assign(
                IN_VAR.to_string(),
                Expr::Tail(Rc::new(Expr::var(IN_VAR))),
            )),
        ),
        Stmt::Endorse { agent, var } => Rc::new(Stmt::Assign(
            END_VAR.to_string(),
            Expr::bin(
                BinOp::Union,
                Expr::var(END_VAR),
                Expr::SetOf(vec![Expr::PairOf(
                    Rc::new(Expr::Lit(Value::Name(agent.clone()))),
                    Rc::new(Expr::Lit(Value::Name(var.clone()))),
                )]),
            ),
        )),
        Stmt::For {
            var,
            from,
            to,
            body,
        } => {
            let body = desugar(body);
            let init = Rc::new(Stmt::Assign(var.clone(), from.clone()));
            let bump = Rc::new(Stmt::Assign(
                var.clone(),
                Expr::bin(BinOp::Add, Expr::var(var), Expr::lit(1)),
            ));
            let loop_body = Stmt::seq(body.clone(), bump);
            let whl = Rc::new(Stmt::While(
                Expr::bin(BinOp::Lt, Expr::var(var), to.clone()),
                loop_body,
            ));
            let last = Rc::new(Stmt::If(
                Expr::bin(BinOp::Eq, Expr::var(var), to.clone()),
                body,
                Rc::new(Stmt::Skip),
            ));
            Stmt::seq(init, Stmt::seq(whl, last))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse;

    #[test]
    fn output_becomes_cons_assignment() {
        let s = desugar(&parse("output(1)").unwrap());
        match &*s {
            Stmt::Assign(v, Expr::Bin(BinOp::Cons, _, _)) => assert_eq!(v, OUT_VAR),
            other => panic!("unexpected desugaring {other:?}"),
        }
    }

    #[test]
    fn loop_is_while_true_skip() {
        let s = desugar(&parse("loop").unwrap());
        match &*s {
            Stmt::While(Expr::Lit(Value::Int(1)), body) => assert_eq!(**body, Stmt::Skip),
            other => panic!("unexpected desugaring {other:?}"),
        }
    }

    #[test]
    fn endorse_extends_the_event_set() {
        let s = desugar(&parse("endorse(A, t)").unwrap());
        match &*s {
            Stmt::Assign(v, Expr::Bin(BinOp::Union, lhs, _)) => {
                assert_eq!(v, END_VAR);
                assert_eq!(**lhs, Expr::var(END_VAR));
            }
            other => panic!("unexpected desugaring {other:?}"),
        }
    }

    #[test]
    fn input_splits_into_head_and_tail() {
        let s = desugar(&parse("input(x)").unwrap());
        assert!(matches!(&*s, Stmt::Seq(..)));
    }

    #[test]
    fn desugar_is_idempotent() {
        for src in [
            "output(1); input(x); endorse(A, t); loop",
            "for i = 0 .. s do p := i",
            "if u = 1 then output(u) else loop",
        ] {
            let once = desugar(&parse(src).unwrap());
            let twice = desugar(&once);
            assert_eq!(once, twice, "desugaring {src} is not idempotent");
        }
    }
}
