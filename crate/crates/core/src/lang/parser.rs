//! Recursive descent parser for the while-language.
//!
//! Statements are separated by ';' or newlines. A statement position
//! accepts `{ ... }` and `( ... )` groups, so the worked examples like
//! `(if u = 1 then p := s); loop` parse as written.

use super::ast::{BinOp, Expr, Stmt, UnOp};
use super::lexer::{lex, Tok, Token};
use super::LangError;
use std::sync::Arc as Rc;

pub fn parse(src: &str) -> Result<Rc<Stmt>, LangError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    p.skip_seps();
    if p.peek().is_none() {
        // empty program is skip
        return Ok(Rc::new(Stmt::Skip));
    }
    let s = p.stmt_list(&[])?;
    p.skip_seps();
    if let Some(t) = p.peek_token() {
        return Err(LangError::Syntax {
            line: t.line,
            col: t.col,
            msg: format!("unexpected trailing {:?}", t.tok),
        });
    }
    Ok(s)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek_token(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> LangError {
        let (line, col) = self
            .peek_token()
            .map(|t| (t.line, t.col))
            .unwrap_or_else(|| {
                self.tokens
                    .last()
                    .map(|t| (t.line, t.col + 1))
                    .unwrap_or((1, 1))
            });
        LangError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LangError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn skip_seps(&mut self) {
        while self.peek() == Some(&Tok::Sep) {
            self.pos += 1;
        }
    }

    /// Parse statements until EOF or one of the closers (not consumed).
    fn stmt_list(&mut self, closers: &[Tok]) -> Result<Rc<Stmt>, LangError> {
        let mut stmts = Vec::new();
        loop {
            self.skip_seps();
            match self.peek() {
                None => break,
                Some(t) if closers.contains(t) => break,
                _ => {}
            }
            stmts.push(self.stmt()?);
            self.skip_seps();
            match self.peek() {
                None => break,
                Some(t) if closers.contains(t) => break,
                _ => {}
            }
        }
        let mut it = stmts.into_iter().rev();
        let last = match it.next() {
            Some(s) => s,
            None => Rc::new(Stmt::Skip),
        };
        Ok(it.fold(last, |acc, s| Stmt::seq(s, acc)))
    }

    fn block(&mut self) -> Result<Rc<Stmt>, LangError> {
        match self.peek() {
            Some(Tok::LBrace) => {
                self.next();
                let s = self.stmt_list(&[Tok::RBrace])?;
                self.expect(Tok::RBrace, "'}'")?;
                Ok(s)
            }
            _ => self.stmt(),
        }
    }

    fn stmt(&mut self) -> Result<Rc<Stmt>, LangError> {
        match self.peek() {
            Some(Tok::Skip) => {
                self.next();
                Ok(Rc::new(Stmt::Skip))
            }
            Some(Tok::Loop) => {
                self.next();
                Ok(Rc::new(Stmt::Loop))
            }
            Some(Tok::LParen) => {
                // parenthesised statement group
                self.next();
                let s = self.stmt_list(&[Tok::RParen])?;
                self.expect(Tok::RParen, "')'")?;
                Ok(s)
            }
            Some(Tok::LBrace) => self.block(),
            Some(Tok::If) => {
                self.next();
                let cond = self.expr()?;
                self.expect(Tok::Then, "'then'")?;
                let then_branch = self.block()?;
                // the else binds to the nearest if; a separator before
                // 'else' is tolerated
                let save = self.pos;
                self.skip_seps();
                let else_branch = if self.peek() == Some(&Tok::Else) {
                    self.next();
                    self.block()?
                } else {
                    self.pos = save;
                    Rc::new(Stmt::Skip)
                };
                Ok(Rc::new(Stmt::If(cond, then_branch, else_branch)))
            }
            Some(Tok::While) => {
                self.next();
                let cond = self.expr()?;
                self.expect(Tok::Do, "'do'")?;
                let body = self.block()?;
                Ok(Rc::new(Stmt::While(cond, body)))
            }
            Some(Tok::For) => {
                self.next();
                let var = self.ident("loop variable")?;
                self.expect(Tok::Eq, "'='")?;
                let from = self.expr()?;
                self.expect(Tok::DotDot, "'..'")?;
                let to = self.expr()?;
                self.expect(Tok::Do, "'do'")?;
                let body = self.block()?;
                Ok(Rc::new(Stmt::For {
                    var,
                    from,
                    to,
                    body,
                }))
            }
            Some(Tok::Endorse) => {
                self.next();
                self.expect(Tok::LParen, "'('")?;
                let agent = self.ident("agent name")?;
                self.expect(Tok::Comma, "','")?;
                let var = self.ident("variable name")?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Rc::new(Stmt::Endorse { agent, var }))
            }
            Some(Tok::Output) => {
                self.next();
                self.expect(Tok::LParen, "'('")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Rc::new(Stmt::Output(e)))
            }
            Some(Tok::Input) => {
                self.next();
                self.expect(Tok::LParen, "'('")?;
                let var = self.ident("variable name")?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Rc::new(Stmt::Input(var)))
            }
            Some(Tok::Ident(_)) => {
                let var = self.ident("variable name")?;
                self.expect(Tok::Assign, "':='")?;
                let e = self.expr()?;
                Ok(Rc::new(Stmt::Assign(var, e)))
            }
            _ => Err(self.err("expected a statement")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, LangError> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.next();
                Ok(name)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    // expression precedence: or < xor < and < cmp < cons/union < add < mul < unary
    fn expr(&mut self) -> Result<Expr, LangError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.xor_expr()?;
        while self.peek() == Some(&Tok::Or) {
            self.next();
            let rhs = self.xor_expr()?;
            lhs = Expr::bin(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn xor_expr(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some(&Tok::Xor) {
            self.next();
            let rhs = self.and_expr()?;
            lhs = Expr::bin(BinOp::Xor, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.cmp_expr()?;
        while self.peek() == Some(&Tok::And) {
            self.next();
            let rhs = self.cmp_expr()?;
            lhs = Expr::bin(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expr, LangError> {
        let lhs = self.cons_expr()?;
        let op = match self.peek() {
            Some(Tok::Eq) => BinOp::Eq,
            Some(Tok::Ne) => BinOp::Ne,
            Some(Tok::Lt) => BinOp::Lt,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.cons_expr()?;
        Ok(Expr::bin(op, lhs, rhs))
    }

    fn cons_expr(&mut self) -> Result<Expr, LangError> {
        let lhs = self.add_expr()?;
        match self.peek() {
            Some(Tok::Cons) => {
                self.next();
                let rhs = self.cons_expr()?; // right-associative
                Ok(Expr::bin(BinOp::Cons, lhs, rhs))
            }
            Some(Tok::Union) => {
                self.next();
                let rhs = self.cons_expr()?;
                Ok(Expr::bin(BinOp::Union, lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn add_expr(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.mul_expr()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> Result<Expr, LangError> {
        let mut lhs = self.unary_expr()?;
        while self.peek() == Some(&Tok::Star) {
            self.next();
            let rhs = self.unary_expr()?;
            lhs = Expr::bin(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, LangError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.next();
                let e = self.unary_expr()?;
                Ok(Expr::Un(UnOp::Not, Rc::new(e)))
            }
            Some(Tok::Minus) => {
                self.next();
                let e = self.unary_expr()?;
                Ok(Expr::Un(UnOp::Neg, Rc::new(e)))
            }
            _ => self.primary_expr(),
        }
    }

    fn primary_expr(&mut self) -> Result<Expr, LangError> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.next();
                Ok(Expr::lit(n))
            }
            Some(Tok::True) => {
                self.next();
                Ok(Expr::lit(1))
            }
            Some(Tok::False) => {
                self.next();
                Ok(Expr::lit(0))
            }
            Some(Tok::Ident(name)) => {
                self.next();
                Ok(Expr::Var(name))
            }
            Some(Tok::Head) => {
                self.next();
                self.expect(Tok::LParen, "'('")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Expr::Head(Rc::new(e)))
            }
            Some(Tok::Tail) => {
                self.next();
                self.expect(Tok::LParen, "'('")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Expr::Tail(Rc::new(e)))
            }
            Some(Tok::LParen) => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::LBrace) => {
                // set literal
                self.next();
                let mut elems = Vec::new();
                if self.peek() != Some(&Tok::RBrace) {
                    loop {
                        elems.push(self.expr()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.next();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrace, "'}'")?;
                Ok(Expr::SetOf(elems))
            }
            _ => Err(self.err("expected an expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_assignment() {
        let s = parse("b := a").unwrap();
        assert!(matches!(&*s, Stmt::Assign(v, Expr::Var(a)) if v == "b" && a == "a"));
    }

    #[test]
    fn empty_program_is_skip() {
        assert_eq!(*parse("").unwrap(), Stmt::Skip);
        assert_eq!(*parse("  \n # comment only\n").unwrap(), Stmt::Skip);
    }

    #[test]
    fn if_without_else_gets_implicit_skip() {
        let s = parse("if u = 1 then p := s").unwrap();
        match &*s {
            Stmt::If(_, _, e) => assert_eq!(**e, Stmt::Skip),
            other => panic!("expected if, got {other:?}"),
        }
    }

    #[test]
    fn parenthesised_statement_then_loop() {
        let s = parse("(if u = 1 then p := s); loop").unwrap();
        match &*s {
            Stmt::Seq(a, b) => {
                assert!(matches!(&**a, Stmt::If(..)));
                assert_eq!(**b, Stmt::Loop);
            }
            other => panic!("expected seq, got {other:?}"),
        }
    }

    #[test]
    fn newline_separates_statements() {
        let s = parse("a := 1\nb := 2").unwrap();
        assert!(matches!(&*s, Stmt::Seq(..)));
    }

    #[test]
    fn guard_with_xor_and_and() {
        let s = parse("if s && (u ^ h) = 1 then loop").unwrap();
        assert!(matches!(&*s, Stmt::If(..)));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse("a :=").unwrap_err();
        match err {
            LangError::Syntax { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn dangling_else_binds_to_nearest_if() {
        let s = parse("if a = 1 then if b = 1 then x := 1 else x := 2").unwrap();
        match &*s {
            Stmt::If(_, inner, outer_else) => {
                assert_eq!(**outer_else, Stmt::Skip);
                assert!(matches!(&**inner, Stmt::If(_, _, e) if !matches!(**e, Stmt::Skip)));
            }
            other => panic!("expected if, got {other:?}"),
        }
    }
}
