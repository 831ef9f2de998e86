//! Hand-rolled lexer. Newlines are statement separators, `#` starts a
//! line comment.

use super::LangError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    // keywords
    Skip,
    If,
    Then,
    Else,
    While,
    Do,
    For,
    Loop,
    Endorse,
    Output,
    Input,
    True,
    False,
    Head,
    Tail,
    // punctuation / operators
    Assign,
    Sep, // ';' or newline
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    DotDot,
    Plus,
    Minus,
    Star,
    Eq,
    Ne,
    Lt,
    And,
    Or,
    Not,
    Xor,
    Cons,
    Union,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(src: &str) -> Result<Vec<Token>, LangError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    macro_rules! push {
        ($t:expr) => {
            out.push(Token {
                tok: $t,
                line,
                col,
            })
        };
    }

    while let Some(&c) = chars.peek() {
        let start_col = col;
        match c {
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '\n' => {
                chars.next();
                out.push(Token {
                    tok: Tok::Sep,
                    line,
                    col,
                });
                line += 1;
                col = 1;
            }
            '#' => {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            ';' => {
                chars.next();
                col += 1;
                push!(Tok::Sep);
            }
            '(' => {
                chars.next();
                col += 1;
                push!(Tok::LParen);
            }
            ')' => {
                chars.next();
                col += 1;
                push!(Tok::RParen);
            }
            '{' => {
                chars.next();
                col += 1;
                push!(Tok::LBrace);
            }
            '}' => {
                chars.next();
                col += 1;
                push!(Tok::RBrace);
            }
            ',' => {
                chars.next();
                col += 1;
                push!(Tok::Comma);
            }
            '+' => {
                chars.next();
                col += 1;
                push!(Tok::Plus);
            }
            '-' => {
                chars.next();
                col += 1;
                push!(Tok::Minus);
            }
            '*' => {
                chars.next();
                col += 1;
                push!(Tok::Star);
            }
            '=' => {
                chars.next();
                col += 1;
                push!(Tok::Eq);
            }
            '<' => {
                chars.next();
                col += 1;
                push!(Tok::Lt);
            }
            '^' | '⊕' => {
                chars.next();
                col += 1;
                push!(Tok::Xor);
            }
            '≠' => {
                chars.next();
                col += 1;
                push!(Tok::Ne);
            }
            '¬' => {
                chars.next();
                col += 1;
                push!(Tok::Not);
            }
            '∧' => {
                chars.next();
                col += 1;
                push!(Tok::And);
            }
            '∨' => {
                chars.next();
                col += 1;
                push!(Tok::Or);
            }
            '∪' => {
                chars.next();
                col += 1;
                push!(Tok::Union);
            }
            '!' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push!(Tok::Ne);
                } else {
                    push!(Tok::Not);
                }
            }
            '&' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'&') {
                    chars.next();
                    col += 1;
                }
                push!(Tok::And);
            }
            '|' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'|') {
                    chars.next();
                    col += 1;
                }
                push!(Tok::Or);
            }
            ':' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('=') => {
                        chars.next();
                        col += 1;
                        push!(Tok::Assign);
                    }
                    Some(':') => {
                        chars.next();
                        col += 1;
                        push!(Tok::Cons);
                    }
                    _ => {
                        return Err(LangError::Syntax {
                            line,
                            col: start_col,
                            msg: "expected ':=' or '::'".into(),
                        })
                    }
                }
            }
            '\\' => {
                // set union written '\/'
                chars.next();
                col += 1;
                if chars.peek() == Some(&'/') {
                    chars.next();
                    col += 1;
                    push!(Tok::Union);
                } else {
                    return Err(LangError::Syntax {
                        line,
                        col: start_col,
                        msg: "expected '\\/'".into(),
                    });
                }
            }
            '.' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'.') {
                    chars.next();
                    col += 1;
                    push!(Tok::DotDot);
                } else {
                    return Err(LangError::Syntax {
                        line,
                        col: start_col,
                        msg: "expected '..'".into(),
                    });
                }
            }
            c if c.is_ascii_digit() => {
                let mut n: i64 = 0;
                while let Some(&d) = chars.peek() {
                    if let Some(digit) = d.to_digit(10) {
                        n = n
                            .checked_mul(10)
                            .and_then(|n| n.checked_add(digit as i64))
                            .ok_or(LangError::Syntax {
                                line,
                                col: start_col,
                                msg: "integer literal overflows".into(),
                            })?;
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                push!(Tok::Int(n));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' {
                        word.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let tok = match word.as_str() {
                    "skip" => Tok::Skip,
                    "if" => Tok::If,
                    "then" => Tok::Then,
                    "else" => Tok::Else,
                    "while" => Tok::While,
                    "do" => Tok::Do,
                    "for" => Tok::For,
                    "loop" => Tok::Loop,
                    "endorse" => Tok::Endorse,
                    "output" => Tok::Output,
                    "input" => Tok::Input,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "head" => Tok::Head,
                    "tail" => Tok::Tail,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "xor" => Tok::Xor,
                    "union" => Tok::Union,
                    _ => Tok::Ident(word),
                };
                push!(tok);
            }
            other => {
                return Err(LangError::Syntax {
                    line,
                    col: start_col,
                    msg: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(out)
}
