//! Small expression language for analytic fields.
//!
//! Grammar: numbers, `pi`, the coordinate names `q1`/`t` (first torus
//! coordinate), `q2`/`x` (second), `xi` (argument of one-variable profiles),
//! the functions `sin cos tan exp log sqrt tanh`, binary `+ - * / ^` and
//! unary minus. Evaluation runs on [`Jet`]s so every field built from an
//! expression carries exact first and second partials.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    U1,
    U2,
    Xi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    src: String,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if let Some((pos, tok)) = p.tokens.get(p.pos) {
            return Err(Error::Parse {
                pos: *pos,
                msg: format!("unexpected token {tok:?}"),
            });
        }
        Ok(Expr {
            src: src.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn uses(&self, var: Var) -> bool {
        fn walk(n: &Node, var: Var) -> bool {
            match n {
                Node::Num(_) => false,
                Node::Var(v) => *v == var,
                Node::Neg(a) | Node::Call(_, a) => walk(a, var),
                Node::Bin(_, a, b) => walk(a, var) || walk(b, var),
            }
        }
        walk(&self.root, var)
    }

    /// Evaluate with jets bound to the coordinates and the profile variable.
    pub fn eval_jet(&self, u1: Jet, u2: Jet, xi: Jet) -> Jet {
        eval(&self.root, &[u1, u2, xi])
    }

    /// Evaluate as a field on the torus: value and partials at `(u1, u2)`.
    pub fn eval_field(&self, u1: f64, u2: f64) -> Jet {
        self.eval_jet(Jet::var1(u1), Jet::var2(u2), Jet::constant(0.0))
    }

    /// Evaluate as a profile of `xi` carried by the first jet slot.
    pub fn eval_profile(&self, xi: Jet) -> Jet {
        self.eval_jet(Jet::constant(0.0), Jet::constant(0.0), xi)
    }

    pub fn value(&self, u1: f64, u2: f64, xi: f64) -> f64 {
        self.eval_jet(Jet::constant(u1), Jet::constant(u2), Jet::constant(xi))
            .v
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

fn eval(n: &Node, vars: &[Jet; 3]) -> Jet {
    match n {
        Node::Num(c) => Jet::constant(*c),
        Node::Var(Var::U1) => vars[0],
        Node::Var(Var::U2) => vars[1],
        Node::Var(Var::Xi) => vars[2],
        Node::Neg(a) => -eval(a, vars),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, vars), eval(b, vars));
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a / b,
                BinOp::Pow => a.pow(&b),
            }
        }
        Node::Call(f, a) => {
            let a = eval(a, vars);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Tanh => a.tanh(),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i].1 == 'e' || chars[i].1 == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j].1 == '+' || chars[j].1 == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].1.is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].1.is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().map(|(_, c)| *c).collect();
                let v = text.parse::<f64>().map_err(|_| Error::Parse {
                    pos,
                    msg: format!("bad number {text:?}"),
                })?;
                out.push((pos, Tok::Num(v)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().map(|(_, c)| *c).collect();
                out.push((pos, Tok::Ident(text)));
            }
            '+' | '-' | '*' | '/' | '^' => {
                out.push((pos, Tok::Op(c)));
                i += 1;
            }
            '\u{2212}' => {
                out.push((pos, Tok::Op('-')));
                i += 1;
            }
            '(' => {
                out.push((pos, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((pos, Tok::RParen));
                i += 1;
            }
            _ => {
                return Err(Error::Parse {
                    pos,
                    msg: format!("unexpected character {c:?}"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .or_else(|| self.tokens.last().map(|(p, _)| p + 1))
            .unwrap_or(0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.here(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "tan" => Some(Func::Tan),
                    "exp" => Some(Func::Exp),
                    "log" | "ln" => Some(Func::Log),
                    "sqrt" => Some(Func::Sqrt),
                    "tanh" => Some(Func::Tanh),
                    _ => None,
                };
                if let Some(f) = func {
                    if self.peek() != Some(&Tok::LParen) {
                        self.pos -= 1;
                        return self.err(format!("expected '(' after {name}"));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    "q1" | "t" => Ok(Node::Var(Var::U1)),
                    "q2" | "x" => Ok(Node::Var(Var::U2)),
                    "xi" => Ok(Node::Var(Var::Xi)),
                    _ => {
                        self.pos -= 1;
                        self.err(format!("unknown identifier {name:?}"))
                    }
                }
            }
            other => {
                self.pos -= 1;
                self.err(format!("unexpected token {other:?}"))
            }
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            self.err("expected ')'")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn precedence_and_associativity() {
        let e = Expr::parse("1 + 2*3^2 - 8/4/2").unwrap();
        assert_eq!(e.value(0.0, 0.0, 0.0), 1.0 + 18.0 - 1.0);
        assert_eq!(Expr::parse("-2^2").unwrap().value(0.0, 0.0, 0.0), -4.0);
        assert_eq!(Expr::parse("2^3^2").unwrap().value(0.0, 0.0, 0.0), 512.0);
        assert_eq!(Expr::parse("1.5e-1*2").unwrap().value(0.0, 0.0, 0.0), 0.3);
    }

    #[test]
    fn coordinates_and_aliases() {
        let e = Expr::parse("q1 + 10*x").unwrap();
        assert_eq!(e.value(1.0, 2.0, 0.0), 21.0);
        let e = Expr::parse("t*q2").unwrap();
        let j = e.eval_field(3.0, 5.0);
        assert_eq!((j.v, j.d1, j.d2, j.d12), (15.0, 5.0, 3.0, 1.0));
        assert!(!e.uses(Var::Xi));
    }

    #[test]
    fn profile_derivatives() {
        let e = Expr::parse("2+0.3*sin(2*pi*xi)").unwrap();
        let j = e.eval_profile(Jet::var1(0.1));
        assert!((j.d1 - 0.3 * 2.0 * PI * (0.2 * PI).cos()).abs() < 1e-14);
        assert!((j.d11 + 0.3 * 4.0 * PI * PI * (0.2 * PI).sin()).abs() < 1e-12);
    }

    #[test]
    fn errors_are_positioned() {
        assert!(matches!(Expr::parse("1 + foo"), Err(Error::Parse { pos: 4, .. })));
        assert!(Expr::parse("sin 2").is_err());
        assert!(Expr::parse("(1+2").is_err());
        assert!(Expr::parse("1 2").is_err());
        assert!(Expr::parse("").is_err());
        assert!(Expr::parse("3 $ 4").is_err());
    }

    #[test]
    fn unicode_minus() {
        assert_eq!(Expr::parse("3 − 1").unwrap().value(0.0, 0.0, 0.0), 2.0);
    }
}
