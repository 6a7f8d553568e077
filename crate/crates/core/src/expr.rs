//! Arithmetic expressions over the coordinates x, y, z.
//!
//! Grammar: `+ - * / ^` with unary minus, parentheses, and the functions
//! `exp`, `cosh`, `sinh`. Powers bind tighter than `*` and associate right.

use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Cosh,
    Sinh,
}

#[derive(Clone, Debug)]
pub enum PowExp {
    Int(i32),
    Real(f64),
    Dynamic(Box<Expr>),
}

#[derive(Clone, Debug)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, PowExp),
    Call(Func, Box<Expr>),
}

#[derive(Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // exponent part, e.g. 1e-3
                if i < bytes.len()
                    && matches!(bytes[i] as char, 'e' | 'E')
                    && i + 1 < bytes.len()
                    && matches!(bytes[i + 1] as char, '0'..='9' | '+' | '-')
                {
                    i += 2;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                let lit = &text[start..i];
                let v: f64 = lit
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number literal '{lit}'")))?;
                out.push(Token::Num(v));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push(Token::Ident(text[start..i].to_string()));
            }
            _ => return Err(Error::Parse(format!("unexpected character '{c}'"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: Token) -> Result<()> {
        match self.next() {
            Some(got) if *got == t => Ok(()),
            other => Err(Error::Parse(format!("expected {t:?}, found {other:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Token::Minus) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), classify_exponent(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Const(*v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.eat(Token::RParen)?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                let name = name.clone();
                match name.as_str() {
                    "x" => Ok(Expr::Var(Var::X)),
                    "y" => Ok(Expr::Var(Var::Y)),
                    "z" => Ok(Expr::Var(Var::Z)),
                    "exp" | "cosh" | "sinh" => {
                        let func = match name.as_str() {
                            "exp" => Func::Exp,
                            "cosh" => Func::Cosh,
                            _ => Func::Sinh,
                        };
                        self.eat(Token::LParen)?;
                        let arg = self.expr()?;
                        self.eat(Token::RParen)?;
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                    _ => Err(Error::Parse(format!("unknown identifier '{name}'"))),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

fn classify_exponent(exp: Expr) -> PowExp {
    match exp.fold_const() {
        Some(v) if v.fract() == 0.0 && v.abs() <= 64.0 => PowExp::Int(v as i32),
        Some(v) => PowExp::Real(v),
        None => PowExp::Dynamic(Box::new(exp)),
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let tokens = tokenize(text)?;
        if tokens.is_empty() {
            return Err(Error::Parse("empty expression".into()));
        }
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!(
                "trailing input at token {:?}",
                p.tokens[p.pos]
            )));
        }
        Ok(e)
    }

    /// Evaluate with dual-number arithmetic; `assign` supplies each variable.
    pub fn eval<const N: usize>(&self, assign: &impl Fn(Var) -> Dual<N>) -> Dual<N> {
        match self {
            Expr::Const(c) => Dual::constant(*c),
            Expr::Var(v) => assign(*v),
            Expr::Add(a, b) => a.eval(assign) + b.eval(assign),
            Expr::Sub(a, b) => a.eval(assign) - b.eval(assign),
            Expr::Mul(a, b) => a.eval(assign) * b.eval(assign),
            Expr::Div(a, b) => a.eval(assign) / b.eval(assign),
            Expr::Neg(a) => -a.eval(assign),
            Expr::Pow(a, k) => {
                let base = a.eval(assign);
                match k {
                    PowExp::Int(k) => base.powi(*k),
                    PowExp::Real(p) => base.powf(*p),
                    PowExp::Dynamic(e) => (e.eval(assign) * base.ln()).exp(),
                }
            }
            Expr::Call(f, a) => {
                let arg = a.eval(assign);
                match f {
                    Func::Exp => arg.exp(),
                    Func::Cosh => arg.cosh(),
                    Func::Sinh => arg.sinh(),
                }
            }
        }
    }

    pub fn value(&self, x: f64, y: f64, z: f64) -> f64 {
        self.eval::<0>(&|v| {
            Dual::constant(match v {
                Var::X => x,
                Var::Y => y,
                Var::Z => z,
            })
        })
        .re
    }

    fn fold_const(&self) -> Option<f64> {
        if self.uses_any_var() {
            return None;
        }
        Some(self.value(0.0, 0.0, 0.0))
    }

    fn uses_any_var(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.uses_any_var() || b.uses_any_var()
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.uses_any_var(),
            Expr::Pow(a, k) => {
                a.uses_any_var()
                    || match k {
                        PowExp::Dynamic(e) => e.uses_any_var(),
                        _ => false,
                    }
            }
        }
    }

    pub fn uses_var(&self, var: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.uses_var(var) || b.uses_var(var)
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.uses_var(var),
            Expr::Pow(a, k) => {
                a.uses_var(var)
                    || match k {
                        PowExp::Dynamic(e) => e.uses_var(var),
                        _ => false,
                    }
            }
        }
    }

    /// Expand into a polynomial in `var`, if the expression is one.
    pub fn as_polynomial(&self, var: Var) -> Option<Poly> {
        match self {
            Expr::Const(c) => Some(Poly::constant(*c)),
            Expr::Var(v) if *v == var => Some(Poly::new(vec![0.0, 1.0])),
            Expr::Var(_) => None,
            Expr::Add(a, b) => Some(a.as_polynomial(var)?.add(&b.as_polynomial(var)?)),
            Expr::Sub(a, b) => Some(
                a.as_polynomial(var)?
                    .add(&b.as_polynomial(var)?.scale(-1.0)),
            ),
            Expr::Mul(a, b) => Some(a.as_polynomial(var)?.mul(&b.as_polynomial(var)?)),
            Expr::Div(a, b) => {
                let d = b.as_polynomial(var)?;
                if d.degree() == 0 && !d.is_zero() {
                    Some(a.as_polynomial(var)?.scale(1.0 / d.coeffs()[0]))
                } else {
                    None
                }
            }
            Expr::Neg(a) => Some(a.as_polynomial(var)?.scale(-1.0)),
            Expr::Pow(a, PowExp::Int(k)) if *k >= 0 => Some(a.as_polynomial(var)?.pow(*k as u32)),
            Expr::Pow(..) => None,
            Expr::Call(..) => None,
        }
    }

    // Precedence levels for printing: 1 additive, 2 multiplicative,
    // 3 unary minus, 4 power base.
    fn fmt_prec(&self, f: &mut std::fmt::Formatter<'_>, parent: u8) -> std::fmt::Result {
        let prec = match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 => 3,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        };
        if prec < parent {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => write!(f, "{c}")?,
            Expr::Var(Var::X) => write!(f, "x")?,
            Expr::Var(Var::Y) => write!(f, "y")?,
            Expr::Var(Var::Z) => write!(f, "z")?,
            Expr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 1)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 2)?;
            }
            Expr::Pow(a, k) => {
                a.fmt_prec(f, 5)?;
                match k {
                    PowExp::Int(k) if *k < 0 => write!(f, "^({k})")?,
                    PowExp::Int(k) => write!(f, "^{k}")?,
                    PowExp::Real(r) if *r < 0.0 => write!(f, "^({r})")?,
                    PowExp::Real(r) => write!(f, "^{r}")?,
                    PowExp::Dynamic(e) => write!(f, "^({e})")?,
                }
            }
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Exp => "exp",
                    Func::Cosh => "cosh",
                    Func::Sinh => "sinh",
                };
                write!(f, "{name}({a})")?;
            }
        }
        if prec < parent {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.fmt_prec(f, 0)
    }
}
