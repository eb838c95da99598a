//! Recursive-descent parser and precedence-aware printer for scalar expressions.
//!
//! Grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' '-'? INTEGER)?
//! primary := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! `VAR` is `x1`, `x2`, ...; `FUNC` is one of `sin`, `cos`, `exp`, `sqrt`.

use std::fmt;

use super::ParseError;

/// Built-in unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Binary arithmetic operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Expression tree. Variables are stored zero-based (`x1` is `Var(0)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Largest one-based variable index referenced, or 0 for constant trees.
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
            Expr::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// True when evaluation can hit a domain restriction (division, negative power, sqrt).
    pub fn has_guarded_ops(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Neg(a) => a.has_guarded_ops(),
            Expr::Pow(a, n) => *n < 0 || a.has_guarded_ops(),
            Expr::Call(f, a) => *f == Func::Sqrt || a.has_guarded_ops(),
            Expr::Binary(op, a, b) => {
                *op == BinOp::Div || a.has_guarded_ops() || b.has_guarded_ops()
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Pow(_, _) => 4,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(_, _) => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let paren = self.precedence() < min_prec;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::Const(c) => write!(f, "{c}")?,
            Expr::Var(i) => write!(f, "x{}", i + 1)?,
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_at(f, 3)?;
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                a.fmt_at(f, p)?;
                write!(f, "{}", op.symbol())?;
                b.fmt_at(f, p + 1)?;
            }
            Expr::Pow(a, n) => {
                a.fmt_at(f, 5)?;
                write!(f, "^{n}")?;
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.fmt_at(f, 0)?;
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    base: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str, base: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0, base };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let at = self.base + start;
        let Some(&c) = bytes.get(start) else {
            return Ok((Tok::End, at));
        };
        let single = |t| Ok((t, at));
        match c {
            b'+' => {
                self.pos += 1;
                single(Tok::Plus)
            }
            b'-' => {
                self.pos += 1;
                single(Tok::Minus)
            }
            b'*' => {
                self.pos += 1;
                single(Tok::Star)
            }
            b'/' => {
                self.pos += 1;
                single(Tok::Slash)
            }
            b'^' => {
                self.pos += 1;
                single(Tok::Caret)
            }
            b'(' => {
                self.pos += 1;
                single(Tok::LParen)
            }
            b')' => {
                self.pos += 1;
                single(Tok::RParen)
            }
            b'0'..=b'9' | b'.' => self.number(start),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Ok((Tok::Ident(self.src[start..self.pos].to_string()), at))
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                Err(ParseError::Syntax {
                    offset: at,
                    message: format!("unexpected character `{ch}`"),
                })
            }
        }
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        let digits = |pos: &mut usize| {
            let s = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - s
        };
        let mut pos = start;
        let int_digits = digits(&mut pos);
        let mut is_int = true;
        let mut frac_digits = 0;
        if pos < bytes.len() && bytes[pos] == b'.' {
            is_int = false;
            pos += 1;
            frac_digits = digits(&mut pos);
        }
        if int_digits + frac_digits == 0 {
            return Err(ParseError::Syntax {
                offset: self.base + start,
                message: "malformed number".into(),
            });
        }
        if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
            let mut p = pos + 1;
            if p < bytes.len() && (bytes[p] == b'+' || bytes[p] == b'-') {
                p += 1;
            }
            if digits(&mut p) == 0 {
                return Err(ParseError::Syntax {
                    offset: self.base + p,
                    message: "missing exponent digits".into(),
                });
            }
            is_int = false;
            pos = p;
        }
        self.pos = pos;
        let text = &self.src[start..pos];
        let at = self.base + start;
        if is_int {
            return Ok((Tok::Int(text.to_string()), at));
        }
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset: at,
            message: format!("invalid number `{text}`"),
        })?;
        Ok((Tok::Num(value), at))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn offset(&self) -> usize {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(text) => {
                let magnitude: i32 = match text.parse() {
                    Ok(v) => v,
                    Err(_) => return self.error("exponent out of range"),
                };
                self.bump();
                let n = if negative { -magnitude } else { magnitude };
                Ok(Expr::Pow(Box::new(base), n))
            }
            _ => self.error("exponent must be an integer literal"),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Int(text) => text.parse::<f64>().map(Expr::Const).map_err(|_| {
                ParseError::Syntax {
                    offset: at,
                    message: format!("invalid number `{text}`"),
                }
            }),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return self.error(format!("expected `(` after `{name}`"));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match parse_var(&name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(ParseError::UnknownIdentifier { name, offset: at }),
                }
            }
            Tok::End => Err(ParseError::Syntax {
                offset: at,
                message: "unexpected end of input".into(),
            }),
            other => Err(ParseError::Syntax {
                offset: at,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else if *self.peek() == Tok::End {
            self.error("unbalanced parenthesis")
        } else {
            self.error("expected `)`")
        }
    }
}

fn parse_var(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    digits.parse::<usize>().ok().map(|i| i - 1)
}

/// Parses one scalar expression. `base` is added to every reported byte offset.
pub fn parse_expression_at(src: &str, base: usize) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(src, base)?;
    let mut p = Parser { toks, idx: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}

/// Parses one scalar expression.
pub fn parse_expression(src: &str) -> Result<Expr, ParseError> {
    parse_expression_at(src, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(i: usize) -> Box<Expr> {
        Box::new(Expr::Var(i))
    }

    #[test]
    fn product_with_call() {
        let e = parse_expression("x1*cos(x2)").unwrap();
        assert_eq!(
            e,
            Expr::Binary(BinOp::Mul, var(0), Box::new(Expr::Call(Func::Cos, var(1))))
        );
        assert_eq!(e.max_var(), 2);
        assert_eq!(e.to_string(), "x1*cos(x2)");
    }

    #[test]
    fn unbalanced_paren_offset() {
        match parse_expression("cos(") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expression("1 - 2 - 3").unwrap();
        assert_eq!(e.to_string(), "1-2-3");
        let e = parse_expression("1 - (2 - 3)").unwrap();
        assert_eq!(e.to_string(), "1-(2-3)");
        let e = parse_expression("-x1^2").unwrap();
        assert!(matches!(e, Expr::Neg(_)));
        let e = parse_expression("(-x1)^2").unwrap();
        assert_eq!(e.to_string(), "(-x1)^2");
        let e = parse_expression("x1^-2").unwrap();
        assert_eq!(e, Expr::Pow(var(0), -2));
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_expression("2.5e-3").unwrap(), Expr::Const(2.5e-3));
        assert_eq!(parse_expression(".5").unwrap(), Expr::Const(0.5));
        assert!(parse_expression("1e").is_err());
    }

    #[test]
    fn rejects_fractional_power() {
        let err = parse_expression("x1^2.5").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 3, .. }), "{err:?}");
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_expression("y1 + 1").unwrap_err();
        assert!(matches!(err, ParseError::UnknownIdentifier { offset: 0, .. }));
        assert!(parse_expression("x0").is_err());
        assert!(parse_expression("tan(x1)").is_err());
    }

    #[test]
    fn trailing_garbage() {
        let err = parse_expression("x1 x2").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 3, .. }));
    }
}
