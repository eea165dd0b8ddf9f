//! Arithmetic expressions over grid coordinates.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     = product (('+' | '-') product)*
//! product = unary (('*' | '/') unary)*
//! unary   = '-' unary | power
//! power   = atom ('^' unary)?
//! atom    = number | "inf" | x1..xn | x (1-D only) | name '(' args ')' | norm | '(' sum ')'
//! ```
//!
//! Functions: `abs`, `exp`, `exp2`, `sqrt`, `min`, `max` (two or more
//! arguments) and `norm` (the Euclidean norm of `x` when bare, of its
//! arguments otherwise). `inf` is `+∞`; an expression that evaluates to NaN or
//! `-∞` is an error.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at offset {}: {}", self.pos, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Abs,
    Exp,
    Exp2,
    Sqrt,
    Min,
    Max,
    Norm,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Coord(usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression in `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text.parse::<f64>().map_err(|_| ParseError {
                pos: start,
                msg: format!("bad number {text:?}"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError {
                pos: i,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    dim: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected {c:?}"))
        }
    }

    fn sum(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym(c @ ('+' | '-'))) => *c,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym(c @ ('*' | '/'))) => *c,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn args(&mut self) -> Result<Vec<Node>, ParseError> {
        self.expect('(')?;
        let mut args = vec![self.sum()?];
        while self.eat(',') {
            args.push(self.sum()?);
        }
        self.expect(')')?;
        Ok(args)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Sym(c) => self.err(format!("unexpected {c:?}")),
            Tok::Ident(name) => {
                let at = self.offset();
                self.pos += 1;
                self.ident(&name, at)
            }
        }
    }

    fn ident(&mut self, name: &str, at: usize) -> Result<Node, ParseError> {
        let func = match name {
            "inf" => return Ok(Node::Num(f64::INFINITY)),
            "x" if self.dim == 1 => return Ok(Node::Coord(0)),
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "exp2" => Func::Exp2,
            "sqrt" => Func::Sqrt,
            "min" => Func::Min,
            "max" => Func::Max,
            "norm" => {
                if self.peek() == Some(&Tok::Sym('(')) {
                    return Ok(Node::Call(Func::Norm, self.args()?));
                }
                return Ok(Node::Call(Func::Norm, (0..self.dim).map(Node::Coord).collect()));
            }
            _ => {
                if let Some(k) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if (1..=self.dim).contains(&k) {
                        return Ok(Node::Coord(k - 1));
                    }
                    return Err(ParseError {
                        pos: at,
                        msg: format!("coordinate {name} outside x1..x{}", self.dim),
                    });
                }
                return Err(ParseError {
                    pos: at,
                    msg: format!("unknown name {name:?}"),
                });
            }
        };
        let args = self.args()?;
        let ok = match func {
            Func::Min | Func::Max => args.len() >= 2,
            _ => args.len() == 1,
        };
        if !ok {
            return Err(ParseError {
                pos: at,
                msg: format!("wrong number of arguments for {name}"),
            });
        }
        Ok(Node::Call(func, args))
    }
}

impl Expr {
    pub fn parse(src: &str, dim: usize) -> Result<Expr, ParseError> {
        let toks = tokenize(src)?;
        let mut p = Parser {
            toks: &toks,
            pos: 0,
            dim,
            end: src.len(),
        };
        let root = p.sum()?;
        if p.pos != toks.len() {
            return p.err("trailing input");
        }
        Ok(Expr { root, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Value at `x`; may be `+∞`, never NaN.
    pub fn eval(&self, x: &[f64]) -> Result<f64, String> {
        let v = eval(&self.root, x);
        if v.is_nan() {
            Err(format!("expression is undefined at {x:?}"))
        } else if v == f64::NEG_INFINITY {
            Err(format!("expression is -inf at {x:?}"))
        } else {
            Ok(v)
        }
    }
}

fn eval(node: &Node, x: &[f64]) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Coord(k) => x[*k],
        Node::Neg(a) => -eval(a, x),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, x), eval(b, x));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => a.powf(b),
            }
        }
        Node::Call(f, args) => {
            let mut vals = args.iter().map(|a| eval(a, x));
            match f {
                Func::Abs => vals.next().unwrap().abs(),
                Func::Exp => vals.next().unwrap().exp(),
                Func::Exp2 => vals.next().unwrap().exp2(),
                Func::Sqrt => vals.next().unwrap().sqrt(),
                Func::Min => vals.fold(f64::INFINITY, f64::min),
                Func::Max => vals.fold(f64::NEG_INFINITY, f64::max),
                Func::Norm => vals.map(|v| v * v).sum::<f64>().sqrt(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: &[f64]) -> f64 {
        Expr::parse(src, x.len()).unwrap().eval(x).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[0.0]), 7.0);
        assert_eq!(ev("(1 + 2) * 3", &[0.0]), 9.0);
        assert_eq!(ev("8 / 4 / 2", &[0.0]), 1.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[0.0]), 512.0);
        assert_eq!(ev("-x^2", &[3.0]), -9.0);
        assert_eq!(ev("2^-1", &[0.0]), 0.5);
        assert_eq!(ev("1e-2 * 100", &[0.0]), 1.0);
    }

    #[test]
    fn functions_and_coordinates() {
        assert_eq!(ev("exp2(x1)", &[-3.0]), 0.125);
        assert_eq!(ev("-abs(x) + 2", &[-1.5]), 0.5);
        assert_eq!(ev("max(x1, x2, 0)", &[-1.0, -2.0]), 0.0);
        assert_eq!(ev("min(x1, x2)", &[-1.0, -2.0]), -2.0);
        assert_eq!(ev("norm", &[3.0, 4.0]), 5.0);
        assert_eq!(ev("norm(x1 - 3, x2)", &[0.0, 4.0]), 5.0);
        assert_eq!(ev("exp(0)", &[1.0]), 1.0);
        assert_eq!(ev("inf", &[1.0]), f64::INFINITY);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Expr::parse("x3", 2).is_err());
        assert!(Expr::parse("x", 2).is_err());
        assert!(Expr::parse("1 +", 1).is_err());
        assert!(Expr::parse("foo(1)", 1).is_err());
        assert!(Expr::parse("max(1)", 1).is_err());
        assert!(Expr::parse("1 2", 1).is_err());
        assert!(Expr::parse("1 $ 2", 1).is_err());
        assert!(Expr::parse("sqrt(x)", 1).unwrap().eval(&[-1.0]).is_err());
        assert!(Expr::parse("-inf", 1).unwrap().eval(&[0.0]).is_err());
    }
}
