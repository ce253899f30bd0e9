//! Expression grammar for coefficients and shift exponents.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | factor
//! factor := atom ("^" ["-"] integer)?
//! atom   := number | "i" | "pi" | "t" | ident "(" expr ")" | "(" expr ")"
//! ident  := sin | cos | exp | log | log1p | abs | sqrt | atan
//! ```
//!
//! Expressions are functions of `t > 0`. They are evaluated at `t = e^x` with
//! a wide-range complex type, so `2/(1+t)` is exact at `x = +-1e10`.
//! [`Expr::derivative`] differentiates with respect to `x = log t`, which is
//! `t d/dt`.

use crate::wide::Wide;
use crate::{Error, Result, C64};
use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Log1p,
    Abs,
    Sqrt,
    Atan,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "log1p" => Func::Log1p,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "atan" => Func::Atan,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Log1p => "log1p",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(C64),
    T,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

fn num(v: f64) -> Expr {
    Expr::Num(C64::new(v, 0.0))
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(c) if c.re == v && c.im == 0.0)
}

fn add(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        return b;
    }
    if is_num(&b, 0.0) {
        return a;
    }
    Expr::Add(Box::new(a), Box::new(b))
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_num(&b, 0.0) {
        return a;
    }
    if is_num(&a, 0.0) {
        return neg(b);
    }
    Expr::Sub(Box::new(a), Box::new(b))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(c) => Expr::Num(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) || is_num(&b, 0.0) {
        return num(0.0);
    }
    if is_num(&a, 1.0) {
        return b;
    }
    if is_num(&b, 1.0) {
        return a;
    }
    if let (Expr::Num(x), Expr::Num(y)) = (&a, &b) {
        return Expr::Num(x * y);
    }
    Expr::Mul(Box::new(a), Box::new(b))
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_num(&a, 0.0) {
        return num(0.0);
    }
    if is_num(&b, 1.0) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

impl Expr {
    /// Parses an expression in the variable `t`.
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser { chars: src.chars().collect(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    /// True when the expression does not mention `t`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::T => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// Derivative with respect to `x = log t`.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Num(_) => num(0.0),
            Expr::T => Expr::T,
            Expr::Neg(a) => neg(a.derivative()),
            Expr::Add(a, b) => add(a.derivative(), b.derivative()),
            Expr::Sub(a, b) => sub(a.derivative(), b.derivative()),
            Expr::Mul(a, b) => add(
                mul(a.derivative(), (**b).clone()),
                mul((**a).clone(), b.derivative()),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.derivative(), (**b).clone()),
                    mul((**a).clone(), b.derivative()),
                ),
                Expr::Pow(b.clone(), 2),
            ),
            Expr::Pow(a, n) => {
                let da = a.derivative();
                if *n == 0 {
                    return num(0.0);
                }
                let base = if *n == 1 { num(1.0) } else { Expr::Pow(a.clone(), n - 1) };
                mul(mul(num(*n as f64), base), da)
            }
            Expr::Call(f, a) => {
                let da = a.derivative();
                if is_num(&da, 0.0) {
                    return num(0.0);
                }
                let a = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, a),
                    Func::Cos => neg(call(Func::Sin, a)),
                    Func::Exp => call(Func::Exp, a),
                    Func::Log => div(num(1.0), a),
                    Func::Log1p => div(num(1.0), add(num(1.0), a)),
                    Func::Abs => div(a.clone(), call(Func::Abs, a)),
                    Func::Sqrt => div(num(0.5), call(Func::Sqrt, a)),
                    Func::Atan => div(num(1.0), add(num(1.0), Expr::Pow(Box::new(a), 2))),
                };
                mul(outer, da)
            }
        }
    }

    /// Evaluates at `t = e^x`.
    pub fn eval_log(&self, x: f64) -> Result<C64> {
        let w = self.eval_wide(x);
        let v = w.to_c64();
        if !w.is_valid() || !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::EvaluationDomain {
                label: self.to_string(),
                x,
                reason: "non-finite value",
            });
        }
        Ok(v)
    }

    fn eval_wide(&self, x: f64) -> Wide {
        match self {
            Expr::Num(c) => Wide::from_c64(*c),
            Expr::T => Wide::exp_real(x),
            Expr::Neg(a) => a.eval_wide(x).neg(),
            Expr::Add(a, b) => a.eval_wide(x).add(b.eval_wide(x)),
            Expr::Sub(a, b) => a.eval_wide(x).sub(b.eval_wide(x)),
            Expr::Mul(a, b) => a.eval_wide(x).mul(b.eval_wide(x)),
            Expr::Div(a, b) => a.eval_wide(x).div(b.eval_wide(x)),
            Expr::Pow(a, n) => a.eval_wide(x).powi(*n),
            Expr::Call(f, a) => {
                let v = a.eval_wide(x);
                match f {
                    Func::Sin => v.map(|z| z.sin()),
                    Func::Cos => v.map(|z| z.cos()),
                    Func::Atan => v.map(|z| {
                        if z.im == 0.0 {
                            C64::new(num_traits::Float::atan(z.re), 0.0)
                        } else {
                            z.atan()
                        }
                    }),
                    Func::Exp => v.exp(),
                    Func::Log => v.ln(),
                    Func::Log1p => v.ln_1p(),
                    Func::Abs => v.abs(),
                    Func::Sqrt => v.sqrt(),
                }
            }
        }
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(c) if c.im != 0.0 || c.re < 0.0 => 1,
        _ => 5,
    }
}

struct Paren<'a>(&'a Expr, bool);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = prec(self);
        match self {
            Expr::Num(c) => {
                if c.im == 0.0 {
                    write!(f, "{}", c.re)
                } else if c.re == 0.0 {
                    write!(f, "{}*i", c.im)
                } else {
                    write!(f, "{}+{}*i", c.re, c.im)
                }
            }
            Expr::T => write!(f, "t"),
            Expr::Neg(a) => write!(f, "-{}", Paren(a, prec(a) < 4)),
            Expr::Add(a, b) => write!(f, "{} + {}", Paren(a, prec(a) < p), Paren(b, prec(b) <= p)),
            Expr::Sub(a, b) => write!(f, "{} - {}", Paren(a, prec(a) < p), Paren(b, prec(b) <= p)),
            Expr::Mul(a, b) => write!(f, "{}*{}", Paren(a, prec(a) < p), Paren(b, prec(b) <= p)),
            Expr::Div(a, b) => write!(f, "{}/{}", Paren(a, prec(a) < p), Paren(b, prec(b) <= p)),
            Expr::Pow(a, n) => {
                if *n < 0 {
                    write!(f, "{}^-{}", Paren(a, prec(a) <= p), -(*n as i64))
                } else {
                    write!(f, "{}^{}", Paren(a, prec(a) <= p), n)
                }
            }
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos + 1, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let negative = self.eat('-');
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected integer exponent"));
            }
            let s: String = self.chars[start..self.pos].iter().collect();
            let n: i32 = s.parse().map_err(|_| Error::Syntax { pos: start + 1, msg: "exponent too large".to_string() })?;
            return Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let c = match self.peek() {
            Some(c) => c,
            None => return Err(self.err("unexpected end of input")),
        };
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(e);
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let name: String = self.chars[start..self.pos].iter().collect();
            return match name.as_str() {
                "t" => Ok(Expr::T),
                "i" => Ok(Expr::Num(C64::new(0.0, 1.0))),
                "pi" => Ok(num(core::f64::consts::PI)),
                _ => match Func::from_name(&name) {
                    Some(f) => {
                        if !self.eat('(') {
                            return Err(self.err("expected `(` after function name"));
                        }
                        let arg = self.expr()?;
                        if !self.eat(')') {
                            return Err(self.err("expected `)`"));
                        }
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None => Err(Error::UnknownIdentifier { name, pos: start + 1 }),
                },
            };
        }
        Err(self.err("unexpected character"))
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Parser| {
            let s = p.pos;
            while p.pos < p.chars.len() && p.chars[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.pos < self.chars.len() && self.chars[self.pos] == '.' {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(Error::Syntax { pos: start + 1, msg: "malformed number".to_string() });
        }
        if self.pos < self.chars.len() && (self.chars[self.pos] == 'e' || self.chars[self.pos] == 'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.chars.len() && (self.chars[self.pos] == '+' || self.chars[self.pos] == '-') {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // not an exponent, leave `e` for the caller
                self.pos = save;
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Syntax { pos: start + 1, msg: "malformed number".to_string() })?;
        Ok(num(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> C64 {
        Expr::parse(s).unwrap().eval_log(x).unwrap()
    }

    #[test]
    fn precedence_and_unary_minus() {
        assert!((ev("1+2*3^2", 0.0).re - 19.0).abs() < 1e-15);
        assert!((ev("-t^2", 0.0).re + 1.0).abs() < 1e-15);
        assert!((ev("2^-1", 0.0).re - 0.5).abs() < 1e-15);
        assert!((ev("(1+i)*(1-i)", 0.0) - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((ev("1e-3*t", 0.0).re - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn endpoint_values_of_rational_coefficients() {
        assert!((ev("2/(1+t)", -1e10).re - 2.0).abs() < 1e-15);
        assert!(ev("2/(1+t)", 1e10).norm() < 1e-300);
        assert!((ev("2*t/(1+t)", 1e10).re - 2.0).abs() < 1e-15);
        assert!((ev("sin(log(1+abs(log(t))))", 1e10).re - (1e10f64 + 1.0).ln().sin()).abs() < 1e-12);
    }

    #[test]
    fn errors_carry_positions() {
        match Expr::parse("1 + foo(t)") {
            Err(Error::UnknownIdentifier { name, pos }) => {
                assert_eq!(name, "foo");
                assert_eq!(pos, 5);
            }
            other => panic!("{other:?}"),
        }
        match Expr::parse("2*(t+1") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("").is_err());
        assert!(Expr::parse("t t").is_err());
        assert!(Expr::parse("t^1.5").is_err());
    }

    #[test]
    fn derivative_in_log_coordinate() {
        let e = Expr::parse("0.3 + 0.2*sin(log(1 + log(t)^2))").unwrap();
        let d = e.derivative();
        for &x in &[-3.0, -0.4, 0.0, 0.7, 5.0] {
            let h = 1e-5;
            let fd = (e.eval_log(x + h).unwrap() - e.eval_log(x - h).unwrap()) / (2.0 * h);
            assert!((d.eval_log(x).unwrap() - fd).norm() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["2/(1+t)", "-t^2 + 3*t", "0.3 + 0.2*sin(log(1 + log(t)^2))", "exp(-t)/(1 - i*t)^-2", "1 - (t - 2)"] {
            let e = Expr::parse(s).unwrap();
            let back = Expr::parse(&e.to_string()).unwrap();
            for &x in &[-1.0, 0.2, 1.3] {
                assert!((e.eval_log(x).unwrap() - back.eval_log(x).unwrap()).norm() < 1e-14, "{s} -> {e}");
            }
        }
    }
}
