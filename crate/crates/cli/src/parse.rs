//! Text grammar for scalars, fields and symbols.
//!
//! ```text
//! symbol  := header? sum
//! header  := 'basis=' ('T'|'D') 'floor=' integer ':'
//! sum     := ('+'|'-')? product (('+'|'-') product)*
//! product := power (('*'|'/') power)*
//! power   := atom ('^' ('+'|'-')? integer)?
//! atom    := integer | 'q' | 'z' | 'T' | 'D' | '(' sum ')'
//! ```
//!
//! A term may carry at most one operator factor, and it must come last, so
//! `z*T^1` is accepted and `T^1*z` is not. Division is by nonzero scalars
//! and monomials only.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use qsym::poisson::{OneForm, PhaseWindow};
use qsym::{Basis, Coeff, LaurentField, QScalar, Symbol};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

pub type ParseResult<T> = Result<T, ParseError>;

// ---- lexer ----

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Int(BigInt),
    Word(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
    Colon,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> ParseResult<Vec<Token>> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let tok = if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            column += i - start;
            out.push(Token { tok: Tok::Int(s.parse().unwrap()), line: l0, column: c0 });
            continue;
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            column += i - start;
            out.push(Token { tok: Tok::Word(s), line: l0, column: c0 });
            continue;
        } else {
            match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '=' => Tok::Eq,
                ':' => Tok::Colon,
                _ => return Err(ParseError { line, column, message: format!("unexpected character '{c}'") }),
            }
        };
        out.push(Token { tok, line: l0, column: c0 });
        i += 1;
        column += 1;
    }
    out.push(Token { tok: Tok::End, line, column });
    Ok(out)
}

// ---- values ----

/// `coeff * B^k`, or a pure coefficient.
#[derive(Clone, Debug)]
struct Term {
    coeff: LaurentField,
    op: Option<(Basis, i64)>,
}

/// A parsed sum of terms.
#[derive(Clone, Debug)]
struct Value {
    terms: Vec<Term>,
}

impl Value {
    fn field(f: LaurentField) -> Self {
        Value { terms: vec![Term { coeff: f, op: None }] }
    }

    fn has_op(&self) -> bool {
        self.terms.iter().any(|t| t.op.is_some())
    }

    /// The value as a plain field, if it has no operator factor.
    fn as_field(&self) -> Option<LaurentField> {
        if self.has_op() {
            return None;
        }
        Some(self.terms.iter().fold(LaurentField::zero(), |a, t| a.add(&t.coeff)))
    }

    fn neg(mut self) -> Self {
        for t in &mut self.terms {
            t.coeff = t.coeff.neg();
        }
        self
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn err_at<T>(&self, t: &Token, msg: impl Into<String>) -> ParseResult<T> {
        Err(ParseError { line: t.line, column: t.column, message: msg.into() })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> ParseResult<Token> {
        let t = self.next();
        if t.tok == tok {
            Ok(t)
        } else {
            self.err_at(&t, format!("expected {what}"))
        }
    }

    fn integer(&mut self) -> ParseResult<i64> {
        let mut neg = false;
        match self.peek().tok {
            Tok::Minus => {
                neg = true;
                self.next();
            }
            Tok::Plus => {
                self.next();
            }
            _ => {}
        }
        let t = self.next();
        match &t.tok {
            Tok::Int(v) => {
                let v: i64 = match i64::try_from(v) {
                    Ok(v) => v,
                    Err(_) => return self.err_at(&t, "integer out of range"),
                };
                Ok(if neg { -v } else { v })
            }
            _ => self.err_at(&t, "expected an integer"),
        }
    }

    fn sum(&mut self) -> ParseResult<Value> {
        let mut negate = false;
        match self.peek().tok {
            Tok::Minus => {
                self.next();
                negate = true;
            }
            Tok::Plus => {
                self.next();
            }
            _ => {}
        }
        let first = self.product()?;
        let mut acc = if negate { first.neg() } else { first };
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    acc.terms.extend(self.product()?.terms);
                }
                Tok::Minus => {
                    self.next();
                    acc.terms.extend(self.product()?.neg().terms);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> ParseResult<Value> {
        let mut acc = self.power()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.next();
                    let at = self.peek().clone();
                    let rhs = self.power()?;
                    acc = self.multiply(acc, rhs, &at)?;
                }
                Tok::Slash => {
                    self.next();
                    let at = self.peek().clone();
                    let rhs = self.power()?;
                    let inv = match rhs.as_field().and_then(|f| invert_monomial(&f)) {
                        Some(f) => f,
                        None => return self.err_at(&at, "division is only by a nonzero scalar or monomial"),
                    };
                    acc = self.multiply(acc, Value::field(inv), &at)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn multiply(&self, a: Value, b: Value, at: &Token) -> ParseResult<Value> {
        if let Some(f) = a.as_field() {
            let terms = b.terms.into_iter().map(|t| Term { coeff: f.mul(&t.coeff), op: t.op }).collect();
            return Ok(Value { terms });
        }
        match b.as_field() {
            // a trailing scalar commutes with the operator
            Some(f) if f.as_monomial().is_some_and(|(_, k)| k == 0) || f.is_zero() => {
                let terms = a.terms.into_iter().map(|t| Term { coeff: t.coeff.mul(&f), op: t.op }).collect();
                Ok(Value { terms })
            }
            _ => self.err_at(at, "the operator factor must be the last factor of a term"),
        }
    }

    fn power(&mut self) -> ParseResult<Value> {
        let at = self.peek().clone();
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.next();
        let k = self.integer()?;
        if base.terms.len() == 1 && base.terms[0].coeff == LaurentField::one() {
            if let Some((b, e)) = base.terms[0].op {
                return Ok(Value { terms: vec![Term { coeff: LaurentField::one(), op: Some((b, e * k)) }] });
            }
        }
        let f = match base.as_field() {
            Some(f) => f,
            None => return self.err_at(&at, "only fields and bare operators can be raised to a power"),
        };
        let f = if k < 0 {
            match invert_monomial(&f) {
                Some(inv) => inv,
                None => return self.err_at(&at, "negative powers need a nonzero scalar or monomial base"),
            }
        } else {
            f
        };
        let mut acc = LaurentField::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&f);
        }
        Ok(Value::field(acc))
    }

    fn atom(&mut self) -> ParseResult<Value> {
        let t = self.next();
        match &t.tok {
            Tok::Int(v) => Ok(Value::field(LaurentField::constant(QScalar::from_bigint(v.clone())))),
            Tok::Word(w) => match w.as_str() {
                "q" => Ok(Value::field(LaurentField::constant(QScalar::q()))),
                "z" => Ok(Value::field(LaurentField::z_pow(1))),
                "T" => Ok(Value { terms: vec![Term { coeff: LaurentField::one(), op: Some((Basis::T, 1)) }] }),
                "D" => Ok(Value { terms: vec![Term { coeff: LaurentField::one(), op: Some((Basis::D, 1)) }] }),
                _ => self.err_at(&t, format!("unknown name '{w}'")),
            },
            Tok::LParen => {
                let v = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(v)
            }
            Tok::End => self.err_at(&t, "unexpected end of input"),
            _ => self.err_at(&t, "expected a number, q, z, T, D or '('"),
        }
    }

    fn finish(&mut self) -> ParseResult<()> {
        let t = self.next();
        if t.tok == Tok::End {
            Ok(())
        } else {
            self.err_at(&t, "unexpected trailing input")
        }
    }

    /// `basis=X floor=F :`, if present.
    fn header(&mut self) -> ParseResult<(Option<Basis>, Option<i64>)> {
        let (mut basis, mut floor) = (None, None);
        let mut seen = false;
        loop {
            let t = self.peek().clone();
            let key = match &t.tok {
                Tok::Word(w) if (w == "basis" || w == "floor") && self.toks[self.pos + 1].tok == Tok::Eq => w.clone(),
                _ => break,
            };
            seen = true;
            self.next();
            self.next();
            if key == "basis" {
                let v = self.next();
                basis = Some(match &v.tok {
                    Tok::Word(b) if b == "T" => Basis::T,
                    Tok::Word(b) if b == "D" => Basis::D,
                    _ => return self.err_at(&v, "basis must be T or D"),
                });
            } else {
                floor = Some(self.integer()?);
            }
        }
        if seen {
            self.expect(Tok::Colon, "':' after the header")?;
        }
        Ok((basis, floor))
    }
}

fn invert_monomial(f: &LaurentField) -> Option<LaurentField> {
    let (c, k) = f.as_monomial()?;
    if c.is_zero() {
        return None;
    }
    Some(LaurentField::monomial(c.inv(), -k))
}

fn parser(text: &str) -> ParseResult<Parser> {
    Ok(Parser { toks: lex(text)?, pos: 0 })
}

// ---- entry points ----

/// A rational function of `q`.
pub fn parse_scalar(text: &str) -> ParseResult<QScalar> {
    let f = parse_field(text)?;
    match f.as_monomial() {
        None if f.is_zero() => Ok(QScalar::zero()),
        Some((c, 0)) => Ok(c),
        _ => Err(ParseError { line: 1, column: 1, message: String::from("expected a scalar without z") }),
    }
}

/// A Laurent polynomial in `z`.
pub fn parse_field(text: &str) -> ParseResult<LaurentField> {
    let mut p = parser(text)?;
    let at = p.peek().clone();
    let v = p.sum()?;
    p.finish()?;
    match v.as_field() {
        Some(f) => Ok(f),
        None => p.err_at(&at, "expected a field, found an operator"),
    }
}

/// A symbol; the header overrides the defaults, and an operator letter
/// fixes the basis.
pub fn parse_symbol(text: &str, basis: Basis, floor: i64) -> ParseResult<Symbol<LaurentField>> {
    let mut p = parser(text)?;
    let (hb, hf) = p.header()?;
    let start = p.peek().clone();
    let v = p.sum()?;
    p.finish()?;
    let mut found: Option<Basis> = hb;
    for t in &v.terms {
        if let Some((b, _)) = t.op {
            match found {
                Some(f) if f != b => return p.err_at(&start, format!("mixed bases {f} and {b}")),
                _ => found = Some(b),
            }
        }
    }
    let basis = found.unwrap_or(basis);
    let floor = hf.unwrap_or(floor);
    let mut out = Symbol::zero(basis, floor);
    for t in v.terms {
        let order = t.op.map_or(0, |(_, k)| k);
        if t.coeff.is_zero() {
            continue;
        }
        if order < floor {
            return p.err_at(&start, format!("term of order {order} lies below floor {floor}"));
        }
        out.add_term(order, &t.coeff);
    }
    Ok(out)
}

/// `n,m` with `*` for an open edge; a D-basis window `n` is q-KP and `n,0`
/// is purely differential.
pub fn parse_window(text: &str, basis: Basis) -> ParseResult<PhaseWindow> {
    let bad = |m: &str| ParseError { line: 1, column: 1, message: format!("window '{text}': {m}") };
    let edge = |s: &str| -> ParseResult<Option<i64>> {
        let s = s.trim();
        if s == "*" {
            return Ok(None);
        }
        s.parse::<i64>().map(Some).map_err(|_| bad("edges are integers or '*'"))
    };
    let text = text.trim().trim_start_matches('(').trim_end_matches(')');
    let (hi, lo) = match text.split_once(',') {
        Some((a, b)) => (edge(a)?, edge(b)?),
        None => (edge(text)?, None),
    };
    if let (Some(h), Some(l)) = (hi, lo) {
        if l > h {
            return Err(bad("lower edge above upper edge"));
        }
    }
    match basis {
        Basis::T => Ok(PhaseWindow::t_open(hi, lo)),
        Basis::D => match (hi, lo) {
            (Some(n), None) => Ok(PhaseWindow::d(n)),
            (Some(n), Some(0)) => Ok(PhaseWindow::gd(n)),
            _ => Err(bad("D-basis windows are 'n' or 'n,0'")),
        },
    }
}

/// Components `j=expr` of a one-form.
pub fn parse_oneform(items: &[String], window: PhaseWindow) -> ParseResult<OneForm<LaurentField>> {
    let mut form = OneForm::new(window);
    for item in items {
        let (j, e) = item.split_once('=').ok_or_else(|| ParseError {
            line: 1,
            column: 1,
            message: format!("one-form component '{item}' is not of the form j=expr"),
        })?;
        let j: i64 =
            j.trim().parse().map_err(|_| ParseError { line: 1, column: 1, message: format!("bad index in '{item}'") })?;
        form = form.with(j, parse_field(e)?);
    }
    Ok(form)
}

/// A rational number `a` or `a/b`.
pub fn parse_rational(text: &str) -> ParseResult<BigRational> {
    let bad = || ParseError { line: 1, column: 1, message: format!("'{text}' is not a rational number") };
    let r: BigRational = text.trim().parse().map_err(|_| bad())?;
    if r.denom().is_zero() {
        return Err(bad());
    }
    Ok(r)
}

/// `p` or `p/d` for a flow power.
pub fn parse_power(text: &str) -> ParseResult<(u32, u32)> {
    let r = parse_rational(text)?;
    let bad = || ParseError { line: 1, column: 1, message: format!("flow power '{text}' must be a positive rational") };
    if r <= BigRational::zero() {
        return Err(bad());
    }
    let n = u32::try_from(r.numer()).map_err(|_| bad())?;
    let d = u32::try_from(r.denom()).map_err(|_| bad())?;
    Ok((n, d))
}

#[cfg(test)]
mod tests;
