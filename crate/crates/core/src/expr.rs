//! Formal field expressions: polynomials in shifted field variables with
//! Laurent-polynomial coefficients. Used as symbol coefficients when bracket
//! kernels are extracted with the fields left symbolic.
//!
//! Mode projections of non-constant expressions are kept as formal atoms
//! `p(z^k m)` normalized so that the test variable (or, failing that, the
//! first variable) of `m` is unshifted; the projections commute with `τ`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::field::{Coeff, LaurentField};
use crate::scalar::QScalar;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ModePart {
    Plus,
    Zero,
    Minus,
}

impl ModePart {
    pub fn symbol(self) -> &'static str {
        match self {
            ModePart::Plus => "p+",
            ModePart::Zero => "p0",
            ModePart::Minus => "p-",
        }
    }

    /// Adjoint under `∫`.
    pub fn dual(self) -> Self {
        match self {
            ModePart::Plus => ModePart::Minus,
            ModePart::Zero => ModePart::Zero,
            ModePart::Minus => ModePart::Plus,
        }
    }

    pub fn apply(self, f: &LaurentField) -> LaurentField {
        match self {
            ModePart::Plus => f.taylor_part(),
            ModePart::Zero => LaurentField::constant(f.integrate()),
            ModePart::Minus => f.laurent_part(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Var {
    /// `τ^shift` of the field `name_index`.
    Field { name: char, index: i64, shift: i64 },
    /// `τ^shift` of the test function dual to field `index`.
    Test { index: i64, shift: i64 },
    /// `τ^shift p(z^zpow · body)`.
    Proj { part: ModePart, zpow: i64, body: Monomial, shift: i64 },
}

impl Var {
    pub fn shift(&self) -> i64 {
        match self {
            Var::Field { shift, .. } | Var::Test { shift, .. } | Var::Proj { shift, .. } => *shift,
        }
    }

    pub fn shifted(&self, b: i64) -> Var {
        let mut v = self.clone();
        match &mut v {
            Var::Field { shift, .. } | Var::Test { shift, .. } => *shift += b,
            Var::Proj { part, shift, .. } => {
                if *part != ModePart::Zero {
                    *shift += b
                }
            }
        }
        v
    }

    pub fn has_test(&self) -> bool {
        match self {
            Var::Field { .. } => false,
            Var::Test { .. } => true,
            Var::Proj { body, .. } => body.has_test(),
        }
    }
}

/// Sorted product of variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(Vec<Var>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn from_vars(mut v: Vec<Var>) -> Self {
        v.sort();
        Monomial(v)
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut v = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < o.0.len() {
            if self.0[i] <= o.0[j] {
                v.push(self.0[i].clone());
                i += 1;
            } else {
                v.push(o.0[j].clone());
                j += 1;
            }
        }
        v.extend_from_slice(&self.0[i..]);
        v.extend_from_slice(&o.0[j..]);
        Monomial(v)
    }

    pub fn shifted(&self, b: i64) -> Monomial {
        if b == 0 {
            return self.clone();
        }
        Monomial::from_vars(self.0.iter().map(|v| v.shifted(b)).collect())
    }

    pub fn has_test(&self) -> bool {
        self.0.iter().any(Var::has_test)
    }

    /// Splits off the single top-level variable carrying the test function.
    pub fn split_test(&self) -> Option<(Var, Monomial)> {
        let pos = self.0.iter().position(Var::has_test)?;
        let mut rest = self.0.clone();
        let v = rest.remove(pos);
        Some((v, Monomial(rest)))
    }

    fn normal_shift(&self) -> i64 {
        self.0.iter().find(|v| v.has_test()).or(self.0.first()).map(Var::shift).unwrap_or(0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct FieldExpr {
    t: BTreeMap<Monomial, LaurentField>,
}

impl FieldExpr {
    pub fn constant(f: LaurentField) -> Self {
        let mut e = FieldExpr::default();
        e.add_term(Monomial::one(), &f);
        e
    }

    pub fn var(v: Var) -> Self {
        let mut e = FieldExpr::default();
        e.add_term(Monomial(alloc::vec![v]), &LaurentField::one());
        e
    }

    pub fn field(name: char, index: i64) -> Self {
        Self::var(Var::Field { name, index, shift: 0 })
    }

    pub fn test(index: i64) -> Self {
        Self::var(Var::Test { index, shift: 0 })
    }

    pub fn add_term(&mut self, m: Monomial, c: &LaurentField) {
        if c.is_empty() {
            return;
        }
        match self.t.get_mut(&m) {
            Some(v) => {
                *v = Coeff::add(v, c);
                if v.is_empty() {
                    self.t.remove(&m);
                }
            }
            None => {
                self.t.insert(m, c.clone());
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &LaurentField)> {
        self.t.iter()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// The value when no variables remain.
    pub fn as_field(&self) -> Option<LaurentField> {
        match self.t.len() {
            0 => Some(LaurentField::zero()),
            1 => self.t.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn mul_field(&self, f: &LaurentField) -> Self {
        let mut e = FieldExpr::default();
        for (m, c) in &self.t {
            e.add_term(m.clone(), &Coeff::mul(c, f));
        }
        e
    }

    fn project_monomial(part: ModePart, zpow: i64, m: &Monomial) -> (QScalar, Var) {
        let s = m.normal_shift();
        let body = m.shifted(-s);
        let shift = if part == ModePart::Zero { 0 } else { s };
        (QScalar::q_pow(-s * zpow), Var::Proj { part, zpow, body, shift })
    }

    /// One mode projection of the whole expression. Formal `p-` atoms are
    /// never created: `p- = 1 - p+ - p0`, which makes the form canonical.
    pub fn project(&self, part: ModePart) -> Self {
        let mut e = FieldExpr::default();
        for (m, c) in &self.t {
            if m.is_one() {
                e.add_term(Monomial::one(), &part.apply(c));
                continue;
            }
            for (k, v) in c.terms() {
                if part == ModePart::Minus {
                    e.add_term(m.clone(), &LaurentField::monomial(v.clone(), k));
                    for p in [ModePart::Plus, ModePart::Zero] {
                        let (f, var) = Self::project_monomial(p, k, m);
                        e.add_term(Monomial(alloc::vec![var]), &LaurentField::constant(-&(v * &f)));
                    }
                    continue;
                }
                let (f, var) = Self::project_monomial(part, k, m);
                e.add_term(Monomial(alloc::vec![var]), &LaurentField::constant(v * &f));
            }
        }
        e
    }

    /// Replace variables. `field` returns a substitute for a field (already
    /// unshifted); `test` likewise for the test function. Unreplaced
    /// variables stay formal. Projections are re-evaluated.
    pub fn substitute(
        &self,
        field: &dyn Fn(char, i64) -> Option<FieldExpr>,
        test: &dyn Fn(i64) -> Option<FieldExpr>,
    ) -> FieldExpr {
        let mut out = FieldExpr::default();
        for (m, c) in &self.t {
            let mut acc = FieldExpr::constant(c.clone());
            for v in m.vars() {
                let r = subst_var(v, field, test);
                acc = Coeff::mul(&acc, &r);
            }
            out = Coeff::add(&out, &acc);
        }
        out
    }

    /// Full evaluation at concrete fields and test function.
    pub fn evaluate(
        &self,
        field: &dyn Fn(char, i64) -> LaurentField,
        test: &dyn Fn(i64) -> LaurentField,
    ) -> Result<LaurentField> {
        let f = |n: char, i: i64| Some(FieldExpr::constant(field(n, i)));
        let t = |i: i64| Some(FieldExpr::constant(test(i)));
        self.substitute(&f, &t).as_field().ok_or_else(|| Error::Invalid(String::from("expression still contains variables")))
    }

    pub fn is_linear_in_test(&self) -> bool {
        self.t.keys().all(|m| m.vars().iter().filter(|v| v.has_test()).count() == 1)
    }

    /// Field indices occurring anywhere.
    pub fn field_indices(&self) -> Vec<(char, i64)> {
        fn walk(m: &Monomial, out: &mut Vec<(char, i64)>) {
            for v in m.vars() {
                match v {
                    Var::Field { name, index, .. } => out.push((*name, *index)),
                    Var::Proj { body, .. } => walk(body, out),
                    Var::Test { .. } => {}
                }
            }
        }
        let mut out = Vec::new();
        for m in self.t.keys() {
            walk(m, &mut out);
        }
        out.sort();
        out.dedup();
        out
    }
}

fn subst_var(v: &Var, field: &dyn Fn(char, i64) -> Option<FieldExpr>, test: &dyn Fn(i64) -> Option<FieldExpr>) -> FieldExpr {
    match v {
        Var::Field { name, index, shift } => match field(*name, *index) {
            Some(e) => e.shift(*shift),
            None => FieldExpr::var(v.clone()),
        },
        Var::Test { index, shift } => match test(*index) {
            Some(e) => e.shift(*shift),
            None => FieldExpr::var(v.clone()),
        },
        Var::Proj { part, zpow, body, shift } => {
            let mut b = FieldExpr::constant(LaurentField::z_pow(*zpow));
            for w in body.vars() {
                b = Coeff::mul(&b, &subst_var(w, field, test));
            }
            b.project(*part).shift(*shift)
        }
    }
}

impl Coeff for FieldExpr {
    fn zero() -> Self {
        FieldExpr::default()
    }

    fn one() -> Self {
        FieldExpr::constant(LaurentField::one())
    }

    fn is_zero(&self) -> bool {
        self.t.is_empty()
    }

    fn add(&self, o: &Self) -> Self {
        let (mut acc, other) = if self.t.len() >= o.t.len() { (self.clone(), o) } else { (o.clone(), self) };
        for (m, c) in &other.t {
            acc.add_term(m.clone(), c);
        }
        acc
    }

    fn neg(&self) -> Self {
        FieldExpr { t: self.t.iter().map(|(m, c)| (m.clone(), Coeff::neg(c))).collect() }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut acc = FieldExpr::default();
        for (a, x) in &self.t {
            for (b, y) in &o.t {
                acc.add_term(a.mul(b), &Coeff::mul(x, y));
            }
        }
        acc
    }

    fn scale(&self, c: &QScalar) -> Self {
        if c.is_zero() {
            return FieldExpr::default();
        }
        FieldExpr { t: self.t.iter().map(|(m, v)| (m.clone(), Coeff::scale(v, c))).collect() }
    }

    fn from_field(f: &LaurentField) -> Self {
        FieldExpr::constant(f.clone())
    }

    fn shift(&self, b: i64) -> Self {
        if b == 0 {
            return self.clone();
        }
        let mut e = FieldExpr::default();
        for (m, c) in &self.t {
            e.add_term(m.shifted(b), &c.shift(b));
        }
        e
    }

    fn split_modes(&self) -> Result<(Self, Self, Self)> {
        Ok((self.project(ModePart::Plus), self.project(ModePart::Zero), self.project(ModePart::Minus)))
    }
}

// ---- display ----

fn shift_suffix(s: i64) -> String {
    match s {
        0 => String::new(),
        1 => String::from("(q z)"),
        _ => alloc::format!("(q^{s} z)"),
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Field { name, index, shift } => write!(f, "{name}{index}{}", shift_suffix(*shift)),
            Var::Test { shift, .. } => write!(f, "x{}", shift_suffix(*shift)),
            Var::Proj { part, zpow, body, shift } => {
                let mut inner: Vec<String> = Vec::new();
                if let Some(z) = crate::field::z_factor(*zpow) {
                    inner.push(z);
                }
                inner.extend(body.vars().iter().map(|v| alloc::format!("{v}")));
                if inner.is_empty() {
                    inner.push(String::from("1"));
                }
                write!(f, "{}[{}]{}", part.symbol(), inner.join("*"), shift_suffix(*shift))
            }
        }
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.t.is_empty() {
            return f.write_str("0");
        }
        let mut items = Vec::new();
        for (m, c) in &self.t {
            for (k, v) in c.terms() {
                let mut fs: Vec<String> = Vec::new();
                if let Some(z) = crate::field::z_factor(k) {
                    fs.push(z);
                }
                fs.extend(m.vars().iter().map(|x| alloc::format!("{x}")));
                items.push((v, fs));
            }
        }
        let mut s = String::new();
        crate::field::write_sum(&mut s, items);
        f.write_str(&s)
    }
}
