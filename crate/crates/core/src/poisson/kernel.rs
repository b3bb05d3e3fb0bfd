//! Fundamental bracket kernels: extraction from the maps with formal fields,
//! normal forms, adjoints, renderings, and transcriptions of the known
//! closed forms used as test vectors.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{jmap, OneForm, PhaseWindow};
use crate::error::{Error, Result};
use crate::expr::{FieldExpr, ModePart, Monomial, Var};
use crate::field::{Coeff, LaurentField};
use crate::rmatrix::Splitting;
use crate::scalar::{qbinomial, QScalar};
use crate::symbol::{q_minus_one, Basis, Symbol};

/// The operator `J_ij` acting on the test function `x_j`, stored as the
/// expression `J_ij x_j`, linear in the test variable.
#[derive(Clone, PartialEq, Debug)]
pub struct BracketKernel {
    pub basis: Basis,
    pub i: i64,
    pub j: i64,
    pub expr: FieldExpr,
}

/// One normal-form term `c z^zpow left τ^a (x)` or, with a projection,
/// `c z^zpow left τ^a p(z^w right x)`.
#[derive(Clone, PartialEq, Debug)]
pub struct KernelTerm {
    pub c: QScalar,
    pub zpow: i64,
    pub left: Monomial,
    pub a: i64,
    pub proj: Option<(ModePart, i64, Monomial)>,
}

/// Building blocks of operator chains, applied right to left.
#[derive(Clone, Debug)]
pub enum Atom {
    Mul(FieldExpr),
    Shift(i64),
    QDer(u32),
    Proj(ModePart),
}

pub fn apply_chain(mut e: FieldExpr, atoms: &[Atom]) -> FieldExpr {
    for a in atoms.iter().rev() {
        e = match a {
            Atom::Mul(f) => f.mul(&e),
            Atom::Shift(b) => e.shift(*b),
            Atom::QDer(k) => {
                for _ in 0..*k {
                    e = e.qderive();
                }
                e
            }
            Atom::Proj(p) => e.project(*p),
        };
    }
    e
}

fn z(k: i64) -> FieldExpr {
    FieldExpr::constant(LaurentField::z_pow(k))
}

/// `[m k]_q`, zero for negative `k`.
fn qb(m: i64, k: i64) -> QScalar {
    if k < 0 {
        QScalar::zero()
    } else {
        qbinomial(m, k as u32)
    }
}

fn qp(k: i64) -> QScalar {
    QScalar::q_pow(k)
}

impl BracketKernel {
    pub fn new(basis: Basis, i: i64, j: i64, expr: FieldExpr) -> Self {
        BracketKernel { basis, i, j, expr }
    }

    pub fn zero(basis: Basis, i: i64, j: i64) -> Self {
        Self::new(basis, i, j, FieldExpr::default())
    }

    pub fn is_zero(&self) -> bool {
        self.expr.is_empty()
    }

    pub fn scale(&self, c: &QScalar) -> Self {
        Self::new(self.basis, self.i, self.j, self.expr.scale(c))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.basis, self.i, self.j, self.expr.add(&o.expr))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.basis, self.i, self.j, self.expr.sub(&o.expr))
    }

    /// The test variable this kernel acts on.
    pub fn test(&self) -> FieldExpr {
        FieldExpr::test(self.j)
    }

    pub fn terms(&self) -> Result<Vec<KernelTerm>> {
        let mut out = Vec::new();
        for (m, c) in self.expr.terms() {
            let (v, left) = m.split_test().ok_or_else(|| Error::Invalid(String::from("kernel term without test function")))?;
            if left.has_test() {
                return Err(Error::Invalid(String::from("kernel is not linear in the test function")));
            }
            let (a, proj) = match v {
                Var::Test { shift, .. } => (shift, None),
                Var::Proj { part, zpow, body, shift } => {
                    let (_, right) =
                        body.split_test().ok_or_else(|| Error::Invalid(String::from("projection without test function")))?;
                    (shift, Some((part, zpow, right)))
                }
                Var::Field { .. } => unreachable!(),
            };
            for (k, v) in c.terms() {
                out.push(KernelTerm { c: v.clone(), zpow: k, left: left.clone(), a, proj: proj.clone() });
            }
        }
        // descending shift power, then z power, then fields
        out.sort_by(|x, y| y.a.cmp(&x.a).then(x.zpow.cmp(&y.zpow)).then(x.left.cmp(&y.left)).then(x.proj.cmp(&y.proj)));
        Ok(out)
    }

    /// The adjoint operator `J*`, acting on the test function dual to `i`.
    /// T basis: under `∫`; D basis: under `∫_{-1}`.
    pub fn adjoint(&self) -> Result<BracketKernel> {
        let y = FieldExpr::test(self.i);
        let mut acc = FieldExpr::default();
        for t in self.terms()? {
            let mut c = t.c.clone();
            if self.basis == Basis::D {
                c = &c * &qp(-t.a);
            }
            let mut atoms = Vec::new();
            if let Some((part, w, right)) = &t.proj {
                atoms.push(Atom::Mul(z(*w).mul(&monomial_expr(right))));
                match self.basis {
                    Basis::T => atoms.push(Atom::Proj(part.dual())),
                    Basis::D => {
                        atoms.push(Atom::Mul(z(-1)));
                        atoms.push(Atom::Proj(part.dual()));
                        atoms.push(Atom::Mul(z(1)));
                    }
                }
            }
            atoms.push(Atom::Shift(-t.a));
            atoms.push(Atom::Mul(z(t.zpow).mul(&monomial_expr(&t.left))));
            acc = acc.add(&apply_chain(y.clone(), &atoms).scale(&c));
        }
        Ok(BracketKernel::new(self.basis, self.j, self.i, acc))
    }

    /// `κ` with `self = κ · other`, if one exists and `other` is nonzero.
    pub fn ratio_to(&self, other: &BracketKernel) -> Option<QScalar> {
        let (m, c) = other.expr.terms().next()?;
        let (k, v) = c.terms().next()?;
        let mine = self.expr.terms().find(|(mm, _)| *mm == m).map(|(_, c)| c.coeff(k))?;
        let kappa = &mine / v;
        (self.expr == other.expr.scale(&kappa)).then_some(kappa)
    }

    /// Concrete value of `J_ij x` at concrete fields.
    pub fn evaluate(&self, fields: &dyn Fn(char, i64) -> LaurentField, x: &LaurentField) -> Result<LaurentField> {
        self.expr.evaluate(fields, &|_| x.clone())
    }

    /// Substitute some fields, keeping the others formal.
    pub fn substitute(&self, fields: &dyn Fn(char, i64) -> Option<FieldExpr>) -> BracketKernel {
        let e = self.expr.substitute(fields, &|_| None);
        BracketKernel::new(self.basis, self.i, self.j, e)
    }

    /// Operator form: `Σ c z^k left T^a` with projections written `p±[...]`.
    pub fn operator_string(&self) -> Result<String> {
        let terms = self.terms()?;
        let mut items = Vec::new();
        for t in &terms {
            let mut fs: Vec<String> = Vec::new();
            if let Some(zf) = crate::field::z_factor(t.zpow) {
                fs.push(zf);
            }
            fs.extend(t.left.vars().iter().map(|v| format!("{v}")));
            if t.a != 0 {
                fs.push(if t.a == 1 { String::from("T") } else { format!("T^{}", t.a) });
            }
            if let Some((part, w, right)) = &t.proj {
                let mut inner: Vec<String> = Vec::new();
                if let Some(zf) = crate::field::z_factor(*w) {
                    inner.push(zf);
                }
                inner.extend(right.vars().iter().map(|v| format!("{v}")));
                if inner.is_empty() {
                    inner.push(String::from("1"));
                }
                fs.push(format!("{}[{}]", part.symbol(), inner.join("*")));
            }
            items.push((&t.c, fs));
        }
        let mut s = String::new();
        crate::field::write_sum(&mut s, items);
        Ok(s)
    }

    /// The bracket `{f_i(z), f_j(w)} = -(J_ij(z) δ(z/w))` written with delta
    /// functions. Fields shifted like the delta are written at `w`.
    pub fn delta_string(&self) -> Result<String> {
        let name = match self.basis {
            Basis::T => 't',
            Basis::D => 'u',
        };
        let terms = self.terms()?;
        let mut items = Vec::new();
        let neg: Vec<QScalar> = terms.iter().map(|t| -&t.c).collect();
        for (t, c) in terms.iter().zip(neg.iter()) {
            if t.proj.is_some() {
                return Err(Error::Invalid(String::from("projected kernels have no delta form")));
            }
            let mut fs: Vec<String> = Vec::new();
            if let Some(zf) = crate::field::z_factor(t.zpow) {
                fs.push(zf);
            }
            for v in t.left.vars() {
                if let Var::Field { name, index, shift } = v {
                    let arg = if *shift == 0 {
                        String::from("z")
                    } else if *shift == t.a {
                        String::from("w")
                    } else if *shift == 1 {
                        String::from("q z")
                    } else {
                        format!("q^{shift} z")
                    };
                    fs.push(format!("{name}{index}({arg})"));
                }
            }
            let d = match t.a {
                0 => String::from("δ(z/w)"),
                1 => String::from("δ(q z/w)"),
                -1 => String::from("δ(z/(q w))"),
                a if a > 0 => format!("δ(q^{a} z/w)"),
                a => format!("δ(z/(q^{} w))", -a),
            };
            fs.push(d);
            items.push((c, fs));
        }
        let mut s = String::new();
        crate::field::write_sum(&mut s, items);
        Ok(format!("{{{name}{}(z), {name}{}(w)}} = {s}", self.i, self.j))
    }
}

impl fmt::Display for BracketKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.operator_string() {
            Ok(s) => f.write_str(&s),
            Err(_) => write!(f, "{}", self.expr),
        }
    }
}

fn monomial_expr(m: &Monomial) -> FieldExpr {
    let mut e = FieldExpr::one();
    for v in m.vars() {
        e = e.mul(&FieldExpr::var(v.clone()));
    }
    e
}

// ---- extraction ----

fn formal_lax(window: &PhaseWindow, hi: i64, floor: i64) -> Symbol<FieldExpr> {
    let name = window.field_name();
    let lo = window.lo.map_or(floor, |l| l.max(floor));
    let mut l = Symbol::zero(window.basis, floor);
    for o in lo..=hi {
        l.add_term(o, &FieldExpr::field(name, window.index_of(o)));
    }
    l
}

/// `J^(s)_ij` from the map, with the fields formal. Exact: the truncation
/// depth grows until the requested order lies above the result's floor.
pub fn kernel(s: u8, split: Splitting, window: &PhaseWindow, i: i64, j: i64) -> Result<BracketKernel> {
    window.check(s, split)?;
    if s == 3 {
        return Err(Error::Invalid(String::from("kernels of the cubic structure are not extracted")));
    }
    if !window.contains_index(i) || !window.contains_index(j) {
        return Err(Error::Invalid(format!("indices ({i},{j}) outside window")));
    }
    let hi = match (window.hi, window.lo) {
        (Some(h), _) => h,
        (None, Some(m)) => (i + j - m).max(i + j).max(i).max(j).max(0) + 1,
        (None, None) if s == 1 => (i + j).max(i).max(j).max(0) + 1,
        (None, None) => return Err(Error::Invalid(String::from("quadratic kernels need a window bounded on one side"))),
    };
    let target = window.order_of(i);
    let x = OneForm::new(*window).with(j, FieldExpr::test(j));
    let xt = x.top().unwrap_or(0);
    let mut depth = 1;
    loop {
        let floor = target.min(xt).min(window.lo.unwrap_or(i64::MAX)) - depth;
        let l = formal_lax(window, hi, floor);
        let xs = x.to_symbol(floor + xt - l.effective_top())?;
        let step = match jmap(s, split, &l, &xs) {
            Ok(jx) if jx.floor() <= target => {
                return Ok(BracketKernel::new(window.basis, i, j, jx.coeff(target)));
            }
            Ok(jx) => jx.floor() - target,
            Err(Error::FloorTooHigh { order, floor }) => floor - order,
            Err(e) => return Err(e),
        };
        if depth > 64 {
            return Err(Error::FloorTooHigh { order: target, floor: target + step });
        }
        depth += step.max(1);
    }
}

// ---- closed forms ----

/// How the diagonal correction of the column-`n` formula of the linear
/// D-basis kernel combines with the `i ≤ n` branch at `i = n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum DiagonalReading {
    /// Both the `i ≤ n` branch and the diagonal term apply at `i = n`.
    Additive,
    /// The diagonal term replaces the `i ≤ n` branch at `i = n`.
    Exclusive,
}

struct Fields<'a> {
    window: &'a PhaseWindow,
}

impl Fields<'_> {
    fn get(&self, k: i64) -> FieldExpr {
        if self.window.contains_index(k) {
            FieldExpr::field(self.window.field_name(), k)
        } else {
            FieldExpr::default()
        }
    }
}

fn term(c: QScalar, atoms: Vec<Atom>, x: &FieldExpr) -> FieldExpr {
    if c.is_zero() {
        return FieldExpr::default();
    }
    apply_chain(x.clone(), &atoms).scale(&c)
}

/// Transcribed closed forms. Indices outside the printed ranges give
/// `IndexOutOfFormula`.
pub fn closed_form(
    s: u8,
    split: Splitting,
    window: &PhaseWindow,
    i: i64,
    j: i64,
    reading: DiagonalReading,
) -> Result<BracketKernel> {
    if !window.contains_index(i) || !window.contains_index(j) {
        return Err(Error::IndexOutOfFormula { i, j });
    }
    let f = Fields { window };
    let x = FieldExpr::test(j);
    let e = match (split.basis, split.sigma, s) {
        (Basis::T, -1, 1) => t_linear(window, &f, &x, i, j, false),
        (Basis::T, 0, 1) => t_linear_isotropic(window, &f, &x, i, j)?,
        (Basis::T, -1, 2) => t_quadratic(window, &f, &x, i, j, false)?,
        (Basis::T, 0, 2) => t_quadratic(window, &f, &x, i, j, true)?,
        (Basis::D, -1, 1) => d_linear(window, &f, i, j, reading)?,
        (Basis::D, -1, 2) => d_quadratic(window, &f, &x, i, j)?,
        _ => return Err(Error::IndexOutOfFormula { i, j }),
    };
    Ok(BracketKernel::new(split.basis, i, j, e))
}

/// `t_{i+j} T^i - T^{-j} t_{i+j}`.
fn t_linear_core(f: &Fields, x: &FieldExpr, i: i64, j: i64) -> FieldExpr {
    let t = f.get(i + j);
    term(QScalar::one(), vec![Atom::Mul(t.clone()), Atom::Shift(i)], x).sub(&term(
        QScalar::one(),
        vec![Atom::Shift(-j), Atom::Mul(t)],
        x,
    ))
}

fn t_linear(w: &PhaseWindow, f: &Fields, x: &FieldExpr, i: i64, j: i64, _iso: bool) -> FieldExpr {
    let n = w.hi.unwrap_or(i64::MAX);
    let m = w.lo.unwrap_or(i64::MIN);
    if i >= 1 && j >= 1 && n >= i + j {
        t_linear_core(f, x, i, j)
    } else if i <= 0 && j <= 0 && i + j >= m {
        // the printed "up to a sign" read as the opposite sign
        t_linear_core(f, x, i, j).neg()
    } else {
        FieldExpr::default()
    }
}

fn t_linear_isotropic(w: &PhaseWindow, f: &Fields, x: &FieldExpr, i: i64, j: i64) -> Result<FieldExpr> {
    let n = w.hi.unwrap_or(i64::MAX);
    let m = w.lo.unwrap_or(i64::MIN);
    // -Θ(j-1) p+(T^{-j}-1) t_j + Θ(-j-1) p-(T^{-j}-1) t_j
    let row0 = |j: i64, x: &FieldExpr| -> FieldExpr {
        let (part, sign) = if j >= 1 {
            (ModePart::Plus, -1)
        } else if j <= -1 {
            (ModePart::Minus, 1)
        } else {
            return FieldExpr::default();
        };
        let t = f.get(j);
        let c = QScalar::from_int(sign);
        term(c.clone(), vec![Atom::Proj(part), Atom::Shift(-j), Atom::Mul(t.clone())], x).sub(&term(
            c,
            vec![Atom::Proj(part), Atom::Mul(t)],
            x,
        ))
    };
    if i == 0 {
        return Ok(row0(j, x));
    }
    if j == 0 {
        // J_i0 = -(J_0i)*
        let k = BracketKernel::new(Basis::T, 0, i, row0(i, &FieldExpr::test(i)));
        return Ok(k.adjoint()?.expr.neg());
    }
    if i >= 1 && j >= 1 && n >= i + j {
        Ok(t_linear_core(f, x, i, j).neg())
    } else if i <= -1 && j <= -1 && i + j >= m {
        Ok(t_linear_core(f, x, i, j))
    } else {
        Ok(FieldExpr::default())
    }
}

fn t_quadratic(w: &PhaseWindow, f: &Fields, x: &FieldExpr, i: i64, j: i64, iso: bool) -> Result<FieldExpr> {
    let (lo, hi) = match (w.hi, w.lo) {
        (Some(n), Some(m)) => (m.max(i + j - n), n.min(i)),
        (Some(n), None) => (i + j - n, n.min(i)),
        (None, Some(m)) => (m, i),
        (None, None) => return Err(Error::IndexOutOfFormula { i, j }),
    };
    let two = QScalar::from_int(2);
    let mut e = FieldExpr::default();
    for k in lo..=hi {
        let (a, b) = (f.get(k), f.get(i + j - k));
        e = e.add(&term(two.clone(), vec![Atom::Mul(a.clone()), Atom::Shift(k - j), Atom::Mul(b.clone())], x));
        e = e.sub(&term(two.clone(), vec![Atom::Mul(b), Atom::Shift(i - k), Atom::Mul(a)], x));
    }
    let (ti, tj) = (f.get(i), f.get(j));
    if iso {
        // 2 t_i (1 - T^{i-j}) p- t_j
        e = e.add(&term(two.clone(), vec![Atom::Mul(ti.clone()), Atom::Proj(ModePart::Minus), Atom::Mul(tj.clone())], x));
        e = e.sub(&term(two, vec![Atom::Mul(ti), Atom::Shift(i - j), Atom::Proj(ModePart::Minus), Atom::Mul(tj)], x));
    } else {
        // t_i (1 + T^i)(1 - T^{-j}) t_j
        for (sh, c) in [(0, 1), (i, 1), (-j, -1), (i - j, -1)] {
            e = e.add(&term(QScalar::from_int(c), vec![Atom::Mul(ti.clone()), Atom::Shift(sh), Atom::Mul(tj.clone())], x));
        }
    }
    Ok(e)
}

/// The generic-index linear D-basis kernel (`i, j ≥ n+1`).
fn d_linear_generic(n: i64, f: &Fields, x: &FieldExpr, i: i64, j: i64) -> FieldExpr {
    let qm1 = q_minus_one();
    let qinv = qp(-1);
    let mut e = FieldExpr::default();
    for k in 0..=(i + j - n - 1) {
        let b = &qb(i - n - 1, k) * &qp(k * (k + 1) / 2);
        let sgn = QScalar::from_int(if k % 2 == 0 { 1 } else { -1 });
        let c1 = &(&(&b * &qp(n - i - 1)) * &qm1) * &sgn;
        e = e.add(&term(c1, vec![Atom::Mul(f.get(i + j - n - k)), Atom::QDer(k as u32), Atom::Mul(z(1)), Atom::Shift(n - i)], x));
        let c2 = &(&b * &qinv) * &sgn;
        e = e.add(&term(c2, vec![Atom::Mul(f.get(i + j - n - k - 1)), Atom::QDer(k as u32), Atom::Shift(n - i)], x));
    }
    for k in 0..=(i + j - n) {
        let c = -&(&qb(j - n, k) * &(&qm1 * &qinv));
        e = e.add(&term(
            c,
            vec![Atom::Shift(j - n - k), Atom::QDer(k as u32), Atom::Mul(f.get(i + j - n - k)), Atom::Mul(z(1))],
            x,
        ));
    }
    for k in 0..=(i + j - n - 1) {
        let c = -&(&qb(j - n - 1, k) * &qinv);
        e = e.add(&term(c, vec![Atom::Shift(j - n - k - 1), Atom::QDer(k as u32), Atom::Mul(f.get(i + j - n - k - 1))], x));
    }
    e
}

/// The column-`n` linear D-basis kernel.
fn d_linear_column_n(n: i64, f: &Fields, x: &FieldExpr, i: i64, reading: DiagonalReading) -> FieldExpr {
    let qm1 = q_minus_one();
    let qinv = qp(-1);
    let mut e = FieldExpr::default();
    if i > n {
        for k in 0..=(i - n - 1) {
            let sgn = QScalar::from_int(if k % 2 == 0 { 1 } else { -1 });
            let c = &(&(&qb(i - n - 1, k) * &qp(k * (k + 1) / 2 + n - i - 1)) * &qm1) * &sgn;
            e = e.add(&term(c, vec![Atom::Mul(f.get(i - k)), Atom::QDer(k as u32), Atom::Mul(z(1)), Atom::Shift(n - i)], x));
        }
        e = e.sub(&term(&qinv * &qm1, vec![Atom::Mul(z(1)), Atom::Mul(f.get(i))], x));
    }
    let lower_branch = i < n || (i == n && reading == DiagonalReading::Additive);
    if lower_branch {
        for k in 0..=(i - 1) {
            let b = &qb(i - n - 1, k) * &qp(k * (k + 1) / 2);
            let sgn = QScalar::from_int(if k % 2 == 0 { 1 } else { -1 });
            let c1 = -&(&(&(&b * &qp(n - i - 1)) * &qm1) * &sgn);
            e = e.add(&term(c1, vec![Atom::Mul(f.get(i - k)), Atom::QDer(k as u32), Atom::Mul(z(1))], x));
            let c2 = -&(&(&b * &qinv) * &sgn);
            e = e.add(&term(c2, vec![Atom::Mul(f.get(i - k - 1)), Atom::QDer(k as u32)], x));
        }
        e = e.add(&term(&qm1 * &qinv, vec![Atom::Mul(z(1)), Atom::Mul(f.get(i))], x));
        for k in 0..=(i - 1) {
            let c = &qb(-1, k) * &qinv;
            e = e.add(&term(c, vec![Atom::Shift(-k - 1), Atom::QDer(k as u32), Atom::Mul(f.get(i - k - 1))], x));
        }
    }
    if i == n {
        let c = &qm1 * &qinv;
        e = e.add(&term(c.clone(), vec![Atom::Mul(z(1)), Atom::Mul(f.get(n))], x));
        for k in 0..=n {
            let ck = -&(&c * &qb(-1, k));
            e = e.add(&term(ck, vec![Atom::Mul(z(1)), Atom::Shift(-k), Atom::QDer(k as u32), Atom::Mul(f.get(n - k))], x));
        }
    }
    e
}

fn d_linear(w: &PhaseWindow, f: &Fields, i: i64, j: i64, reading: DiagonalReading) -> Result<FieldExpr> {
    let n = w.hi.unwrap_or(0);
    let x = FieldExpr::test(j);
    if i == 0 || j == 0 {
        return Ok(FieldExpr::default());
    }
    if i > n && j > n {
        return Ok(d_linear_generic(n, f, &x, i, j));
    }
    if (1..=n - 1).contains(&i) && (1..=n - 1).contains(&j) {
        return Ok(d_linear_generic(n, f, &x, i, j).neg());
    }
    if j == n {
        return Ok(d_linear_column_n(n, f, &x, i, reading));
    }
    if i == n {
        // J_nj = -(J_jn)*
        let col = BracketKernel::new(Basis::D, j, n, d_linear_column_n(n, f, &FieldExpr::test(n), j, reading));
        return Ok(col.adjoint()?.expr.neg());
    }
    Err(Error::IndexOutOfFormula { i, j })
}

fn d_quadratic(w: &PhaseWindow, f: &Fields, x: &FieldExpr, i: i64, j: i64) -> Result<FieldExpr> {
    let n = w.hi.unwrap_or(0);
    let qm1 = q_minus_one();
    let two = QScalar::from_int(2);
    let one_minus_qinv = &QScalar::one() - &qp(-1);
    let mut e = FieldExpr::default();
    let d = |k: i64| Atom::QDer(k.max(0) as u32);
    let add = |e: &mut FieldExpr, c: QScalar, atoms: Vec<Atom>| {
        *e = e.add(&term(c, atoms, x));
    };
    // line 1
    for k in 0..=i - 1 {
        for l in 0..=k {
            let c = &(&two * &qb(l - k - 1, l)) * &qp((l - 1) * (k + 1));
            add(&mut e, c, vec![Atom::Mul(f.get(j + k - l)), d(l), Atom::Shift(-k), Atom::Mul(f.get(i - k - 1))]);
        }
    }
    // line 2
    for k in 0..=i - 1 {
        for l in 0..=j + k {
            for m in 0..=i - k - 1 {
                let p = i + l - k - m - 1;
                if p < 0 {
                    continue;
                }
                let ex = (l - 1) * (l - j + n + 1) + (i + l - k - m - 2) * (i - k - n - 1);
                let c = -&(&(&(&two * &qb(j - n - 1, l)) * &qb(n - m, i - k - m - 1)) * &qp(ex));
                add(&mut e, c, vec![Atom::Mul(f.get(m)), d(p), Atom::Shift(j + k - i - l + 1), Atom::Mul(f.get(j + k - l))]);
            }
        }
    }
    // line 3
    for k in 0..=i {
        for l in 0..=k {
            let c = &(&(&two * &qb(l - k - 1, l)) * &qp((l - 1) * (k + 1))) * &qm1;
            add(&mut e, c, vec![Atom::Mul(z(1)), Atom::Mul(f.get(j + k - l)), d(l), Atom::Shift(-k), Atom::Mul(f.get(i - k))]);
        }
    }
    // line 4
    for k in 0..=i {
        for l in 0..=j + k {
            for m in 0..=i - k {
                let p = i + l - k - m;
                let ex = (l - 1) * (l - j + n + 1) + (i + l - k - m - 1) * (i - k - n);
                let c = -&(&(&(&(&two * &qb(j - n - 1, l)) * &qb(n - m, i - k - m)) * &qp(ex)) * &qm1);
                add(
                    &mut e,
                    c,
                    vec![Atom::Mul(z(1)), Atom::Mul(f.get(m)), d(p), Atom::Shift(j + k - i - l), Atom::Mul(f.get(j + k - l))],
                );
            }
        }
    }
    // line 5
    add(&mut e, -&one_minus_qinv, vec![Atom::Mul(z(1)), Atom::Mul(f.get(i)), Atom::Mul(f.get(j))]);
    // line 6
    for k in 0..=i {
        for l in 0..=j {
            let ex = (l - 1) * (l - j + n + 1) + (i + l - k - 1) * (i - n);
            let c = &(&(&qb(j - n - 1, l) * &qb(n - k, i - k)) * &qp(ex)) * &qm1;
            add(
                &mut e,
                c,
                vec![Atom::Mul(z(1)), Atom::Mul(f.get(k)), d(i + l - k), Atom::Shift(j - i - l), Atom::Mul(f.get(j - l))],
            );
        }
    }
    // line 7
    for k in 0..=i - 1 {
        for l in 0..=j {
            let ex = (l - 1) * (l - j + n + 1) + (i + l - k - 1) * (i - n - 1);
            let c = &(&(&qb(j - n - 1, l) * &qb(n - k, i - k - 1)) * &qp(ex)) * &(&qp(n - i + 1) - &QScalar::one());
            add(&mut e, c, vec![Atom::Mul(f.get(k)), d(i + l - k - 1), Atom::Shift(j - i - l + 1), Atom::Mul(f.get(j - l))]);
        }
    }
    // line 8
    for k in 0..=i {
        let c = &(&qb(n - k, i - k) * &qp((i - k) * (i - n))) * &one_minus_qinv;
        add(&mut e, c, vec![Atom::Mul(f.get(k)), d(i - k), Atom::Shift(n - i), Atom::Mul(z(1)), Atom::Mul(f.get(j))]);
    }
    // line 9
    for k in 0..=j {
        let c = -&(&(&qb(j - n - 1, k) * &qp((k - 1) * (k - j + n + 1))) * &qm1);
        add(&mut e, c, vec![Atom::Mul(z(1)), Atom::Mul(f.get(i)), d(k), Atom::Shift(j - k - n), Atom::Mul(f.get(j - k))]);
    }
    Ok(e)
}

/// The printed quadratic kernels of `L = u_0 ∂_q + u_1`.
pub fn gd1_closed_form(i: i64, j: i64) -> Result<BracketKernel> {
    let u0 = FieldExpr::field('u', 0);
    let x = FieldExpr::test(j);
    let q = QScalar::q();
    let half_q = (&QScalar::from_int(2) * &q).inv();
    let tt = |c: QScalar, shift: i64, pre: Vec<Atom>| -> FieldExpr {
        let mut atoms = pre;
        atoms.push(Atom::Mul(u0.clone()));
        atoms.push(Atom::Shift(shift));
        atoms.push(Atom::Mul(u0.clone()));
        term(c, atoms, &x)
    };
    let e = match (i, j) {
        (0, 0) => {
            let c = &half_q * &q_minus_one();
            // u0 (T - T^{-1}) z u0
            let a = term(c.clone(), vec![Atom::Mul(u0.clone()), Atom::Shift(1), Atom::Mul(z(1)), Atom::Mul(u0.clone())], &x);
            let b = term(c, vec![Atom::Mul(u0.clone()), Atom::Shift(-1), Atom::Mul(z(1)), Atom::Mul(u0.clone())], &x);
            a.sub(&b)
        }
        (0, 1) => tt(half_q.clone(), 1, vec![]).sub(&tt(half_q, -1, vec![])),
        (1, 0) => tt(&half_q * &q, 1, vec![]).sub(&tt(&half_q * &q.inv(), -1, vec![])),
        (1, 1) => {
            let c = &half_q * &q_minus_one().inv();
            tt(c.clone(), 1, vec![Atom::Mul(z(-1))]).sub(&tt(c, -1, vec![Atom::Mul(z(-1))]))
        }
        _ => return Err(Error::IndexOutOfFormula { i, j }),
    };
    Ok(BracketKernel::new(Basis::D, i, j, e))
}

// ---- classical limit ----

/// A differential operator `Σ b z^k ∂^d` with rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ClassicalOperator {
    pub terms: BTreeMap<(i64, u32), BigRational>,
}

impl ClassicalOperator {
    /// `∂`.
    pub fn derivative() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((0, 1), BigRational::one());
        ClassicalOperator { terms }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let terms = self.terms.iter().map(|(k, v)| (*k, v * c)).filter(|(_, v)| !v.is_zero()).collect();
        ClassicalOperator { terms }
    }
}

impl fmt::Display for ClassicalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for ((k, d), c) in &self.terms {
            let mut parts: Vec<String> = Vec::new();
            if let Some(zf) = crate::field::z_factor(*k) {
                parts.push(zf);
            }
            match d {
                0 => {}
                1 => parts.push(String::from("∂")),
                _ => parts.push(format!("∂^{d}")),
            }
            let neg = c.is_negative();
            let a = c.abs();
            let coef = if a.is_one() && !parts.is_empty() { String::new() } else { format!("{a}") };
            let body = [coef].into_iter().chain(parts).filter(|s| !s.is_empty()).collect::<Vec<_>>().join("*");
            match (first, neg) {
                (true, true) => write!(f, "-{body}")?,
                (true, false) => write!(f, "{body}")?,
                (false, true) => write!(f, " - {body}")?,
                (false, false) => write!(f, " + {body}")?,
            }
            first = false;
        }
        Ok(())
    }
}

// polynomials in m, ascending coefficients
fn pmul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn padd(acc: &mut Vec<BigRational>, b: &[BigRational]) {
    if acc.len() < b.len() {
        acc.resize(b.len(), BigRational::zero());
    }
    for (i, y) in b.iter().enumerate() {
        acc[i] += y;
    }
}

fn peval(p: &[BigRational], m: i64) -> BigRational {
    let x = BigRational::from_integer(BigInt::from(m));
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * &x + c)
}

/// `binom(a m, l)` as a polynomial in `m`.
fn binom_am(a: i64, l: usize) -> Vec<BigRational> {
    let mut p = vec![BigRational::one()];
    for r in 0..l {
        let lin = [BigRational::from_integer(BigInt::from(-(r as i64))), BigRational::from_integer(BigInt::from(a))];
        p = pmul(&p, &lin);
    }
    let fact: BigInt = (1..=l as i64).map(BigInt::from).product();
    p.iter().map(|c| c / BigRational::from_integer(fact.clone())).collect()
}

impl BracketKernel {
    /// The `q → 1` limit of a field-free kernel as a differential operator.
    /// Each `z^s`-block acts on `z^m` by `Σ_a c_a(q) q^{am}`; its expansion
    /// in `h = q - 1` must be regular, and the `h^0` polynomial in `m` is
    /// rewritten in falling factorials.
    pub fn classical_limit(&self) -> Result<ClassicalOperator> {
        let mut blocks: BTreeMap<i64, Vec<(i64, QScalar)>> = BTreeMap::new();
        for t in self.terms()? {
            if t.proj.is_some() || !t.left.is_one() {
                return Err(Error::Invalid(String::from("classical limit needs a field-free kernel")));
            }
            blocks.entry(t.zpow).or_default().push((t.a, t.c));
        }
        let mut out = ClassicalOperator::default();
        for (s, cs) in blocks {
            let vmin = cs.iter().map(|(_, c)| c.expand_at_one(1).0).min().unwrap_or(0).min(0);
            // coefficient polynomials of h^p for p in vmin..=0
            let mut by_power: Vec<Vec<BigRational>> = vec![Vec::new(); (1 - vmin) as usize];
            for (a, c) in &cs {
                let (v, ser) = c.expand_at_one(1);
                for (k, ck) in ser.iter().enumerate() {
                    let p = v + k as i64;
                    for l in 0..=(-p).max(0) as usize {
                        let total = p + l as i64;
                        if total > 0 {
                            break;
                        }
                        let term: Vec<BigRational> = binom_am(*a, l).iter().map(|x| x * ck).collect();
                        padd(&mut by_power[(total - vmin) as usize], &term);
                    }
                }
            }
            for (idx, poly) in by_power.iter().enumerate() {
                let p = vmin + idx as i64;
                if p < 0 && poly.iter().any(|c| !c.is_zero()) {
                    return Err(Error::Invalid(format!("kernel diverges like (q-1)^{p} as q -> 1")));
                }
            }
            let poly = &by_power[(-vmin) as usize];
            let deg = poly.len();
            // forward differences at 0 give the falling-factorial coefficients
            let mut vals: Vec<BigRational> = (0..=deg as i64).map(|m| peval(poly, m)).collect();
            let mut fact = BigRational::one();
            for d in 0..=deg {
                if d > 0 {
                    fact *= BigRational::from_integer(BigInt::from(d as i64));
                }
                let b = &vals[0] / &fact;
                if !b.is_zero() {
                    out.terms.insert((s + d as i64, d as u32), b);
                }
                vals = vals.windows(2).map(|w| &w[1] - &w[0]).collect();
                if vals.is_empty() {
                    break;
                }
            }
        }
        Ok(out)
    }
}
