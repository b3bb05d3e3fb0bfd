//! Exact rational functions of the deformation parameter `q`, and the
//! q-numbers and q-binomials built from them.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// A rational function `num(q) / den(q)` in canonical form: the two
/// polynomials are coprime over Z[q] and `den` has a positive leading
/// coefficient. Canonical form is unique, so structural equality is equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QScalar {
    num: Poly,
    den: Poly,
}

impl Default for QScalar {
    fn default() -> Self {
        QScalar::zero()
    }
}

impl QScalar {
    pub fn zero() -> Self {
        QScalar { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        QScalar { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_int(v: i64) -> Self {
        QScalar::from_bigint(BigInt::from(v))
    }

    pub fn from_bigint(v: BigInt) -> Self {
        QScalar { num: Poly::constant(v), den: Poly::one() }
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        QScalar::from_rational(&BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_rational(r: &BigRational) -> Self {
        QScalar::new(Poly::constant(r.numer().clone()), Poly::constant(r.denom().clone()))
    }

    /// The polynomial `p(q)` as a scalar.
    pub fn from_poly(p: Poly) -> Self {
        QScalar { num: p, den: Poly::one() }
    }

    /// `q`.
    pub fn q() -> Self {
        QScalar::q_pow(1)
    }

    /// `q^k` for any integer `k`.
    pub fn q_pow(k: i64) -> Self {
        let m = Poly::monomial(BigInt::one(), k.unsigned_abs() as usize);
        if k >= 0 {
            QScalar { num: m, den: Poly::one() }
        } else {
            QScalar { num: Poly::one(), den: m }
        }
    }

    /// Build from an arbitrary numerator and nonzero denominator.
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        canonical(num, den)
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// The rational value when the scalar does not depend on `q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num.is_constant() && self.den.is_constant() {
            let n = self.num.coeffs().first().cloned().unwrap_or_default();
            Some(BigRational::new(n, self.den.coeffs()[0].clone()))
        } else {
            None
        }
    }

    pub fn inv(&self) -> QScalar {
        assert!(!self.is_zero(), "inverse of zero");
        let (num, den) = if self.num.lead().is_some_and(|l| l.is_negative()) {
            (self.den.neg(), self.num.neg())
        } else {
            (self.den.clone(), self.num.clone())
        };
        QScalar { num, den }
    }

    pub fn pow(&self, k: i64) -> QScalar {
        let base = if k < 0 { self.inv() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = QScalar::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        acc
    }

    /// Exact value at `q = r`.
    pub fn eval(&self, r: &BigRational) -> Result<BigRational> {
        let d = self.den.eval(r);
        if d.is_zero() {
            return Err(Error::PoleAtQ);
        }
        Ok(self.num.eval(r) / d)
    }

    /// The substitution `q -> 1/q`.
    pub fn invert_q(&self) -> QScalar {
        let dn = self.num.degree().unwrap_or(0) as i64;
        let dd = self.den.degree().unwrap_or(0) as i64;
        let mut num = self.num.reversed();
        let mut den = self.den.reversed();
        // num(1/q)/den(1/q) = q^(dd-dn) * rev(num)/rev(den)
        if dd >= dn {
            num = num.shl((dd - dn) as usize);
        } else {
            den = den.shl((dn - dd) as usize);
        }
        QScalar::new(num, den)
    }

    /// Laurent expansion in `h = q - 1`: returns the valuation `v` and the
    /// coefficients of `h^v, h^(v+1), ...` up to (excluding) `h^upto`.
    pub fn expand_at_one(&self, upto: i64) -> (i64, Vec<BigRational>) {
        if self.is_zero() {
            return (upto, Vec::new());
        }
        let n = self.num.taylor_at_one();
        let d = self.den.taylor_at_one();
        let vn = n.iter().position(|x| !x.is_zero()).unwrap() as i64;
        let vd = d.iter().position(|x| !x.is_zero()).unwrap() as i64;
        let v = vn - vd;
        let count = (upto - v).max(0) as usize;
        let nn: Vec<BigRational> = n[vn as usize..].iter().map(|x| BigRational::from_integer(x.clone())).collect();
        let dd: Vec<BigRational> = d[vd as usize..].iter().map(|x| BigRational::from_integer(x.clone())).collect();
        let mut out: Vec<BigRational> = Vec::with_capacity(count);
        for k in 0..count {
            let mut acc = nn.get(k).cloned().unwrap_or_else(BigRational::zero);
            for j in 1..=k.min(dd.len().saturating_sub(1)) {
                acc -= &dd[j] * &out[k - j];
            }
            out.push(acc / &dd[0]);
        }
        (v, out)
    }
}

fn canonical(num: Poly, den: Poly) -> QScalar {
    if num.is_zero() {
        return QScalar::zero();
    }
    let g = if den.is_constant() {
        Poly::constant(num.content().gcd(&den.coeffs()[0]))
    } else if den.is_monomial() {
        let k = den.order().min(num.order());
        Poly::monomial(num.content().gcd(&den.coeffs()[den.order()]), k)
    } else {
        num.gcd(&den)
    };
    let (mut num, mut den) = if g.is_one() { (num, den) } else { (num.exact_div(&g), den.exact_div(&g)) };
    if den.lead().is_some_and(|l| l.is_negative()) {
        num = num.neg();
        den = den.neg();
    }
    QScalar { num, den }
}

// reduce n/d where gcd(n, d) is known to divide g
fn reduce_by(num: Poly, den: Poly, g: &Poly) -> QScalar {
    if num.is_zero() {
        return QScalar::zero();
    }
    let h = num.gcd(g);
    if h.is_one() {
        QScalar { num, den }
    } else {
        QScalar { num: num.exact_div(&h), den: den.exact_div(&h) }
    }
}

// ---- arithmetic ----

impl<'a> Add<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    fn add(self, o: &QScalar) -> QScalar {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let n = self.num.add(&o.num);
            if self.den.is_one() {
                return QScalar { num: n, den: Poly::one() };
            }
            return reduce_by(n, self.den.clone(), &self.den);
        }
        let g = self.den.gcd(&o.den);
        if g.is_one() {
            let n = self.num.mul(&o.den).add(&o.num.mul(&self.den));
            if n.is_zero() {
                return QScalar::zero();
            }
            return QScalar { num: n, den: self.den.mul(&o.den) };
        }
        let b1 = self.den.exact_div(&g);
        let d1 = o.den.exact_div(&g);
        let n = self.num.mul(&d1).add(&o.num.mul(&b1));
        reduce_by(n, self.den.mul(&d1), &g)
    }
}

impl<'a> Mul<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    fn mul(self, o: &QScalar) -> QScalar {
        if self.is_zero() || o.is_zero() {
            return QScalar::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return QScalar { num: self.num.mul(&o.num), den: Poly::one() };
        }
        let g1 = self.num.gcd(&o.den);
        let g2 = o.num.gcd(&self.den);
        let (a, d) =
            if g1.is_one() { (self.num.clone(), o.den.clone()) } else { (self.num.exact_div(&g1), o.den.exact_div(&g1)) };
        let (c, b) =
            if g2.is_one() { (o.num.clone(), self.den.clone()) } else { (o.num.exact_div(&g2), self.den.exact_div(&g2)) };
        let mut num = a.mul(&c);
        let mut den = b.mul(&d);
        if den.lead().is_some_and(|l| l.is_negative()) {
            num = num.neg();
            den = den.neg();
        }
        QScalar { num, den }
    }
}

impl Neg for &QScalar {
    type Output = QScalar;
    fn neg(self) -> QScalar {
        QScalar { num: self.num.neg(), den: self.den.clone() }
    }
}

impl Neg for QScalar {
    type Output = QScalar;
    fn neg(self) -> QScalar {
        -&self
    }
}

impl<'a> Sub<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    fn sub(self, o: &QScalar) -> QScalar {
        self + &(-o)
    }
}

impl<'a> Div<&'a QScalar> for &'a QScalar {
    type Output = QScalar;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &QScalar) -> QScalar {
        self * &o.inv()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<QScalar> for QScalar {
            type Output = QScalar;
            fn $m(self, o: QScalar) -> QScalar {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a QScalar> for QScalar {
            type Output = QScalar;
            fn $m(self, o: &QScalar) -> QScalar {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<QScalar> for &'a QScalar {
            type Output = QScalar;
            fn $m(self, o: QScalar) -> QScalar {
                self.$m(&o)
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&QScalar> for QScalar {
    fn add_assign(&mut self, o: &QScalar) {
        *self = &*self + o;
    }
}

impl SubAssign<&QScalar> for QScalar {
    fn sub_assign(&mut self, o: &QScalar) {
        *self = &*self - o;
    }
}

impl MulAssign<&QScalar> for QScalar {
    fn mul_assign(&mut self, o: &QScalar) {
        *self = &*self * o;
    }
}

impl From<i64> for QScalar {
    fn from(v: i64) -> Self {
        QScalar::from_int(v)
    }
}

// ---- q-combinatorics ----

/// The q-number `(n)_q = (q^n - 1)/(q - 1)`.
pub fn qnum(n: i64) -> QScalar {
    if n == 0 {
        return QScalar::zero();
    }
    let ones = Poly::from_vec((0..n.unsigned_abs()).map(|_| BigInt::one()).collect());
    if n > 0 {
        QScalar::from_poly(ones)
    } else {
        // (q^-k - 1)/(q - 1) = -(1 + q + ... + q^(k-1)) / q^k
        QScalar { num: ones.neg(), den: Poly::monomial(BigInt::one(), n.unsigned_abs() as usize) }
    }
}

/// q-factorial `(1)_q (2)_q ... (k)_q`.
pub fn qfactorial(k: u32) -> QScalar {
    let mut acc = QScalar::one();
    for i in 1..=k as i64 {
        acc = &acc * &qnum(i);
    }
    acc
}

/// The q-binomial `[m k]_q = (m)_q (m-1)_q ... (m-k+1)_q / ((1)_q ... (k)_q)`,
/// evaluated from the defining product for any integer `m`.
pub fn qbinomial(m: i64, k: u32) -> QScalar {
    let mut top = QScalar::one();
    for i in 0..k as i64 {
        top = &top * &qnum(m - i);
        if top.is_zero() {
            return top;
        }
    }
    let out = &top / &qfactorial(k);
    #[cfg(feature = "fault-injection")]
    if k >= 1 && crate::fault::qbinomial_corrupted() {
        return &out + &QScalar::one();
    }
    out
}

// ---- text form ----

/// Polynomial text in ascending powers of `q`, e.g. `-1+q^2`.
pub fn fmt_poly(p: &Poly) -> String {
    use core::fmt::Write;
    if p.is_zero() {
        return String::from("0");
    }
    let mut s = String::new();
    for (k, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push(if neg { '-' } else { '+' });
        }
        match (k, a.is_one()) {
            (0, _) => write!(s, "{a}").unwrap(),
            (_, true) => {}
            (_, false) => write!(s, "{a}*").unwrap(),
        }
        match k {
            0 => {}
            1 => s.push('q'),
            _ => write!(s, "q^{k}").unwrap(),
        }
    }
    s
}

fn term_count(p: &Poly) -> usize {
    p.coeffs().iter().filter(|c| !c.is_zero()).count()
}

impl QScalar {
    /// True when the printed form is a single signed monomial over 1.
    pub fn is_atomic(&self) -> bool {
        self.den.is_one() && term_count(&self.num) <= 1
    }

    /// Whether the first printed coefficient is negative.
    pub fn leading_sign_negative(&self) -> bool {
        self.num.coeffs().iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative())
    }
}

impl fmt::Display for QScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            f.write_str(&fmt_poly(&self.num))
        } else {
            write!(f, "({})/({})", fmt_poly(&self.num), fmt_poly(&self.den))
        }
    }
}
