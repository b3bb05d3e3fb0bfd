//! Laurent polynomials in `z` over [`QScalar`], the shift `τ`, the
//! q-derivative, the Taylor/Laurent projectors and the two integrals.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::scalar::{qnum, QScalar};

/// The ring operations a symbol coefficient needs. Implemented by concrete
/// Laurent fields, by formal field expressions (for kernel extraction) and by
/// polynomials in `log q` (for the logarithmic derivation).
pub trait Coeff: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: &QScalar) -> Self;
    /// Embed a concrete Laurent polynomial.
    fn from_field(f: &LaurentField) -> Self;
    /// `τ^b`, i.e. `f(z) -> f(q^b z)`.
    fn shift(&self, b: i64) -> Self;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn from_scalar(c: &QScalar) -> Self {
        Self::from_field(&LaurentField::constant(c.clone()))
    }

    /// `∂_q f = (τf - f) / (z(q-1))`.
    fn qderive(&self) -> Self {
        let d = self.shift(1).sub(self);
        let inv = LaurentField::monomial(QScalar::from_poly(crate::poly::Poly::from_i64s(&[-1, 1])).inv(), -1);
        d.mul(&Self::from_field(&inv))
    }

    /// Taylor part, constant mode and Laurent part; only defined for
    /// coefficients with explicit z-dependence.
    fn split_modes(&self) -> Result<(Self, Self, Self)> {
        Err(Error::Invalid(String::from("mode projection of a formal coefficient")))
    }
}

/// Finitely supported `Σ c_k z^k` with no stored zero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct LaurentField {
    c: BTreeMap<i64, QScalar>,
}

impl LaurentField {
    pub fn zero() -> Self {
        LaurentField { c: BTreeMap::new() }
    }

    pub fn one() -> Self {
        LaurentField::constant(QScalar::one())
    }

    pub fn constant(c: QScalar) -> Self {
        LaurentField::monomial(c, 0)
    }

    pub fn monomial(c: QScalar, k: i64) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(k, c);
        }
        LaurentField { c: m }
    }

    /// `z^k`.
    pub fn z_pow(k: i64) -> Self {
        LaurentField::monomial(QScalar::one(), k)
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, QScalar)>>(it: I) -> Self {
        let mut f = LaurentField::zero();
        for (k, v) in it {
            f.add_term(k, &v);
        }
        f
    }

    pub fn add_term(&mut self, k: i64, v: &QScalar) {
        if v.is_zero() {
            return;
        }
        match self.c.get_mut(&k) {
            Some(e) => {
                *e += v;
                if e.is_zero() {
                    self.c.remove(&k);
                }
            }
            None => {
                self.c.insert(k, v.clone());
            }
        }
    }

    pub fn coeff(&self, k: i64) -> QScalar {
        self.c.get(&k).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &QScalar)> {
        self.c.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.c.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.c.keys().next_back().copied()
    }

    /// `(c, k)` when the field is the single monomial `c z^k`.
    pub fn as_monomial(&self) -> Option<(QScalar, i64)> {
        if self.c.len() == 1 {
            let (k, v) = self.c.iter().next().unwrap();
            Some((v.clone(), *k))
        } else {
            None
        }
    }

    pub fn map_coeffs(&self, mut f: impl FnMut(i64, &QScalar) -> QScalar) -> Self {
        LaurentField::from_terms(self.c.iter().map(|(k, v)| (*k, f(*k, v))))
    }

    /// Multiply by `z^k`.
    pub fn mul_z_pow(&self, k: i64) -> Self {
        LaurentField { c: self.c.iter().map(|(e, v)| (e + k, v.clone())).collect() }
    }

    pub fn integrate(&self) -> QScalar {
        self.coeff(0)
    }

    pub fn integrate_m1(&self) -> QScalar {
        self.coeff(-1)
    }

    /// Exponents `>= 1`.
    pub fn taylor_part(&self) -> Self {
        LaurentField { c: self.c.range(1..).map(|(k, v)| (*k, v.clone())).collect() }
    }

    /// Exponents `<= -1`.
    pub fn laurent_part(&self) -> Self {
        LaurentField { c: self.c.range(..0).map(|(k, v)| (*k, v.clone())).collect() }
    }

    /// `z d/dz`.
    pub fn euler_derive(&self) -> Self {
        self.map_coeffs(|k, v| v * &QScalar::from_int(k))
    }

    /// Coefficient-wise value at `q = r`, still as a field over constants.
    pub fn eval_q(&self, r: &BigRational) -> Result<Self> {
        let mut out = LaurentField::zero();
        for (k, v) in &self.c {
            out.add_term(*k, &QScalar::from_rational(&v.eval(r)?));
        }
        Ok(out)
    }

    pub fn invert_q(&self) -> Self {
        self.map_coeffs(|_, v| v.invert_q())
    }

    /// `Σ f(k) c_k z^k` for a per-mode multiplier.
    pub fn mode_scale(&self, mut f: impl FnMut(i64) -> QScalar) -> Self {
        self.map_coeffs(|k, v| v * &f(k))
    }
}

impl Coeff for LaurentField {
    fn zero() -> Self {
        LaurentField::zero()
    }

    fn one() -> Self {
        LaurentField::one()
    }

    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    fn add(&self, o: &Self) -> Self {
        let (mut acc, other) = if self.c.len() >= o.c.len() { (self.clone(), o) } else { (o.clone(), self) };
        for (k, v) in &other.c {
            acc.add_term(*k, v);
        }
        acc
    }

    fn neg(&self) -> Self {
        LaurentField { c: self.c.iter().map(|(k, v)| (*k, -v)).collect() }
    }

    fn mul(&self, o: &Self) -> Self {
        let mut acc = LaurentField::zero();
        for (a, x) in &self.c {
            for (b, y) in &o.c {
                acc.add_term(a + b, &(x * y));
            }
        }
        acc
    }

    fn scale(&self, c: &QScalar) -> Self {
        if c.is_zero() {
            return LaurentField::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        LaurentField { c: self.c.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    fn from_field(f: &LaurentField) -> Self {
        f.clone()
    }

    fn shift(&self, b: i64) -> Self {
        if b == 0 {
            return self.clone();
        }
        LaurentField { c: self.c.iter().map(|(k, v)| (*k, v * &QScalar::q_pow(b * k))).collect() }
    }

    fn qderive(&self) -> Self {
        LaurentField::from_terms(self.c.iter().filter(|(k, _)| **k != 0).map(|(k, v)| (k - 1, v * &qnum(*k))))
    }

    fn split_modes(&self) -> Result<(Self, Self, Self)> {
        Ok((self.taylor_part(), LaurentField::constant(self.integrate()), self.laurent_part()))
    }
}

/// Writes a sum of terms `scalar * factor1 * factor2 ...` in the text grammar.
/// Signs of atomic scalars are pulled out so that sums read `a - b`.
pub fn write_sum<'a, I>(out: &mut String, items: I)
where
    I: IntoIterator<Item = (&'a QScalar, Vec<String>)>,
{
    use core::fmt::Write;
    let start = out.len();
    for (c, factors) in items {
        let neg = c.is_atomic() && c.leading_sign_negative();
        let c = if neg { -c } else { c.clone() };
        if out.len() == start {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut parts: Vec<String> = Vec::new();
        if !(c.is_one() && !factors.is_empty()) {
            if c.denom().is_one() && !c.is_atomic() {
                parts.push(alloc::format!("({c})"));
            } else {
                parts.push(alloc::format!("{c}"));
            }
        }
        parts.extend(factors);
        let _ = write!(out, "{}", parts.join("*"));
    }
    if out.len() == start {
        out.push('0');
    }
}

pub fn z_factor(k: i64) -> Option<String> {
    match k {
        0 => None,
        1 => Some(String::from("z")),
        _ => Some(alloc::format!("z^{k}")),
    }
}

impl fmt::Display for LaurentField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_sum(&mut s, self.c.iter().map(|(k, v)| (v, z_factor(*k).into_iter().collect())));
        f.write_str(&s)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    pub fn qs(c: &[i64]) -> QScalar {
        QScalar::from_poly(crate::poly::Poly::from_i64s(c))
    }

    pub fn arb_scalar() -> impl Strategy<Value = QScalar> {
        (proptest::collection::vec(-3i64..=3, 1..3), 0i64..3)
            .prop_map(|(c, k)| &QScalar::from_poly(crate::poly::Poly::from_i64s(&c)) * &QScalar::q_pow(-k))
    }

    pub fn arb_field() -> impl Strategy<Value = LaurentField> {
        proptest::collection::vec((-3i64..=3, arb_scalar()), 0..4).prop_map(LaurentField::from_terms)
    }

    fn z(k: i64) -> LaurentField {
        LaurentField::z_pow(k)
    }

    #[test]
    fn shift_examples() {
        assert_eq!(z(2).shift(1), LaurentField::monomial(QScalar::q_pow(2), 2));
        assert_eq!(z(1).shift(-1), LaurentField::monomial(QScalar::q_pow(-1), 1));
        let f = z(1).add(&z(-1));
        let g = LaurentField::monomial(QScalar::q(), 1).add(&LaurentField::monomial(QScalar::q_pow(-1), -1));
        assert_eq!(f.shift(1), g);
        assert_eq!(f.shift(0), f);
    }

    #[test]
    fn qderive_examples() {
        assert_eq!(z(1).qderive(), LaurentField::one());
        assert_eq!(z(2).qderive(), LaurentField::monomial(qs(&[1, 1]), 1));
        assert_eq!(z(-1).qderive(), LaurentField::monomial(-QScalar::q_pow(-1), -2));
        assert!(LaurentField::one().qderive().is_zero());
    }

    #[test]
    fn integrals() {
        assert!(LaurentField::one().integrate().is_one());
        assert!(z(3).integrate().is_zero());
        let f = LaurentField::monomial(QScalar::from_int(3), -1).add(&LaurentField::constant(QScalar::from_int(5)));
        assert_eq!(f.integrate(), QScalar::from_int(5));
        assert!(z(-1).integrate_m1().is_one());
        let g = z(5).add(&LaurentField::monomial(QScalar::from_int(2), -3));
        assert!(g.qderive().integrate_m1().is_zero());
        assert_eq!(z(-1).shift(1).integrate_m1(), QScalar::q_pow(-1));
    }

    #[test]
    fn projections_and_euler() {
        let f = z(2).add(&z(0)).add(&z(-1));
        assert_eq!(f.taylor_part(), z(2));
        assert_eq!(f.laurent_part(), z(-1));
        assert!(LaurentField::constant(QScalar::from_int(7)).taylor_part().is_zero());
        assert_eq!(z(3).euler_derive(), LaurentField::monomial(QScalar::from_int(3), 3));
        assert!(LaurentField::one().euler_derive().is_zero());
        assert_eq!(z(-2).euler_derive(), LaurentField::monomial(QScalar::from_int(-2), -2));
    }

    #[test]
    fn display() {
        let f = z(2).add(&LaurentField::monomial(qs(&[-1, 1]), 0)).sub(&z(-1));
        assert_eq!(f.to_string(), "-z^-1 + (-1+q) + z^2");
        assert_eq!(LaurentField::zero().to_string(), "0");
    }

    proptest! {
        #[test]
        fn q_leibniz(f in arb_field(), g in arb_field()) {
            let lhs = f.mul(&g).qderive();
            let rhs = f.qderive().mul(&g).add(&f.shift(1).mul(&g.qderive()));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn q_commutation(f in arb_field()) {
            prop_assert_eq!(f.shift(1).qderive(), f.qderive().shift(1).scale(&QScalar::q()));
        }

        #[test]
        fn default_qderive_agrees(f in arb_field()) {
            let d = f.shift(1).sub(&f).mul(&LaurentField::monomial(qs(&[-1, 1]).inv(), -1));
            prop_assert_eq!(d, f.qderive());
        }

        #[test]
        fn shift_invariance(f in arb_field(), b in -3i64..=3) {
            prop_assert_eq!(f.shift(b).integrate(), f.integrate());
            prop_assert_eq!(f.shift(b).shift(-b), f.clone());
            prop_assert_eq!(f.shift(b).shift(2), f.shift(b + 2));
        }

        #[test]
        fn m1_adjointness(a in arb_field(), b in arb_field()) {
            let lhs = a.shift(1).mul(&b).integrate_m1();
            let rhs = a.mul(&b.shift(-1)).integrate_m1() * QScalar::q_pow(-1);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn mode_projectors(f in arb_field(), g in arb_field(), b in -2i64..=2) {
            prop_assert_eq!(f.taylor_part().taylor_part(), f.taylor_part());
            prop_assert_eq!(f.shift(b).taylor_part(), f.taylor_part().shift(b));
            prop_assert_eq!(f.shift(b).laurent_part(), f.laurent_part().shift(b));
            prop_assert_eq!(
                f.taylor_part().mul(&g).integrate(),
                f.mul(&g.laurent_part()).integrate()
            );
            let sum = f.taylor_part().add(&f.laurent_part()).add(&LaurentField::constant(f.integrate()));
            prop_assert_eq!(sum, f);
        }
    }
}
