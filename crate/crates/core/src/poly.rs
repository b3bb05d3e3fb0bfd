//! Dense univariate polynomials in `q` with arbitrary-precision integer coefficients.
//!
//! Only what the rational-function field needs: ring operations, content,
//! pseudo-remainder, exact division and a gcd over Z[q].

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Polynomial with coefficients stored in ascending powers of `q`.
/// No trailing zeros are stored; the zero polynomial is the empty vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    c: Vec<BigInt>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(BigInt::one())
    }

    pub fn constant(v: BigInt) -> Self {
        Poly::from_vec(vec![v])
    }

    /// `v * q^k`.
    pub fn monomial(v: BigInt, k: usize) -> Self {
        if v.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![BigInt::zero(); k + 1];
        c[k] = v;
        Poly { c }
    }

    pub fn from_vec(mut c: Vec<BigInt>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_i64s(c: &[i64]) -> Self {
        Poly::from_vec(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&BigInt> {
        self.c.last()
    }

    /// Exponent of the lowest nonzero term.
    pub fn order(&self) -> usize {
        self.c.iter().position(|x| !x.is_zero()).unwrap_or(0)
    }

    /// True when the polynomial has exactly one nonzero term.
    pub fn is_monomial(&self) -> bool {
        !self.is_zero() && self.order() + 1 == self.c.len()
    }

    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for x in &self.c {
            g = g.gcd(x);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn neg(&self) -> Poly {
        Poly { c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let (long, short) = if self.c.len() >= o.c.len() { (self, o) } else { (o, self) };
        let mut c = long.c.clone();
        for (a, b) in c.iter_mut().zip(short.c.iter()) {
            *a += b;
        }
        Poly::from_vec(c)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let mut c = self.c.clone();
        c.resize(n, BigInt::zero());
        for (a, b) in c.iter_mut().zip(o.c.iter()) {
            *a -= b;
        }
        Poly::from_vec(c)
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        if o.c.len() == 1 {
            return self.scale(&o.c[0]);
        }
        if self.c.len() == 1 {
            return o.scale(&self.c[0]);
        }
        let mut c = vec![BigInt::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if !b.is_zero() {
                    c[i + j] += a * b;
                }
            }
        }
        Poly::from_vec(c)
    }

    pub fn scale(&self, v: &BigInt) -> Poly {
        if v.is_zero() {
            return Poly::zero();
        }
        Poly { c: self.c.iter().map(|x| x * v).collect() }
    }

    /// Divide every coefficient by `v`, which must divide them exactly.
    pub fn div_int(&self, v: &BigInt) -> Poly {
        if v.is_one() {
            return self.clone();
        }
        Poly { c: self.c.iter().map(|x| x / v).collect() }
    }

    /// Multiply by `q^k`.
    pub fn shl(&self, k: usize) -> Poly {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let mut c = vec![BigInt::zero(); k];
        c.extend(self.c.iter().cloned());
        Poly { c }
    }

    /// Divide by `q^k`; the caller guarantees `k <= order()`.
    pub fn shr(&self, k: usize) -> Poly {
        if k == 0 {
            return self.clone();
        }
        Poly { c: self.c[k..].to_vec() }
    }

    pub fn primitive_part(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut g = self.content();
        if self.lead().is_some_and(|l| l.is_negative()) {
            g = -g;
        }
        self.div_int(&g)
    }

    /// Pseudo-remainder of `self` by `d`: lc(d)^(deg self - deg d + 1) * self mod d.
    fn prem(&self, d: &Poly) -> Poly {
        let dd = d.degree().expect("division by zero polynomial");
        let mut r = self.c.clone();
        let lc = d.c[dd].clone();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let t = r[k].clone();
            for x in r.iter_mut() {
                *x *= &lc;
            }
            let off = k - dd;
            for (i, dc) in d.c.iter().enumerate() {
                r[off + i] -= &t * dc;
            }
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        Poly::from_vec(r)
    }

    /// Exact quotient `self / d`. Panics if the division is not exact over Z.
    pub fn exact_div(&self, d: &Poly) -> Poly {
        let dd = d.degree().expect("division by zero polynomial");
        if dd == 0 {
            return self.div_int(&d.c[0]);
        }
        if self.is_zero() {
            return Poly::zero();
        }
        let sd = self.c.len() - 1;
        assert!(sd >= dd, "inexact polynomial division");
        let mut r = self.c.clone();
        let mut qc = vec![BigInt::zero(); sd - dd + 1];
        let lc = &d.c[dd];
        for k in (dd..=sd).rev() {
            if r[k].is_zero() {
                continue;
            }
            let (t, rem) = r[k].div_rem(lc);
            assert!(rem.is_zero(), "inexact polynomial division");
            let off = k - dd;
            for (i, dc) in d.c.iter().enumerate() {
                r[off + i] -= &t * dc;
            }
            qc[off] = t;
        }
        assert!(r.iter().all(|x| x.is_zero()), "inexact polynomial division");
        Poly::from_vec(qc)
    }

    /// Greatest common divisor over Z[q], with positive leading coefficient.
    pub fn gcd(&self, o: &Poly) -> Poly {
        if self.is_zero() {
            return o.normalize_sign();
        }
        if o.is_zero() {
            return self.normalize_sign();
        }
        let k = self.order().min(o.order());
        let a = self.shr(self.order());
        let b = o.shr(o.order());
        let cont = a.content().gcd(&b.content());
        let g = if a.is_constant() || b.is_constant() { Poly::one() } else { prs_gcd(a.primitive_part(), b.primitive_part()) };
        g.scale(&cont).shl(k)
    }

    fn normalize_sign(&self) -> Poly {
        if self.lead().is_some_and(|l| l.is_negative()) {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn eval(&self, r: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for x in self.c.iter().rev() {
            acc = acc * r + BigRational::from_integer(x.clone());
        }
        acc
    }

    /// Coefficients of `self(1 + h)` in ascending powers of `h`.
    pub fn taylor_at_one(&self) -> Vec<BigInt> {
        // repeated synthetic division by (q - 1)
        let mut cur = self.c.clone();
        let mut out = Vec::with_capacity(cur.len());
        while !cur.is_empty() {
            let n = cur.len();
            let mut quo = vec![BigInt::zero(); n - 1];
            let mut acc = BigInt::zero();
            for k in (0..n).rev() {
                acc += &cur[k];
                if k > 0 {
                    quo[k - 1] = acc.clone();
                }
            }
            out.push(acc);
            cur = quo;
            while cur.last().is_some_and(|x| x.is_zero()) {
                cur.pop();
            }
        }
        while out.last().is_some_and(|x| x.is_zero()) {
            out.pop();
        }
        out
    }

    /// `q^deg * self(1/q)`.
    pub fn reversed(&self) -> Poly {
        let mut c = self.c.clone();
        c.reverse();
        Poly::from_vec(c)
    }

    pub fn cmp_lex(&self, o: &Poly) -> Ordering {
        self.c.len().cmp(&o.c.len()).then_with(|| self.c.iter().rev().cmp(o.c.iter().rev()))
    }
}

fn prs_gcd(mut a: Poly, mut b: Poly) -> Poly {
    if a.c.len() < b.c.len() {
        core::mem::swap(&mut a, &mut b);
    }
    while !b.is_zero() {
        if b.is_constant() {
            return Poly::one();
        }
        let r = a.prem(&b);
        a = b;
        b = r.primitive_part();
    }
    a.primitive_part()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::from_i64s(c)
    }

    #[test]
    fn gcd_of_products() {
        let a = p(&[-1, 1]).mul(&p(&[1, 1, 1]));
        let b = p(&[-1, 1]).mul(&p(&[2, 0, 3]));
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
        assert_eq!(p(&[0, 0, 4]).gcd(&p(&[0, 6, 6])), p(&[0, 2]));
        assert_eq!(p(&[3]).gcd(&p(&[0, 6])), p(&[3]));
    }

    #[test]
    fn exact_division_roundtrip() {
        let a = p(&[1, -2, 0, 5]);
        let b = p(&[-3, 0, 1]);
        assert_eq!(a.mul(&b).exact_div(&b), a);
    }

    #[test]
    fn taylor_shift() {
        // q^2 = 1 + 2h + h^2
        let t = p(&[0, 0, 1]).taylor_at_one();
        assert_eq!(t, [1, 2, 1].iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>());
        // q - 1 = h
        assert_eq!(p(&[-1, 1]).taylor_at_one(), vec![BigInt::zero(), BigInt::one()]);
    }
}
