//! Truncated q-pseudodifferential symbols in the shift basis `T` and the
//! q-derivative basis `D`.
//!
//! A symbol `Σ_{i ≤ n} a_i B^i` stores its coefficients on orders `>= floor`.
//! Orders below the floor are unknown, and every operation propagates the
//! floor so that stored coefficients are always exact.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::field::{write_sum, z_factor, Coeff, LaurentField};
use crate::poly::Poly;
use crate::scalar::{qbinomial, qnum, QScalar};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Basis {
    /// `T f = τ(f) T`.
    T,
    /// `∂_q`, with the q-Leibniz rule.
    D,
}

impl Basis {
    pub fn letter(self) -> char {
        match self {
            Basis::T => 'T',
            Basis::D => 'D',
        }
    }

    /// Order carrying the residue.
    pub fn residue_order(self) -> i64 {
        match self {
            Basis::T => 0,
            Basis::D => -1,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Coefficients that can be integrated to a value.
pub trait Integral: Coeff {
    type Value: Clone + PartialEq + fmt::Debug;
    /// `∫`, the z^0 coefficient.
    fn int0(&self) -> Self::Value;
    /// `∫_{-1}`, the z^-1 coefficient.
    fn int_m1(&self) -> Self::Value;
}

impl Integral for LaurentField {
    type Value = QScalar;
    fn int0(&self) -> QScalar {
        self.integrate()
    }
    fn int_m1(&self) -> QScalar {
        self.integrate_m1()
    }
}

#[derive(Clone, Debug)]
pub struct Symbol<C> {
    basis: Basis,
    terms: BTreeMap<i64, C>,
    floor: i64,
}

/// Symbols over concrete Laurent fields.
pub type FieldSymbol = Symbol<LaurentField>;

/// Equality on the common reliable window `[max(floors), ∞)`.
impl<C: Coeff> PartialEq for Symbol<C> {
    fn eq(&self, o: &Self) -> bool {
        if self.basis != o.basis {
            return false;
        }
        let f = self.floor.max(o.floor);
        let a = self.terms.range(f..);
        let b = o.terms.range(f..);
        a.eq(b)
    }
}

/// `q/(q-1)`-type helper: the scalar `q - 1`.
pub fn q_minus_one() -> QScalar {
    QScalar::from_poly(Poly::from_i64s(&[-1, 1]))
}

impl<C: Coeff> Symbol<C> {
    pub fn zero(basis: Basis, floor: i64) -> Self {
        Symbol { basis, terms: BTreeMap::new(), floor }
    }

    pub fn one(basis: Basis, floor: i64) -> Self {
        Symbol::monomial(basis, C::one(), 0, floor)
    }

    /// `c B^order`.
    pub fn monomial(basis: Basis, c: C, order: i64, floor: i64) -> Self {
        let mut s = Symbol::zero(basis, floor);
        s.add_term(order, &c);
        s
    }

    /// The basis element `B^order` itself.
    pub fn basis_power(basis: Basis, order: i64, floor: i64) -> Self {
        Symbol::monomial(basis, C::one(), order, floor)
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, C)>>(basis: Basis, floor: i64, it: I) -> Self {
        let mut s = Symbol::zero(basis, floor);
        for (k, c) in it {
            s.add_term(k, &c);
        }
        s
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn floor(&self) -> i64 {
        self.floor
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &C)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn get(&self, order: i64) -> Option<&C> {
        self.terms.get(&order)
    }

    /// Coefficient at `order`, zero when absent. Does not check the floor.
    pub fn coeff(&self, order: i64) -> C {
        self.terms.get(&order).cloned().unwrap_or_else(C::zero)
    }

    /// Coefficient at `order`, refusing orders below the floor.
    pub fn coeff_checked(&self, order: i64) -> Result<C> {
        if order < self.floor {
            return Err(Error::FloorTooHigh { order, floor: self.floor });
        }
        Ok(self.coeff(order))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn top(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Top order used by the floor rule: one below the floor for zero.
    pub fn effective_top(&self) -> i64 {
        self.top().unwrap_or(self.floor - 1)
    }

    pub fn lowest(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn add_term(&mut self, order: i64, c: &C) {
        if order < self.floor || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&order) {
            Some(e) => {
                *e = e.add(c);
                if e.is_zero() {
                    self.terms.remove(&order);
                }
            }
            None => {
                self.terms.insert(order, c.clone());
            }
        }
    }

    /// Replace the floor. Lowering it asserts that the stored terms are the
    /// whole operator down to the new floor.
    pub fn with_floor(mut self, floor: i64) -> Self {
        self.floor = floor;
        self.terms = self.terms.split_off(&floor);
        self
    }

    /// Raise the floor to at least `floor`.
    pub fn truncate(self, floor: i64) -> Self {
        let f = self.floor.max(floor);
        self.with_floor(f)
    }

    /// Orders in `[lo, hi]`, keeping the floor.
    pub fn orders_between(&self, lo: i64, hi: i64) -> Self {
        let mut s = Symbol::zero(self.basis, self.floor);
        if lo <= hi {
            for (k, v) in self.terms.range(lo..=hi) {
                s.terms.insert(*k, v.clone());
            }
        }
        s
    }

    pub fn orders_at_least(&self, lo: i64) -> Self {
        self.orders_between(lo, i64::MAX)
    }

    pub fn orders_at_most(&self, hi: i64) -> Self {
        self.orders_between(i64::MIN, hi)
    }

    pub fn map_coeffs<D: Coeff>(&self, mut f: impl FnMut(i64, &C) -> D) -> Symbol<D> {
        Symbol::from_terms(self.basis, self.floor, self.terms.iter().map(|(k, v)| (*k, f(*k, v))))
    }

    pub fn try_map_coeffs<D: Coeff>(&self, mut f: impl FnMut(i64, &C) -> Result<D>) -> Result<Symbol<D>> {
        let mut out = Symbol::zero(self.basis, self.floor);
        for (k, v) in &self.terms {
            out.add_term(*k, &f(*k, v)?);
        }
        Ok(out)
    }

    fn check_basis(&self, o: &Self) -> Result<()> {
        if self.basis != o.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_basis(o)?;
        let floor = self.floor.max(o.floor);
        let mut s = self.clone().truncate(floor);
        for (k, v) in o.terms.range(floor..) {
            s.add_term(*k, v);
        }
        Ok(s)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|_, v| v.neg())
    }

    pub fn scale(&self, c: &QScalar) -> Self {
        self.map_coeffs(|_, v| v.scale(c))
    }

    /// Left multiplication by a function: `f · A`.
    pub fn left_mul_coeff(&self, f: &C) -> Self {
        self.map_coeffs(|_, v| f.mul(v))
    }

    /// The reliability floor of a product, per the floor rule.
    pub fn product_floor(&self, o: &Self) -> i64 {
        (self.floor + o.effective_top()).max(o.floor + self.effective_top())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.mul_floor(o, i64::MIN)
    }

    /// Product computed only on orders `>= max(natural floor, want)`.
    pub fn mul_floor(&self, o: &Self, want: i64) -> Result<Self> {
        self.check_basis(o)?;
        let floor = self.product_floor(o).max(want);
        let mut out = Symbol::zero(self.basis, floor);
        match self.basis {
            Basis::T => {
                for (i, f) in &self.terms {
                    for (j, g) in o.terms.iter().rev() {
                        if i + j < floor {
                            break;
                        }
                        out.add_term(i + j, &f.mul(&g.shift(*i)));
                    }
                }
            }
            Basis::D => {
                let mut binom: BTreeMap<(i64, i64), QScalar> = BTreeMap::new();
                let mut derivs: BTreeMap<i64, Vec<C>> = BTreeMap::new();
                for (i, f) in &self.terms {
                    for (j, g) in o.terms.iter().rev() {
                        let room = i + j - floor;
                        if room < 0 {
                            break;
                        }
                        let kmax = if *i >= 0 { room.min(*i) } else { room };
                        let ds = derivs.entry(*j).or_insert_with(|| alloc::vec![g.clone()]);
                        for k in 0..=kmax {
                            while ds.len() <= k as usize {
                                let next = ds.last().unwrap().qderive();
                                ds.push(next);
                            }
                            let dk = &ds[k as usize];
                            if dk.is_zero() {
                                break;
                            }
                            let b = binom.entry((*i, k)).or_insert_with(|| qbinomial(*i, k as u32));
                            if b.is_zero() {
                                continue;
                            }
                            let t = f.mul(&dk.shift(i - k)).scale(b);
                            out.add_term(i + j - k, &t);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// The D-basis product through the symbol calculus
    /// `A ∘ B = Σ_k (1/(k)_q!) (d^k A/d∂^k) * (∂_q^k B)`, with
    /// `a∂^α * b∂^β = a τ^α(b) ∂^{α+β}`.
    pub fn mul_symbolcalc(&self, o: &Self) -> Result<Self> {
        self.check_basis(o)?;
        if self.basis != Basis::D {
            return Err(Error::BasisMismatch);
        }
        let floor = self.product_floor(o);
        let mut out = Symbol::zero(Basis::D, floor);
        // ∂_q^k B, coefficient-wise
        let mut dk_b: Vec<Symbol<C>> = alloc::vec![o.clone()];
        for (i, f) in &self.terms {
            // derivative factor (i)_q (i-1)_q ... (i-k+1)_q / (k)_q!
            let mut fac = QScalar::one();
            let mut k: i64 = 0;
            loop {
                if fac.is_zero() {
                    break;
                }
                if i - k + o.effective_top() < floor {
                    break;
                }
                while dk_b.len() <= k as usize {
                    let next = dk_b.last().unwrap().map_coeffs(|_, c| c.qderive());
                    dk_b.push(next);
                }
                let db = &dk_b[k as usize];
                if db.is_zero() {
                    break;
                }
                let a = i - k;
                for (j, g) in db.terms.iter().rev() {
                    if a + j < floor {
                        break;
                    }
                    out.add_term(a + j, &f.mul(&g.shift(a)).scale(&fac));
                }
                k += 1;
                fac = &(&fac * &qnum(i - k + 1)) / &qnum(k);
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, o: &Self) -> Result<Self> {
        self.mul(o)?.sub(&o.mul(self)?)
    }

    pub fn commutator_floor(&self, o: &Self, want: i64) -> Result<Self> {
        self.mul_floor(o, want)?.sub(&o.mul_floor(self, want)?)
    }

    /// Residue: order 0 in the T basis, order -1 in the D basis.
    pub fn res(&self) -> Result<C> {
        self.coeff_checked(self.basis.residue_order())
    }

    pub fn power(&self, p: u32) -> Result<Self> {
        let mut acc = Symbol::one(self.basis, self.floor.min(0));
        if p == 0 {
            return Ok(acc);
        }
        acc = self.clone();
        for _ in 1..p {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `T^{-1}` written in the D basis down to `floor`:
    /// `-Σ_{i≥1} (-q)^i/(q-1)^i z^{-i} ∂_q^{-i}`.
    pub fn t_inverse_in_d(floor: i64) -> Self {
        let mut s = Symbol::zero(Basis::D, floor);
        let ratio = &(-QScalar::q()) / &q_minus_one();
        let mut c = QScalar::one();
        let mut i = 1;
        while -i >= floor {
            c = &c * &ratio;
            s.add_term(-i, &C::from_field(&LaurentField::monomial(-&c, -i)));
            i += 1;
        }
        s
    }

    /// `T = z(q-1)∂_q + 1` in the D basis.
    pub fn t_in_d(floor: i64) -> Self {
        let mut s = Symbol::zero(Basis::D, floor);
        s.add_term(1, &C::from_field(&LaurentField::monomial(q_minus_one(), 1)));
        s.add_term(0, &C::one());
        s
    }

    /// `∂_q = (z(q-1))^{-1}(T - 1)` in the T basis.
    pub fn d_in_t(floor: i64) -> Self {
        let c = LaurentField::monomial(q_minus_one().inv(), -1);
        let mut s = Symbol::zero(Basis::T, floor);
        s.add_term(1, &C::from_field(&c));
        s.add_term(0, &C::from_field(&c).neg());
        s
    }

    /// `∂_q^{-1} = (q-1) Σ_{i≥1} q^{-i} z T^{-i}` in the T basis.
    pub fn d_inverse_in_t(floor: i64) -> Self {
        let mut s = Symbol::zero(Basis::T, floor);
        let mut i = 1;
        while -i >= floor {
            let c = &q_minus_one() * &QScalar::q_pow(-i);
            s.add_term(-i, &C::from_field(&LaurentField::monomial(c, 1)));
            i += 1;
        }
        s
    }

    /// Rewrite in the other basis. The map preserves the order filtration,
    /// so the result floor is `max(floor, self.floor)`.
    pub fn convert(&self, target: Basis, floor: i64) -> Result<Self> {
        if target == self.basis {
            return Ok(self.clone().truncate(floor));
        }
        let floor = floor.max(self.floor);
        // the positive images are exact, so give them room below the floor
        let exact = floor - self.effective_top().max(0) - 1;
        let (up, down) = match target {
            Basis::D => (Symbol::t_in_d(exact), Symbol::t_inverse_in_d(floor)),
            Basis::T => (Symbol::d_in_t(exact), Symbol::d_inverse_in_t(floor)),
        };
        let mut out = Symbol::zero(target, floor);
        let mut pos: Vec<Symbol<C>> = alloc::vec![Symbol::one(target, exact)];
        let mut neg: Vec<Symbol<C>> = alloc::vec![Symbol::one(target, floor)];
        for (i, f) in &self.terms {
            let img = if *i >= 0 {
                while pos.len() <= *i as usize {
                    let next = pos.last().unwrap().mul_floor(&up, exact)?;
                    pos.push(next);
                }
                &pos[*i as usize]
            } else {
                let n = i.unsigned_abs() as usize;
                while neg.len() <= n {
                    let next = neg.last().unwrap().mul_floor(&down, floor)?;
                    neg.push(next);
                }
                &neg[n]
            };
            for (k, g) in img.terms.range(floor..) {
                out.add_term(*k, &f.mul(g));
            }
        }
        Ok(out)
    }

    /// `Ω(A) = z(q-1)/q · res_∂(A)`.
    pub fn omega(&self) -> Result<C> {
        if self.basis != Basis::D {
            return Err(Error::BasisMismatch);
        }
        let r = self.coeff_checked(-1)?;
        Ok(r.mul(&C::from_field(&omega_factor())))
    }

    /// The order-0 T-basis coefficient of a D-basis symbol,
    /// `t_0 = z(q-1)/q · res_∂(A T^{-1})`. Only orders `>= 0` of `A` enter.
    pub fn t0_from_d(&self) -> Result<C> {
        if self.basis != Basis::D {
            return Err(Error::BasisMismatch);
        }
        if self.floor > 0 {
            return Err(Error::FloorTooHigh { order: 0, floor: self.floor });
        }
        let top = self.effective_top().max(0);
        let tinv = Symbol::<C>::t_inverse_in_d(-1 - top);
        let head = self.orders_at_least(0).with_floor(-1 - top);
        let prod = head.mul_floor(&tinv, -1)?;
        Ok(prod.coeff(-1).mul(&C::from_field(&omega_factor())))
    }

    /// Adjoint as an anti-automorphism, treating the stored terms as the
    /// whole operator. T basis uses the `∫` pairing, D basis the `∫_{-1}`
    /// pairing; D-basis positive powers produce series cut at `floor`.
    pub fn adjoint(&self, floor: i64) -> Result<Self> {
        match self.basis {
            Basis::T => {
                let lo = self.top().map(|t| -t).unwrap_or(self.floor);
                Ok(Symbol::from_terms(Basis::T, lo.min(floor), self.terms.iter().map(|(i, f)| (-i, f.shift(-i)))))
            }
            Basis::D => {
                // ∂* = -∂ T^{-1},  (∂^{-1})* = -(z(q-1) + ∂^{-1})
                let ds = Symbol::<C>::basis_power(Basis::D, 1, floor).mul_floor(&Symbol::t_inverse_in_d(floor - 1), floor)?.neg();
                let mut dis = Symbol::<C>::zero(Basis::D, floor);
                dis.add_term(0, &C::from_field(&LaurentField::monomial(-q_minus_one(), 1)));
                dis.add_term(-1, &C::one().neg());
                let mut out = Symbol::zero(Basis::D, floor);
                let mut pos: Vec<Symbol<C>> = alloc::vec![Symbol::one(Basis::D, floor)];
                let mut neg: Vec<Symbol<C>> = alloc::vec![Symbol::one(Basis::D, floor)];
                for (i, f) in &self.terms {
                    let fm = Symbol::monomial(Basis::D, f.clone(), 0, floor);
                    let p = if *i >= 0 {
                        while pos.len() <= *i as usize {
                            let next = pos.last().unwrap().mul_floor(&ds, floor)?;
                            pos.push(next);
                        }
                        &pos[*i as usize]
                    } else {
                        let n = i.unsigned_abs() as usize;
                        while neg.len() <= n {
                            let next = neg.last().unwrap().mul_floor(&dis, floor)?;
                            neg.push(next);
                        }
                        &neg[n]
                    };
                    // (f ∂^i)* = (∂^i)* f
                    let t = p.mul_floor(&fm, floor)?;
                    for (k, g) in t.terms.range(floor..) {
                        out.add_term(*k, g);
                    }
                }
                Ok(out)
            }
        }
    }
}

pub(crate) fn omega_factor() -> LaurentField {
    LaurentField::monomial(&q_minus_one() / &QScalar::q(), 1)
}

impl<C: Integral> Symbol<C> {
    /// `Tr A = ∫ res_T A`; in the D basis through `t_0`.
    pub fn trace(&self) -> Result<C::Value> {
        match self.basis {
            Basis::T => Ok(self.coeff_checked(0)?.int0()),
            Basis::D => Ok(self.t0_from_d()?.int0()),
        }
    }

    /// `⟨A, B⟩ = Tr(AB)`.
    pub fn pairing(&self, o: &Self) -> Result<C::Value> {
        let prod = self.mul_floor(o, 0)?;
        prod.trace()
    }

    /// D-basis pairing by the literal route `(q-1)/q ∫_{-1} res_∂(A B T^{-1})`.
    pub fn pairing_via_d_residue(&self, o: &Self) -> Result<C::Value> {
        if self.basis != Basis::D {
            return Err(Error::BasisMismatch);
        }
        let ab = self.mul_floor(o, 0)?;
        let top = ab.effective_top().max(0);
        let tinv = Symbol::<C>::t_inverse_in_d(-1 - top);
        let prod = ab.orders_at_least(0).with_floor(-1 - top).mul_floor(&tinv, -1)?;
        let r = prod.coeff_checked(-1)?.scale(&(&q_minus_one() / &QScalar::q()));
        Ok(r.int_m1())
    }
}

impl Symbol<LaurentField> {
    /// The inverse of a symbol whose top coefficient is a monomial `c z^k`.
    pub fn invert(&self) -> Result<Self> {
        let n = self.top().ok_or(Error::NotInvertibleLeading)?;
        let (c, k) = self.coeff(n).as_monomial().ok_or(Error::NotInvertibleLeading)?;
        let lead_inv = LaurentField::monomial(c.inv(), -k);
        let floor = self.floor - 2 * n;
        let mut b = Symbol::zero(self.basis, floor);
        let one = Symbol::one(self.basis, floor);
        let mut m = -n;
        while m >= floor {
            // residual of A·B at order n + m
            let r = one.sub(&self.mul_floor(&b.clone().with_floor(floor), n + m)?)?.coeff(n + m);
            let x = lead_inv.mul(&r).shift(-n);
            b.add_term(m, &x);
            m -= 1;
        }
        Ok(b)
    }

    /// The unique monic `R = T + r_0 + r_{-1}T^{-1} + ...` with `R^N = self`.
    pub fn nth_root(&self, n: u32) -> Result<Self> {
        if self.basis != Basis::T || n == 0 {
            return Err(Error::NotMonic);
        }
        let big = n as i64;
        if self.top() != Some(big) || !self.coeff(big).as_monomial().is_some_and(|(c, k)| c.is_one() && k == 0) {
            return Err(Error::NotMonic);
        }
        let floor = self.floor - big + 1;
        if floor > 1 {
            return Err(Error::FloorTooHigh { order: 1, floor });
        }
        let mut r = Symbol::basis_power(Basis::T, 1, floor);
        let mut k = 0;
        while -k >= floor {
            let ord = big - 1 - k;
            let pw = r.clone().power(n)?;
            let pw = if pw.floor > ord { r.power_floor(n, ord)? } else { pw };
            let resid = self.coeff(ord).sub(&pw.coeff(ord));
            // Σ_{a<N} τ^a acts on z^m as (N)_{q^m}
            let x = resid.mode_scale(|m| {
                let mut s = QScalar::zero();
                for a in 0..big {
                    s = &s + &QScalar::q_pow(a * m);
                }
                s.inv()
            });
            r.add_term(-k, &x);
            k += 1;
        }
        Ok(r)
    }

    fn power_floor(&self, p: u32, want: i64) -> Result<Self> {
        let mut acc = self.clone();
        for _ in 1..p {
            acc = acc.mul_floor(self, want)?;
        }
        Ok(acc)
    }

    /// Coefficient-wise value at `q = r`.
    pub fn eval_at_q(&self, r: &BigRational) -> Result<Self> {
        self.try_map_coeffs(|_, f| f.eval_q(r))
    }

    pub fn limit_q1(&self) -> Result<Self> {
        self.eval_at_q(&BigRational::from_integer(1.into()))
    }

    /// The substitution `q -> 1/q` in every coefficient.
    pub fn invert_q(&self) -> Self {
        self.map_coeffs(|_, f| f.invert_q())
    }

    /// Text form `basis=B floor=F : terms`.
    pub fn to_text(&self) -> String {
        alloc::format!("basis={} floor={} : {}", self.basis, self.floor, self)
    }
}

impl fmt::Display for Symbol<LaurentField> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let mut items: Vec<(&QScalar, Vec<String>)> = Vec::new();
        for (i, c) in self.terms.iter().rev() {
            for (k, v) in c.terms() {
                let mut fac: Vec<String> = z_factor(k).into_iter().collect();
                if *i != 0 {
                    fac.push(alloc::format!("{}^{}", self.basis.letter(), i));
                }
                items.push((v, fac));
            }
        }
        write_sum(&mut s, items);
        f.write_str(&s)
    }
}
