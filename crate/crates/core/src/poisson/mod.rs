//! The three Poisson maps on Lax symbols, their explicit specializations,
//! the induced brackets and the pencil relations between them.

use alloc::collections::BTreeMap;
use alloc::format;

use crate::error::{Error, Result};
use crate::field::{Coeff, LaurentField};
use crate::rmatrix::{project_with, r_apply, rstar_apply, t_geq0, t_geq1, t_leq0, t_leq_m1, t_order0, Side, Splitting};
use crate::scalar::QScalar;
use crate::symbol::{q_minus_one, Basis, Symbol};

pub mod dirac;
pub mod errata;
pub mod jacobi;
pub mod kernel;

pub use dirac::{dirac_reduce, ReducedKernel};
pub use errata::{Agreement, Comparison, ErrataReport, Family};
pub use jacobi::{jacobi_residual, Coordinate, LinearFunctional};
pub use kernel::{closed_form, gd1_closed_form, kernel, BracketKernel, ClassicalOperator, DiagonalReading, KernelTerm};

// ---- phase windows ----

/// Orders `lo..=hi` of the Lax symbol; `None` means unbounded. In the D basis
/// the field `u_i` sits at order `hi - i`, so `hi` is required.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PhaseWindow {
    pub basis: Basis,
    pub hi: Option<i64>,
    pub lo: Option<i64>,
}

impl PhaseWindow {
    /// T-basis window `(n, m)`: `L = Σ_{m≤k≤n} t_k T^k`.
    pub fn t(n: i64, m: i64) -> Self {
        PhaseWindow { basis: Basis::T, hi: Some(n), lo: Some(m) }
    }

    pub fn t_open(hi: Option<i64>, lo: Option<i64>) -> Self {
        PhaseWindow { basis: Basis::T, hi, lo }
    }

    /// `L = Σ_{i≥0} u_i ∂_q^{n-i}`.
    pub fn d(n: i64) -> Self {
        PhaseWindow { basis: Basis::D, hi: Some(n), lo: None }
    }

    /// Purely q-differential `L = u_0 ∂_q^n + ... + u_n`.
    pub fn gd(n: i64) -> Self {
        PhaseWindow { basis: Basis::D, hi: Some(n), lo: Some(0) }
    }

    pub fn field_name(&self) -> char {
        match self.basis {
            Basis::T => 't',
            Basis::D => 'u',
        }
    }

    pub fn order_of(&self, index: i64) -> i64 {
        match self.basis {
            Basis::T => index,
            Basis::D => self.hi.unwrap_or(0) - index,
        }
    }

    pub fn index_of(&self, order: i64) -> i64 {
        self.order_of(order)
    }

    pub fn contains_order(&self, o: i64) -> bool {
        self.hi.is_none_or(|h| o <= h) && self.lo.is_none_or(|l| o >= l)
    }

    pub fn contains_index(&self, i: i64) -> bool {
        (self.basis == Basis::T || i >= 0) && self.contains_order(self.order_of(i))
    }

    /// Whether `J^(s)` maps the window into itself.
    pub fn check(&self, s: u8, split: Splitting) -> Result<()> {
        if split.basis != self.basis || (self.basis == Basis::D && self.hi.is_none()) {
            return Err(Error::Invalid(format!("window {self:?} does not match splitting")));
        }
        let bad = Error::WindowNotInvariant { s, n: self.hi.unwrap_or(i64::MAX), m: self.lo.unwrap_or(i64::MIN) };
        let hi_at_least = |v: i64| self.hi.is_none_or(|h| h >= v);
        let lo_at_most = |v: i64| self.lo.is_none_or(|l| l <= v);
        let ok = match s {
            1 => match split.sigma {
                -1 => hi_at_least(0) && lo_at_most(1),
                1 => hi_at_least(-1) && lo_at_most(0),
                _ => hi_at_least(0) && lo_at_most(0),
            },
            2 => true,
            3 => matches!((self.hi, self.lo), (None, Some(0)) | (Some(0), None) | (None, None)),
            _ => return Err(Error::Invalid(format!("structure {s} is not 1, 2 or 3"))),
        };
        if ok {
            Ok(())
        } else {
            Err(bad)
        }
    }

    /// Whether every stored order of `l` lies in the window.
    pub fn admits<C: Coeff>(&self, l: &Symbol<C>) -> bool {
        l.basis() == self.basis && l.terms().all(|(o, _)| self.contains_order(o))
    }
}

// ---- one-forms ----

/// A gradient `X`: `Σ_j T^{-j} x_j` in the T basis, `Σ_j ∂_q^{j-n-1} T x_j`
/// in the D basis.
#[derive(Clone, PartialEq, Debug)]
pub struct OneForm<C> {
    pub window: PhaseWindow,
    pub comps: BTreeMap<i64, C>,
}

impl<C: Coeff> OneForm<C> {
    pub fn new(window: PhaseWindow) -> Self {
        OneForm { window, comps: BTreeMap::new() }
    }

    pub fn with(mut self, j: i64, x: C) -> Self {
        self.comps.insert(j, x);
        self
    }

    /// Highest order occurring in the symbol of the form.
    pub fn top(&self) -> Option<i64> {
        let n = self.window.hi.unwrap_or(0);
        self.comps
            .keys()
            .map(|j| match self.window.basis {
                Basis::T => -j,
                Basis::D => j - n,
            })
            .max()
    }

    /// The symbol of the form, exact on orders `>= floor`.
    pub fn to_symbol(&self, floor: i64) -> Result<Symbol<C>> {
        let basis = self.window.basis;
        let mut out = Symbol::zero(basis, floor);
        for (j, x) in &self.comps {
            match basis {
                Basis::T => out.add_term(-j, &x.shift(-j)),
                Basis::D => {
                    let n = self.window.hi.unwrap_or(0);
                    let k = j - n - 1;
                    let tx = x.shift(1);
                    let t_x = Symbol::from_terms(
                        Basis::D,
                        floor - k,
                        [(1, tx.mul(&C::from_field(&LaurentField::monomial(q_minus_one(), 1)))), (0, tx)],
                    );
                    let p = Symbol::<C>::basis_power(Basis::D, k, floor - 1).mul_floor(&t_x, floor)?;
                    out = out.add(&p)?;
                }
            }
        }
        Ok(out)
    }
}

impl OneForm<LaurentField> {
    /// `f_X(L)`: `∫ Σ t_j x_j` in the T basis, `∫_{-1} Σ u_j x_j` in the D basis.
    pub fn functional(&self, l: &Symbol<LaurentField>) -> Result<QScalar> {
        let mut acc = QScalar::zero();
        for (j, x) in &self.comps {
            let u = l.coeff_checked(self.window.order_of(*j))?;
            let p = Coeff::mul(&u, x);
            acc += &match self.window.basis {
                Basis::T => p.integrate(),
                Basis::D => p.integrate_m1(),
            };
        }
        Ok(acc)
    }
}

// ---- the maps ----

/// A symbol equal to the function `f` at order 0, exact relative to `l`.
fn function_like<C: Coeff>(l: &Symbol<C>, f: &C) -> Symbol<C> {
    Symbol::monomial(l.basis(), f.clone(), 0, l.floor() - l.effective_top().max(0))
}

/// `J^(s)_L(X)` from the general r-matrix formulas:
/// `J1 = [L, ℛX] + ℛ*[L,X]`,
/// `J2 = [L, ℛ(LX+XL)] + L ℛ*[L,X] + ℛ*[L,X] L`,
/// `J3 = [L, ℛ(LXL)] + L ℛ*[L,X] L`.
pub fn jmap<C: Coeff>(s: u8, split: Splitting, l: &Symbol<C>, x: &Symbol<C>) -> Result<Symbol<C>> {
    let c = l.commutator(x)?;
    let rc = rstar_apply(split, &c)?;
    match s {
        1 => l.commutator(&r_apply(split, x)?)?.add(&rc),
        2 => {
            let sym = l.mul(x)?.add(&x.mul(l)?)?;
            l.commutator(&r_apply(split, &sym)?)?.add(&l.mul(&rc)?)?.add(&rc.mul(l)?)
        }
        3 => {
            let lxl = l.mul(x)?.mul(l)?;
            l.commutator(&r_apply(split, &lxl)?)?.add(&l.mul(&rc)?.mul(l)?)
        }
        _ => Err(Error::Invalid(format!("structure {s} is not 1, 2 or 3"))),
    }
}

/// `jmap` with window and form validation.
pub fn jmap_on<C: Coeff>(s: u8, split: Splitting, window: &PhaseWindow, l: &Symbol<C>, x: &OneForm<C>) -> Result<Symbol<C>> {
    window.check(s, split)?;
    if !window.admits(l) || x.window != *window {
        return Err(Error::Invalid(format!("Lax symbol or one-form outside window {window:?}")));
    }
    let xt = x.top().unwrap_or(0);
    let lt = window.hi.map_or(l.effective_top(), |h| h.max(l.effective_top()));
    let xs = x.to_symbol(l.floor() + xt - lt)?;
    jmap(s, split, l, &xs)
}

/// How the order-0 correction in the D-basis explicit maps is read.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum OmegaReading {
    /// The order-0 T coefficient `z(q-1)/q res_∂(A T^{-1})`.
    T0,
    /// `z(q-1)/q res_∂(A)` as printed.
    Literal,
}

fn omega_of<C: Coeff>(a: &Symbol<C>, reading: OmegaReading) -> Result<C> {
    match reading {
        OmegaReading::T0 => t_order0(a),
        OmegaReading::Literal => a.omega(),
    }
}

/// The explicit forms of the maps for particular splittings, written with
/// projections instead of `ℛ`. `alt` selects the second printed expression
/// where two are given. σ=+1 has no separate explicit form.
pub fn jmap_explicit<C: Coeff>(
    s: u8,
    split: Splitting,
    l: &Symbol<C>,
    x: &Symbol<C>,
    reading: OmegaReading,
    alt: bool,
) -> Result<Symbol<C>> {
    let c = l.commutator(x)?;
    match (split.sigma, split.basis) {
        (-1, Basis::T) => match s {
            1 => {
                if alt {
                    // [L_{≤0}, X_{≥0}]_{≤0} - [L_{≥2}, X_{≤-1}]_{≥1}
                    let a = t_leq0(&t_leq0(l)?.commutator(&t_geq0(x))?)?;
                    let b = t_geq1(&l.orders_at_least(2).commutator(&t_leq_m1(x))?)?;
                    a.sub(&b)
                } else {
                    t_leq0(&l.commutator(&t_geq0(x))?)?.sub(&t_geq1(&l.commutator(&t_leq_m1(x))?)?)
                }
            }
            2 => {
                let r = function_like(l, &t_order0(&c)?);
                let corr = l.mul(&r)?.add(&r.mul(l)?)?;
                let two = QScalar::from_int(2);
                let main = if alt {
                    l.mul(&t_leq_m1(&x.mul(l)?))?.scale(&-two.clone()).add(&t_leq_m1(&l.mul(x)?).mul(l)?.scale(&two))?
                } else {
                    l.mul(&t_geq0(&x.mul(l)?))?.scale(&two).sub(&t_geq0(&l.mul(x)?).mul(l)?.scale(&two))?
                };
                main.add(&corr)
            }
            3 => {
                let lxl = l.mul(x)?.mul(l)?;
                l.commutator(&t_geq0(&lxl))?.sub(&l.mul(&t_geq1(&c)?)?.mul(l)?)
            }
            _ => Err(Error::Invalid(format!("structure {s} is not 1, 2 or 3"))),
        },
        (0, _) => {
            let p = |a: &Symbol<C>| project_with(a, Side::Plus, split, false);
            let m = |a: &Symbol<C>| project_with(a, Side::Minus, split, false);
            match s {
                1 => m(&l.commutator(&p(x)?)?)?.sub(&p(&l.commutator(&m(x)?)?)?),
                2 => {
                    if alt {
                        l.mul(&m(&x.mul(l)?)?)?.neg().add(&m(&l.mul(x)?)?.mul(l)?)
                    } else {
                        l.mul(&p(&x.mul(l)?)?)?.sub(&p(&l.mul(x)?)?.mul(l)?)
                    }
                }
                3 => {
                    let lxl = l.mul(x)?.mul(l)?;
                    m(&l.commutator(&p(&lxl)?)?)?.sub(&l.mul(&p(&c)?)?.mul(l)?)
                }
                _ => Err(Error::Invalid(format!("structure {s} is not 1, 2 or 3"))),
            }
        }
        (-1, Basis::D) => {
            let om = function_like(l, &omega_of(&c, reading)?);
            match s {
                1 => t_leq_m1(&l.commutator(&t_geq0(x))?).sub(&t_geq0(&l.commutator(&t_leq_m1(x))?))?.add(&om),
                2 => {
                    let two = QScalar::from_int(2);
                    let main = if alt {
                        l.mul(&t_leq_m1(&x.mul(l)?))?.scale(&-two.clone()).add(&t_leq_m1(&l.mul(x)?).mul(l)?.scale(&two))?
                    } else {
                        l.mul(&t_geq0(&x.mul(l)?))?.scale(&two).sub(&t_geq0(&l.mul(x)?).mul(l)?.scale(&two))?
                    };
                    main.add(&l.mul(&om)?)?.add(&om.mul(l)?)
                }
                3 => {
                    let lxl = l.mul(x)?.mul(l)?;
                    l.commutator(&t_geq0(&lxl))?.sub(&l.mul(&t_geq0(&c))?.mul(l)?)?.add(&l.mul(&om)?.mul(l)?)
                }
                _ => Err(Error::Invalid(format!("structure {s} is not 1, 2 or 3"))),
            }
        }
        _ => Err(Error::Invalid(format!("no explicit form for sigma={} in basis {:?}", split.sigma, split.basis))),
    }
}

/// `{f_X, f_Y}_s(L) = ⟨J^(s)_L(X), Y⟩`.
pub fn bracket(
    s: u8,
    split: Splitting,
    window: &PhaseWindow,
    l: &Symbol<LaurentField>,
    x: &OneForm<LaurentField>,
    y: &OneForm<LaurentField>,
) -> Result<QScalar> {
    let attempt = |l: &Symbol<LaurentField>| -> Result<QScalar> {
        let j = jmap_on(s, split, window, l, x)?;
        let yt = y.top().unwrap_or(0);
        let ys = y.to_symbol(-yt - 1 + j.floor().min(0) - j.effective_top().max(0))?;
        j.pairing(&ys)
    };
    // below a finite lower edge the symbol is exactly zero, so its floor may be lowered
    let mut l = l.clone();
    loop {
        match attempt(&l) {
            Err(Error::FloorTooHigh { order, floor }) if window.lo.is_some_and(|lo| l.floor() <= lo) && l.floor() > -256 => {
                let f = l.floor() - (floor - order).max(1);
                l = l.with_floor(f);
            }
            r => return r,
        }
    }
}

/// The pencil relations. `which = 2`: `(J2_{L+ε}(X), J2_L(X) + 2ε J1_L(X))`;
/// `which = 3`: `(J3_{L+ε}(X), J3_L(X) + ε J2_L(X) + ε² J1_L(X))`.
pub fn pencil_check<C: Coeff>(
    which: u8,
    split: Splitting,
    l: &Symbol<C>,
    x: &Symbol<C>,
    eps: &QScalar,
) -> Result<(Symbol<C>, Symbol<C>)> {
    let mut shifted = l.clone();
    shifted.add_term(0, &C::from_scalar(eps));
    let j1 = jmap(1, split, l, x)?;
    let j2 = jmap(2, split, l, x)?;
    match which {
        2 => Ok((jmap(2, split, &shifted, x)?, j2.add(&j1.scale(&(eps * &QScalar::from_int(2))))?)),
        3 => {
            let j3 = jmap(3, split, l, x)?;
            let rhs = j3.add(&j2.scale(eps))?.add(&j1.scale(&(eps * eps)))?;
            Ok((jmap(3, split, &shifted, x)?, rhs))
        }
        _ => Err(Error::Invalid(format!("pencil relation {which} is not 2 or 3"))),
    }
}

#[cfg(test)]
mod tests;
