//! Lax flows `∂L/∂t = [L, ℛ(L^p)]`, the Casimir charges `(1/p)Tr(L^p)`,
//! the tri-hamiltonian chain and the stability of the constrained orders.
//!
//! Flows are right-hand sides only; nothing is integrated in time.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::expr::FieldExpr;
use crate::field::{Coeff, LaurentField};
use crate::poisson::{jmap, PhaseWindow};
use crate::rmatrix::{project_with, r_apply, Side, Splitting};
use crate::scalar::QScalar;
use crate::symbol::{Basis, Symbol};

// ---- flow specification ----

/// A flow of the hierarchy. The power `num/den` is kept in lowest terms;
/// a fractional power is `(L^{1/N})^{N·num/den}` for monic `L` of order `N`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct LaxFlowSpec {
    pub split: Splitting,
    pub window: PhaseWindow,
    pub num: u32,
    pub den: u32,
}

impl LaxFlowSpec {
    pub fn new(split: Splitting, window: PhaseWindow, num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::Invalid(format!("flow power {num}/{den} is not a positive rational")));
        }
        if split.basis != window.basis {
            return Err(Error::BasisMismatch);
        }
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        if den > 1 {
            if window.basis == Basis::D {
                return Err(Error::Invalid(String::from("fractional powers are only taken in the T basis")));
            }
            match window.hi {
                Some(n) if n > 0 && n % den as i64 == 0 => {}
                _ => return Err(Error::Invalid(format!("denominator {den} does not divide the order of the window"))),
            }
        }
        Ok(LaxFlowSpec { split, window, num, den })
    }

    pub fn integer(split: Splitting, window: PhaseWindow, p: u32) -> Result<Self> {
        Self::new(split, window, p, 1)
    }

    pub fn is_fractional(&self) -> bool {
        self.den > 1
    }

    /// `ceil(p)`, used to size truncation floors.
    fn power_bound(&self) -> i64 {
        self.num.div_ceil(self.den) as i64
    }
}

/// Coefficients for which the monic N-th root can be taken.
pub trait RootCoeff: Coeff {
    fn monic_root(l: &Symbol<Self>, n: u32) -> Result<Symbol<Self>>;
}

impl RootCoeff for LaurentField {
    fn monic_root(l: &Symbol<Self>, n: u32) -> Result<Symbol<Self>> {
        l.nth_root(n)
    }
}

impl RootCoeff for FieldExpr {
    fn monic_root(_: &Symbol<Self>, _: u32) -> Result<Symbol<Self>> {
        Err(Error::Invalid(String::from("fractional powers need concrete fields")))
    }
}

// ---- helpers ----

/// On a window with a finite lower edge the stored terms of `l` are the
/// whole operator, so its floor may be lowered until `k`-fold products
/// and their commutators with `l` are exact down to the window.
fn settle<C: Coeff>(window: &PhaseWindow, l: &Symbol<C>, k: i64) -> Symbol<C> {
    match window.lo {
        Some(lo) if l.floor() <= lo => {
            let hi = window.hi.unwrap_or(0).max(l.effective_top()).max(0);
            let f = (k + 1) * lo.min(0) - k * hi - 2;
            l.clone().with_floor(l.floor().min(f))
        }
        _ => l.clone(),
    }
}

/// Equality on the orders reliable in both operands.
pub fn agree<C: Coeff>(a: &Symbol<C>, b: &Symbol<C>) -> Result<bool> {
    Ok(a.sub(b)?.is_zero())
}

// ---- Casimirs ----

/// `C_p(L) = (1/p) Tr(L^p)`.
pub fn casimir(l: &Symbol<LaurentField>, p: u32) -> Result<QScalar> {
    if p == 0 {
        return Err(Error::Invalid(String::from("Casimir index must be positive")));
    }
    let tr = l.power(p)?.trace()?;
    Ok(&tr * &QScalar::ratio(1, p as i64))
}

/// `dC_p(L) = L^{p-1}`.
pub fn casimir_gradient<C: Coeff>(l: &Symbol<C>, p: u32) -> Result<Symbol<C>> {
    if p == 0 {
        return Err(Error::Invalid(String::from("Casimir index must be positive")));
    }
    l.power(p - 1)
}

/// `{C_p, C_r}_s(L) = ⟨J^(s)_L(dC_p), dC_r⟩`.
pub fn casimir_bracket(s: u8, split: Splitting, l: &Symbol<LaurentField>, p: u32, r: u32) -> Result<QScalar> {
    let j = jmap(s, split, l, &casimir_gradient(l, p)?)?;
    j.pairing(&casimir_gradient(l, r)?)
}

// ---- Lax flows ----

/// `L^p`, through the monic root when `p` is fractional.
pub fn lax_power<C: RootCoeff>(spec: &LaxFlowSpec, l: &Symbol<C>) -> Result<Symbol<C>> {
    if !spec.is_fractional() {
        return l.power(spec.num);
    }
    let n = spec.window.hi.ok_or(Error::NotMonic)?;
    let root = C::monic_root(l, n as u32)?;
    root.power(spec.num * n as u32 / spec.den)
}

/// Both forms of the flow: `[L, (L^p)₊]` and `[(L^p)₋, L]`.
#[derive(Clone, PartialEq, Debug)]
pub struct LaxForms<C: Coeff> {
    pub plus: Symbol<C>,
    pub minus: Symbol<C>,
}

pub fn lax_forms<C: RootCoeff>(spec: &LaxFlowSpec, l: &Symbol<C>) -> Result<LaxForms<C>> {
    if l.basis() != spec.split.basis {
        return Err(Error::BasisMismatch);
    }
    if !spec.window.admits(l) {
        return Err(Error::Invalid(format!("Lax symbol outside window {:?}", spec.window)));
    }
    let l = settle(&spec.window, l, spec.power_bound());
    let a = lax_power(spec, &l)?;
    let ap = project_with(&a, Side::Plus, spec.split, false)?;
    let am = project_with(&a, Side::Minus, spec.split, false)?;
    Ok(LaxForms { plus: l.commutator(&ap)?, minus: am.commutator(&l)? })
}

/// The right-hand side `∂L/∂t_p`, checked to agree in both forms and to be
/// tangent to the window.
pub fn lax_rhs<C: RootCoeff>(spec: &LaxFlowSpec, l: &Symbol<C>) -> Result<Symbol<C>> {
    let forms = lax_forms(spec, l)?;
    if !agree(&forms.plus, &forms.minus)? {
        return Err(Error::Invalid(String::from("the two commutator forms of the flow disagree")));
    }
    let f = forms.plus.floor().max(forms.minus.floor());
    let rhs = forms.plus.truncate(f);
    if rhs.terms().any(|(o, c)| !spec.window.contains_order(o) && !c.is_zero()) {
        return Err(Error::WindowNotInvariant {
            s: 1,
            n: spec.window.hi.unwrap_or(i64::MAX),
            m: spec.window.lo.unwrap_or(i64::MIN),
        });
    }
    Ok(rhs)
}

// ---- tri-hamiltonian chain ----

/// The four members of the chain
/// `[L, ℛ(L^p)]`, `J⁽¹⁾(dC_{p+1})`, `J⁽²⁾(dC_p)`, `J⁽³⁾(dC_{p-1})`.
#[derive(Clone, PartialEq, Debug)]
pub struct TriHamiltonian<C: Coeff> {
    pub p: u32,
    pub lax: Symbol<C>,
    pub j1: Symbol<C>,
    pub j2: Symbol<C>,
    /// Only for `p ≥ 2` on windows invariant under the cubic structure.
    pub j3: Option<Symbol<C>>,
}

impl<C: Coeff> TriHamiltonian<C> {
    /// `lax - J1`, `J1 - J2` and, when present, `J2 - J3`.
    pub fn differences(&self) -> Result<Vec<(&'static str, Symbol<C>)>> {
        let mut out = alloc::vec![("lax - J1", self.lax.sub(&self.j1)?), ("J1 - J2", self.j1.sub(&self.j2)?)];
        if let Some(j3) = &self.j3 {
            out.push(("J2 - J3", self.j2.sub(j3)?));
        }
        Ok(out)
    }

    pub fn vanishes(&self) -> Result<bool> {
        Ok(self.differences()?.iter().all(|(_, d)| d.is_zero()))
    }
}

pub fn tri_hamiltonian_check<C: Coeff>(
    split: Splitting,
    window: &PhaseWindow,
    l: &Symbol<C>,
    p: u32,
) -> Result<TriHamiltonian<C>> {
    if p == 0 {
        return Err(Error::Invalid(String::from("flow index must be positive")));
    }
    window.check(1, split)?;
    window.check(2, split)?;
    if !window.admits(l) {
        return Err(Error::Invalid(format!("Lax symbol outside window {window:?}")));
    }
    let l = settle(window, l, p as i64 + 1);
    let lp = l.power(p)?;
    let lax = l.commutator(&r_apply(split, &lp)?)?;
    let j1 = jmap(1, split, &l, &lp)?;
    let j2 = jmap(2, split, &l, &casimir_gradient(&l, p)?)?;
    let j3 =
        if p >= 2 && window.check(3, split).is_ok() { Some(jmap(3, split, &l, &casimir_gradient(&l, p - 1)?)?) } else { None };
    Ok(TriHamiltonian { p, lax, j1, j2, j3 })
}

// ---- constraint stability ----

/// Flow coefficients at the constrained orders.
#[derive(Clone, PartialEq, Debug)]
pub struct StabilityReport<C: Coeff> {
    pub entries: Vec<(i64, C)>,
}

impl<C: Coeff> StabilityReport<C> {
    pub fn stable(&self) -> bool {
        self.entries.iter().all(|(_, c)| c.is_zero())
    }
}

/// The top order is constrained for monic `L` and, in the D basis, always
/// (`u_0` is not dynamical); order 0 is constrained on T windows `(n, 0)`.
pub fn constrained_orders<C: Coeff>(window: &PhaseWindow, l: &Symbol<C>) -> Vec<i64> {
    let mut out = Vec::new();
    if let Some(n) = window.hi {
        if window.basis == Basis::D || l.coeff(n) == C::one() {
            out.push(n);
        }
    }
    if window.basis == Basis::T && window.lo == Some(0) && !out.contains(&0) {
        out.push(0);
    }
    out
}

pub fn constraint_stability<C: RootCoeff>(spec: &LaxFlowSpec, l: &Symbol<C>) -> Result<StabilityReport<C>> {
    let rhs = lax_rhs(spec, l)?;
    let entries =
        constrained_orders(&spec.window, l).into_iter().map(|o| Ok((o, rhs.coeff_checked(o)?))).collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport { entries })
}

#[cfg(test)]
mod tests;
