//! Reduction of a kernel matrix to a second-class constraint `f_n = 1`:
//! `J̃_ij = J_ij - J_in J_nn^{-1} J_nj`, with `J_nn^{-1}` acting mode-wise.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::kernel::BracketKernel;
use crate::error::{Error, Result};
use crate::expr::{FieldExpr, Var};
use crate::field::{Coeff, LaurentField};
use crate::scalar::QScalar;
use crate::symbol::Basis;

/// `c_a` of `J_nn = z^s Σ_a c_a T^a` after the constraint substitution.
#[derive(Clone, PartialEq, Debug)]
pub struct ModeDiagonal {
    pub zpow: i64,
    pub coeffs: Vec<(i64, QScalar)>,
}

impl ModeDiagonal {
    fn from_kernel(k: &BracketKernel) -> Result<Self> {
        if k.is_zero() {
            return Err(Error::NotSecondClass);
        }
        let mut zpow = None;
        let mut coeffs = Vec::new();
        for t in k.terms()? {
            if t.proj.is_some() || !t.left.is_one() || zpow.is_some_and(|s| s != t.zpow) {
                return Err(Error::NotModeDiagonal);
            }
            zpow = Some(t.zpow);
            coeffs.push((t.a, t.c));
        }
        Ok(ModeDiagonal { zpow: zpow.unwrap_or(0), coeffs })
    }

    /// Eigenvalue on `z^m`: `Σ c_a q^{am}`.
    pub fn eigenvalue(&self, m: i64) -> QScalar {
        let mut acc = QScalar::zero();
        for (a, c) in &self.coeffs {
            acc += &(c * &QScalar::q_pow(a * m));
        }
        acc
    }

    /// Solves `J_nn w = y` mode by mode.
    pub fn solve(&self, y: &LaurentField) -> Result<LaurentField> {
        let mut w = LaurentField::zero();
        for (k, v) in y.terms() {
            let m = k - self.zpow;
            let e = self.eigenvalue(m);
            if e.is_zero() {
                return Err(Error::SingularMode { mode: k });
            }
            w.add_term(m, &(v / &e));
        }
        Ok(w)
    }

    fn span(&self) -> i64 {
        let lo = self.coeffs.iter().map(|c| c.0).min().unwrap_or(0);
        let hi = self.coeffs.iter().map(|c| c.0).max().unwrap_or(0);
        hi - lo
    }
}

/// A reduced, in general non-local, kernel `J_ij - J_in J_nn^{-1} J_nj`.
#[derive(Clone, PartialEq, Debug)]
pub struct ReducedKernel {
    pub i: i64,
    pub j: i64,
    pub constrained: i64,
    pub local: BracketKernel,
    pub left: BracketKernel,
    pub diag: ModeDiagonal,
    pub right: BracketKernel,
}

impl ReducedKernel {
    /// `J̃_ij x` at concrete values of the remaining fields.
    pub fn apply(&self, fields: &dyn Fn(char, i64) -> LaurentField, x: &LaurentField) -> Result<LaurentField> {
        let y = self.right.evaluate(fields, x)?;
        let w = self.diag.solve(&y)?;
        let a = self.local.evaluate(fields, x)?;
        let b = self.left.evaluate(fields, &w)?;
        Ok(a.sub(&b))
    }

    pub fn is_local(&self) -> bool {
        self.left.is_zero() || self.right.is_zero()
    }

    pub fn is_field_free(&self) -> bool {
        [&self.local, &self.left, &self.right]
            .iter()
            .all(|k| k.expr.terms().all(|(m, _)| m.vars().iter().all(|v| matches!(v, Var::Test { .. }))))
    }

    /// For field-free kernels: whether `J̃_ij` is the zero operator.
    /// Each piece multiplies `z^k` by a Laurent polynomial in `q^k`, so
    /// after clearing the denominator the action on `z^k` is a Laurent
    /// polynomial in `q^k` of bounded span; vanishing on more modes than
    /// that span proves it is zero.
    pub fn vanishes_identically(&self) -> Result<bool> {
        if !self.is_field_free() {
            return Err(crate::error::Error::Invalid(alloc::string::String::from("kernel still depends on fields")));
        }
        let span = |k: &BracketKernel| -> Result<i64> {
            let t = k.terms()?;
            let lo = t.iter().map(|t| t.a).min().unwrap_or(0);
            let hi = t.iter().map(|t| t.a).max().unwrap_or(0);
            Ok(hi - lo)
        };
        let bound = span(&self.local)? + span(&self.left)? + span(&self.right)? + 2 * self.diag.span() + 1;
        let none = |_: char, _: i64| LaurentField::zero();
        let mut checked = 0;
        let mut k = 1;
        while checked <= bound {
            let x = LaurentField::z_pow(k);
            match self.apply(&none, &x) {
                Ok(v) => {
                    if !v.is_zero() {
                        return Ok(false);
                    }
                    checked += 1;
                }
                Err(Error::SingularMode { .. }) => {}
                Err(e) => return Err(e),
            }
            k += 1;
        }
        Ok(true)
    }
}

/// Reduce a kernel matrix to the surface where the field with index
/// `constrained` equals 1. The matrix must contain the rows and columns of
/// every index involved.
pub fn dirac_reduce(
    kernels: &BTreeMap<(i64, i64), BracketKernel>,
    constrained: i64,
) -> Result<BTreeMap<(i64, i64), ReducedKernel>> {
    let basis = kernels.values().next().map(|k| k.basis).unwrap_or(Basis::T);
    let name = match basis {
        Basis::T => 't',
        Basis::D => 'u',
    };
    let fix = |k: &BracketKernel| k.substitute(&|c, i| (c == name && i == constrained).then(FieldExpr::one));
    let get = |i: i64, j: i64| -> Result<BracketKernel> {
        kernels.get(&(i, j)).map(fix).ok_or_else(|| Error::Invalid(alloc::format!("kernel matrix lacks entry ({i},{j})")))
    };
    let diag = ModeDiagonal::from_kernel(&get(constrained, constrained)?)?;
    let idx: BTreeSet<i64> = kernels.keys().flat_map(|&(i, j)| [i, j]).filter(|&i| i != constrained).collect();
    let mut out = BTreeMap::new();
    for &i in &idx {
        for &j in &idx {
            if !kernels.contains_key(&(i, j)) {
                continue;
            }
            out.insert(
                (i, j),
                ReducedKernel {
                    i,
                    j,
                    constrained,
                    local: get(i, j)?,
                    left: get(i, constrained)?,
                    diag: diag.clone(),
                    right: get(constrained, j)?,
                },
            );
        }
    }
    Ok(out)
}

/// The reduced quadratic T-basis kernel at `t_n = 1`, window `(n, m)`:
/// the local sum plus `2 t_i (1-T^{i-n})(1-T^{-j})/(1-T^{-n}) t_j`.
pub fn t_reduced_quadratic_closed(
    n: i64,
    m: i64,
    i: i64,
    j: i64,
    fields: &dyn Fn(i64) -> LaurentField,
    x: &LaurentField,
) -> Result<LaurentField> {
    let t = |k: i64| {
        if k == n {
            LaurentField::one()
        } else if (m..=n).contains(&k) {
            fields(k)
        } else {
            LaurentField::zero()
        }
    };
    let mut acc = LaurentField::zero();
    let two = QScalar::from_int(2);
    for k in m.max(i + j - n)..=n.min(i) {
        let a = t(k).mul(&t(i + j - k).mul(x).shift(k - j));
        let b = t(i + j - k).mul(&t(k).mul(x).shift(i - k));
        acc = acc.add(&a.sub(&b).scale(&two));
    }
    let w = t(j).mul(x);
    let w = w.sub(&w.shift(-j));
    let mut v = LaurentField::zero();
    for (k, c) in w.terms() {
        if k == 0 {
            if !c.is_zero() {
                return Err(Error::SingularMode { mode: 0 });
            }
            continue;
        }
        v.add_term(k, &(c / &(&QScalar::one() - &QScalar::q_pow(-n * k))));
    }
    let v = v.sub(&v.shift(i - n));
    Ok(acc.add(&t(i).mul(&v).scale(&two)))
}
