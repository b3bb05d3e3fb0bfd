//! Exact Jacobi check on a finite set of mode coordinates.
//!
//! The phase-space coordinates are the Laurent modes `f_{k,d}` of the fields.
//! The bracket of two coordinates is a polynomial in the coordinates, read
//! off from the kernels. The cyclic sum is evaluated at a point supported on
//! `|d| ≤ M/2`; a monomial contributes to a first derivative at such a point
//! only if at most one of its variables lies outside the support, which keeps
//! every sum finite.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::kernel::kernel;
use super::PhaseWindow;
use crate::error::{Error, Result};
use crate::expr::{FieldExpr, Var};
use crate::field::LaurentField;
use crate::rmatrix::Splitting;
use crate::scalar::QScalar;
use crate::symbol::Basis;

/// The mode `d` of the field with index `index`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Coordinate {
    pub index: i64,
    pub mode: i64,
}

/// `Σ c · f_{k,d}`.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct LinearFunctional {
    pub terms: BTreeMap<Coordinate, QScalar>,
}

impl LinearFunctional {
    pub fn coordinate(index: i64, mode: i64) -> Self {
        LinearFunctional::default().with(index, mode, QScalar::one())
    }

    pub fn with(mut self, index: i64, mode: i64, c: QScalar) -> Self {
        let e = self.terms.entry(Coordinate { index, mode }).or_default();
        *e += &c;
        self
    }
}

type CoordPoly = BTreeMap<Vec<Coordinate>, QScalar>;

struct Ctx<'a> {
    s: u8,
    split: Splitting,
    window: &'a PhaseWindow,
    cutoff: i64,
    kernels: BTreeMap<(i64, i64), FieldExpr>,
}

impl Ctx<'_> {
    fn half(&self) -> i64 {
        self.cutoff / 2
    }

    fn kernel(&mut self, i: i64, j: i64) -> Result<FieldExpr> {
        if let Some(k) = self.kernels.get(&(i, j)) {
            return Ok(k.clone());
        }
        let k = kernel(self.s, self.split, self.window, i, j)?.expr;
        self.kernels.insert((i, j), k.clone());
        Ok(k)
    }

    /// The test function dual to a coordinate.
    fn dual(&self, c: Coordinate) -> LaurentField {
        match self.window.basis {
            Basis::T => LaurentField::z_pow(-c.mode),
            Basis::D => LaurentField::z_pow(-c.mode - 1),
        }
    }

    /// `{c1, c2}` as a polynomial. With `free`, monomials with one variable
    /// outside the support are kept; otherwise only supported monomials.
    fn bracket(&mut self, c1: Coordinate, c2: Coordinate, free: bool) -> Result<CoordPoly> {
        let x = FieldExpr::constant(self.dual(c1));
        let e = self.kernel(c2.index, c1.index)?.substitute(&|_, _| None, &|_| Some(x.clone()));
        let h = self.half();
        let mut out = CoordPoly::new();
        for (m, c) in e.terms() {
            let mut vars = Vec::new();
            for v in m.vars() {
                match v {
                    Var::Field { index, shift, .. } => vars.push((*index, *shift)),
                    _ => return Err(Error::Invalid(String::from("projected kernels are outside the Jacobi checker"))),
                }
            }
            for (ez, cz) in c.terms() {
                let target = c2.mode - ez;
                let r = vars.len();
                if r == 0 {
                    if target == 0 {
                        *out.entry(Vec::new()).or_default() += cz;
                    }
                    continue;
                }
                let outs: Vec<Option<usize>> =
                    if free { core::iter::once(None).chain((0..r).map(Some)).collect() } else { alloc::vec![None] };
                for out_pos in outs {
                    let inner: Vec<usize> = (0..r).filter(|&k| Some(k) != out_pos).collect();
                    // when no variable is out, the last one is determined
                    let (enumerated, determined) = match out_pos {
                        Some(p) => (inner, p),
                        None => (inner[..r - 1].to_vec(), r - 1),
                    };
                    let mut ds = alloc::vec![-h; enumerated.len()];
                    loop {
                        let sum: i64 = ds.iter().sum();
                        let dd = target - sum;
                        let ok = match out_pos {
                            Some(_) => dd.abs() > h,
                            None => dd.abs() <= h,
                        };
                        if ok {
                            if dd.abs() > self.cutoff {
                                return Err(Error::SupportEscapesWindow { cutoff: self.cutoff });
                            }
                            let mut coeff = cz.clone();
                            let mut mono = Vec::with_capacity(r);
                            for (k, &pos) in enumerated.iter().enumerate() {
                                let (idx, sh) = vars[pos];
                                coeff = &coeff * &QScalar::q_pow(sh * ds[k]);
                                mono.push(Coordinate { index: idx, mode: ds[k] });
                            }
                            let (idx, sh) = vars[determined];
                            coeff = &coeff * &QScalar::q_pow(sh * dd);
                            mono.push(Coordinate { index: idx, mode: dd });
                            mono.sort();
                            *out.entry(mono).or_default() += &coeff;
                        }
                        // odometer over [-h, h]^len
                        let mut k = 0;
                        while k < ds.len() {
                            if ds[k] < h {
                                ds[k] += 1;
                                break;
                            }
                            ds[k] = -h;
                            k += 1;
                        }
                        if k == ds.len() {
                            break;
                        }
                    }
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }
}

fn eval(p: &CoordPoly, at: &dyn Fn(Coordinate) -> QScalar, h: i64) -> QScalar {
    let val = |c: Coordinate| if c.mode.abs() <= h { at(c) } else { QScalar::zero() };
    let mut acc = QScalar::zero();
    for (m, c) in p {
        let mut t = c.clone();
        for v in m {
            t = &t * &val(*v);
        }
        acc += &t;
    }
    acc
}

/// `Σ_cyc {f,{g,h}}` at the point `at`, which is read on coordinates with
/// `|d| ≤ M/2` only (all others are zero).
pub fn jacobi_residual(
    s: u8,
    split: Splitting,
    window: &PhaseWindow,
    cutoff: i64,
    fs: [&LinearFunctional; 3],
    at: &dyn Fn(Coordinate) -> QScalar,
) -> Result<QScalar> {
    window.check(s, split)?;
    let mut ctx = Ctx { s, split, window, cutoff, kernels: BTreeMap::new() };
    let h = ctx.half();
    let val = |c: Coordinate| if c.mode.abs() <= h { at(c) } else { QScalar::zero() };
    let mut total = QScalar::zero();
    for r in 0..3 {
        let (f, g, hh) = (fs[r], fs[(r + 1) % 3], fs[(r + 2) % 3]);
        // gradient of {g,h} at the point
        let mut grad: BTreeMap<Coordinate, QScalar> = BTreeMap::new();
        for (cg, vg) in &g.terms {
            for (ch, vh) in &hh.terms {
                let w = vg * vh;
                for (m, c) in ctx.bracket(*cg, *ch, true)? {
                    for k in 0..m.len() {
                        let mut t = &c * &w;
                        for (l, v) in m.iter().enumerate() {
                            if l != k {
                                t = &t * &val(*v);
                            }
                        }
                        if !t.is_zero() {
                            *grad.entry(m[k]).or_default() += &t;
                        }
                    }
                }
            }
        }
        for (v, dv) in grad {
            if dv.is_zero() {
                continue;
            }
            for (cf, vf) in &f.terms {
                let b = eval(&ctx.bracket(*cf, v, false)?, at, h);
                total += &(&(&dv * vf) * &b);
            }
        }
    }
    Ok(total)
}
