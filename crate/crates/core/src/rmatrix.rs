//! The three splittings of the symbol algebra, their r-matrices, adjoints,
//! the modified bracket and the modified Yang-Baxter residual.
//!
//! Projections are always taken with respect to T-orders. In the D basis
//! the orders `>= 0` coincide, and the order-0 T coefficient is `t_0`.

use crate::error::{Error, Result};
use crate::field::Coeff;
use crate::scalar::QScalar;
use crate::symbol::{Basis, Symbol};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Splitting {
    pub sigma: i8,
    pub basis: Basis,
}

impl Splitting {
    pub fn new(sigma: i8, basis: Basis) -> Result<Self> {
        if !(-1..=1).contains(&sigma) {
            return Err(Error::Invalid(alloc::format!("sigma must be -1, 0 or 1, got {sigma}")));
        }
        Ok(Splitting { sigma, basis })
    }
}

/// Order-0 T coefficient.
pub fn t_order0<C: Coeff>(a: &Symbol<C>) -> Result<C> {
    match a.basis() {
        Basis::T => a.coeff_checked(0),
        Basis::D => a.t0_from_d(),
    }
}

/// T-orders `>= 0`.
pub fn t_geq0<C: Coeff>(a: &Symbol<C>) -> Symbol<C> {
    a.orders_at_least(0)
}

/// T-orders `<= -1`.
pub fn t_leq_m1<C: Coeff>(a: &Symbol<C>) -> Symbol<C> {
    a.orders_at_most(-1)
}

/// T-orders `>= 1`.
pub fn t_geq1<C: Coeff>(a: &Symbol<C>) -> Result<Symbol<C>> {
    match a.basis() {
        Basis::T => Ok(a.orders_at_least(1)),
        Basis::D => {
            let t0 = a.t0_from_d()?;
            let mut s = a.orders_at_least(0);
            s.add_term(0, &t0.neg());
            Ok(s)
        }
    }
}

/// T-orders `<= 0`.
pub fn t_leq0<C: Coeff>(a: &Symbol<C>) -> Result<Symbol<C>> {
    match a.basis() {
        Basis::T => Ok(a.orders_at_most(0)),
        Basis::D => {
            let t0 = a.t0_from_d()?;
            let mut s = a.orders_at_most(-1);
            s.add_term(0, &t0);
            Ok(s)
        }
    }
}

fn check_floor<C: Coeff>(a: &Symbol<C>) -> Result<()> {
    if a.floor() > 0 {
        return Err(Error::FloorTooHigh { order: 0, floor: a.floor() });
    }
    Ok(())
}

/// Projection onto one side of the splitting. For `σ = 0` the constant mode
/// of the order-0 coefficient belongs to neither side; `strict` refuses it
/// with `NotInDomain`, otherwise it is dropped.
pub fn project_with<C: Coeff>(a: &Symbol<C>, side: Side, s: Splitting, strict: bool) -> Result<Symbol<C>> {
    if a.basis() != s.basis {
        return Err(Error::BasisMismatch);
    }
    match (s.sigma, side) {
        (-1, Side::Plus) => {
            check_floor(a)?;
            Ok(t_geq0(a))
        }
        (-1, Side::Minus) => Ok(t_leq_m1(a)),
        (1, Side::Plus) => t_geq1(a),
        (1, Side::Minus) => {
            check_floor(a)?;
            t_leq0(a)
        }
        (_, side) => {
            let t0 = t_order0(a)?;
            let (plus, c, minus) = t0.split_modes()?;
            if strict && !c.is_zero() {
                return Err(Error::NotInDomain);
            }
            let (mut base, extra) = match side {
                Side::Plus => (t_geq1(a)?, plus),
                Side::Minus => (t_leq_m1(a), minus),
            };
            base.add_term(0, &extra);
            Ok(base)
        }
    }
}

pub fn project<C: Coeff>(a: &Symbol<C>, side: Side, s: Splitting) -> Result<Symbol<C>> {
    project_with(a, side, s, true)
}

/// `ℛ = ½(P₊ - P₋)`. For `σ = 0` the central constant mode is sent to zero.
pub fn r_apply<C: Coeff>(s: Splitting, a: &Symbol<C>) -> Result<Symbol<C>> {
    let p = project_with(a, Side::Plus, s, false)?;
    let m = project_with(a, Side::Minus, s, false)?;
    Ok(p.sub(&m)?.scale(&QScalar::ratio(1, 2)))
}

/// The adjoint of `ℛ` under the trace pairing. The adjoint of the
/// projection onto a set of T-orders is the projection onto the negated set.
pub fn rstar_apply<C: Coeff>(s: Splitting, a: &Symbol<C>) -> Result<Symbol<C>> {
    if a.basis() != s.basis {
        return Err(Error::BasisMismatch);
    }
    let half = QScalar::ratio(1, 2);
    match s.sigma {
        -1 => {
            check_floor(a)?;
            Ok(t_leq0(a)?.sub(&t_geq1(a)?)?.scale(&half))
        }
        1 => {
            check_floor(a)?;
            Ok(t_leq_m1(a).sub(&t_geq0(a))?.scale(&half))
        }
        _ => Ok(r_apply(s, a)?.neg()),
    }
}

/// `[a,b]_ℛ = [ℛa, b] + [a, ℛb]`.
pub fn modified_bracket<C: Coeff>(s: Splitting, a: &Symbol<C>, b: &Symbol<C>) -> Result<Symbol<C>> {
    r_apply(s, a)?.commutator(b)?.add(&a.commutator(&r_apply(s, b)?)?)
}

/// `[a₊, b₊] - [a₋, b₋]`, the second form of the modified bracket.
pub fn modified_bracket_split<C: Coeff>(s: Splitting, a: &Symbol<C>, b: &Symbol<C>) -> Result<Symbol<C>> {
    let ap = project_with(a, Side::Plus, s, false)?;
    let am = project_with(a, Side::Minus, s, false)?;
    let bp = project_with(b, Side::Plus, s, false)?;
    let bm = project_with(b, Side::Minus, s, false)?;
    ap.commutator(&bp)?.sub(&am.commutator(&bm)?)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum MapKind {
    R,
    RStar,
    /// `½(ℛ - ℛ*)`.
    RAntisym,
    /// `ℛ - ½ t_0(·)`: the D-basis antisymmetric part, written with the
    /// order-0 T coefficient.
    RMinusHalfT0,
    /// `ℛ - ½ Ω(·)` with `Ω(A) = z(q-1)/q res_∂ A` taken literally.
    RMinusHalfOmega,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct LinearMap {
    pub kind: MapKind,
    pub split: Splitting,
}

impl LinearMap {
    pub fn new(kind: MapKind, split: Splitting) -> Self {
        LinearMap { kind, split }
    }

    pub fn apply<C: Coeff>(&self, a: &Symbol<C>) -> Result<Symbol<C>> {
        let s = self.split;
        match self.kind {
            MapKind::R => r_apply(s, a),
            MapKind::RStar => rstar_apply(s, a),
            MapKind::RAntisym => r_apply(s, a)?.sub(&rstar_apply(s, a)?).map(|x| x.scale(&QScalar::ratio(1, 2))),
            MapKind::RMinusHalfT0 => {
                let mut r = r_apply(s, a)?;
                r.add_term(0, &t_order0(a)?.scale(&QScalar::ratio(-1, 2)));
                Ok(r)
            }
            MapKind::RMinusHalfOmega => {
                let mut r = r_apply(s, a)?;
                r.add_term(0, &a.omega()?.scale(&QScalar::ratio(-1, 2)));
                Ok(r)
            }
        }
    }
}

/// `[ℛa, ℛb] - ℛ([ℛa, b] + [a, ℛb]) + α[a, b]`.
pub fn myb_residual<C: Coeff>(map: &LinearMap, alpha: &QScalar, a: &Symbol<C>, b: &Symbol<C>) -> Result<Symbol<C>> {
    let ra = map.apply(a)?;
    let rb = map.apply(b)?;
    let br = ra.commutator(b)?.add(&a.commutator(&rb)?)?;
    ra.commutator(&rb)?.sub(&map.apply(&br)?)?.add(&a.commutator(b)?.scale(alpha))
}
