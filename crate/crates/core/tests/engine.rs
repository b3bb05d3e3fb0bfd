//! End-to-end use of the public API on small hand-checked cases.

use qsym::hierarchy::{casimir_bracket, lax_rhs, LaxFlowSpec};
use qsym::logsymbol::{log_term_coefficient, printed_log_term_coefficient};
use qsym::poisson::{dirac_reduce, kernel, PhaseWindow};
use qsym::rmatrix::Splitting;
use qsym::{qbinomial, qnum, Basis, Coeff, LaurentField, QScalar, Symbol};

type S = Symbol<LaurentField>;

fn q() -> QScalar {
    QScalar::q()
}

fn int(n: i64) -> QScalar {
    QScalar::from_int(n)
}

fn z(k: i64) -> LaurentField {
    LaurentField::z_pow(k)
}

#[test]
fn q_numbers() {
    assert_eq!(qnum(3), int(1) + q() + q().pow(2));
    // Gaussian binomial [4 choose 2]
    let want = int(1) + q() + int(2) * q().pow(2) + q().pow(3) + q().pow(4);
    assert_eq!(qbinomial(4, 2), want);
    assert_eq!(qbinomial(-1, 2), q().pow(-3));
}

#[test]
fn q_derivative_moves_past_z() {
    let d = S::basis_power(Basis::D, 1, -4);
    let zs = S::monomial(Basis::D, z(1), 0, -4);
    let got = d.mul(&zs).unwrap();
    let want = S::from_terms(Basis::D, -3, [(1, z(1).scale(&q())), (0, LaurentField::one())]);
    assert_eq!(got, want);
}

#[test]
fn shift_in_the_derivative_basis() {
    let t = S::basis_power(Basis::T, 1, -4);
    let d = t.convert(Basis::D, -4).unwrap();
    let want = S::from_terms(Basis::D, -4, [(1, z(1).scale(&(q() - int(1)))), (0, LaurentField::one())]);
    assert_eq!(d, want);
    assert_eq!(d.convert(Basis::T, -4).unwrap(), t);
}

#[test]
fn inverse_shift() {
    let t = S::basis_power(Basis::T, 1, -6);
    let ti = S::basis_power(Basis::T, -1, -6);
    assert_eq!(t.mul(&ti).unwrap().truncate(0), S::one(Basis::T, 0));
    let a = S::from_terms(Basis::T, -6, [(1, LaurentField::one()), (0, z(1))]);
    let inv = a.invert().unwrap();
    assert_eq!(a.mul(&inv).unwrap().truncate(-4), S::one(Basis::T, -4));
}

#[test]
fn trace_and_pairing() {
    let a = S::from_terms(Basis::T, -2, [(1, z(1)), (0, LaurentField::constant(int(3))), (-1, LaurentField::one())]);
    assert_eq!(a.trace().unwrap(), int(3));
    let b = S::basis_power(Basis::T, 1, -2);
    // only T^-1 * T contributes a constant
    assert_eq!(a.pairing(&b).unwrap(), int(1));
    assert_eq!(b.pairing(&a).unwrap(), int(1));
}

#[test]
fn toda_right_hand_side() {
    let split = Splitting::new(-1, Basis::T).unwrap();
    let l = S::from_terms(Basis::T, -1, [(1, LaurentField::one()), (0, z(1)), (-1, z(1))]);
    let spec = LaxFlowSpec::integer(split, PhaseWindow::t(1, -1), 1).unwrap();
    let rhs = lax_rhs(&spec, &l).unwrap();
    let one_minus_q = int(1) - q();
    assert!(rhs.coeff(1).is_zero());
    assert_eq!(rhs.coeff(0), z(1).scale(&one_minus_q));
    assert_eq!(rhs.coeff(-1), z(2).scale(&(one_minus_q / q())));
}

#[test]
fn casimirs_commute() {
    let split = Splitting::new(-1, Basis::T).unwrap();
    let l = S::from_terms(Basis::T, -30, [(1, z(1)), (0, z(-1).add(&LaurentField::one())), (-1, z(2))]);
    for s in [1, 2] {
        for (p, r) in [(1, 2), (2, 3), (1, 3)] {
            assert!(casimir_bracket(s, split, &l, p, r).unwrap().is_zero(), "s={s} p={p} r={r}");
        }
    }
}

#[test]
fn gd1_reduction_is_zero() {
    let split = Splitting::new(-1, Basis::D).unwrap();
    let w = PhaseWindow::gd(1);
    let mut m = std::collections::BTreeMap::new();
    for i in 0..=1 {
        for j in 0..=1 {
            m.insert((i, j), kernel(2, split, &w, i, j).unwrap());
        }
    }
    let red = dirac_reduce(&m, 0).unwrap();
    assert!(red[&(1, 1)].vanishes_identically().unwrap());
}

#[test]
fn log_coefficients() {
    assert_eq!(log_term_coefficient(1), (q() - int(1)).inv());
    for k in 1..=5 {
        assert_eq!(printed_log_term_coefficient(k), log_term_coefficient(k) * qnum(k as i64));
    }
}
