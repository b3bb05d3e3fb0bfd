use super::*;
use crate::field::tests::arb_field;
use crate::symbol::tests::{arb_symbol, sym, S};
use alloc::vec;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn split(sigma: i8, basis: Basis) -> Splitting {
    Splitting::new(sigma, basis).unwrap()
}

fn t(k: i64) -> FieldExpr {
    FieldExpr::field('t', k)
}

fn fz(c: i64, k: i64) -> LaurentField {
    LaurentField::monomial(QScalar::from_int(c), k)
}

// ---- Casimirs ----

#[test]
fn casimir_examples() {
    let t0 = fz(3, 0).add(&fz(-2, 1)).add(&fz(5, -1));
    let l = sym(Basis::T, -4, &[(1, LaurentField::one()), (0, t0.clone())]);
    assert_eq!(casimir(&l, 1).unwrap(), t0.integrate());
    assert_eq!(casimir_gradient(&l, 1).unwrap(), S::one(Basis::T, -4));
    assert!(casimir(&l, 0).is_err());
    assert!(matches!(casimir(&l.clone().with_floor(1), 1), Err(Error::FloorTooHigh { .. })));
}

/// `d/dε Tr((L+εδ)^p)/p` at 0, from the values at `ε = 0..=p` through
/// Newton's forward differences.
fn derivative_oracle(l: &S, d: &S, p: u32) -> QScalar {
    let vals: Vec<QScalar> =
        (0..=p as i64).map(|e| l.add(&d.scale(&QScalar::from_int(e))).unwrap().power(p).unwrap().trace().unwrap()).collect();
    let mut diffs = vals;
    let mut acc = QScalar::zero();
    for j in 1..=p as i64 {
        diffs = diffs.windows(2).map(|w| &w[1] - &w[0]).collect();
        let sign = if j % 2 == 1 { 1 } else { -1 };
        acc = &acc + &(&diffs[0] * &QScalar::ratio(sign, j));
    }
    &acc * &QScalar::ratio(1, p as i64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn casimir_gradient_is_the_derivative(
        l in arb_symbol(Basis::T, 1, 2),
        d in arb_symbol(Basis::T, 1, 2),
        p in 1u32..=3,
    ) {
        let l = l.with_floor(-12);
        let d = d.with_floor(-12);
        let grad = casimir_gradient(&l, p).unwrap();
        prop_assert_eq!(grad.pairing(&d).unwrap(), derivative_oracle(&l, &d, p));
    }

    #[test]
    fn commutator_forms_agree(l in arb_symbol(Basis::T, 2, 4), sigma in -1i8..=1, p in 1u32..=3) {
        let spec = LaxFlowSpec::integer(split(sigma, Basis::T), PhaseWindow::t(2, -2), p).unwrap();
        let forms = lax_forms(&spec, &l).unwrap();
        prop_assert!(agree(&forms.plus, &forms.minus).unwrap());
        prop_assert!(forms.plus.floor() <= -2);
        let rhs = lax_rhs(&spec, &l).unwrap();
        prop_assert!(PhaseWindow::t(2, -2).admits(&rhs));
    }

    #[test]
    fn flows_conserve_casimirs(l in arb_symbol(Basis::T, 1, 2), p in 1u32..=3, r in 1u32..=3) {
        let l = l.with_floor(-30);
        let spec = LaxFlowSpec::integer(split(-1, Basis::T), PhaseWindow::t(1, -1), p).unwrap();
        let rhs = lax_rhs(&spec, &l).unwrap();
        prop_assert!(casimir_gradient(&l, r).unwrap().pairing(&rhs).unwrap().is_zero());
    }

    #[test]
    fn casimirs_are_in_involution(l in arb_symbol(Basis::T, 1, 2), s in 1u8..=2, sigma in -1i8..=1, p in 1u32..=3, r in 1u32..=3) {
        let l = l.with_floor(-30);
        prop_assert!(casimir_bracket(s, split(sigma, Basis::T), &l, p, r).unwrap().is_zero());
    }
}

// ---- flows ----

#[test]
fn flow_on_affine_window_is_empty() {
    let l = Symbol::from_terms(Basis::T, 0, [(1, t(1)), (0, t(0))]);
    let spec = LaxFlowSpec::integer(split(-1, Basis::T), PhaseWindow::t(1, 0), 1).unwrap();
    assert!(lax_rhs(&spec, &l).unwrap().is_zero());
}

#[test]
fn toda_flow() {
    let l = Symbol::from_terms(Basis::T, -1, [(1, t(1)), (0, t(0)), (-1, t(-1))]);
    let spec = LaxFlowSpec::integer(split(-1, Basis::T), PhaseWindow::t(1, -1), 1).unwrap();
    let rhs = lax_rhs(&spec, &l).unwrap();
    assert!(rhs.floor() <= -1);
    assert!(rhs.coeff(1).is_zero());
    assert_eq!(rhs.coeff(0), t(-1).mul(&t(1).shift(-1)).sub(&t(1).mul(&t(-1).shift(1))));
    assert_eq!(rhs.coeff(-1), t(-1).mul(&t(0).shift(-1)).sub(&t(0).mul(&t(-1))));
    assert_eq!(rhs.terms().count(), 2);
}

fn monic(lower: &[LaurentField], floor: i64) -> S {
    let mut terms = vec![(2, LaurentField::one())];
    terms.extend(lower.iter().cloned().enumerate().map(|(k, f)| (1 - k as i64, f)));
    sym(Basis::T, floor, &terms)
}

#[test]
fn fractional_flow() {
    let l = monic(&[fz(1, 1), fz(2, -1).add(&fz(1, 0)), fz(-1, 2)], -5);
    let window = PhaseWindow::t_open(Some(2), None);
    let spec = LaxFlowSpec::new(split(-1, Basis::T), window, 1, 2).unwrap();
    let root = lax_power(&spec, &l).unwrap();
    assert_eq!(root.top(), Some(1));
    assert!(agree(&root.power(2).unwrap(), &l).unwrap());
    let rhs = lax_rhs(&spec, &l).unwrap();
    assert!(!rhs.is_zero());
    let report = constraint_stability(&spec, &l).unwrap();
    assert_eq!(report.entries.len(), 1);
    assert!(report.stable());
    // p = 2/2 reduces to the integer flow
    let whole = LaxFlowSpec::new(split(-1, Basis::T), window, 2, 2).unwrap();
    assert!(!whole.is_fractional());
    let three_halves = LaxFlowSpec::new(split(-1, Basis::T), window, 3, 2).unwrap();
    assert!(!lax_rhs(&three_halves, &l).unwrap().is_zero());
}

#[test]
fn spec_errors() {
    let tw = PhaseWindow::t(2, -1);
    assert!(LaxFlowSpec::new(split(-1, Basis::T), tw, 0, 1).is_err());
    assert!(LaxFlowSpec::new(split(-1, Basis::T), tw, 1, 3).is_err());
    assert!(LaxFlowSpec::new(split(-1, Basis::D), PhaseWindow::d(2), 1, 2).is_err());
    assert_eq!(LaxFlowSpec::new(split(-1, Basis::D), tw, 1, 1), Err(Error::BasisMismatch));
    // not monic
    let l = sym(Basis::T, -1, &[(2, fz(2, 0)), (0, fz(1, 1))]);
    let spec = LaxFlowSpec::new(split(-1, Basis::T), tw, 1, 2).unwrap();
    assert_eq!(lax_rhs(&spec, &l), Err(Error::NotMonic));
    // formal fields have no root
    let f = Symbol::from_terms(Basis::T, -1, [(2, FieldExpr::one()), (1, t(1))]);
    assert!(matches!(lax_rhs(&spec, &f), Err(Error::Invalid(_))));
    // outside the window
    let wide = sym(Basis::T, -3, &[(2, LaurentField::one()), (-3, fz(1, 0))]);
    let int = LaxFlowSpec::integer(split(-1, Basis::T), tw, 1).unwrap();
    assert!(matches!(lax_rhs(&int, &wide), Err(Error::Invalid(_))));
}

#[test]
fn qkp_potential_evolves() {
    let u = |k: i64| FieldExpr::field('u', k);
    let l = Symbol::from_terms(Basis::D, -3, [(1, FieldExpr::one()), (0, u(1)), (-1, u(2)), (-2, u(3)), (-3, u(4))]);
    let spec = LaxFlowSpec::integer(split(-1, Basis::D), PhaseWindow::d(1), 1).unwrap();
    let rhs = lax_rhs(&spec, &l).unwrap();
    assert!(rhs.coeff(1).is_zero());
    let du1 = rhs.coeff(0);
    assert!(!du1.is_zero());
    assert_eq!(du1, u(2).sub(&u(2).shift(1)));
}

// ---- tri-hamiltonian chain ----

#[test]
fn tri_hamiltonian_chain_on_finite_window() {
    let l = sym(Basis::T, -2, &[(1, fz(1, 1).add(&fz(2, 0))), (0, fz(-1, 1)), (-1, fz(3, -1)), (-2, fz(1, 2))]);
    let sp = split(-1, Basis::T);
    let chain = tri_hamiltonian_check(sp, &PhaseWindow::t(1, -2), &l, 1).unwrap();
    assert!(chain.j3.is_none());
    assert!(agree(&chain.lax, &chain.j1).unwrap());
    assert!(!chain.lax.is_zero());
    // the quadratic structure carries the flow with weight two
    assert!(agree(&chain.j2, &chain.j1.scale(&QScalar::from_int(2))).unwrap());
    let diffs = chain.differences().unwrap();
    assert!(diffs[0].1.is_zero());
    assert!(!diffs[1].1.is_zero());
    assert!(!chain.vanishes().unwrap());
    // dC_1 = 1 is central
    assert!(jmap(1, sp, &l.clone().with_floor(-8), &casimir_gradient(&l, 1).unwrap()).unwrap().is_zero());
}

#[test]
fn tri_hamiltonian_chain_with_cubic_structure() {
    let l = sym(Basis::T, -5, &[(0, fz(1, 1).add(&fz(2, -1))), (-1, fz(-1, 2)), (-2, fz(1, 0)), (-3, fz(2, 1))]);
    let window = PhaseWindow::t_open(Some(0), None);
    for sigma in [-1, 0] {
        let chain = tri_hamiltonian_check(split(sigma, Basis::T), &window, &l, 2).unwrap();
        let j3 = chain.j3.clone().unwrap();
        assert!(!chain.lax.is_zero());
        assert!(agree(&chain.lax, &chain.j1).unwrap());
        assert!(agree(&chain.j1, &j3).unwrap());
        assert!(agree(&chain.j2, &chain.j1.scale(&QScalar::from_int(2))).unwrap());
    }
    assert!(tri_hamiltonian_check(split(-1, Basis::T), &window, &l, 1).unwrap().j3.is_none());
    assert!(tri_hamiltonian_check(split(-1, Basis::T), &window, &l, 0).is_err());
    assert!(matches!(
        tri_hamiltonian_check(split(-1, Basis::T), &PhaseWindow::t(-1, -3), &l, 1),
        Err(Error::WindowNotInvariant { s: 1, .. })
    ));
}

// ---- constraint stability ----

#[test]
fn monic_top_is_not_dynamical() {
    let l = monic(&[fz(1, 1), fz(-2, -1), fz(1, 1).add(&fz(1, -2))], -1);
    for sigma in [-1, 0, 1] {
        for p in 1..=3 {
            let spec = LaxFlowSpec::integer(split(sigma, Basis::T), PhaseWindow::t(2, -1), p).unwrap();
            let report = constraint_stability(&spec, &l).unwrap();
            assert_eq!(report.entries.iter().map(|e| e.0).collect::<Vec<_>>(), vec![2]);
            // the order-0 part of (L^p)₊ for sigma = 0, 1 moves the top coefficient
            assert_eq!(report.stable(), sigma == -1, "sigma={sigma} p={p}");
        }
    }
}

#[test]
fn order_zero_is_first_class() {
    let l = Symbol::from_terms(Basis::T, 0, [(2, t(2)), (1, t(1)), (0, t(0))]);
    for sigma in [-1, 0, 1] {
        let spec = LaxFlowSpec::integer(split(sigma, Basis::T), PhaseWindow::t(2, 0), 1).unwrap();
        let report = constraint_stability(&spec, &l).unwrap();
        assert_eq!(report.entries.iter().map(|e| e.0).collect::<Vec<_>>(), vec![0]);
        assert!(report.stable());
    }
}

#[test]
fn d_basis_top_field_is_stable() {
    let l = sym(Basis::D, -4, &[(1, fz(1, 0).add(&fz(1, 1))), (0, fz(2, 1)), (-1, fz(1, -1)), (-2, fz(-1, 0))]);
    let spec = LaxFlowSpec::integer(split(-1, Basis::D), PhaseWindow::d(1), 1).unwrap();
    let report = constraint_stability(&spec, &l).unwrap();
    assert_eq!(report.entries[0].0, 1);
    assert!(report.stable());
    assert!(!lax_rhs(&spec, &l).unwrap().coeff(0).is_zero());
}

#[test]
fn random_fields_flow_tangent() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..8 {
        let fs: Vec<LaurentField> = (0..3).map(|_| arb_field().new_tree(&mut runner).unwrap().current()).collect();
        let l = monic(&fs, -1);
        let spec = LaxFlowSpec::integer(split(-1, Basis::T), PhaseWindow::t(2, -1), 2).unwrap();
        assert!(constraint_stability(&spec, &l).unwrap().stable());
    }
}
