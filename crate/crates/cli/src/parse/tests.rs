use super::*;
use proptest::prelude::*;

fn sym(text: &str) -> Symbol<LaurentField> {
    parse_symbol(text, Basis::T, -8).unwrap()
}

#[test]
fn operator_after_field() {
    let s = sym("z*T^1 + 1");
    assert_eq!(s.basis(), Basis::T);
    assert_eq!(s.floor(), -8);
    assert_eq!(s.coeff(1), LaurentField::z_pow(1));
    assert_eq!(s.coeff(0), LaurentField::one());
    assert_eq!(s.top(), Some(1));
}

#[test]
fn rational_prefactor_fixes_basis() {
    let s = sym("(1/(q-1))*z^-1*D^-1");
    assert_eq!(s.basis(), Basis::D);
    let c = QScalar::one() / (QScalar::q() - QScalar::one());
    assert_eq!(s.coeff(-1), LaurentField::monomial(c, -1));
    assert_eq!(s.terms().count(), 1);
}

#[test]
fn header_overrides_defaults() {
    let s = parse_symbol("basis=D floor=-3 : z^2", Basis::T, -8).unwrap();
    assert_eq!((s.basis(), s.floor()), (Basis::D, -3));
    assert_eq!(s.coeff(0), LaurentField::z_pow(2));
}

#[test]
fn like_terms_collect() {
    let s = sym("z*T^1 + 2*z*T^1 - q*T^1*3");
    let want = LaurentField::from_terms([(1, QScalar::from_int(3)), (0, QScalar::from_int(-3) * QScalar::q())]);
    assert_eq!(s.coeff(1), want);
}

#[test]
fn bare_operator_powers() {
    assert_eq!(sym("T^-2").coeff(-2), LaurentField::one());
    assert_eq!(sym("T").coeff(1), LaurentField::one());
    assert_eq!(sym("z^-1/q").coeff(0), LaurentField::monomial(QScalar::q_pow(-1), -1));
}

#[test]
fn scalars_and_fields() {
    assert_eq!(parse_scalar("q^2-1").unwrap(), QScalar::q_pow(2) - QScalar::one());
    assert_eq!(parse_scalar("(1+q)^2/q").unwrap().to_string(), "(1+2*q+q^2)/(q)");
    assert!(parse_scalar("z").is_err());
    assert_eq!(parse_field("(z+1)^2").unwrap().coeff(1), QScalar::from_int(2));
}

#[test]
fn error_positions() {
    let e = parse_symbol("z*T^1 +", Basis::T, -8).unwrap_err();
    assert_eq!((e.line, e.column), (1, 8));
    let e = parse_symbol("z*T^1\n  + $", Basis::T, -8).unwrap_err();
    assert_eq!((e.line, e.column), (2, 5));
    assert_eq!(e.to_string(), format!("parse error at line 2, column 5: {}", e.message));
}

#[test]
fn rejected_inputs() {
    for bad in ["T^1*D^1", "T^1*z", "1/(1+z)", "z^(1/2)", "T^-9", "basis=X : 1", "(z", "x"] {
        assert!(parse_symbol(bad, Basis::T, -8).is_err(), "{bad}");
    }
}

#[test]
fn windows() {
    assert_eq!(parse_window("1,-1", Basis::T).unwrap(), PhaseWindow::t(1, -1));
    assert_eq!(parse_window("(0,*)", Basis::T).unwrap(), PhaseWindow::t_open(Some(0), None));
    assert_eq!(parse_window("2", Basis::D).unwrap(), PhaseWindow::d(2));
    assert_eq!(parse_window("1,0", Basis::D).unwrap(), PhaseWindow::gd(1));
    assert!(parse_window("1,2", Basis::T).is_err());
    assert!(parse_window("1,-1", Basis::D).is_err());
}

#[test]
fn powers_and_rationals() {
    assert_eq!(parse_power("2").unwrap(), (2, 1));
    assert_eq!(parse_power("4/2").unwrap(), (2, 1));
    assert_eq!(parse_power("1/2").unwrap(), (1, 2));
    assert!(parse_power("-1").is_err());
    assert!(parse_rational("1/0").is_err());
}

fn coeff_strategy() -> impl Strategy<Value = QScalar> {
    (-3i64..=3, -2i64..=2, any::<bool>()).prop_map(|(c, e, shift)| {
        let base = QScalar::from_int(c) * QScalar::q_pow(e);
        if shift {
            base / (QScalar::one() + QScalar::q())
        } else {
            base
        }
    })
}

fn symbol_strategy() -> impl Strategy<Value = Symbol<LaurentField>> {
    let basis = prop_oneof![Just(Basis::T), Just(Basis::D)];
    let terms = prop::collection::vec((-4i64..=2, -3i64..=3, coeff_strategy()), 0..6);
    (basis, terms).prop_map(|(b, ts)| {
        let mut s = Symbol::zero(b, -4);
        for (k, e, c) in ts {
            s.add_term(k, &LaurentField::monomial(c, e));
        }
        s
    })
}

proptest! {
    #[test]
    fn text_round_trip(s in symbol_strategy()) {
        prop_assert_eq!(parse_symbol(&s.to_text(), Basis::T, 0).unwrap(), s.clone());
        let bare = s.to_string();
        prop_assert_eq!(parse_symbol(&bare, s.basis(), s.floor()).unwrap(), s);
    }
}
