//! Seeded random scalars, fields and symbols for the verification suites.

use qsym::poisson::PhaseWindow;
use qsym::{Basis, LaurentField, QScalar, Symbol};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

/// An independent stream for job `stream` of a run seeded with `seed`.
pub fn rng(seed: u64, stream: u64) -> Rng8 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `c q^e` or `c (1 + q)`, with small nonzero `c`.
pub fn scalar(r: &mut Rng8) -> QScalar {
    let c = loop {
        let c = r.gen_range(-3..=3);
        if c != 0 {
            break c;
        }
    };
    let base = QScalar::from_int(c);
    match r.gen_range(0..6) {
        0 => &base * &QScalar::q(),
        1 => &base * &QScalar::q_pow(-1),
        2 => &base * &(&QScalar::one() + &QScalar::q()),
        _ => base,
    }
}

/// One to `max_terms` monomials with exponents in `-2..=2`; zero with
/// probability `zero_odds`/8.
pub fn field(r: &mut Rng8, max_terms: usize, zero_odds: u32) -> LaurentField {
    if r.gen_range(0..8) < zero_odds {
        return LaurentField::zero();
    }
    let n = r.gen_range(1..=max_terms);
    LaurentField::from_terms((0..n).map(|_| (r.gen_range(-2..=2), scalar(r))))
}

/// Orders `top - width ..= top` with random fields; the floor is the lowest order.
pub fn symbol(r: &mut Rng8, basis: Basis, top: i64, width: i64) -> Symbol<LaurentField> {
    let floor = top - width;
    Symbol::from_terms(basis, floor, (floor..=top).map(|k| (k, field(r, 2, 1))))
}

/// A symbol with random top in `tops` and random width up to `max_width`.
pub fn any_symbol(r: &mut Rng8, basis: Basis, tops: (i64, i64), max_width: i64) -> Symbol<LaurentField> {
    let top = r.gen_range(tops.0..=tops.1);
    let width = r.gen_range(0..=max_width);
    symbol(r, basis, top, width)
}

/// A Lax symbol filling `window`, monic when `monic` is set. Unbounded
/// D windows are filled down to `depth` orders below the top.
pub fn lax(r: &mut Rng8, window: &PhaseWindow, monic: bool, depth: i64) -> Symbol<LaurentField> {
    let hi = window.hi.unwrap_or(0);
    let lo = window.lo.unwrap_or(hi - depth);
    let mut s = Symbol::zero(window.basis, lo);
    for k in lo..=hi {
        let f = if k == hi && (monic || window.basis == Basis::D) { LaurentField::one() } else { field(r, 2, 0) };
        s.add_term(k, &f);
    }
    s
}
