//! Exact calculus of q-pseudodifferential symbols.
//!
//! Coefficients are rational functions of `q` over the integers, fields are
//! Laurent polynomials in `z`, and symbols are truncated formal series in
//! either the shift basis `T` or the q-derivative basis `D`.
#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod expr;
pub mod field;
pub mod hierarchy;
pub mod logsymbol;
pub mod poisson;
pub mod poly;
pub mod rmatrix;
pub mod scalar;
pub mod symbol;

pub use error::{Error, Result};
pub use field::{Coeff, LaurentField};
pub use scalar::{qbinomial, qnum, QScalar};
pub use symbol::{Basis, FieldSymbol, Symbol};

#[cfg(feature = "fault-injection")]
pub mod fault {
    //! Deliberate corruption switches used to check that verifiers notice.
    use core::sync::atomic::{AtomicBool, Ordering};

    static QBINOMIAL: AtomicBool = AtomicBool::new(false);

    pub fn corrupt_qbinomial(on: bool) {
        QBINOMIAL.store(on, Ordering::SeqCst);
    }

    pub fn qbinomial_corrupted() -> bool {
        QBINOMIAL.load(Ordering::Relaxed)
    }
}
