//! Front end of the qsym engine: the text grammar, the command dispatcher,
//! deterministic text/JSON output and the `verify` suites.

pub mod cli;
pub mod gen;
pub mod output;
pub mod parse;
pub mod suites;

pub use cli::{run, Outcome};
