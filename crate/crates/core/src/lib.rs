//! Cancellation-free polynomial approximation.
//!
//! Given a function `f` and an interval `I`, find a polynomial on a
//! (possibly incomplete) monomial basis whose Horner evaluation never adds
//! nearly opposite quantities, meeting a target relative error; then round
//! its coefficients to double, double-double or triple-double, emit C code
//! and bound the evaluation error.

pub mod cancellation;
pub mod codegen;
pub mod driver;
pub mod error;
pub mod functions;
pub mod mparith;
pub mod norm;
pub mod poly;
pub mod remez;

pub use error::{Error, Result};
pub use functions::{parse, to_handle, Expr, FunctionHandle};
pub use mparith::{BigNum, IvBox, Prec};
