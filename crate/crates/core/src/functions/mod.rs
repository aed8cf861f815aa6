//! Functions to approximate: parsed expressions with symbolic derivatives,
//! and black boxes known only through interval enclosures.

mod diff;
mod expr;
mod handle;
mod inverse;
mod parse;
pub mod plugin;

pub use diff::differentiate;
pub use expr::Expr;
pub use handle::{to_handle, ExprFunction, FunctionHandle, RealFunction};
pub use inverse::newton_inverse;
pub use parse::parse;

use crate::error::Result;
use crate::mparith::IvBox;

/// `erf^-1` on `domain` (inside `(-0.99, 0.99)`), built by Newton iteration
/// on `erf` with preimages searched in `[-2, 2]`.
pub fn argerf(domain: IvBox) -> Result<FunctionHandle> {
    newton_inverse(to_handle(parse("erf(x)")?), domain, IvBox::from_f64s(-2.0, 2.0)?)
}
