//! Machine formats, Horner code generation and round-off bounds.

mod bound;
mod eft;
mod emit;
mod format;

pub use bound::{assign_formats, eval_error_bound, Assignment, EvalErrorBound, StepBound, BOUND_BOXES};
pub use eft::{simulate, Acc};
pub use emit::{decode_coefficients, emit_horner_c};
pub use format::{expansion_value, power_mults, power_schedule, round_expansion, FpCoeff, FpKind, FpPoly, HornerOp};
