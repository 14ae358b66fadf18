//! Diagonals of self-adjoint operators with finite spectrum.
//!
//! Decides whether a diagonal sequence accumulating only at `0` and `B` can be
//! the diagonal of a self-adjoint operator with spectrum
//! `{0 = A_0 < A_1 < … < A_n < A_{n+1} = B}`, enumerates the integer
//! multiplicity witnesses, and builds finite symmetric matrices realizing them.

pub mod cli;
pub mod decider;
pub mod error;
pub mod explorer;
pub mod io;
pub mod majorization;
pub mod scalar;
pub mod sequence;
pub mod synthesis;

pub use decider::{decide, decide_finite, decide_projection, enumerate_witnesses, witness_bounds, Decision, Verdict};
pub use error::{Error, Result};
pub use scalar::{Extended, Scalar};
pub use sequence::{Count, DiagonalSequence, DivergenceFlags, SpectrumSpec, Tail, ThresholdStats};
pub use majorization::{
    check_finite_majorization, check_finite_rank_tail, equivalent_form_check, lambda_from_witness, lebesgue_check,
    riemann_check, DeltaProfile, Orientation, StepSequence, Witness, ZLayout,
};
