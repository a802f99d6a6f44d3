//! Modified q-Genocchi numbers and polynomials with weight alpha,
//! Dedekind-type Daehee-Changhee sums and their weighted q-analogues, and
//! the p-adic interpolation function built from them. Every closed form
//! ships with an independent route (a fermionic p-adic q-integral or an
//! exact algebraic identity) so that results can be checked mechanically.

pub mod error;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Mode, PAdic, QContext, Rat, Scalar};
pub mod cli;
pub mod dedekind;
pub mod genocchi;
pub mod interp;
pub mod qkernel;
pub mod report;
pub mod verify;

pub use report::VerificationReport;
