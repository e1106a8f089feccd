//! Solvers and diagnostics for coupled classical-quantum dynamics.
//!
//! A two-level quantum system rides on a classical oscillator phase space.
//! The joint state is an operator-valued density rho(x,p) on a uniform grid.
//! Two evolution laws are implemented side by side: the naive bracket mix
//! (commutator plus symmetrized Poisson brackets), which loses positivity,
//! and a corrected first-order law that keeps it in the harmonic/linear
//! regime. A dense full-quantum solver plus coherent-state projection acts
//! as ground truth, and an impulsive-kick map models pointer measurements.

pub mod error;
pub mod fock;
pub mod grid;
pub mod qmat;

pub use error::{HyError, HyResult};

/// Shorthand used throughout; all fields and matrices are double complex.
pub type C64 = num_complex::Complex64;

/// Weight floor under which conditional states are reported as undefined.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Mask floor for polarization-maximum reports. Below this weight the ratio
/// |a|/a0 is dominated by absolute roundoff of the field values (an error of
/// 1e-17 in a field of 1e-12 already moves |s| by 1e-5), so suprema quoted
/// against tolerances use this floor; the conditional-state floor above stays
/// much lower because division alone does not get asserted against.
pub const REPORT_FLOOR: f64 = 1e-6;
