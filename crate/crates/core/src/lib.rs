//! Structural analysis of differential-algebraic equation systems by the
//! signature-matrix method, with two conversion methods that repair DAEs
//! whose System Jacobian is identically (but not structurally) singular.
//!
//! The pipeline is:
//!
//! 1. [`dae::parse_dae`] reads a system from the line-oriented DSL.
//! 2. [`structural`] builds the signature matrix, a highest-value transversal,
//!    canonical offsets, the structural index and the solution scheme.
//! 3. [`jacobian`] builds the symbolic System Jacobian and classifies it.
//! 4. [`linalg`] extracts kernel / cokernel vectors of a singular Jacobian.
//! 5. [`convert`] applies the linear-combination (LC) or expression-substitution
//!    (ES) conversion until the Jacobian is generically nonsingular.

pub mod convert;
pub mod dae;
pub mod expr;
pub mod jacobian;
pub mod linalg;
pub mod structural;

pub use dae::{parse_dae, DaeSystem};
pub use expr::{Expr, ZeroTest, ZeroVerdict};
