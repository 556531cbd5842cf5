//! Certification and continuation toolkit for the clamped biharmonic problem
//! `Δ²u = λ(1+u)^p` on the unit ball of `R^n`.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`]: scalar constants (`K0`, `Hn`, `p_c`, `K1`, `a1`, `a2`).
//! * [`radial`]: exact power-sum calculus and the finite-volume discretisation
//!   of the radial bilaplacian.
//! * [`subsolution`] and [`stability`]: the two certified inequalities.
//! * [`branch`]: Newton continuation of the minimal branch.
//! * [`audit`]: table audit and combined singularity verdicts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod branch;
pub mod error;
pub mod linalg;
pub mod params;
pub mod precision;
pub mod quadrature;
pub mod radial;
pub mod report;
pub mod stability;
pub mod subsolution;

pub use error::{Error, Result};
pub use params::{DerivedConstants, ProblemParams};
pub use precision::{Precision, Real};
pub use report::{CertificateReport, Method, Verdict};
