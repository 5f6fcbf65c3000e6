//! Numerical laboratory for the nonlinear Cauchy-Riemann equation
//! `∂f/∂z̄ = |f|^{1/2}` on discs, the Hölder-1/2 almost complex structure on
//! `D₂ × D_{1/10}` built from it, and the Royden-Kobayashi pseudo-norm
//! estimates that follow.
//!
//! Modules, bottom-up:
//!
//! * [`grid`]: disc grids, sampled fields and finite-difference operators.
//! * [`cauchy`]: the solid Cauchy transform, direct and FFT paths.
//! * [`dbar`]: regularized Picard solver and exact solution families.
//! * [`certify`]: discrete certificates for the differential inequality, the
//!   polar identity chain, the maximum principle and the sup-norm bound.
//! * [`acs`]: the almost complex structure and J-holomorphy residuals.
//! * [`reparam`]: truncated power-series composition and inversion.
//! * [`kr`]: pseudo-norm upper bound at the origin and radius scans.
//! * [`ode`]: the scalar ODE `g' = |g|^{1/2}`.
//! * [`io`]: binary/CSV/PGM field formats and JSON records.
//! * [`selftest`]: the acceptance criteria as runnable checks.

pub mod acs;
pub mod cauchy;
pub mod certify;
pub mod dbar;
mod error;
pub mod grid;
pub mod io;
pub mod kr;
pub mod ode;
pub mod reparam;
pub mod selftest;

pub use error::{Error, Result};
pub use num_complex::Complex64;
