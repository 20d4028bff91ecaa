//! Finite-time blow-up laboratory for semilinear wave equations
//!
//! ```text
//! u_tt + b u_t = Δu + f(u) + h(x, t)   in Ω
//! ∂u/∂ν + γ u = 0                      on ∂Ω
//! ```
//!
//! on intervals and rectangles. The crate evaluates the energy functionals and
//! constants that enter the concavity-method blow-up criteria, computes the
//! resulting upper bounds on the blow-up time, integrates the semidiscrete
//! system with RK4, and compares what the simulation does against what the
//! criteria predict.
//!
//! Modules, bottom-up:
//!
//! * [`model`]: problem data (domain, nonlinearity, forcing, initial data).
//! * [`grid`]: Robin Laplacian, trapezoid quadratures, Poincaré and trace
//!   constants from generalized eigenproblems.
//! * [`functionals`]: E(t), E₁(t), A₀, K₀, Ψ series, energy-balance residual.
//! * [`concavity`]: closed-form blow-up bounds and the extremal-ODE oracle.
//! * [`criteria`]: theorem-level classification and data construction.
//! * [`simulate`]: method-of-lines integration and the scenario pipeline.

pub mod concavity;
pub mod criteria;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod model;
pub mod simulate;

pub use error::{Error, Result};
