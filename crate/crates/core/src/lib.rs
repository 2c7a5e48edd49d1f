//! Fully discrete summation-by-parts finite difference solver for the 2D
//! magnetic induction equations
//!
//! ```text
//! B_t + u¹ B_x + u² B_y − C(Du) B = 0
//! ```
//!
//! with a prescribed velocity `u`. Spatial derivatives use diagonal-norm SBP
//! operators of interior order 2 or 4, inflow Dirichlet data is imposed
//! weakly with SAT penalties, and time is advanced with backward Euler.
//!
//! Module map:
//! - [`sbp`]: 1D operators `D = P⁻¹Q`
//! - [`grid`]: tensor-product grids, grid functions, `𝔡ₓ`, `𝔡_y`, P-inner products
//! - [`model`]: velocity fields, initial data, exact rotation solution
//! - [`sat`]: penalty coefficients and the penalty operator
//! - [`stepper`]: operator assembly and backward-Euler stepping
//! - [`propagate`]: many steps of a steady homogeneous problem at once
//! - [`diagnostics`]: error norms, convergence rates, divergence, energy

pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod grid;
pub mod model;
pub mod propagate;
pub mod sat;
pub mod sbp;
pub mod sparse;
pub mod stepper;

pub use error::{Error, Result};
pub use exec::Exec;
pub use grid::{Face, FaceSelector, Grid2D, Rect, ScalarField, VectorField2};
pub use model::{BoundaryMode, InitialData, ProblemSpec, VelocityField};
pub use sat::PenaltySet;
pub use sbp::{Order, SbpOperator1D};
pub use stepper::{DtRule, LinearSolver, Stepper, StepperState, TimeGrid};
