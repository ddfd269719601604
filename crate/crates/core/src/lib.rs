//! Numerical laboratory for the radial semilinear wave equation
//!
//! ```text
//! u_tt - Δu + m u = |x|^b f(u),   x ∈ R^N, N ∈ {2, 3}
//! ```
//!
//! with the defocusing nonlinearities `f(u) = -(e^u - 1 - u)` (N = 2, m = 1)
//! and `f(u) = -|u|^{p-1} u` (N = 3, m = 0).
//!
//! * [`grid`]: uniform radial meshes and weighted quadrature.
//! * [`model`]: parameters, nonlinearities, scaling and hypothesis checks.
//! * [`solver`]: energy-conserving explicit integration and diagnostics.
//! * [`inequality`]: numerical checks of the functional inequalities that
//!   control the nonlinearity (radial Sobolev, Moser–Trudinger,
//!   Gagliardo–Nirenberg, Strichartz).
//! * [`linearization`]: the nonlinear-versus-free comparison along
//!   concentrating data.

pub mod grid;
pub mod inequality;
pub mod linearization;
pub mod model;
pub mod solver;

pub use grid::{RadialField, RadialGrid};
pub use model::{ModelSpec, Nonlinearity};
pub use solver::{EnergyReport, EvolveOptions, FieldState, Trajectory};
