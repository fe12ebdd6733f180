//! Developed Bohmian mechanics on analytic wavefunctions.
//!
//! The crate evaluates the classic Bohm velocity `v = ∇S/m`, the osmotic
//! velocity `u± = ±(ħ/2m)∇Υ/Υ`, the pressure `P = -(ħ²/4m)∇²Υ` and the Bohm
//! quantum potential for a catalog of closed-form n-body states, and checks
//! the energy budgets that tie them together:
//!
//! ```text
//! -∂S/∂t = Σ ½m v² + Σ ½m u² + Υ⁻¹ Σ P + U
//! ```
//!
//! Modules:
//!
//! * [`states`]: analytic wavefunction catalog and the potential `U`.
//! * [`fields`]: pointwise field quantities, budgets, residuals and a
//!   finite-difference oracle.
//! * [`dynamics`]: RK4 trajectories under the Bohm or augmented (`v + u±`)
//!   velocity.
//! * [`ensemble`]: quadrature, Metropolis sampling and the integral-level
//!   checks (kinetic-energy equality, vanishing pressure integral,
//!   equivariance).

pub mod dynamics;
pub mod ensemble;
mod error;
pub mod fields;
pub mod qmc;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
