//! Constrained variational solver for vector-valued heteroclinic standing
//! waves of `Δu = W_u(u)` on periodic strip domains.
//!
//! The crate is organised around the pieces of the construction:
//!
//! * [`potential`]: double-well potentials, hypothesis checkers and the
//!   radial lower-bound functions `g`, `f` used by the comparison argument.
//! * [`geometry`]: masked cell grids for truncated periodic strips.
//! * [`field`]: discrete energy, Euler–Lagrange residual, slab energies.
//! * [`polar`]: polar decomposition about a minimum, radial truncations
//!   and the cut-off replacement operator.
//! * [`minimizer`]: projected Barzilai–Borwein descent over the constrained
//!   class, Dirichlet subdomain minimization and the standing-wave driver.
//! * [`comparison`]: the auxiliary slab problem `Δφ = f(φ)`, the
//!   contraction sequence `t_j` and exponential decay fits.
//! * [`ode`]: an independent 1D heteroclinic solver used as an oracle.
//!
//! Data-parallel loops go through [`exec`], which runs on rayon when the
//! `parallel` feature is enabled and falls back to plain iteration
//! otherwise. Reductions are deterministic in both modes.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod comparison;
pub mod error;
pub mod exec;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod minimizer;
pub mod ode;
pub mod polar;
pub mod potential;

pub use error::{Error, Result};
pub use exec::Exec;
pub use field::{EnergyBreakdown, Field};
pub use geometry::{Boundary, DiscreteDomain, StripSpec};
pub use potential::{DoubleWell, Family, Potential, RadialBoundFn, Wells};
