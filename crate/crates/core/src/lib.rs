//! Numerical model of the Gaussian double-bubble problem in the plane.
//!
//! The crate is organised around the family of *tripod clusters*: three
//! half-lines meeting at 120° at a vertex `x` of the plane
//! `E = {x ∈ ℝ³ : x₁ + x₂ + x₃ = 0}`. From that family it builds
//!
//! * the one-dimensional Gaussian primitives and single-bubble profile ([`gauss1d`]),
//! * interface areas, the volume map `V : E → int Δ`, its Newton inverse and the
//!   model double-bubble profile `I_m` with its gradient and Hessian ([`tripod`]),
//! * pixel-grid clusters, Gaussian measure / perimeter estimators and the
//!   matrices `M`, `N`, `L_A` built from interface statistics ([`grid`], [`cluster`]),
//! * variations of volume and perimeter under translations ([`variation`]),
//! * a simulated-annealing search for perimeter minimizers ([`search`]),
//! * a self-contained verification harness ([`verify`]).
//!
//! The runnable programs under `examples/` walk through each capability; the
//! `gdbubble` binary exposes the same functionality as batch subcommands.

pub mod cluster;
pub mod error;
pub mod fd;
pub mod gauss1d;
pub mod grid;
pub mod linalg;
pub mod quadrature;
pub mod search;
pub mod tripod;
pub mod variation;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{EOperator, PlanePoint, SimplexVolume};
