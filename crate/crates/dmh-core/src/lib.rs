//! Dual mixed hybrid (DMH) finite elements of lowest Raviart-Thomas order
//! for stationary advection-diffusion-reaction transmission problems on the
//! unit cube, with a selective interface at the plane z = 0.5.
//!
//! The scheme solves
//!
//! ```text
//! div J + r u = g          in each subdomain,
//! J = v u - mu grad u,
//! J1·n1 + J2·n2 = -sigma   on the interface,
//! u2 = kappa u1            on the interface,
//! ```
//!
//! with Dirichlet, Neumann or Robin data on the outer boundary. Fluxes and
//! scalars live element by element; single-valued hybrid face traces and a
//! pair of interface multipliers glue the elements together. Static
//! condensation eliminates everything except the face traces and the
//! interface multiplier, so the global system is a sparse face-indexed
//! system `K U = t` with at most 7 entries per row.
//!
//! Module overview:
//!
//! - [`mesh`]: structured tetrahedral meshes of the unit cube (Kuhn
//!   subdivision) with face classification around the interface.
//! - [`problem`]: coefficients, interface data and boundary conditions.
//! - [`stabilization`]: local Peclet numbers and the streamline artificial
//!   diffusion tensor (none / exponential-fitting / upwind).
//! - [`quadrature`]: simplex quadrature rules used by assembly and error
//!   evaluation.
//! - [`condensation`]: element-local matrices and their static condensation
//!   into an affine flux map.
//! - [`assembly`]: unknown numbering, the reduced sparse system, its
//!   solvers, and a dense uncondensed block system used as a test oracle.
//! - [`postprocess`]: field recovery, the nonconforming interpolant of the
//!   face traces, error norms and line profiles.
//! - [`analytic`]: closed-form one-dimensional reference solutions for the
//!   verification cases.
//! - [`wellposedness`]: the continuity/coercivity constants and smallness
//!   condition of the underlying saddle-point theory.

pub mod analytic;
pub mod assembly;
pub mod condensation;
pub mod linalg;
pub mod mesh;
pub mod postprocess;
pub mod problem;
pub mod quadrature;
pub mod sparse;
pub mod stabilization;
pub mod wellposedness;

mod error;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
