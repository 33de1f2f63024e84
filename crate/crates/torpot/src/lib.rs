//! Numerical toolkit for the convex side of toric pluripotential theory.
//!
//! Torus-invariant plurisubharmonic metrics on a smooth projective toric
//! variety correspond to convex functions on R^n; their asymptotic data
//! lives on the moment polytope P through the Legendre transform
//!
//! ```text
//! G(s) = sup_x ( <x, s> - F(x) ),   s in P.
//! ```
//!
//! This crate computes that correspondence numerically and builds the
//! derived objects on top of it: Monge-Ampere masses as pushforwards of
//! the gradient, moment and energy integrals, membership tests for the
//! finite-energy classes, and growth/regularity diagnostics. The pieces:
//!
//! * [`grid`]: tensor grids and the grid text format,
//! * [`polytope`]: Delzant polytopes from half-space data,
//! * [`convexfn`]: closed-form and sampled convex functions,
//! * [`transform`]: windowed Legendre transforms with saturation masks,
//! * [`potentials`]: the bundled gallery of reference/candidate pairs,
//! * [`numerics`]: brute-force references and quadrature.

pub mod classify;
pub mod convexfn;
pub mod error;
pub mod grid;
pub mod metric;
pub mod monge_ampere;
pub mod numerics;
pub mod polytope;
pub mod potentials;
pub mod transform;

pub use classify::{classify, ClassificationReport};
pub use convexfn::ConvexFunctionRep;
pub use error::{Error, Result};
pub use grid::{Axis, TensorGrid};
pub use metric::{dp_distance, ex310_modes, ConvergenceModes};
pub use polytope::DelzantPolytope;
pub use potentials::{gallery, guillemin_potential, ToricPotential};
pub use transform::{legendre_transform, DualFunction, TransformConfig};
