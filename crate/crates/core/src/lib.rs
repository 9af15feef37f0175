//! Capillary hypersurfaces of revolution inside the unit ball of `R^{n+1}`.
//!
//! The crate builds Delaunay-type rotational hypersurfaces (unduloids,
//! cylinders, nodoids, catenoids) together with the analytic flat disks,
//! spherical caps and round spheres, evaluates the instability form `Q`
//! obtained from the conformal Killing fields of the ball, and issues
//! stability verdicts. The [`verify`] module carries independent numerical
//! oracles (finite differences, product-grid quadrature, conformal flows)
//! for every closed-form identity used along the way.

// `!(x <= tol)` is used on purpose so that NaN fails the test
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod conformal;
pub mod delaunay;
pub mod eigen;
mod error;
pub mod quadrature;
pub mod report;
pub mod stability;
pub mod surface;
pub mod verify;

pub use conformal::{AmbientVector, Direction};
pub use delaunay::{DelaunayKind, MeridianCurve, MeridianState};
pub use error::{Error, Result};
pub use stability::{StabilityForm, StabilityReport, Verdict};
pub use surface::{EnclosedBody, RotationalCapillarySurface, ShapeData, WettedRegion};
