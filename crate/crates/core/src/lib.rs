//! Rothe-method finite-element solver for coupled multiquasilinear
//! elliptic-parabolic systems with Robin and power-type boundary laws,
//! together with an auditor for the explicit a priori energy estimate.
//!
//! Unknowns are `I` concentration-like fields, one temperature-like field
//! whose time derivative carries a Kirchhoff weight `b`, and an electric
//! potential solved by a stationary equation at every discrete time.

pub mod coefficients;
pub mod estimates;
pub mod fem;
pub mod mesh;
pub mod scalar_tools;
pub mod stepper;

mod error;

pub use error::{Error, Result};
pub use mesh::{DomainSpec, Mesh, Point, Region, Side, SideSegment};
