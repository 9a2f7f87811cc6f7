//! Numerical laboratory for torsion functions on convex planar domains and
//! the Fourier-analytic machinery behind their spectral-gap bounds.
//!
//! * [`signal`]: sampled functions on the torus, quadrature, coefficients, sign changes.
//! * [`heat`]: the theta kernel and the heat multiplier `e^{-k²t}`.
//! * [`topo`]: conjugate functions, winding numbers, coefficient lower bounds.
//! * [`disk`]: Poisson extension and derivatives at the center of the unit disk.
//! * [`geometry`]: convex domains, diameter, inradius, curvature.
//! * [`torsion`]: the embedded-boundary solver for `-Δu = 1` and Hessian analysis.
//! * [`experiments`]: config-driven sweeps with CSV/JSON outputs.

pub mod disk;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod heat;
pub mod signal;
pub mod topo;
pub mod torsion;

pub use error::{LabError, Result};
pub use geometry::{ConvexDomain, GeometryReport, Point};
pub use signal::{FourierSeries, Norms, PeriodicSignal};
pub use torsion::{GridField, HessianReport};
