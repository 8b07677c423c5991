//! Rotational surfaces in Euclidean 3-space whose Gaussian curvature `K < 0`
//! satisfies `K ΔK - |∇K|^2 - 4 K^3 = 0`, generated by profiles with
//! `f f' = a f + b s + c`.
//!
//! The crate classifies parameter sets, evaluates the profiles in closed form
//! and through an independent IVP solver, builds meshes, and solves the
//! free-boundary family inside the unit ball.

pub mod classify;
pub mod curvature;
pub mod error;
pub mod freeboundary;
pub mod geometry;
pub mod numeric;
pub mod oracle;
pub mod params;
pub mod profile;

pub use classify::{classify, CaseTag, ClassificationReport, DomainInterval, EndpointKind, KSign};
pub use error::{Result, RicciError};
pub use freeboundary::{family_sweep, solve_rho, FreeBoundarySolution};
pub use geometry::{build_mesh, export, sample_profile, ExportFormat, Exportable, ProfileCurve, SurfaceMesh};
pub use oracle::{validate_curve, ValidationReport};
pub use params::{Branch, RicciParams};
pub use profile::{solve_ivp, ProfileModel};
