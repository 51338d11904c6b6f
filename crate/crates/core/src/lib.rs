//! Surfaces of prescribed positive extrinsic curvature with an isolated
//! conical singularity in the space forms ℝ³, ℍ³ and 𝕊³.
//!
//! The crate builds such surfaces from a strictly convex analytic curve of
//! limit gradients by marching a Cauchy problem for an elliptic system in
//! Fourier–Taylor form, and provides the tools to verify and classify
//! them.

pub mod error;
pub mod analysis;
pub mod curves;
pub mod expr;
pub mod fourier;
pub mod geometry;
pub mod jet;
pub mod monge_ampere;
pub mod solver;

pub use error::{Error, Result};
pub use curves::{
    convexity_check, orient_for_construction, plane_curvature, spherical_lift, Convexity, Frame,
    PeriodicCurve, SphericalCurve,
};
pub use expr::{Expr, ParseError, Var};
pub use fourier::{SpectralGrid, TrigSeries};
pub use geometry::{
    make_space_form, ma_coefficients, unit_normal_angle, Chart, CoefficientSource, Coefficients,
    CurvatureField, Jet2, Problem, State, WarpedModel,
};
pub use jet::{Jet, Real};
pub use solver::{
    cauchy_data, evaluate, solve, CauchyData, CollocationReport, Derivs, Height, SolveDiagnostics,
    SolverOptions, StripSolution, SurfaceMesh,
};
