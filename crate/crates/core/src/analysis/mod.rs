//! Verification of constructed or sampled surfaces: fundamental forms and
//! the function `ω`, curvature checks, limit gradients, the Legendre
//! transform and the classification of isolated singularities.

mod classify;
mod forms;
mod legendre;
mod samples;

pub use classify::{
    classify_singularity, limit_gradient, AnnulusStats, ClassificationReport, ClassifierOptions,
    LimitGradientReport, Verdict,
};
pub use forms::{
    canonical_orientation, fundamental_forms, omega_boundary_slope, omega_slope_closed_form,
    point_forms, sinh_gordon_residual, BoundarySlope, FormsReport, PointForms, SinhGordonReport,
};
pub use legendre::{hausdorff_distance, legendre_levels, legendre_point, strip_convexifier, LegendreLevel, LegendreReport};
pub use samples::{
    extrinsic_curvature, graph_curvature, radial_samples, sample_nu, samples_from_solution, Annulus,
    CurvatureReport, GraphSample, GraphSamples, Horosphere, Paraboloid, PeakedSphere, RadialProfile,
    SphereCap, KNN_DEFAULT,
};
