//! Cauchy data on the singular boundary and the Fourier–Taylor march of
//! `Δ𝐳 = h(𝐳, 𝐳_u, 𝐳_v)` into the strip `0 < v < R`.
//!
//! Each component of `𝐳 = (x, y, z, p, q)` is stored as
//! `Σ_k c_k(u) v^k` with every `c_k` a trigonometric series. Since
//! `Δ = ∂_uu + ∂_vv`, matching powers of `v` gives
//!
//! ```text
//! c_{k+2} = (h_k − c_k'') / ((k + 1)(k + 2))
//! ```
//!
//! where `h_k` is the `k`-th Taylor coefficient of `h` along the solution,
//! computed pointwise on a padded `u` grid with jet arithmetic.

mod cauchy;
mod mesh;
mod strip;

pub use cauchy::{cauchy_data, CauchyData};
pub use mesh::{evaluate, SurfaceMesh};
pub use strip::{
    solve, CollocationReport, Derivs, Height, SolveDiagnostics, SolverOptions, StripSolution,
};
