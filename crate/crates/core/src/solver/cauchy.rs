use serde::{Deserialize, Serialize};

use crate::curves::{convexity_check, Convexity, PeriodicCurve};
use crate::error::{Error, Result};
use crate::fourier::{SpectralGrid, TrigSeries};
use crate::geometry::{CoefficientSource, Problem, State};

/// Boundary values `𝐳(u, 0)` and normal derivatives `𝐳_v(u, 0)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CauchyData {
    pub order: usize,
    pub values: [TrigSeries; 5],
    pub normal: [TrigSeries; 5],
}

/// Builds the mixed initial conditions for a negatively oriented strictly
/// convex curve of limit gradients:
///
/// ```text
/// x_v = −β'/√𝒟₀,  y_v = α'/√𝒟₀,  z_v = α x_v + β y_v,
/// p_v = −C x_v + B y_v,  q_v = B x_v − A y_v
/// ```
///
/// with coefficients taken at `(0, 0, 0, α, β)`.
pub fn cauchy_data(curve: &PeriodicCurve, problem: &Problem, order: usize) -> Result<CauchyData> {
    if order < 4 {
        return Err(Error::InvalidArgument(format!("Fourier order {order} < 4")));
    }
    curve.check_regular()?;
    match convexity_check(curve)? {
        Convexity::StrictlyConvexNegative => {}
        Convexity::StrictlyConvexPositive => return Err(Error::WrongOrientation),
        Convexity::NotStrictlyConvex => return Err(Error::NotStrictlyConvex),
    }
    let curve = curve.resized(order.max(curve.order()));
    let n = 4 * (order + 1);
    let grid = SpectralGrid::new(n);
    let d = curve.derivative();
    let mut cols: [Vec<f64>; 5] = Default::default();
    for u in grid.nodes() {
        let [a, b] = curve.point(u);
        let [da, db] = d.point(u);
        let co = problem.coefficients(&State::new(0.0, 0.0, 0.0, a, b))?;
        let sd = co.d.sqrt();
        let (xv, yv) = (-db / sd, da / sd);
        let row = [xv, yv, a * xv + b * yv, -co.c * xv + co.b * yv, co.b * xv - co.a * yv];
        for (col, val) in cols.iter_mut().zip(row) {
            col.push(val);
        }
    }
    let normal = cols.map(|c| grid.from_grid(&c, order));
    let zero = TrigSeries::zeros(order);
    Ok(CauchyData {
        order,
        values: [
            zero.clone(),
            zero.clone(),
            zero,
            curve.alpha.resized(order),
            curve.beta.resized(order),
        ],
        normal,
    })
}
