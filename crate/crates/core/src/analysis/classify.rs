use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::samples::{graph_curvature, sample_nu, GraphSamples, KNN_DEFAULT};
use crate::curves::{convexity_report, spherical_lift, ConvexityReport, Convexity, Frame, PeriodicCurve, SphericalReport};
use crate::error::{Error, Result};
use crate::fourier::TrigSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    #[serde(rename = "C1_extension")]
    C1Extension,
    BoundedNonvertical,
    HeightDiverges,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::C1Extension => "C1_extension",
            Verdict::BoundedNonvertical => "bounded_nonvertical",
            Verdict::HeightDiverges => "height_diverges",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Verdict::C1Extension,
            Verdict::BoundedNonvertical,
            Verdict::HeightDiverges,
            Verdict::Inconclusive,
        ]
        .into_iter()
        .find(|v| v.to_string() == s.trim())
        .ok_or_else(|| Error::InvalidArgument(format!("unknown verdict `{s}`")))
    }
}

/// Thresholds of the decision rules. Trends are normalized per halving of
/// the annulus radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierOptions {
    /// Lower bound for `inf ν` over the two innermost annuli.
    pub nu_threshold: f64,
    /// Minimal relative growth of the median `|z|` per halving.
    pub height_growth: f64,
    /// Number of consecutive innermost halvings that must show it.
    pub height_halvings: usize,
    /// Largest growth factor of `max |∇z|` per halving still called bounded.
    pub gradient_growth: f64,
    /// Largest shrink factor of the gradient locus diameter per halving
    /// that counts as contraction.
    pub contraction_ratio: f64,
    pub knn: usize,
    /// Fourier order of the fitted gradient loci.
    pub locus_order: usize,
}

impl Default for ClassifierOptions {
    fn default() -> Self {
        ClassifierOptions {
            nu_threshold: 1e-3,
            height_growth: 0.2,
            height_halvings: 3,
            gradient_growth: 1.2,
            contraction_ratio: 0.75,
            knn: KNN_DEFAULT,
            locus_order: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusStats {
    pub radius: f64,
    pub median_z: f64,
    pub median_abs_z: f64,
    pub max_gradient: f64,
    pub min_nu: f64,
    pub locus_diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitGradientReport {
    /// Gradient loci fitted against the polar angle, outermost first.
    pub loci: Vec<PeriodicCurve>,
    /// Largest residual of the locus fits.
    pub fit_residual: f64,
    /// Locus extrapolated to radius zero from the three innermost annuli.
    pub limit: PeriodicCurve,
    pub bounded: bool,
    pub contracts: bool,
    /// Convexity of the extrapolated locus (absent when it contracts).
    pub convexity: Option<ConvexityReport>,
    pub spherical: Option<SphericalReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub reason: String,
    pub annuli: Vec<AnnulusStats>,
    /// `inf ν` over the two innermost annuli.
    pub inf_nu: f64,
    /// Median `|z|` growth factor per halving, outermost pair first.
    pub height_trend: Vec<f64>,
    /// `max |∇z|` growth factor per halving.
    pub gradient_trend: Vec<f64>,
    /// Locus diameter factor per halving.
    pub locus_trend: Vec<f64>,
    /// Sign of the height where it diverges.
    pub height_direction: f64,
    pub limit_gradient: LimitGradientReport,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Growth factors per halving between consecutive annuli.
fn per_halving(radii: &[f64], vals: &[f64]) -> Vec<f64> {
    (1..vals.len())
        .map(|i| {
            let halvings = (radii[i - 1] / radii[i]).log2();
            (vals[i] / vals[i - 1]).powf(1.0 / halvings)
        })
        .collect()
}

/// Least-squares trigonometric fit of `(θ, value)` pairs.
fn fit_series(theta: &[f64], vals: &[f64], order: usize) -> (TrigSeries, f64) {
    let n = theta.len();
    let order = order.min((n.saturating_sub(1)) / 2).max(1);
    let cols = 2 * order + 1;
    let mut a = DMatrix::zeros(n, cols);
    for (i, &t) in theta.iter().enumerate() {
        a[(i, 0)] = 1.0;
        for k in 1..=order {
            let (s, c) = (k as f64 * t).sin_cos();
            a[(i, 2 * k - 1)] = c;
            a[(i, 2 * k)] = s;
        }
    }
    let b = DVector::from_column_slice(vals);
    let x = a.clone().svd(true, true).solve(&b, 1e-12).unwrap_or_else(|_| DVector::zeros(cols));
    let res = (&a * &x - &b).amax();
    let mut cos = vec![x[0]];
    let mut sin = vec![0.0];
    for k in 1..=order {
        cos.push(x[2 * k - 1]);
        sin.push(x[2 * k]);
    }
    (TrigSeries::new(cos, sin), res)
}

fn diameter(pts: &[[f64; 2]]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d = d.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    d
}

fn ensure_gradients(g: &GraphSamples, knn: usize) -> Result<std::borrow::Cow<'_, GraphSamples>> {
    if g.iter().all(|s| s.grad.is_some()) {
        Ok(std::borrow::Cow::Borrowed(g))
    } else {
        let mut owned = g.clone();
        owned.complete_derivatives(knn)?;
        Ok(std::borrow::Cow::Owned(owned))
    }
}

/// Gradient loci per annulus and their extrapolation to the puncture.
pub fn limit_gradient(g: &GraphSamples, opts: &ClassifierOptions) -> Result<LimitGradientReport> {
    if g.annuli.len() < 3 {
        return Err(Error::InsufficientData(format!("{} annuli, at least 3 needed", g.annuli.len())));
    }
    let g = ensure_gradients(g, opts.knn)?;
    let mut loci = Vec::with_capacity(g.annuli.len());
    let mut fit_residual: f64 = 0.0;
    let mut diam = Vec::with_capacity(g.annuli.len());
    let mut gmax = Vec::with_capacity(g.annuli.len());
    for a in &g.annuli {
        let theta: Vec<f64> = a.samples.iter().map(|s| s.y.atan2(s.x)).collect();
        let grads: Vec<[f64; 2]> = a.samples.iter().map(|s| s.grad.unwrap()).collect();
        let (al, r1) = fit_series(&theta, &grads.iter().map(|p| p[0]).collect::<Vec<_>>(), opts.locus_order);
        let (be, r2) = fit_series(&theta, &grads.iter().map(|p| p[1]).collect::<Vec<_>>(), opts.locus_order);
        fit_residual = fit_residual.max(r1).max(r2);
        loci.push(PeriodicCurve::new(al, be));
        diam.push(diameter(&grads));
        gmax.push(grads.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max));
    }
    let n = loci.len();
    let radii: Vec<f64> = g.annuli.iter().map(|a| a.radius).collect();
    // Lagrange extrapolation to r = 0 through the three innermost loci.
    let r = [radii[n - 3], radii[n - 2], radii[n - 1]];
    let w: [f64; 3] = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        r[j] * r[k] / ((r[i] - r[j]) * (r[i] - r[k]))
    });
    let order = opts.locus_order;
    let combine = |pick: fn(&PeriodicCurve) -> &TrigSeries| {
        (0..3).fold(TrigSeries::zeros(order), |acc, i| {
            acc.add(&pick(&loci[n - 3 + i]).resized(order).scaled(w[i]))
        })
    };
    let limit = PeriodicCurve::new(combine(|c| &c.alpha), combine(|c| &c.beta));
    let gtrend = per_halving(&radii, &gmax);
    let dtrend = per_halving(&radii, &diam);
    let bounded = gtrend[gtrend.len() - 2..].iter().all(|&t| t <= opts.gradient_growth);
    let contracts = dtrend[dtrend.len() - 2..].iter().all(|&t| t <= opts.contraction_ratio);
    let (convexity, spherical) = if contracts {
        (None, None)
    } else {
        let c = convexity_report(&limit).ok();
        let s = spherical_lift(&limit, &Frame::default())?.sample_report(crate::curves::DENSE_SAMPLES);
        (c, Some(s))
    };
    Ok(LimitGradientReport {
        loci,
        fit_residual,
        limit,
        bounded,
        contracts,
        convexity,
        spherical,
    })
}

/// Sorts an isolated singularity into one of the three asymptotic cases.
pub fn classify_singularity(g: &GraphSamples, opts: &ClassifierOptions) -> Result<ClassificationReport> {
    if g.annuli.len() < 5 {
        return Err(Error::InsufficientData(format!("{} annuli, at least 5 needed", g.annuli.len())));
    }
    // only supplied second derivatives are trusted for the sign check
    for s in g.iter() {
        if let Some(j) = s.jet() {
            let k = graph_curvature(&g.model, &j)?;
            if !(k > 0.0) {
                return Err(Error::NonpositiveCurvature { value: k, x: s.x, y: s.y, z: s.z });
            }
        }
    }
    let g = ensure_gradients(g, opts.knn)?;
    let mut annuli = Vec::with_capacity(g.annuli.len());
    for a in &g.annuli {
        let grads: Vec<[f64; 2]> = a.samples.iter().map(|s| s.grad.unwrap()).collect();
        let mut min_nu = f64::INFINITY;
        for s in &a.samples {
            min_nu = min_nu.min(sample_nu(&g.model, s)?);
        }
        annuli.push(AnnulusStats {
            radius: a.radius,
            median_z: median(a.samples.iter().map(|s| s.z).collect()),
            median_abs_z: median(a.samples.iter().map(|s| s.z.abs()).collect()),
            max_gradient: grads.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max),
            min_nu,
            locus_diameter: diameter(&grads),
        });
    }
    let radii: Vec<f64> = annuli.iter().map(|a| a.radius).collect();
    let height_trend = per_halving(&radii, &annuli.iter().map(|a| a.median_abs_z).collect::<Vec<_>>());
    let gradient_trend = per_halving(&radii, &annuli.iter().map(|a| a.max_gradient).collect::<Vec<_>>());
    let locus_trend = per_halving(&radii, &annuli.iter().map(|a| a.locus_diameter).collect::<Vec<_>>());
    let n = annuli.len();
    let inf_nu = annuli[n - 1].min_nu.min(annuli[n - 2].min_nu);
    let limit_gradient = limit_gradient(&g, opts)?;
    let inner = opts.height_halvings.min(height_trend.len());
    let diverges = height_trend[height_trend.len() - inner..]
        .iter()
        .all(|&t| t >= 1.0 + opts.height_growth);
    let signs_agree = annuli[n - inner - 1..].windows(2).all(|w| w[0].median_z.signum() == w[1].median_z.signum());
    let stable = locus_trend[locus_trend.len() - 2..]
        .iter()
        .all(|&t| (1.0 / 1.25..=1.25).contains(&t));
    let (verdict, reason) = if diverges && signs_agree {
        (
            Verdict::HeightDiverges,
            format!("median |z| grows by at least {:.0}% per halving over the innermost {inner} halvings", 100.0 * opts.height_growth),
        )
    } else if limit_gradient.contracts {
        (Verdict::C1Extension, "gradient locus contracts to a point".to_string())
    } else if limit_gradient.bounded && stable && inf_nu >= opts.nu_threshold {
        (
            Verdict::BoundedNonvertical,
            format!("bounded gradient, stable locus, inf ν = {inf_nu:.3e}"),
        )
    } else {
        (
            Verdict::Inconclusive,
            format!(
                "no rule applies: bounded = {}, locus stable = {stable}, inf ν = {inf_nu:.3e}",
                limit_gradient.bounded
            ),
        )
    };
    Ok(ClassificationReport {
        verdict,
        reason,
        height_direction: annuli[n - 1].median_z.signum(),
        annuli,
        inf_nu,
        height_trend,
        gradient_trend,
        locus_trend,
        limit_gradient,
    })
}

impl LimitGradientReport {
    /// Whether the extrapolated limit is a regular strictly convex curve.
    pub fn strictly_convex(&self) -> bool {
        self.convexity
            .as_ref()
            .is_some_and(|c| c.verdict != Convexity::NotStrictlyConvex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::samples::{radial_samples, Horosphere, PeakedSphere, SphereCap};
    use crate::geometry::{make_space_form, Chart};

    #[test]
    fn three_closed_forms() {
        let cart = make_space_form(0, Chart::Cartesian).unwrap();
        let hs = make_space_form(-1, Chart::HalfspaceH3).unwrap();
        let opts = ClassifierOptions::default();
        let radii = [0.4, 0.2, 0.1, 0.05, 0.025];
        let h = classify_singularity(&radial_samples(hs, &Horosphere, &radii, 32, true).unwrap(), &opts).unwrap();
        assert_eq!(h.verdict, Verdict::HeightDiverges, "{}", h.reason);
        assert_eq!(h.height_direction, -1.0);
        let c = classify_singularity(&radial_samples(cart, &SphereCap(1.0), &radii, 32, true).unwrap(), &opts).unwrap();
        assert_eq!(c.verdict, Verdict::C1Extension, "{}", c.reason);
        let small = [0.16, 0.08, 0.04, 0.02, 0.01];
        let p = classify_singularity(&radial_samples(cart, &PeakedSphere(1.0), &small, 32, true).unwrap(), &opts).unwrap();
        assert_eq!(p.verdict, Verdict::BoundedNonvertical, "{}", p.reason);
        assert!((p.inf_nu - 0.5f64.sqrt()).abs() < 1e-2);
        let lim = &p.limit_gradient.limit;
        for u in [0.0, 1.0, 2.0] {
            let [a, b] = lim.point(u);
            assert!((a.hypot(b) - 1.0).abs() < 1e-3);
        }
        assert!(p.limit_gradient.strictly_convex());
    }

    #[test]
    fn too_few_annuli() {
        let cart = make_space_form(0, Chart::Cartesian).unwrap();
        let g = radial_samples(cart, &SphereCap(1.0), &[0.2, 0.1], 16, true).unwrap();
        assert!(matches!(classify_singularity(&g, &ClassifierOptions::default()), Err(Error::InsufficientData(_))));
        assert!(matches!(limit_gradient(&g, &ClassifierOptions::default()), Err(Error::InsufficientData(_))));
    }
}
