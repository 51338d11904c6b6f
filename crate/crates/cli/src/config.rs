//! Run configuration in a line-oriented `key = value` grammar:
//!
//! ```text
//! # comments run to the end of the line
//! [space_form]
//! chart = cylindrical_h3
//!
//! [curvature]
//! expression = exp(z)
//!
//! [curve]
//! # (cos, sin) pairs for modes 0, 1, 2, ...
//! alpha = (0, 0), (1, 0)
//! beta  = (0, 0), (0, -1)
//! ```
//!
//! Sections are `space_form`, `curvature`, `curve`, `solver`, `analysis`,
//! `samples` and `output`. Every key is optional except where a command
//! needs it; [`RunConfig`]'s `Display` writes the normalized form with all
//! defaults filled in.

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;

use peaked_core::analysis::{ClassifierOptions, Verdict, KNN_DEFAULT};
use peaked_core::{Chart, CurvatureField, Expr, Height, PeriodicCurve, SolverOptions, TrigSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line and column of the offending text.
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

/// All errors found in one pass over the text.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Csv,
}

impl MeshFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MeshFormat::Obj => "obj",
            MeshFormat::Csv => "csv",
        }
    }
}

/// Closed-form radial graphs available to the `sample` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleModel {
    Horosphere,
    SphereCap,
    Paraboloid,
    PeakedSphere,
}

impl SampleModel {
    pub fn name(self) -> &'static str {
        match self {
            SampleModel::Horosphere => "horosphere",
            SampleModel::SphereCap => "sphere_cap",
            SampleModel::Paraboloid => "paraboloid",
            SampleModel::PeakedSphere => "peaked_sphere",
        }
    }

    const ALL: [SampleModel; 4] = [
        SampleModel::Horosphere,
        SampleModel::SphereCap,
        SampleModel::Paraboloid,
        SampleModel::PeakedSphere,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceForm {
    pub c: i32,
    pub chart: Chart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curvature {
    pub expression: String,
    /// Reserved for curvature depending on the gradient; must stay off.
    pub gradient_dependence: bool,
}

/// Fourier coefficients of the limit gradient as `(cos, sin)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub alpha: Vec<[f64; 2]>,
    pub beta: Vec<[f64; 2]>,
}

impl CurveSpec {
    pub fn to_curve(&self) -> PeriodicCurve {
        let series = |c: &[[f64; 2]]| {
            TrigSeries::new(c.iter().map(|p| p[0]).collect(), c.iter().map(|p| p[1]).collect())
        };
        PeriodicCurve::new(series(&self.alpha), series(&self.beta))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solver {
    pub order: usize,
    pub levels: usize,
    pub height: Height,
    pub filter: bool,
    pub safety: f64,
    pub noise_floor: f64,
    pub padding: usize,
}

impl Solver {
    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            order: self.order,
            levels: self.levels,
            height: self.height,
            safety: self.safety,
            filter: self.filter,
            noise_floor: self.noise_floor,
            padding: self.padding,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    /// Mesh size `(n_u, n_v)`.
    pub grid: (usize, usize),
    /// Fractions of the strip height on which tolerances are checked.
    pub check_range: (f64, f64),
    pub curvature_tolerance: f64,
    pub first_order_tolerance: f64,
    pub residual_tolerance: f64,
    /// Sample file for `verify` and `classify`, relative to the config file.
    pub samples: Option<PathBuf>,
    /// Solution file written by `construct`, relative to the config file.
    pub solution: Option<PathBuf>,
    pub knn: usize,
    pub nu_threshold: f64,
    /// Number of solution rows sampled for `classify`.
    pub rows: usize,
    pub expect: Option<Verdict>,
}

impl Analysis {
    pub fn classifier(&self) -> ClassifierOptions {
        ClassifierOptions {
            nu_threshold: self.nu_threshold,
            knn: self.knn,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub model: Option<SampleModel>,
    /// Sphere or cap radius, paraboloid curvature, or peaked-sphere `ρ`.
    pub parameter: f64,
    pub radii: Vec<f64>,
    pub n_theta: usize,
    pub derivatives: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub dir: PathBuf,
    pub formats: Vec<MeshFormat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub space_form: SpaceForm,
    pub curvature: Curvature,
    pub curve: Option<CurveSpec>,
    pub solver: Solver,
    pub analysis: Analysis,
    pub samples: Samples,
    pub output: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        let so = SolverOptions::default();
        RunConfig {
            space_form: SpaceForm { c: 0, chart: Chart::Cartesian },
            curvature: Curvature { expression: "1".into(), gradient_dependence: false },
            curve: None,
            solver: Solver {
                order: so.order,
                levels: so.levels,
                height: so.height,
                filter: so.filter,
                safety: so.safety,
                noise_floor: so.noise_floor,
                padding: so.padding,
            },
            analysis: Analysis {
                grid: (64, 33),
                check_range: (0.25, 0.5),
                curvature_tolerance: 1e-4,
                first_order_tolerance: 1e-6,
                residual_tolerance: 1e-8,
                samples: None,
                solution: None,
                knn: KNN_DEFAULT,
                nu_threshold: 1e-3,
                rows: 6,
                expect: None,
            },
            samples: Samples {
                model: None,
                parameter: 1.0,
                radii: vec![0.4, 0.2, 0.1, 0.05, 0.025],
                n_theta: 64,
                derivatives: true,
            },
            output: Output { dir: "out".into(), formats: vec![MeshFormat::Obj, MeshFormat::Csv] },
        }
    }
}

impl RunConfig {
    pub fn curvature_field(&self) -> CurvatureField {
        // validated during parsing
        CurvatureField::parse(&self.curvature.expression).expect("validated expression")
    }
}

fn default_chart(c: i32) -> Chart {
    match c {
        -1 => Chart::CylindricalH3,
        1 => Chart::StereographicS3,
        _ => Chart::Cartesian,
    }
}

struct Value<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

impl Value<'_> {
    fn err(&self, message: impl Into<String>) -> ConfigError {
        ConfigError { line: self.line, col: self.col, message: message.into() }
    }

    fn float(&self) -> Result<f64, ConfigError> {
        parse_float(self.text).map_err(|m| self.err(m))
    }

    fn usize(&self) -> Result<usize, ConfigError> {
        self.text
            .parse()
            .map_err(|_| self.err(format!("expected a nonnegative integer, got `{}`", self.text)))
    }

    fn bool(&self) -> Result<bool, ConfigError> {
        match self.text.to_ascii_lowercase().as_str() {
            "on" | "true" | "yes" => Ok(true),
            "off" | "false" | "no" => Ok(false),
            _ => Err(self.err(format!("expected on/off, got `{}`", self.text))),
        }
    }

    fn floats(&self) -> Result<Vec<f64>, ConfigError> {
        self.text
            .split(',')
            .map(|t| parse_float(t.trim()).map_err(|m| self.err(m)))
            .collect()
    }

    fn pairs(&self) -> Result<Vec<[f64; 2]>, ConfigError> {
        let mut out = Vec::new();
        let mut rest = self.text.trim();
        while !rest.is_empty() {
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.split_once(')'))
                .ok_or_else(|| self.err("expected a list of (cos, sin) pairs"))?;
            let nums = Value { text: inner.0, line: self.line, col: self.col }.floats()?;
            if nums.len() != 2 {
                return Err(self.err(format!("pair `({})` must have two entries", inner.0)));
            }
            out.push([nums[0], nums[1]]);
            rest = inner.1.trim_start();
            if let Some(r) = rest.strip_prefix(',') {
                rest = r.trim_start();
                if rest.is_empty() {
                    return Err(self.err("trailing comma"));
                }
            } else if !rest.is_empty() {
                return Err(self.err("pairs must be separated by commas"));
            }
        }
        if out.is_empty() {
            return Err(self.err("empty coefficient list"));
        }
        Ok(out)
    }
}

fn parse_float(t: &str) -> Result<f64, String> {
    match t.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err(format!("`{t}` is not finite")),
        Err(_) => Err(format!("expected a number, got `{t}`")),
    }
}

const SECTIONS: [(&str, &[&str]); 7] = [
    ("space_form", &["c", "chart"]),
    ("curvature", &["expression", "gradient_dependence"]),
    ("curve", &["alpha", "beta"]),
    ("solver", &["order", "levels", "height", "filter", "safety", "noise_floor", "padding"]),
    (
        "analysis",
        &[
            "grid",
            "check_range",
            "curvature_tolerance",
            "first_order_tolerance",
            "residual_tolerance",
            "samples",
            "solution",
            "knn",
            "nu_threshold",
            "rows",
            "expect",
        ],
    ),
    ("samples", &["model", "parameter", "radii", "n_theta", "derivatives"]),
    ("output", &["dir", "formats"]),
];

/// Parses and validates a configuration, reporting every error found.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut cfg = RunConfig::default();
    let mut errors = Vec::new();
    let mut section: Option<&str> = None;
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut c_given: Option<(i32, usize, usize)> = None;
    let mut chart_given: Option<(Chart, usize, usize)> = None;
    let mut alpha: Option<(Vec<[f64; 2]>, usize, usize)> = None;
    let mut beta: Option<(Vec<[f64; 2]>, usize, usize)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            match rest.strip_suffix(']').map(str::trim) {
                Some(name) => match SECTIONS.iter().find(|(s, _)| *s == name) {
                    Some((s, _)) => section = Some(s),
                    None => {
                        errors.push(ConfigError {
                            line,
                            col: indent + 2,
                            message: format!("unknown section `{name}`"),
                        });
                        section = None;
                    }
                },
                None => errors.push(ConfigError {
                    line,
                    col: indent + 1,
                    message: "section header must end with `]`".into(),
                }),
            }
            continue;
        }
        let Some(eq) = body.find('=') else {
            errors.push(ConfigError { line, col: indent + 1, message: "expected `key = value`".into() });
            continue;
        };
        let key = body[..eq].trim();
        let vstart = eq + 1 + (body[eq + 1..].len() - body[eq + 1..].trim_start().len());
        let value = Value { text: body[eq + 1..].trim(), line, col: vstart + 1 };
        let key_err = |m: String| ConfigError { line, col: indent + 1, message: m };
        let Some(sec) = section else {
            errors.push(key_err(format!("key `{key}` outside a known section")));
            continue;
        };
        let keys = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !keys.contains(&key) {
            errors.push(key_err(format!("unknown key `{key}` in [{sec}]")));
            continue;
        }
        if !seen.insert((sec.to_string(), key.to_string())) {
            errors.push(key_err(format!("duplicate key `{key}` in [{sec}]")));
            continue;
        }
        if value.text.is_empty() {
            errors.push(value.err(format!("missing value for `{key}`")));
            continue;
        }
        let res = apply(&mut cfg, sec, key, &value, &mut c_given, &mut chart_given, &mut alpha, &mut beta);
        if let Err(e) = res {
            errors.push(e);
        }
    }

    match (c_given, chart_given) {
        (Some((c, _, _)), None) => cfg.space_form = SpaceForm { c, chart: default_chart(c) },
        (None, Some((chart, _, _))) => cfg.space_form = SpaceForm { c: chart.curvature(), chart },
        (Some((c, line, col)), Some((chart, _, _))) => {
            if chart.curvature() != c {
                errors.push(ConfigError {
                    line,
                    col,
                    message: format!("chart {chart} realizes c = {}, not {c}", chart.curvature()),
                });
            }
            cfg.space_form = SpaceForm { c, chart };
        }
        (None, None) => {}
    }
    match (alpha, beta) {
        (Some((a, _, _)), Some((b, _, _))) => cfg.curve = Some(CurveSpec { alpha: a, beta: b }),
        (Some((_, line, col)), None) | (None, Some((_, line, col))) => errors.push(ConfigError {
            line,
            col,
            message: "[curve] needs both alpha and beta".into(),
        }),
        (None, None) => {}
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        errors.sort_by_key(|e| (e.line, e.col));
        Err(ConfigErrors(errors))
    }
}

#[allow(clippy::too_many_arguments)]
fn apply(
    cfg: &mut RunConfig,
    sec: &str,
    key: &str,
    v: &Value,
    c_given: &mut Option<(i32, usize, usize)>,
    chart_given: &mut Option<(Chart, usize, usize)>,
    alpha: &mut Option<(Vec<[f64; 2]>, usize, usize)>,
    beta: &mut Option<(Vec<[f64; 2]>, usize, usize)>,
) -> Result<(), ConfigError> {
    let positive = |x: f64, what: &str| {
        if x > 0.0 {
            Ok(x)
        } else {
            Err(v.err(format!("{what} must be positive")))
        }
    };
    let at_least = |n: usize, min: usize, what: &str| {
        if n >= min {
            Ok(n)
        } else {
            Err(v.err(format!("{what} = {n} is below the minimum {min}")))
        }
    };
    match (sec, key) {
        ("space_form", "c") => {
            let c: i32 = v.text.parse().map_err(|_| v.err("c must be -1, 0 or 1"))?;
            if !(-1..=1).contains(&c) {
                return Err(v.err("c must be -1, 0 or 1"));
            }
            *c_given = Some((c, v.line, v.col));
        }
        ("space_form", "chart") => {
            let chart: Chart = v.text.parse().map_err(|e: peaked_core::Error| v.err(e.to_string()))?;
            *chart_given = Some((chart, v.line, v.col));
        }
        ("curvature", "expression") => {
            Expr::parse(v.text).map_err(|e| ConfigError {
                line: v.line,
                col: v.col + e.pos,
                message: e.message,
            })?;
            cfg.curvature.expression = v.text.to_string();
        }
        ("curvature", "gradient_dependence") => {
            if v.bool()? {
                return Err(v.err("gradient-dependent curvature is reserved and not implemented"));
            }
            cfg.curvature.gradient_dependence = false;
        }
        ("curve", "alpha") | ("curve", "beta") => {
            let pairs = v.pairs()?;
            if pairs[0][1] != 0.0 {
                return Err(v.err("the sine coefficient of mode 0 must be 0"));
            }
            if pairs.len() < 2 {
                return Err(v.err("a curve needs at least mode 1"));
            }
            let slot = if key == "alpha" { alpha } else { beta };
            *slot = Some((pairs, v.line, v.col));
        }
        ("solver", "order") => cfg.solver.order = at_least(v.usize()?, 4, "order")?,
        ("solver", "levels") => cfg.solver.levels = at_least(v.usize()?, 4, "levels")?,
        ("solver", "height") => {
            cfg.solver.height = if v.text.eq_ignore_ascii_case("auto") {
                Height::Auto
            } else {
                Height::Fixed(positive(v.float()?, "height")?)
            }
        }
        ("solver", "filter") => cfg.solver.filter = v.bool()?,
        ("solver", "safety") => {
            let s = v.float()?;
            if !(s > 0.0 && s <= 1.0) {
                return Err(v.err("safety must lie in (0, 1]"));
            }
            cfg.solver.safety = s;
        }
        ("solver", "noise_floor") => {
            let s = v.float()?;
            if s < 0.0 {
                return Err(v.err("noise_floor must be nonnegative"));
            }
            cfg.solver.noise_floor = s;
        }
        ("solver", "padding") => cfg.solver.padding = at_least(v.usize()?, 3, "padding")?,
        ("analysis", "grid") => {
            let parts: Vec<&str> = v.text.split(['x', ',']).map(str::trim).collect();
            let dims: Option<Vec<usize>> = parts.iter().map(|p| p.parse().ok()).collect();
            match dims.as_deref() {
                Some(&[nu, nv]) if nu >= 3 && nv >= 2 => cfg.analysis.grid = (nu, nv),
                _ => return Err(v.err("grid must be `n_u x n_v` with n_u ≥ 3 and n_v ≥ 2")),
            }
        }
        ("analysis", "check_range") => match v.floats()?.as_slice() {
            &[a, b] if 0.0 <= a && a < b && b <= 1.0 => cfg.analysis.check_range = (a, b),
            _ => return Err(v.err("check_range must be two fractions 0 ≤ a < b ≤ 1")),
        },
        ("analysis", "curvature_tolerance") => {
            cfg.analysis.curvature_tolerance = positive(v.float()?, "tolerance")?
        }
        ("analysis", "first_order_tolerance") => {
            cfg.analysis.first_order_tolerance = positive(v.float()?, "tolerance")?
        }
        ("analysis", "residual_tolerance") => {
            cfg.analysis.residual_tolerance = positive(v.float()?, "tolerance")?
        }
        ("analysis", "samples") => cfg.analysis.samples = Some(PathBuf::from(v.text)),
        ("analysis", "solution") => cfg.analysis.solution = Some(PathBuf::from(v.text)),
        ("analysis", "knn") => cfg.analysis.knn = at_least(v.usize()?, 6, "knn")?,
        ("analysis", "nu_threshold") => cfg.analysis.nu_threshold = positive(v.float()?, "nu_threshold")?,
        ("analysis", "rows") => cfg.analysis.rows = at_least(v.usize()?, 5, "rows")?,
        ("analysis", "expect") => {
            cfg.analysis.expect = Some(v.text.parse().map_err(|e: peaked_core::Error| v.err(e.to_string()))?)
        }
        ("samples", "model") => {
            let m = SampleModel::ALL
                .into_iter()
                .find(|m| m.name() == v.text)
                .ok_or_else(|| v.err(format!("unknown sample model `{}`", v.text)))?;
            cfg.samples.model = Some(m);
        }
        ("samples", "parameter") => cfg.samples.parameter = positive(v.float()?, "parameter")?,
        ("samples", "radii") => {
            let r = v.floats()?;
            if r.len() < 3 || r.iter().any(|&x| x <= 0.0) {
                return Err(v.err("radii must list at least three positive values"));
            }
            cfg.samples.radii = r;
        }
        ("samples", "n_theta") => cfg.samples.n_theta = at_least(v.usize()?, 8, "n_theta")?,
        ("samples", "derivatives") => cfg.samples.derivatives = v.bool()?,
        ("output", "dir") => cfg.output.dir = PathBuf::from(v.text),
        ("output", "formats") => {
            let mut f = Vec::new();
            for t in v.text.split(',').map(str::trim) {
                f.push(match t {
                    "obj" => MeshFormat::Obj,
                    "csv" => MeshFormat::Csv,
                    _ => return Err(v.err(format!("unknown format `{t}`"))),
                });
            }
            cfg.output.formats = f;
        }
        _ => unreachable!("keys are checked against SECTIONS"),
    }
    Ok(())
}

fn pairs(p: &[[f64; 2]]) -> String {
    p.iter().map(|[a, b]| format!("({a:?}, {b:?})")).collect::<Vec<_>>().join(", ")
}

fn floats(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[space_form]")?;
        writeln!(f, "c = {}", self.space_form.c)?;
        writeln!(f, "chart = {}", self.space_form.chart)?;
        writeln!(f, "\n[curvature]")?;
        writeln!(f, "expression = {}", self.curvature.expression)?;
        writeln!(f, "gradient_dependence = {}", on_off(self.curvature.gradient_dependence))?;
        if let Some(c) = &self.curve {
            writeln!(f, "\n[curve]")?;
            writeln!(f, "alpha = {}", pairs(&c.alpha))?;
            writeln!(f, "beta = {}", pairs(&c.beta))?;
        }
        let s = &self.solver;
        writeln!(f, "\n[solver]")?;
        writeln!(f, "order = {}", s.order)?;
        writeln!(f, "levels = {}", s.levels)?;
        match s.height {
            Height::Auto => writeln!(f, "height = auto")?,
            Height::Fixed(r) => writeln!(f, "height = {r:?}")?,
        }
        writeln!(f, "filter = {}", on_off(s.filter))?;
        writeln!(f, "safety = {:?}", s.safety)?;
        writeln!(f, "noise_floor = {:?}", s.noise_floor)?;
        writeln!(f, "padding = {}", s.padding)?;
        let a = &self.analysis;
        writeln!(f, "\n[analysis]")?;
        writeln!(f, "grid = {} x {}", a.grid.0, a.grid.1)?;
        writeln!(f, "check_range = {:?}, {:?}", a.check_range.0, a.check_range.1)?;
        writeln!(f, "curvature_tolerance = {:?}", a.curvature_tolerance)?;
        writeln!(f, "first_order_tolerance = {:?}", a.first_order_tolerance)?;
        writeln!(f, "residual_tolerance = {:?}", a.residual_tolerance)?;
        if let Some(p) = &a.samples {
            writeln!(f, "samples = {}", p.display())?;
        }
        if let Some(p) = &a.solution {
            writeln!(f, "solution = {}", p.display())?;
        }
        writeln!(f, "knn = {}", a.knn)?;
        writeln!(f, "nu_threshold = {:?}", a.nu_threshold)?;
        writeln!(f, "rows = {}", a.rows)?;
        if let Some(v) = a.expect {
            writeln!(f, "expect = {v}")?;
        }
        let sm = &self.samples;
        writeln!(f, "\n[samples]")?;
        if let Some(m) = sm.model {
            writeln!(f, "model = {}", m.name())?;
        }
        writeln!(f, "parameter = {:?}", sm.parameter)?;
        writeln!(f, "radii = {}", floats(&sm.radii))?;
        writeln!(f, "n_theta = {}", sm.n_theta)?;
        writeln!(f, "derivatives = {}", on_off(sm.derivatives))?;
        writeln!(f, "\n[output]")?;
        writeln!(f, "dir = {}", self.output.dir.display())?;
        let fm: Vec<&str> = self.output.formats.iter().map(|m| m.extension()).collect();
        writeln!(f, "formats = {}", fm.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = "[curve]\nalpha = (0, 0), (1, 0)\nbeta = (0, 0), (0, -1)\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.space_form, SpaceForm { c: 0, chart: Chart::Cartesian });
        assert_eq!(cfg.curvature.expression, "1");
        assert_eq!(cfg.solver.order, 64);
        assert_eq!(cfg.solver.height, Height::Auto);
        let curve = cfg.curve.unwrap().to_curve();
        assert_eq!(curve.max_coeff_diff(&PeriodicCurve::circle(1.0, true)), 0.0);
    }

    #[test]
    fn chart_and_curvature_are_reconciled() {
        let cfg = parse_config("[space_form]\nc = -1\n").unwrap();
        assert_eq!(cfg.space_form.chart, Chart::CylindricalH3);
        let cfg = parse_config("[space_form]\nchart = stereographic_s3\n").unwrap();
        assert_eq!(cfg.space_form.c, 1);
        let err = parse_config("[space_form]\nc = 0\nchart = halfspace_h3\n").unwrap_err();
        assert_eq!(err.0[0].line, 2);
    }

    #[test]
    fn expression_errors_point_at_the_token() {
        let err = parse_config("[curvature]\nexpression = 1+*2\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        let e = &err.0[0];
        assert_eq!((e.line, e.col), (2, 16), "{e}");
    }

    #[test]
    fn errors_are_collected_with_positions() {
        let text = "[solver]\norder = 3\nbogus = 1\n[nowhere]\nsafety = 2\n[output]\nformats = png\n";
        let err = parse_config(text).unwrap_err();
        let at: Vec<(usize, usize)> = err.0.iter().map(|e| (e.line, e.col)).collect();
        assert_eq!(at, vec![(2, 9), (3, 1), (4, 2), (5, 1), (7, 11)]);
        assert!(err.to_string().contains("unknown key `bogus`"));
    }

    #[test]
    fn reserved_and_malformed_values_are_rejected() {
        assert!(parse_config("[curvature]\ngradient_dependence = on\n").is_err());
        assert!(parse_config("[curve]\nalpha = (0, 0), (1, 0)\n").is_err());
        assert!(parse_config("[curve]\nalpha = (0, 1), (1, 0)\nbeta = (0, 0), (0, -1)\n").is_err());
        assert!(parse_config("[curve]\nalpha = (0, 0) (1, 0)\nbeta = (0, 0), (0, -1)\n").is_err());
        assert!(parse_config("[solver]\nheight = inf\n").is_err());
        assert!(parse_config("[solver]\nheight = 0.3\norder = 4\n").is_ok());
        assert!(parse_config("[solver]\norder = 8\norder = 9\n").is_err());
    }

    #[test]
    fn normalized_form_round_trips() {
        let text = format!(
            "{MINIMAL}[solver]\nheight = 0.1\nfilter = on\n[analysis]\nexpect = C1_extension\n\
             samples = s.csv\n[samples]\nmodel = peaked_sphere\n[output]\nformats = csv\n"
        );
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&cfg.to_string()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_string(), again.to_string());
    }

    proptest! {
        #[test]
        fn coefficients_round_trip_exactly(
            a in prop::collection::vec(-1e3f64..1e3, 2..6),
            b in prop::collection::vec(-1e3f64..1e3, 2..6),
            safety in 1e-3f64..1.0,
        ) {
            let mut cfg = RunConfig::default();
            let mk = |v: &[f64]| {
                let mut p: Vec<[f64; 2]> = v.chunks(2).map(|c| [c[0], *c.get(1).unwrap_or(&0.0)]).collect();
                p[0][1] = 0.0;
                p.push([1.0, 0.5]);
                p
            };
            cfg.curve = Some(CurveSpec { alpha: mk(&a), beta: mk(&b) });
            cfg.solver.safety = safety;
            prop_assert_eq!(parse_config(&cfg.to_string()).unwrap(), cfg);
        }
    }
}
