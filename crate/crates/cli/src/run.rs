//! Command pipelines. Every pipeline produces its artifacts in memory so
//! that `--seed-check` can rerun it and compare bytes before anything is
//! written.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use peaked_core::analysis::{
    classify_singularity, fundamental_forms, graph_curvature, radial_samples, samples_from_solution,
    sinh_gordon_residual,
    GraphSamples, Horosphere, Paraboloid, PeakedSphere, SphereCap,
};
use peaked_core::monge_ampere::residual;
use peaked_core::{
    cauchy_data, evaluate, make_space_form, orient_for_construction, solve, CoefficientSource, Error,
    Problem, StripSolution,
};

use crate::config::{MeshFormat, RunConfig, SampleModel};
use crate::export::{forms_csv, mesh_csv, mesh_obj};
use crate::samples_io::{read_samples, write_samples};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Construct,
    Verify,
    Classify,
    Export,
    Sample,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Construct => "construct",
            Command::Verify => "verify",
            Command::Classify => "classify",
            Command::Export => "export",
            Command::Sample => "sample",
        })
    }
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_TOLERANCE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
    #[error("I/O: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Input(_) | RunError::Io(_) => EXIT_INPUT,
            RunError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Input(_) => "input",
            RunError::Numerical(_) => "numerical",
            RunError::Io(_) => "io",
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        use Error::*;
        match e {
            ChartMismatch { .. }
            | UnknownChart(_)
            | Irregular { .. }
            | NotStrictlyConvex
            | WrongOrientation
            | FrameNotOrthonormal(_)
            | InsufficientData(_)
            | InvalidArgument(_)
            | NonpositiveCurvature { .. } => RunError::Input(e.to_string()),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

/// A tolerance comparison recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub curvature: f64,
    pub first_order: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub run_id: String,
    pub command: String,
    pub version: &'static str,
    pub config_hash: String,
    pub space_form: i32,
    pub chart: String,
    pub curvature: String,
    pub order: usize,
    pub levels: usize,
    pub tolerances: Tolerances,
    pub checks: Vec<Check>,
    pub summary: Map<String, Value>,
    pub artifacts: Vec<String>,
    pub threads: usize,
    pub wall_time_s: f64,
    pub status: u8,
}

/// Inputs of one run. Relative sample and solution paths are resolved
/// against `base_dir`, normally the directory of the config file.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed_check: bool,
}

#[derive(Default)]
struct Products {
    artifacts: Vec<(String, Vec<u8>)>,
    checks: Vec<Check>,
    summary: Map<String, Value>,
}

impl Products {
    fn note(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.into(), value.into());
    }

    fn file(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.artifacts.push((name.into(), bytes));
    }
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Runs `command`, writes artifacts and `manifest.json` to the output
/// directory and returns the manifest. Tolerance failures are reported in
/// the manifest status; errors abort before the manifest is written.
pub fn run(command: Command, ctx: &RunContext) -> Result<Manifest, RunError> {
    let start = Instant::now();
    let normalized = ctx.config.to_string();
    let config_hash = sha256_hex(&normalized);
    let version = env!("CARGO_PKG_VERSION");
    let run_id = sha256_hex(&format!("{command}\n{version}\n{normalized}"))[..16].to_string();
    let mut products = pipeline(command, ctx, &run_id)?;
    if ctx.seed_check {
        let again = pipeline(command, ctx, &run_id)?;
        let differing = products
            .artifacts
            .iter()
            .zip(&again.artifacts)
            .filter(|(a, b)| a != b)
            .count()
            + products.artifacts.len().abs_diff(again.artifacts.len());
        products.checks.push(Check::at_most("rerun_differing_artifacts", differing as f64, 0.0));
    }
    fs::create_dir_all(&ctx.out_dir)?;
    for (name, bytes) in &products.artifacts {
        fs::write(ctx.out_dir.join(name), bytes)?;
    }
    let cfg = &ctx.config;
    let status = if products.checks.iter().all(|c| c.pass) { EXIT_OK } else { EXIT_TOLERANCE };
    let mut artifacts: Vec<String> = products.artifacts.iter().map(|(n, _)| n.clone()).collect();
    artifacts.push("manifest.json".into());
    let manifest = Manifest {
        run_id,
        command: command.to_string(),
        version,
        config_hash,
        space_form: cfg.space_form.c,
        chart: cfg.space_form.chart.to_string(),
        curvature: cfg.curvature.expression.clone(),
        order: cfg.solver.order,
        levels: cfg.solver.levels,
        tolerances: Tolerances {
            curvature: cfg.analysis.curvature_tolerance,
            first_order: cfg.analysis.first_order_tolerance,
            residual: cfg.analysis.residual_tolerance,
        },
        checks: products.checks,
        summary: products.summary,
        artifacts,
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        status,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    fs::write(ctx.out_dir.join("manifest.json"), text)?;
    Ok(manifest)
}

/// Machine-readable record of an aborted run.
pub fn write_error_record(out_dir: &Path, command: &str, kind: &str, code: u8, messages: &[String]) -> io::Result<()> {
    fs::create_dir_all(out_dir)?;
    let rec = json!({ "command": command, "status": code, "kind": kind, "errors": messages });
    fs::write(out_dir.join("error.json"), serde_json::to_string_pretty(&rec).map_err(io::Error::other)?)
}

fn pipeline(command: Command, ctx: &RunContext, run_id: &str) -> Result<Products, RunError> {
    let mut out = Products::default();
    match command {
        Command::Construct => construct(ctx, run_id, &mut out)?,
        Command::Verify => verify(ctx, &mut out)?,
        Command::Classify => classify(ctx, &mut out)?,
        Command::Export => export(ctx, run_id, &mut out)?,
        Command::Sample => sample(ctx, &mut out)?,
    }
    Ok(out)
}

fn problem(cfg: &RunConfig) -> Result<Problem, RunError> {
    Ok(Problem::new(make_space_form(cfg.space_form.c, cfg.space_form.chart)?, cfg.curvature_field()))
}

fn construct_solution(cfg: &RunConfig, pr: &Problem, out: &mut Products) -> Result<StripSolution, RunError> {
    let curve = cfg
        .curve
        .as_ref()
        .ok_or_else(|| RunError::Input("a [curve] section is required".into()))?
        .to_curve();
    let oriented = orient_for_construction(&curve)?;
    out.note("orientation_reversed", oriented.max_coeff_diff(&curve) != 0.0);
    let data = cauchy_data(&oriented, pr, cfg.solver.order)?;
    Ok(solve(&data, pr, &cfg.solver.options())?)
}

fn load_or_construct(ctx: &RunContext, pr: &Problem, out: &mut Products) -> Result<StripSolution, RunError> {
    match &ctx.config.analysis.solution {
        Some(path) => {
            let path = ctx.base_dir.join(path);
            let bytes = fs::read(&path)?;
            let mut sol: StripSolution = serde_json::from_slice(&bytes)
                .map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
            sol.attach_problem(pr.clone());
            out.note("solution_file", path.display().to_string());
            Ok(sol)
        }
        None => construct_solution(&ctx.config, pr, out),
    }
}

fn solution_checks(sol: &StripSolution, pr: &Problem, cfg: &RunConfig, out: &mut Products) -> Result<(), RunError> {
    let a = &cfg.analysis;
    let r = sol.height;
    let (v0, v1) = (a.check_range.0 * r, a.check_range.1 * r);
    let mesh = evaluate(sol, pr, a.grid, (v0, v1))?;
    let col = sol.collocation(pr, a.grid.0, a.grid.1, v0, v1)?;
    let d = &sol.diagnostics;
    out.note("height", r);
    out.note("growth_ratio", d.growth_ratio);
    out.note("one_step_ratio", d.one_step_ratio);
    out.note("recommended_height", d.recommended_height);
    out.note("check_range", json!([v0, v1]));
    out.note("max_system_residual", col.max_system);
    out.note("max_equation_residual", col.max_equation);
    out.note("min_discriminant", col.min_discriminant);
    // |Q| vanishes towards the top of the strip, so the identity is checked low
    let sg = sinh_gordon_residual(sol, pr, (a.grid.0.min(32), 9), (0.1 * r, 0.5 * r), 1e-3, 1.0)?;
    out.note("sinh_gordon_sup", sg.sup);
    if pr.model.c() != 1 {
        out.note("sinh_gordon_sup_metric_sign", sg.sup_metric_sign);
    }
    out.checks.push(Check::at_most("curvature_deviation", mesh.max_curvature_deviation(v0), a.curvature_tolerance));
    out.checks.push(Check::at_most("first_order_residual", col.max_first_order, a.first_order_tolerance));
    Ok(())
}

fn write_mesh(sol: &StripSolution, pr: &Problem, cfg: &RunConfig, run_id: &str, out: &mut Products) -> Result<(), RunError> {
    let mesh = evaluate(sol, pr, cfg.analysis.grid, (0.0, sol.height))?;
    let header = vec![
        "peaked surface mesh".to_string(),
        format!("run_id {run_id}"),
        format!("chart {} c {}", cfg.space_form.chart, cfg.space_form.c),
        format!("curvature {}", cfg.curvature.expression),
    ];
    for f in &cfg.output.formats {
        let bytes = match f {
            MeshFormat::Obj => mesh_obj(&mesh, &header).into_bytes(),
            MeshFormat::Csv => mesh_csv(&mesh)?,
        };
        out.file(format!("mesh.{}", f.extension()), bytes);
    }
    let forms = fundamental_forms(sol, pr, cfg.analysis.grid, (0.0, cfg.analysis.check_range.1 * sol.height))?;
    out.note("boundary_omega", forms.boundary_omega());
    out.note("min_interior_omega", forms.min_interior_omega());
    out.file("forms.csv", forms_csv(&forms)?);
    Ok(())
}

fn construct(ctx: &RunContext, run_id: &str, out: &mut Products) -> Result<(), RunError> {
    let pr = problem(&ctx.config)?;
    let sol = construct_solution(&ctx.config, &pr, out)?;
    solution_checks(&sol, &pr, &ctx.config, out)?;
    write_mesh(&sol, &pr, &ctx.config, run_id, out)?;
    out.file("solution.json", serde_json::to_vec(&sol).map_err(io::Error::other)?);
    Ok(())
}

fn export(ctx: &RunContext, run_id: &str, out: &mut Products) -> Result<(), RunError> {
    let pr = problem(&ctx.config)?;
    let sol = load_or_construct(ctx, &pr, out)?;
    write_mesh(&sol, &pr, &ctx.config, run_id, out)
}

fn load_samples(ctx: &RunContext, path: &Path) -> Result<GraphSamples, RunError> {
    let cfg = &ctx.config;
    let path = ctx.base_dir.join(path);
    let bytes = fs::read(&path)?;
    let model = make_space_form(cfg.space_form.c, cfg.space_form.chart)?;
    read_samples(&bytes, model).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))
}

fn verify(ctx: &RunContext, out: &mut Products) -> Result<(), RunError> {
    let cfg = &ctx.config;
    let pr = problem(cfg)?;
    let Some(path) = &cfg.analysis.samples else {
        let sol = load_or_construct(ctx, &pr, out)?;
        return solution_checks(&sol, &pr, cfg, out);
    };
    let mut g = load_samples(ctx, path)?;
    let estimated = g.iter().any(|s| s.hess.is_none());
    if estimated {
        g.complete_derivatives(cfg.analysis.knn)?;
    }
    out.note("samples", g.len());
    out.note("derivatives_estimated", estimated);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "z", "residual", "residual_normalized", "K", "K_prescribed"])
        .map_err(io::Error::from)?;
    let (mut worst, mut worst_raw, mut kdev) = (0.0f64, 0.0f64, 0.0f64);
    for s in g.iter() {
        let j = s.jet().ok_or_else(|| RunError::Input("sample without derivatives".into()))?;
        let co = pr.coefficients(&j.state)?;
        let res = residual(&j, &co);
        let norm = res.abs() / (1.0 + co.e.abs());
        let k = graph_curvature(&g.model, &j)?;
        let kp = pr.curvature.eval(s.x, s.y, s.z)?;
        worst = worst.max(norm);
        worst_raw = worst_raw.max(res.abs());
        kdev = kdev.max((k - kp).abs() / kp.abs());
        let row = [s.x, s.y, s.z, res, norm, k, kp];
        w.write_record(row.iter().map(|x| format!("{x:?}"))).map_err(io::Error::from)?;
    }
    out.note("max_raw_residual", worst_raw);
    out.file("verify.csv", w.into_inner().map_err(|e| e.into_error())?);
    out.checks.push(Check::at_most("equation_residual", worst, cfg.analysis.residual_tolerance));
    out.checks.push(Check::at_most("curvature_deviation", kdev, cfg.analysis.curvature_tolerance));
    Ok(())
}

fn classify(ctx: &RunContext, out: &mut Products) -> Result<(), RunError> {
    let cfg = &ctx.config;
    let g = match &cfg.analysis.samples {
        Some(path) => load_samples(ctx, path)?,
        None => {
            let pr = problem(cfg)?;
            let sol = load_or_construct(ctx, &pr, out)?;
            let top = cfg.analysis.check_range.1 * sol.height;
            let rows: Vec<f64> = (0..cfg.analysis.rows).map(|k| top / 2f64.powi(k as i32)).collect();
            samples_from_solution(&sol, &pr, &rows, cfg.analysis.grid.0)?
        }
    };
    let rep = classify_singularity(&g, &cfg.analysis.classifier())?;
    out.note("verdict", rep.verdict.to_string());
    out.note("reason", rep.reason.clone());
    out.note("inf_nu", rep.inf_nu);
    if let Some(want) = cfg.analysis.expect {
        out.note("expected_verdict", want.to_string());
        out.checks.push(Check {
            name: "verdict_matches".into(),
            value: (rep.verdict != want) as u8 as f64,
            tolerance: 0.0,
            pass: rep.verdict == want,
        });
    }
    out.file("classification.json", serde_json::to_vec_pretty(&rep).map_err(io::Error::other)?);
    Ok(())
}

fn sample(ctx: &RunContext, out: &mut Products) -> Result<(), RunError> {
    let cfg = &ctx.config;
    let s = &cfg.samples;
    let model = make_space_form(cfg.space_form.c, cfg.space_form.chart)?;
    let kind = s.model.ok_or_else(|| RunError::Input("[samples] model is required".into()))?;
    let g = match kind {
        SampleModel::Horosphere => radial_samples(model, &Horosphere, &s.radii, s.n_theta, s.derivatives),
        SampleModel::SphereCap => radial_samples(model, &SphereCap(s.parameter), &s.radii, s.n_theta, s.derivatives),
        SampleModel::Paraboloid => radial_samples(model, &Paraboloid(s.parameter), &s.radii, s.n_theta, s.derivatives),
        SampleModel::PeakedSphere => {
            radial_samples(model, &PeakedSphere(s.parameter), &s.radii, s.n_theta, s.derivatives)
        }
    }?;
    out.note("model", kind.name());
    out.note("samples", g.len());
    out.file("samples.csv", write_samples(&g)?);
    Ok(())
}
