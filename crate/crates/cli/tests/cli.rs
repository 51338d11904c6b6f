use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const CIRCLE: &str = "\
[curve]
alpha = (0, 0), (1, 0)
beta = (0, 0), (0, -1)
[solver]
order = 24
levels = 16
[analysis]
grid = 16 x 9
";

fn peaked(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_peaked"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("PEAKED_THREADS", t),
        None => cmd.env_remove("PEAKED_THREADS"),
    };
    cmd.output().unwrap()
}

fn run_cfg(command: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    peaked(&args, None)
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn check(m: &Value, name: &str) -> f64 {
    m["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()["value"].as_f64().unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn construct_writes_mesh_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "c.cfg", CIRCLE);
    let out = tmp.path().join("out");
    let o = run_cfg("construct", &cfg, &out, &["--seed-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["status"], 0);
    assert!(check(&m, "curvature_deviation") <= 1e-4);
    assert_eq!(check(&m, "rerun_differing_artifacts"), 0.0);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let csv = fs::read_to_string(out.join("mesh.csv")).unwrap();
    assert_eq!(csv.lines().count(), 16 * 9 + 1);
    let obj = fs::read_to_string(out.join("mesh.obj")).unwrap();
    assert!(obj.contains(m["run_id"].as_str().unwrap()));
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 16 * 8);
    assert!(out.join("solution.json").exists() && out.join("forms.csv").exists());
}

#[test]
fn reruns_and_thread_counts_give_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "c.cfg", CIRCLE);
    let dirs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    run_cfg("construct", &cfg, &dirs[0], &[]);
    run_cfg("construct", &cfg, &dirs[1], &[]);
    let args = ["construct", "--config", cfg.to_str().unwrap(), "--out", dirs[2].to_str().unwrap()];
    assert_eq!(peaked(&args, Some("1")).status.code(), Some(0));
    for f in ["mesh.csv", "mesh.obj", "solution.json", "forms.csv"] {
        let a = fs::read(dirs[0].join(f)).unwrap();
        assert_eq!(a, fs::read(dirs[1].join(f)).unwrap(), "{f}");
        assert_eq!(a, fs::read(dirs[2].join(f)).unwrap(), "{f}");
    }
    assert_eq!(manifest(&dirs[0])["run_id"], manifest(&dirs[1])["run_id"]);
    assert_eq!(manifest(&dirs[2])["threads"], 1);
}

#[test]
fn export_from_solution_file_reproduces_mesh() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "c.cfg", CIRCLE);
    let built = tmp.path().join("built");
    run_cfg("construct", &cfg, &built, &[]);
    let ex = write_cfg(tmp.path(), "e.cfg", &format!("{CIRCLE}solution = built/solution.json\n"));
    let out = tmp.path().join("ex");
    assert_eq!(run_cfg("export", &ex, &out, &[]).status.code(), Some(0));
    assert_eq!(fs::read(out.join("mesh.csv")).unwrap(), fs::read(built.join("mesh.csv")).unwrap());
    let v = run_cfg("verify", &ex, &tmp.path().join("v"), &[]);
    assert_eq!(v.status.code(), Some(0));
}

#[test]
fn horosphere_samples_verify_and_classify() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = data("horosphere.cfg");
    let v = tmp.path().join("v");
    assert_eq!(run_cfg("verify", &cfg, &v, &[]).status.code(), Some(0));
    assert!(check(&manifest(&v), "equation_residual") <= 1e-8);
    let c = tmp.path().join("c");
    assert_eq!(run_cfg("classify", &cfg, &c, &[]).status.code(), Some(0));
    assert_eq!(manifest(&c)["summary"]["verdict"], "height_diverges");
    let rep: Value = serde_json::from_slice(&fs::read(c.join("classification.json")).unwrap()).unwrap();
    assert_eq!(rep["verdict"], "height_diverges");
    assert_eq!(rep["height_direction"], -1.0);
}

#[test]
fn sample_files_classify_as_expected() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, verdict) in [("sphere_cap", "C1_extension"), ("peaked_sphere", "bounded_nonvertical")] {
        let out = tmp.path().join(name);
        assert_eq!(run_cfg("classify", &data(&format!("{name}.cfg")), &out, &[]).status.code(), Some(0));
        assert_eq!(manifest(&out)["summary"]["verdict"], verdict);
    }
}

#[test]
fn sample_command_matches_shipped_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    assert_eq!(run_cfg("sample", &data("horosphere.cfg"), &out, &[]).status.code(), Some(0));
    assert_eq!(fs::read(out.join("samples.csv")).unwrap(), fs::read(data("horosphere.csv")).unwrap());
}

#[test]
fn exit_codes_follow_the_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();

    let bad = write_cfg(t, "bad.cfg", "[solver]\norder = 2\n[curvature]\nexpression = 1+*2\n");
    let o = run_cfg("construct", &bad, &t.join("bad"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let rec: Value = serde_json::from_slice(&fs::read(t.join("bad/error.json")).unwrap()).unwrap();
    assert_eq!(rec["kind"], "input");
    let errs = rec["errors"].as_array().unwrap();
    assert_eq!(errs.len(), 2);
    assert!(errs[1].as_str().unwrap().contains("line 4, column 16"), "{errs:?}");

    let square = "[curve]\nalpha = (0, 0), (1, 0), (0, 0), (0.5, 0)\nbeta = (0, 0), (0, -1)\n";
    let o = run_cfg("construct", &write_cfg(t, "nc.cfg", square), &t.join("nc"), &[]);
    assert_eq!(o.status.code(), Some(2));

    let tall = write_cfg(t, "bu.cfg", &CIRCLE.replace("levels = 16", "levels = 16\nheight = 50"));
    let o = run_cfg("construct", &tall, &t.join("bu"), &[]);
    assert_eq!(o.status.code(), Some(3));
    let rec: Value = serde_json::from_slice(&fs::read(t.join("bu/error.json")).unwrap()).unwrap();
    assert_eq!(rec["kind"], "numerical");

    let strict = write_cfg(t, "tol.cfg", &format!("{CIRCLE}curvature_tolerance = 1e-16\n"));
    let o = run_cfg("construct", &strict, &t.join("tol"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(manifest(&t.join("tol"))["status"], 1);

    let missing = run_cfg("construct", &t.join("nope.cfg"), &t.join("nope"), &[]);
    assert_eq!(missing.status.code(), Some(2));

    let th = t.join("th");
    let args = ["construct", "--config", strict.to_str().unwrap(), "--out", th.to_str().unwrap()];
    assert_eq!(peaked(&args, Some("zero")).status.code(), Some(2));
}
