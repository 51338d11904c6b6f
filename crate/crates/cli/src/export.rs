//! Mesh and table writers. Floats are written in shortest round-trip
//! decimal form, so re-reading a CSV reproduces the values bit for bit.

use std::fmt::Write as _;
use std::io;

use peaked_core::analysis::FormsReport;
use peaked_core::SurfaceMesh;

/// Column order of [`mesh_csv`].
pub const MESH_COLUMNS: [&str; 11] =
    ["u", "v", "x", "y", "z", "p", "q", "nu", "K_prescribed", "K_computed", "residual_eq1"];

/// Wavefront OBJ with ambient positions, ambient unit normals and quad
/// faces. `header` lines are written as `#` comments.
pub fn mesh_obj(mesh: &SurfaceMesh, header: &[String]) -> String {
    let mut s = String::new();
    for h in header {
        let _ = writeln!(s, "# {h}");
    }
    let _ = writeln!(s, "# grid {} x {}", mesh.n_u, mesh.n_v);
    for p in &mesh.ambient {
        let _ = writeln!(s, "v {:?} {:?} {:?}", p[0], p[1], p[2]);
    }
    for n in &mesh.ambient_normal {
        let _ = writeln!(s, "vn {:?} {:?} {:?}", n[0], n[1], n[2]);
    }
    for f in mesh.faces() {
        let [a, b, c, d] = f.map(|i| i + 1);
        let _ = writeln!(s, "f {a}//{a} {b}//{b} {c}//{c} {d}//{d}");
    }
    s
}

/// One row per vertex in the order of [`MESH_COLUMNS`].
pub fn mesh_csv(mesh: &SurfaceMesh) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MESH_COLUMNS)?;
    for i in 0..mesh.len() {
        let (iu, iv) = (i % mesh.n_u, i / mesh.n_u);
        let p = mesh.position[i];
        let g = mesh.gradient[i];
        let row = [
            mesh.u[iu],
            mesh.v[iv],
            p[0],
            p[1],
            p[2],
            g[0],
            g[1],
            mesh.nu[i],
            mesh.k_prescribed[i],
            mesh.k_computed[i],
            mesh.residual[i],
        ];
        w.write_record(row.iter().map(|x| format!("{x:?}")))?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

/// Reads back a table written by [`mesh_csv`].
pub fn read_mesh_csv(bytes: &[u8]) -> io::Result<Vec<[f64; 11]>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != MESH_COLUMNS {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "unexpected mesh CSV header"));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            let mut row = [0.0; 11];
            for (k, cell) in rec.iter().enumerate().take(11) {
                row[k] = cell
                    .parse()
                    .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, format!("bad number `{cell}`")))?;
            }
            Ok(row)
        })
        .collect()
}

/// `ω`, `μ`, `|Q|`, `ρ` and the curvatures on the forms grid.
pub fn forms_csv(f: &FormsReport) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["u", "v", "omega", "mu", "abs_Q", "rho", "K", "K_ext"])?;
    for i in 0..f.mu.len() {
        let q = f.q[i][0].hypot(f.q[i][1]);
        let row = [f.u[i % f.n_u], f.v[i / f.n_u], f.omega[i], f.mu[i], q, f.rho[i], f.k[i], f.k_ext[i]];
        w.write_record(row.iter().map(|x| format!("{x:?}")))?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n_u: usize, n_v: usize) -> SurfaceMesh {
        let n = n_u * n_v;
        let pos: Vec<[f64; 3]> = (0..n).map(|i| [i as f64 * 0.1, 1.0 / 3.0, -(i as f64).sqrt()]).collect();
        SurfaceMesh {
            n_u,
            n_v,
            u: (0..n_u).map(|i| i as f64).collect(),
            v: (0..n_v).map(|i| i as f64 * 0.7).collect(),
            position: pos.clone(),
            gradient: vec![[0.1, 0.2]; n],
            ambient: pos,
            normal: vec![[0.0, 0.0, 1.0]; n],
            ambient_normal: vec![[0.0, 0.0, 1.0]; n],
            nu: vec![1.0; n],
            k_prescribed: vec![1.0; n],
            k_computed: vec![f64::NAN; n],
            residual: vec![1e-300; n],
        }
    }

    #[test]
    fn two_by_two_grid_has_one_face() {
        let obj = mesh_obj(&grid(2, 2), &["run abc".into()]);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(obj.lines().filter(|l| l.starts_with("vn ")).count(), 4);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 1);
        assert!(obj.starts_with("# run abc\n"));
    }

    #[test]
    fn csv_round_trips_bit_for_bit() {
        let mesh = grid(3, 4);
        let bytes = mesh_csv(&mesh).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().count(), mesh.len() + 1);
        let rows = read_mesh_csv(&bytes).unwrap();
        for (i, row) in rows.iter().enumerate() {
            for k in 0..3 {
                assert_eq!(row[2 + k].to_bits(), mesh.position[i][k].to_bits());
            }
            assert!(row[9].is_nan());
            assert_eq!(row[10], 1e-300);
        }
    }
}
