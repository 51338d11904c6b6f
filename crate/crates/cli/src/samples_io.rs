//! Graph sample files: CSV with columns `annulus, x, y, z, p, q, r, s, t`.
//! `annulus` is the nominal radius grouping the rows; the derivative
//! columns may be left empty.

use std::io;

use peaked_core::analysis::{Annulus, GraphSample, GraphSamples};
use peaked_core::WarpedModel;

const COLUMNS: [&str; 9] = ["annulus", "x", "y", "z", "p", "q", "r", "s", "t"];

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_samples(g: &GraphSamples) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS)?;
    for a in &g.annuli {
        for s in &a.samples {
            let mut row = vec![num(a.radius), num(s.x), num(s.y), num(s.z)];
            match s.grad {
                Some([p, q]) => row.extend([num(p), num(q)]),
                None => row.extend([String::new(), String::new()]),
            }
            match s.hess {
                Some(h) => row.extend(h.map(num)),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
            w.write_record(&row)?;
        }
    }
    w.into_inner().map_err(|e| e.into_error())
}

/// Parses a sample file; errors name the 1-based line.
pub fn read_samples(bytes: &[u8], model: WarpedModel) -> io::Result<GraphSamples> {
    let mut r = csv::Reader::from_reader(bytes);
    let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != COLUMNS {
        return Err(invalid(format!("sample header must be `{}`", COLUMNS.join(","))));
    }
    let mut annuli: Vec<Annulus> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let cell = |k: usize| -> io::Result<Option<f64>> {
            match rec.get(k).map(str::trim) {
                None | Some("") => Ok(None),
                Some(t) => t
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(Some)
                    .ok_or_else(|| invalid(format!("line {line}, column {}: bad number `{t}`", COLUMNS[k]))),
            }
        };
        let need = |k: usize| {
            cell(k)?.ok_or_else(|| invalid(format!("line {line}: missing {}", COLUMNS[k])))
        };
        let radius = need(0)?;
        let grad = match (cell(4)?, cell(5)?) {
            (Some(p), Some(q)) => Some([p, q]),
            (None, None) => None,
            _ => return Err(invalid(format!("line {line}: p and q must be given together"))),
        };
        let hess = match (cell(6)?, cell(7)?, cell(8)?) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            (None, None, None) => None,
            _ => return Err(invalid(format!("line {line}: r, s and t must be given together"))),
        };
        if hess.is_some() && grad.is_none() {
            return Err(invalid(format!("line {line}: second derivatives need p and q")));
        }
        let s = GraphSample { x: need(1)?, y: need(2)?, z: need(3)?, grad, hess };
        match annuli.iter_mut().find(|a| a.radius == radius) {
            Some(a) => a.samples.push(s),
            None => annuli.push(Annulus { radius, samples: vec![s] }),
        }
    }
    GraphSamples::new(model, annuli).map_err(|e| invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use peaked_core::analysis::{radial_samples, PeakedSphere};
    use peaked_core::{make_space_form, Chart};

    #[test]
    fn samples_round_trip() {
        let m = make_space_form(0, Chart::Cartesian).unwrap();
        for with in [true, false] {
            let g = radial_samples(m, &PeakedSphere(1.0), &[0.2, 0.1, 0.05], 8, with).unwrap();
            let back = read_samples(&write_samples(&g).unwrap(), m).unwrap();
            assert_eq!(back.annuli.len(), 3);
            for (a, b) in g.iter().zip(back.iter()) {
                assert_eq!((a.x, a.y, a.z, a.grad, a.hess), (b.x, b.y, b.z, b.grad, b.hess));
            }
        }
    }

    #[test]
    fn malformed_rows_name_their_line() {
        let m = make_space_form(0, Chart::Cartesian).unwrap();
        let text = "annulus,x,y,z,p,q,r,s,t\n0.1,0.1,0,0,,,,,\n0.1,0.1,zz,0,,,,,\n";
        let err = read_samples(text.as_bytes(), m).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let half = "annulus,x,y,z,p,q,r,s,t\n0.1,0.1,0,0,1,,,,\n";
        assert!(read_samples(half.as_bytes(), m).is_err());
    }
}
