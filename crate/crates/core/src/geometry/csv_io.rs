//! CSV readers and writers for sampled shapes.
//!
//! Curves: header `t,v1,...,vd`, one row per node.
//! Surfaces: header `x,y,v1,v2,v3`, rows ordered with y outer and x inner.

use std::io::{Read, Write};

use super::curve::check_uniform_nodes;
use super::{node, SampledCurve, SampledSurface};
use crate::error::{Error, Result};

fn parse_field(s: &str, row: usize, col: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("row {row}, column {col}: {s:?} is not a number")))
}

fn check_header(found: &csv::StringRecord, expected: &[String]) -> Result<()> {
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::Parse(format!("expected header {:?}, found {:?}", expected.join(","), found.join(","))));
    }
    Ok(())
}

pub fn read_curve_csv(input: impl Read) -> Result<SampledCurve> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    let dim = header.len().saturating_sub(1);
    if dim == 0 {
        return Err(Error::Parse("curve CSV needs a t column and at least one value column".into()));
    }
    let expected: Vec<String> =
        std::iter::once("t".to_string()).chain((1..=dim).map(|c| format!("v{c}"))).collect();
    check_header(&header, &expected)?;
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != dim + 1 {
            return Err(Error::Parse(format!("row {} has {} fields, expected {}", r + 1, rec.len(), dim + 1)));
        }
        nodes.push(parse_field(&rec[0], r + 1, 0)?);
        for c in 0..dim {
            values.push(parse_field(&rec[c + 1], r + 1, c + 1)?);
        }
    }
    SampledCurve::from_nodes(&nodes, dim, values)
}

pub fn write_curve_csv(curve: &SampledCurve, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=curve.dim()).map(|c| format!("v{c}")));
    w.write_record(&header)?;
    for k in 0..curve.len() {
        let mut row = vec![curve.node(k).to_string()];
        row.extend(curve.point(k).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_surface_csv(input: impl Read) -> Result<SampledSurface> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let expected: Vec<String> = ["x", "y", "v1", "v2", "v3"].iter().map(|s| s.to_string()).collect();
    check_header(rdr.headers()?, &expected)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut values = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(Error::Parse(format!("row {} has {} fields, expected 5", r + 1, rec.len())));
        }
        let f: Vec<f64> = (0..5).map(|c| parse_field(&rec[c], r + 1, c)).collect::<Result<_>>()?;
        xs.push(f[0]);
        ys.push(f[1]);
        values.push([f[2], f[3], f[4]]);
    }
    let k = (values.len() as f64).sqrt().round() as usize;
    if k * k != values.len() {
        return Err(Error::InvalidGrid(format!("{} rows do not form a square grid", values.len())));
    }
    for j in 0..k {
        for i in 0..k {
            let idx = j * k + i;
            if (xs[idx] - node(i, k)).abs() > 1e-12 || (ys[idx] - node(j, k)).abs() > 1e-12 {
                return Err(Error::InvalidGrid(format!(
                    "row {} at ({}, {}) is off the uniform {k}x{k} grid (y outer, x inner)",
                    idx + 1,
                    xs[idx],
                    ys[idx]
                )));
            }
        }
    }
    if k >= 2 {
        check_uniform_nodes(&xs[..k])?;
    }
    SampledSurface::new(k, values)
}

pub fn write_surface_csv(surface: &SampledSurface, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "v1", "v2", "v3"])?;
    let k = surface.size();
    for j in 0..k {
        for i in 0..k {
            let [x, y] = surface.node(i, j);
            let p = surface.at(i, j);
            w.write_record([x, y, p[0], p[1], p[2]].iter().map(|v| v.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_roundtrip_is_exact() {
        let c = SampledCurve::from_fn(17, 3, |t| [t.sin(), t.cos() / 3.0, 1e-20 * t]).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&c, &mut buf).unwrap();
        assert!(buf.starts_with(b"t,v1,v2,v3\n"));
        let back = read_curve_csv(buf.as_slice()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn surface_roundtrip_is_exact() {
        let s = SampledSurface::from_fn(5, |x, y| [x, y, x * y / 7.0]).unwrap();
        let mut buf = Vec::new();
        write_surface_csv(&s, &mut buf).unwrap();
        let back = read_surface_csv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn malformed_curve_csv_is_rejected() {
        assert!(read_curve_csv("t,x\n0,1\n".as_bytes()).is_err());
        assert!(read_curve_csv("t,v1\n0,1\n0.5,abc\n1,2\n".as_bytes()).is_err());
        assert!(read_curve_csv("t,v1\n0,1\n0.25,1\n0.5,2\n1,2\n".as_bytes()).is_err());
        assert!(read_curve_csv("t,v1\n0,1\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn malformed_surface_csv_is_rejected() {
        assert!(read_surface_csv("x,y,z\n".as_bytes()).is_err());
        let mut s = String::from("x,y,v1,v2,v3\n");
        for j in 0..4 {
            for i in 0..4 {
                // x outer instead of y outer
                s.push_str(&format!("{},{},0,0,0\n", j as f64 / 3.0, i as f64 / 3.0));
            }
        }
        assert!(read_surface_csv(s.as_bytes()).is_err());
    }
}
