use serde::Serialize;

use super::{integrate_q_abs_q, srvt, QMap};
use crate::diffeo::DiffeoNet;
use crate::error::{Error, Result};
use crate::geometry::{node, write_curve_csv, write_surface_csv, SampledCurve, SampledSurface, DEGENERACY_TOL};

/// `n` uniform values from 0 to 1; the default path has 11.
pub fn default_taus(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| node(i, n)).collect(),
    }
}

/// `c o phi` on the curve's grid: the curve's spline evaluated at the warped
/// nodes.
pub fn compose_curve(curve: &SampledCurve, net: &DiffeoNet) -> Result<SampledCurve> {
    let k = curve.len();
    let xs: Vec<f64> = (0..k).map(|i| node(i, k)).collect();
    let (warped, _) = net.eval_curve_many(&xs)?;
    let spline = curve.interpolant();
    let d = curve.dim();
    let mut values = vec![0.0; k * d];
    let mut deriv = vec![0.0; d];
    for (i, x) in warped.iter().enumerate() {
        spline.eval(*x, &mut values[i * d..(i + 1) * d], &mut deriv);
    }
    SampledCurve::new(d, values)
}

/// `f o phi` on the surface's grid via its bicubic interpolant.
pub fn compose_surface(surface: &SampledSurface, net: &DiffeoNet) -> Result<SampledSurface> {
    let k = surface.size();
    let ps: Vec<[f64; 2]> = (0..k * k).map(|idx| [node(idx % k, k), node(idx / k, k)]).collect();
    let (warped, _) = net.eval_surface_many(&ps)?;
    let interp = surface.interpolant();
    let values = warped
        .iter()
        .map(|p| {
            let v = interp.value(p[0], p[1]);
            [v[0], v[1], v[2]]
        })
        .collect();
    SampledSurface::new(k, values)
}

/// Shapes that can be reparametrized, interpolated and written to CSV.
pub trait Shape: Sized {
    fn compose(&self, net: &DiffeoNet) -> Result<Self>;
    /// `tau * self + (1 - tau) * other`.
    fn lerp(&self, other: &Self, tau: f64) -> Result<Self>;
    fn to_csv(&self) -> Result<Vec<u8>>;
}

impl Shape for SampledCurve {
    fn compose(&self, net: &DiffeoNet) -> Result<Self> {
        compose_curve(self, net)
    }

    fn lerp(&self, other: &Self, tau: f64) -> Result<Self> {
        SampledCurve::lerp(self, other, tau)
    }

    fn to_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_curve_csv(self, &mut buf)?;
        Ok(buf)
    }
}

impl Shape for SampledSurface {
    fn compose(&self, net: &DiffeoNet) -> Result<Self> {
        compose_surface(self, net)
    }

    fn lerp(&self, other: &Self, tau: f64) -> Result<Self> {
        SampledSurface::lerp(self, other, tau)
    }

    fn to_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_surface_csv(self, &mut buf)?;
        Ok(buf)
    }
}

/// `tau -> R^{-1}(tau R(c1) + (1 - tau) R(c2))`.
pub fn geodesic_curves(c1: &SampledCurve, c2: &SampledCurve, taus: &[f64]) -> Result<Vec<SampledCurve>> {
    if c1.len() != c2.len() || c1.dim() != c2.dim() {
        return Err(Error::GridMismatch(format!(
            "{} nodes (dim {}) vs {} nodes (dim {})",
            c1.len(),
            c1.dim(),
            c2.len(),
            c2.dim()
        )));
    }
    let (q1, q2) = (srvt(c1)?, srvt(c2)?);
    taus.iter().map(|&tau| geodesic_point(&q1, &q2, tau)).collect()
}

fn geodesic_point(q1: &QMap, q2: &QMap, tau: f64) -> Result<SampledCurve> {
    let d = q1.dim();
    let mut q = Vec::with_capacity(q1.values().len());
    for node in 0..q1.n_points() {
        let start = q.len();
        q.extend(q1.point(node).iter().zip(q2.point(node)).map(|(a, b)| tau * a + (1.0 - tau) * b));
        let n = q[start..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if n <= DEGENERACY_TOL {
            return Err(Error::VanishingCombination { tau, node });
        }
    }
    integrate_q_abs_q(q1.grid_size(), d, &q)
}

/// `tau -> tau f1 + (1 - tau) (f2 o phi)` on the common grid.
pub fn lerp_after_reparam<S: Shape>(f1: &S, f2: &S, phi: &DiffeoNet, taus: &[f64]) -> Result<Vec<S>> {
    let warped = f2.compose(phi)?;
    taus.iter().map(|&tau| f1.lerp(&warped, tau)).collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    taus: &'a [f64],
    files: &'a [String],
}

/// CSV files `{prefix}_{i:03}.csv` for a path, plus `{prefix}_manifest.json`
/// listing the tau values and file names. Returned as `(name, contents)`.
pub fn path_files<S: Shape>(prefix: &str, taus: &[f64], shapes: &[S]) -> Result<Vec<(String, Vec<u8>)>> {
    if taus.len() != shapes.len() {
        return Err(Error::Dimension { expected: taus.len(), found: shapes.len() });
    }
    let mut out = Vec::with_capacity(shapes.len() + 1);
    let mut names = Vec::with_capacity(shapes.len());
    for (i, s) in shapes.iter().enumerate() {
        let name = format!("{prefix}_{i:03}.csv");
        out.push((name.clone(), s.to_csv()?));
        names.push(name);
    }
    let manifest = serde_json::to_vec_pretty(&Manifest { taus, files: &names })?;
    out.push((format!("{prefix}_manifest.json"), manifest));
    Ok(out)
}
