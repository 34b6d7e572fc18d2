//! Shape transforms (SRVT, Q-transforms, SRNF), the pre-shape distance and
//! interpolation paths between shapes.

mod path;

pub use path::{
    compose_curve, compose_surface, default_taus, geodesic_curves, lerp_after_reparam, path_files, Shape,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    BicubicConvolution, Border, CubicSpline, Interpolant, SampledCurve, SampledSurface, DEGENERACY_TOL,
};

/// Which transform produced a [`QMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    /// `c' / sqrt|c'|`
    Srvt,
    /// `sqrt|c'| c`
    #[serde(rename = "q")]
    QCurve,
    /// `sqrt(a_f) n_f`
    Srnf,
    /// `sqrt(a_f) f`
    #[serde(rename = "qsurf")]
    QSurface,
}

impl TransformKind {
    /// 1 for curve transforms, 2 for surface transforms.
    pub fn domain_dim(self) -> usize {
        match self {
            TransformKind::Srvt | TransformKind::QCurve => 1,
            TransformKind::Srnf | TransformKind::QSurface => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Srvt => "srvt",
            TransformKind::QCurve => "q",
            TransformKind::Srnf => "srnf",
            TransformKind::QSurface => "qsurf",
        }
    }
}

impl std::str::FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "srvt" => Ok(TransformKind::Srvt),
            "q" => Ok(TransformKind::QCurve),
            "srnf" => Ok(TransformKind::Srnf),
            "qsurf" => Ok(TransformKind::QSurface),
            other => Err(Error::InvalidParameter(format!("unknown transform {other:?} (srvt, q, srnf, qsurf)"))),
        }
    }
}

/// A transformed shape sampled on the source grid.
///
/// Curve maps hold `K` points of dimension `dim`; surface maps hold `K * K`
/// points of dimension 3 indexed `j * K + i`. Values are flattened point by
/// point.
#[derive(Debug, Clone, PartialEq)]
pub struct QMap {
    kind: TransformKind,
    k: usize,
    dim: usize,
    values: Vec<f64>,
}

impl QMap {
    /// Wrap raw samples: `k` points of dimension `dim` for curve kinds,
    /// `k * k` points of dimension 3 for surface kinds.
    pub fn from_values(kind: TransformKind, k: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        let points = if kind.domain_dim() == 1 { k } else { k * k };
        if kind.domain_dim() == 2 && dim != 3 {
            return Err(Error::Dimension { expected: 3, found: dim });
        }
        if k < crate::geometry::MIN_NODES || dim == 0 || values.len() != points * dim {
            return Err(Error::InvalidGrid(format!(
                "{} values do not fill {points} points of dimension {dim} (at least {} nodes per axis)",
                values.len(),
                crate::geometry::MIN_NODES
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("q-map samples must be finite".into()));
        }
        Ok(Self { kind, k, dim, values })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    /// Nodes per axis.
    pub fn grid_size(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn point(&self, idx: usize) -> &[f64] {
        &self.values[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Cubic spline for curve maps, bicubic convolution with extrapolated
    /// borders for surface maps.
    pub fn interpolant(&self) -> Interpolant {
        match self.kind.domain_dim() {
            1 => Interpolant::Curve(self.spline()),
            _ => Interpolant::Surface(self.bicubic()),
        }
    }

    pub(crate) fn spline(&self) -> CubicSpline {
        CubicSpline::new(self.k, self.dim, self.values.clone()).expect("q-map grid is valid")
    }

    pub(crate) fn bicubic(&self) -> BicubicConvolution {
        BicubicConvolution::new(self.k, self.k, self.dim, self.values.clone(), Border::Extrapolate)
            .expect("q-map grid is valid")
    }

    /// The samples as a curve; fails for surface maps.
    pub fn to_curve(&self) -> Result<SampledCurve> {
        if self.kind.domain_dim() != 1 {
            return Err(Error::Dimension { expected: 1, found: 2 });
        }
        SampledCurve::new(self.dim, self.values.clone())
    }

    /// The samples as a surface; fails for curve maps.
    pub fn to_surface(&self) -> Result<SampledSurface> {
        if self.kind.domain_dim() != 2 {
            return Err(Error::Dimension { expected: 2, found: 1 });
        }
        SampledSurface::new(self.k, self.values.chunks(3).map(|p| [p[0], p[1], p[2]]).collect())
    }

    fn from_curve_values(kind: TransformKind, k: usize, dim: usize, values: Vec<f64>) -> Self {
        Self { kind, k, dim, values }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn curve_speeds(curve: &SampledCurve) -> Result<(SampledCurve, Vec<f64>)> {
    let der = curve.derivative();
    let mut speeds = Vec::with_capacity(der.len());
    for node in 0..der.len() {
        let speed = norm(der.point(node));
        if speed <= DEGENERACY_TOL {
            return Err(Error::DegenerateCurve { node, speed });
        }
        speeds.push(speed);
    }
    Ok((der, speeds))
}

/// Square-root velocity transform `c' / sqrt|c'|`.
pub fn srvt(curve: &SampledCurve) -> Result<QMap> {
    let (der, speeds) = curve_speeds(curve)?;
    let d = curve.dim();
    let mut values = Vec::with_capacity(curve.len() * d);
    for (k, s) in speeds.iter().enumerate() {
        let r = s.sqrt();
        values.extend(der.point(k).iter().map(|v| v / r));
    }
    Ok(QMap::from_curve_values(TransformKind::Srvt, curve.len(), d, values))
}

/// Curve Q-transform `sqrt|c'| c`.
pub fn qmap_curve(curve: &SampledCurve) -> Result<QMap> {
    let (_, speeds) = curve_speeds(curve)?;
    let d = curve.dim();
    let mut values = Vec::with_capacity(curve.len() * d);
    for (k, s) in speeds.iter().enumerate() {
        let r = s.sqrt();
        values.extend(curve.point(k).iter().map(|v| v * r));
    }
    Ok(QMap::from_curve_values(TransformKind::QCurve, curve.len(), d, values))
}

/// Square-root normal field `sqrt(a_f) n_f = (f_x x f_y) / sqrt(a_f)`.
pub fn srnf(surface: &SampledSurface) -> Result<QMap> {
    let area = surface.area_factor()?;
    let mut values = Vec::with_capacity(3 * area.factor.len());
    for (n, a) in area.cross.iter().zip(&area.factor) {
        if *a <= DEGENERACY_TOL {
            // degenerate boundary node: the normal is undefined, sqrt(a) -> 0
            values.extend([0.0; 3]);
        } else {
            let r = a.sqrt();
            values.extend(n.iter().map(|v| v / r));
        }
    }
    Ok(QMap { kind: TransformKind::Srnf, k: surface.size(), dim: 3, values })
}

/// Surface Q-transform `sqrt(a_f) f`.
pub fn qmap_surface(surface: &SampledSurface) -> Result<QMap> {
    let area = surface.area_factor()?;
    let mut values = Vec::with_capacity(3 * area.factor.len());
    for (p, a) in surface.values().iter().zip(&area.factor) {
        let r = a.sqrt();
        values.extend(p.iter().map(|v| v * r));
    }
    Ok(QMap { kind: TransformKind::QSurface, k: surface.size(), dim: 3, values })
}

pub fn transform_curve(kind: TransformKind, curve: &SampledCurve) -> Result<QMap> {
    match kind {
        TransformKind::Srvt => srvt(curve),
        TransformKind::QCurve => qmap_curve(curve),
        other => Err(Error::InvalidParameter(format!("{} is a surface transform", other.name()))),
    }
}

pub fn transform_surface(kind: TransformKind, surface: &SampledSurface) -> Result<QMap> {
    match kind {
        TransformKind::Srnf => srnf(surface),
        TransformKind::QSurface => qmap_surface(surface),
        other => Err(Error::InvalidParameter(format!("{} is a curve transform", other.name()))),
    }
}

/// `R^{-1}(q)(x) = int_0^x q |q|` by cumulative trapezoidal quadrature.
pub fn srvt_inverse(q: &QMap) -> Result<SampledCurve> {
    if q.kind.domain_dim() != 1 {
        return Err(Error::Dimension { expected: 1, found: 2 });
    }
    integrate_q_abs_q(q.k, q.dim, &q.values)
}

pub(crate) fn integrate_q_abs_q(k: usize, dim: usize, q: &[f64]) -> Result<SampledCurve> {
    let h = 1.0 / (k - 1) as f64;
    let mut out = vec![0.0; k * dim];
    let integrand = |i: usize| {
        let p = &q[i * dim..(i + 1) * dim];
        let n = norm(p);
        p.iter().map(move |v| v * n)
    };
    let mut prev: Vec<f64> = integrand(0).collect();
    for i in 1..k {
        let cur: Vec<f64> = integrand(i).collect();
        for c in 0..dim {
            out[i * dim + c] = out[(i - 1) * dim + c] + 0.5 * h * (prev[c] + cur[c]);
        }
        prev = cur;
    }
    SampledCurve::new(dim, out)
}

/// Trapezoidal weights for `k` uniform nodes on [0, 1].
pub(crate) fn trapezoid_weights(k: usize) -> Vec<f64> {
    let h = 1.0 / (k - 1) as f64;
    let mut w = vec![h; k];
    w[0] = 0.5 * h;
    w[k - 1] = 0.5 * h;
    w
}

/// L2 distance between two q-maps of the same kind on the same grid, by
/// (tensor) trapezoidal quadrature.
pub fn preshape_dist(q1: &QMap, q2: &QMap) -> Result<f64> {
    if q1.kind != q2.kind || q1.k != q2.k || q1.dim != q2.dim {
        return Err(Error::GridMismatch(format!(
            "{} on {} nodes (dim {}) vs {} on {} nodes (dim {})",
            q1.kind.name(),
            q1.k,
            q1.dim,
            q2.kind.name(),
            q2.k,
            q2.dim
        )));
    }
    let w = trapezoid_weights(q1.k);
    let sq = |idx: usize| -> f64 {
        q1.point(idx).iter().zip(q2.point(idx)).map(|(a, b)| (a - b) * (a - b)).sum()
    };
    let total: f64 = if q1.kind.domain_dim() == 1 {
        (0..q1.k).map(|i| w[i] * sq(i)).sum()
    } else {
        let k = q1.k;
        (0..k).map(|j| w[j] * (0..k).map(|i| w[i] * sq(j * k + i)).sum::<f64>()).sum()
    };
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests;
