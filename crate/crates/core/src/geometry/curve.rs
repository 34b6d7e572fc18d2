use super::{node, uniform_derivative, CubicSpline, DEGENERACY_TOL, MIN_NODES};
use crate::error::{Error, Result};

/// Samples of a curve `[0, 1] -> R^d` at `K` uniformly spaced parameters
/// including both endpoints. Values are stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    dim: usize,
    values: Vec<f64>,
}

impl SampledCurve {
    /// Build from node-major values (`K * dim` entries).
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("curve dimension must be at least 1".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::InvalidGrid(format!(
                "{} values do not split into points of dimension {dim}",
                values.len()
            )));
        }
        let k = values.len() / dim;
        if k < MIN_NODES {
            return Err(Error::InvalidGrid(format!("curve needs at least {MIN_NODES} nodes, got {k}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("curve samples must be finite".into()));
        }
        Ok(Self { dim, values })
    }

    /// Sample `f` at `k` uniform nodes.
    pub fn from_fn<F, V>(k: usize, dim: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> V,
        V: AsRef<[f64]>,
    {
        if k < MIN_NODES {
            return Err(Error::InvalidGrid(format!("curve needs at least {MIN_NODES} nodes, got {k}")));
        }
        let mut values = Vec::with_capacity(k * dim);
        for i in 0..k {
            let p = f(node(i, k));
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::Dimension { expected: dim, found: p.len() });
            }
            values.extend_from_slice(p);
        }
        Self::new(dim, values)
    }

    /// Build from explicit parameter nodes, which must be the uniform grid on
    /// [0, 1] to within 1e-12.
    pub fn from_nodes(nodes: &[f64], dim: usize, values: Vec<f64>) -> Result<Self> {
        let curve = Self::new(dim, values)?;
        if nodes.len() != curve.len() {
            return Err(Error::InvalidGrid(format!(
                "{} parameter nodes for {} points",
                nodes.len(),
                curve.len()
            )));
        }
        check_uniform_nodes(nodes)?;
        Ok(curve)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.len() - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        node(k, self.len())
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Finite-difference derivative `c'(t_k)`: central in the interior,
    /// second-order one-sided at the ends.
    pub fn derivative(&self) -> SampledCurve {
        let (n, d, h) = (self.len(), self.dim, self.spacing());
        let mut out = vec![0.0; n * d];
        for k in 0..n {
            for c in 0..d {
                out[k * d + c] = uniform_derivative(n, h, k, |i| self.values[i * d + c]);
            }
        }
        SampledCurve { dim: d, values: out }
    }

    /// Euclidean norm of `c'` at each node.
    pub fn speeds(&self) -> Vec<f64> {
        let der = self.derivative();
        (0..der.len()).map(|k| norm(der.point(k))).collect()
    }

    /// Fails with [`Error::DegenerateCurve`] at the first node where
    /// `|c'| <= 1e-12`.
    pub fn check_immersion(&self) -> Result<()> {
        for (node, speed) in self.speeds().into_iter().enumerate() {
            if speed <= DEGENERACY_TOL {
                return Err(Error::DegenerateCurve { node, speed });
            }
        }
        Ok(())
    }

    /// Translate so that the first sample sits at the origin.
    pub fn translated_to_origin(&self) -> SampledCurve {
        let origin = self.point(0).to_vec();
        let values = self
            .values
            .chunks(self.dim)
            .flat_map(|p| p.iter().zip(&origin).map(|(v, o)| v - o))
            .collect();
        SampledCurve { dim: self.dim, values }
    }

    /// Natural cubic spline through the samples.
    pub fn interpolant(&self) -> CubicSpline {
        CubicSpline::new(self.len(), self.dim, self.values.clone())
            .expect("validated curve always yields a spline")
    }

    /// Pointwise `tau * self + (1 - tau) * other`.
    pub fn lerp(&self, other: &SampledCurve, tau: f64) -> Result<SampledCurve> {
        if self.len() != other.len() || self.dim != other.dim {
            return Err(Error::GridMismatch(format!(
                "{}x{} vs {}x{}",
                self.len(),
                self.dim,
                other.len(),
                other.dim
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| tau * a + (1.0 - tau) * b)
            .collect();
        Ok(SampledCurve { dim: self.dim, values })
    }

    /// Sup-norm distance between two curves on the same grid.
    pub fn max_abs_diff(&self, other: &SampledCurve) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_uniform_nodes(nodes: &[f64]) -> Result<()> {
    let n = nodes.len();
    for (k, &t) in nodes.iter().enumerate() {
        let expected = node(k, n);
        if (t - expected).abs() > 1e-12 {
            return Err(Error::InvalidGrid(format!(
                "node {k} is {t}, expected {expected} on a uniform grid over [0, 1]"
            )));
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
