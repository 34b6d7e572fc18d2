use super::{node, uniform_derivative, BicubicConvolution, Border, DEGENERACY_TOL, MIN_NODES};
use crate::error::{Error, Result};

/// Samples of a surface `[0, 1]^2 -> R^3` on a `K x K` tensor grid.
///
/// Sample `(i, j)` sits at `(x_i, y_j)` and is stored at index `j * K + i`
/// (x varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSurface {
    k: usize,
    values: Vec<[f64; 3]>,
}

/// First partial derivatives on the grid, same layout as the surface.
#[derive(Debug, Clone)]
pub struct Partials {
    pub fx: Vec<[f64; 3]>,
    pub fy: Vec<[f64; 3]>,
}

/// Area factor `|f_x x f_y|` and unit normals. A normal is `None` where the
/// area factor is at or below the degeneracy tolerance.
#[derive(Debug, Clone)]
pub struct AreaField {
    pub factor: Vec<f64>,
    pub normals: Vec<Option<[f64; 3]>>,
    /// `f_x x f_y` (unnormalized).
    pub cross: Vec<[f64; 3]>,
}

impl SampledSurface {
    pub fn new(k: usize, values: Vec<[f64; 3]>) -> Result<Self> {
        if k < MIN_NODES {
            return Err(Error::InvalidGrid(format!("surface needs at least {MIN_NODES} nodes per axis, got {k}")));
        }
        if values.len() != k * k {
            return Err(Error::InvalidGrid(format!("expected {} samples for a {k}x{k} grid, got {}", k * k, values.len())));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("surface samples must be finite".into()));
        }
        Ok(Self { k, values })
    }

    pub fn from_fn(k: usize, f: impl Fn(f64, f64) -> [f64; 3]) -> Result<Self> {
        if k < MIN_NODES {
            return Err(Error::InvalidGrid(format!("surface needs at least {MIN_NODES} nodes per axis, got {k}")));
        }
        let mut values = Vec::with_capacity(k * k);
        for j in 0..k {
            for i in 0..k {
                values.push(f(node(i, k), node(j, k)));
            }
        }
        Self::new(k, values)
    }

    /// Nodes per axis.
    pub fn size(&self) -> usize {
        self.k
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.k - 1) as f64
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.k + i
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [node(i, self.k), node(j, self.k)]
    }

    pub fn at(&self, i: usize, j: usize) -> [f64; 3] {
        self.values[j * self.k + i]
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    /// `f_x` and `f_y` by second-order stencils along each axis.
    pub fn partials(&self) -> Partials {
        let (k, h) = (self.k, self.spacing());
        let mut fx = vec![[0.0; 3]; k * k];
        let mut fy = vec![[0.0; 3]; k * k];
        for j in 0..k {
            for i in 0..k {
                for c in 0..3 {
                    fx[j * k + i][c] = uniform_derivative(k, h, i, |s| self.values[j * k + s][c]);
                    fy[j * k + i][c] = uniform_derivative(k, h, j, |s| self.values[s * k + i][c]);
                }
            }
        }
        Partials { fx, fy }
    }

    /// Area factor and unit normal at every node.
    ///
    /// Fails with [`Error::DegenerateSurface`] if the area factor is at or
    /// below 1e-12 at an interior node; boundary nodes only log a warning.
    pub fn area_factor(&self) -> Result<AreaField> {
        let Partials { fx, fy } = self.partials();
        let k = self.k;
        let mut factor = Vec::with_capacity(k * k);
        let mut normals = Vec::with_capacity(k * k);
        let mut crosses = Vec::with_capacity(k * k);
        let mut boundary_degenerate = 0usize;
        for j in 0..k {
            for i in 0..k {
                let idx = j * k + i;
                let n = cross(fx[idx], fy[idx]);
                let a = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
                if a <= DEGENERACY_TOL {
                    let interior = i > 0 && j > 0 && i < k - 1 && j < k - 1;
                    if interior {
                        return Err(Error::DegenerateSurface { i, j, area: a });
                    }
                    boundary_degenerate += 1;
                    normals.push(None);
                } else {
                    normals.push(Some([n[0] / a, n[1] / a, n[2] / a]));
                }
                factor.push(a);
                crosses.push(n);
            }
        }
        if boundary_degenerate > 0 {
            log::warn!("surface area factor vanishes at {boundary_degenerate} boundary node(s)");
        }
        Ok(AreaField { factor, normals, cross: crosses })
    }

    /// Bicubic-convolution interpolant of the samples.
    pub fn interpolant(&self) -> BicubicConvolution {
        let flat = self.values.iter().flatten().copied().collect();
        BicubicConvolution::new(self.k, self.k, 3, flat, Border::Extrapolate)
            .expect("validated surface always yields an interpolant")
    }

    pub fn lerp(&self, other: &SampledSurface, tau: f64) -> Result<SampledSurface> {
        if self.k != other.k {
            return Err(Error::GridMismatch(format!("{0}x{0} vs {1}x{1}", self.k, other.k)));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| std::array::from_fn(|c| tau * a[c] + (1.0 - tau) * b[c]))
            .collect();
        Ok(SampledSurface { k: self.k, values })
    }

    pub fn max_abs_diff(&self, other: &SampledSurface) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
