//! Continuous evaluators built from uniform grid samples.
//!
//! Curves use a natural cubic spline, surfaces use Keys' cubic convolution
//! (`a = -0.5`) applied along both axes. Both provide first derivatives
//! everywhere on the closed domain and reproduce the samples at the nodes.

use super::{locate, MIN_NODES};
use crate::error::{Error, Result};

/// Natural cubic spline through vector-valued samples on a uniform grid.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    n: usize,
    dim: usize,
    h: f64,
    values: Vec<f64>,
    /// Second derivatives at the nodes, node-major like `values`.
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(n: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if n < MIN_NODES || dim == 0 || values.len() != n * dim {
            return Err(Error::InvalidGrid(format!(
                "spline needs {MIN_NODES}+ nodes with {dim} components, got {} values",
                values.len()
            )));
        }
        let h = 1.0 / (n - 1) as f64;
        let mut second = vec![0.0; n * dim];
        // Thomas algorithm on M[i-1] + 4 M[i] + M[i+1] = rhs[i], M[0] = M[n-1] = 0.
        let m = n - 2;
        let mut diag = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for c in 0..dim {
            let y = |i: usize| values[i * dim + c];
            for r in 0..m {
                let i = r + 1;
                diag[r] = 4.0;
                rhs[r] = 6.0 * (y(i + 1) - 2.0 * y(i) + y(i - 1)) / (h * h);
            }
            for r in 1..m {
                let w = 1.0 / diag[r - 1];
                diag[r] -= w;
                rhs[r] -= w * rhs[r - 1];
            }
            let mut next = 0.0;
            for r in (0..m).rev() {
                let v = (rhs[r] - next) / diag[r];
                second[(r + 1) * dim + c] = v;
                next = v;
            }
        }
        Ok(Self { n, dim, h, values, second })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Value and derivative at `t` (clamped to [0, 1]).
    #[inline]
    pub fn eval(&self, t: f64, value: &mut [f64], deriv: &mut [f64]) {
        let (i, u) = locate(t, self.n);
        let v = 1.0 - u;
        let h = self.h;
        let d = self.dim;
        let c0 = h * h / 6.0 * (v * v * v - v);
        let c1 = h * h / 6.0 * (u * u * u - u);
        let d0 = -h / 6.0 * (3.0 * v * v - 1.0);
        let d1 = h / 6.0 * (3.0 * u * u - 1.0);
        for c in 0..d {
            let (y0, y1) = (self.values[i * d + c], self.values[(i + 1) * d + c]);
            let (m0, m1) = (self.second[i * d + c], self.second[(i + 1) * d + c]);
            value[c] = v * y0 + u * y1 + c0 * m0 + c1 * m1;
            deriv[c] = (y1 - y0) / h + d0 * m0 + d1 * m1;
        }
    }

    pub fn value(&self, t: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        let mut d = vec![0.0; self.dim];
        self.eval(t, &mut v, &mut d);
        v
    }

    pub fn derivative(&self, t: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        let mut d = vec![0.0; self.dim];
        self.eval(t, &mut v, &mut d);
        d
    }
}

/// How samples outside the grid are synthesized for the 4x4 stencil.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Border {
    /// Repeat the edge sample.
    Replicate,
    /// Keys' boundary rule `f(-1) = 3 f(0) - 3 f(1) + f(2)`, which keeps the
    /// kernel exact for quadratics up to the border.
    Extrapolate,
}

const KEYS_A: f64 = -0.5;

#[inline]
fn keys(s: f64) -> f64 {
    let s = s.abs();
    if s <= 1.0 {
        ((KEYS_A + 2.0) * s - (KEYS_A + 3.0)) * s * s + 1.0
    } else if s < 2.0 {
        ((KEYS_A * s - 5.0 * KEYS_A) * s + 8.0 * KEYS_A) * s - 4.0 * KEYS_A
    } else {
        0.0
    }
}

/// Derivative of the kernel for `s >= 0`.
#[inline]
fn keys_prime(s: f64) -> f64 {
    if s <= 1.0 {
        (3.0 * (KEYS_A + 2.0) * s - 2.0 * (KEYS_A + 3.0)) * s
    } else if s < 2.0 {
        (3.0 * KEYS_A * s - 10.0 * KEYS_A) * s + 8.0 * KEYS_A
    } else {
        0.0
    }
}

/// Stencil weights (and their derivatives in the cell offset) for nodes
/// `i - 1 ..= i + 2` at offset `u` in cell `i`.
#[inline]
fn weights(u: f64) -> ([f64; 4], [f64; 4]) {
    (
        [keys(u + 1.0), keys(u), keys(1.0 - u), keys(2.0 - u)],
        [keys_prime(u + 1.0), keys_prime(u), -keys_prime(1.0 - u), -keys_prime(2.0 - u)],
    )
}

/// Keys cubic convolution over an `nx x ny` grid of vector samples, stored
/// with x fastest: sample `(i, j)` occupies `values[(j * nx + i) * dim ..]`.
#[derive(Debug, Clone)]
pub struct BicubicConvolution {
    nx: usize,
    ny: usize,
    dim: usize,
    values: Vec<f64>,
    border: Border,
}

impl BicubicConvolution {
    pub fn new(nx: usize, ny: usize, dim: usize, values: Vec<f64>, border: Border) -> Result<Self> {
        if nx < MIN_NODES || ny < MIN_NODES || dim == 0 || values.len() != nx * ny * dim {
            return Err(Error::InvalidGrid(format!(
                "bicubic grid {nx}x{ny}x{dim} needs {MIN_NODES}+ nodes per axis and matching values"
            )));
        }
        Ok(Self { nx, ny, dim, values, border })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn border(&self) -> Border {
        self.border
    }

    /// Component `c` of the sample at integer position `(i, j)`, which may lie
    /// one node outside the grid.
    #[inline]
    fn sample(&self, i: isize, j: isize, c: usize) -> f64 {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        if i < 0 || i >= nx {
            let (e0, e1, e2) = if i < 0 { (0, 1, 2) } else { (nx - 1, nx - 2, nx - 3) };
            return match self.border {
                Border::Replicate => self.sample(e0, j, c),
                Border::Extrapolate => {
                    3.0 * self.sample(e0, j, c) - 3.0 * self.sample(e1, j, c) + self.sample(e2, j, c)
                }
            };
        }
        if j < 0 || j >= ny {
            let (e0, e1, e2) = if j < 0 { (0, 1, 2) } else { (ny - 1, ny - 2, ny - 3) };
            return match self.border {
                Border::Replicate => self.sample(i, e0, c),
                Border::Extrapolate => {
                    3.0 * self.sample(i, e0, c) - 3.0 * self.sample(i, e1, c) + self.sample(i, e2, c)
                }
            };
        }
        self.values[(j as usize * self.nx + i as usize) * self.dim + c]
    }

    /// Value and first partials at `(x, y)` in [0, 1]^2 (clamped).
    pub fn eval(&self, x: f64, y: f64, value: &mut [f64], dx: &mut [f64], dy: &mut [f64]) {
        let (i, u) = locate(x, self.nx);
        let (j, v) = locate(y, self.ny);
        let (wx, dwx) = weights(u);
        let (wy, dwy) = weights(v);
        let sx = (self.nx - 1) as f64;
        let sy = (self.ny - 1) as f64;
        let interior = i >= 1 && i + 2 < self.nx && j >= 1 && j + 2 < self.ny;
        for c in 0..self.dim {
            let (mut val, mut gx, mut gy) = (0.0, 0.0, 0.0);
            for (b, (&wyb, &dwyb)) in wy.iter().zip(&dwy).enumerate() {
                let jj = j as isize - 1 + b as isize;
                let (mut row, mut drow) = (0.0, 0.0);
                for a in 0..4 {
                    let ii = i as isize - 1 + a as isize;
                    let s = if interior {
                        self.values[(jj as usize * self.nx + ii as usize) * self.dim + c]
                    } else {
                        self.sample(ii, jj, c)
                    };
                    row += wx[a] * s;
                    drow += dwx[a] * s;
                }
                val += wyb * row;
                gx += wyb * drow;
                gy += dwyb * row;
            }
            value[c] = val;
            dx[c] = gx * sx;
            dy[c] = gy * sy;
        }
    }

    pub fn value(&self, x: f64, y: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        let (mut a, mut b) = (vec![0.0; self.dim], vec![0.0; self.dim]);
        self.eval(x, y, &mut v, &mut a, &mut b);
        v
    }
}

/// A continuous evaluator over [0, 1] or [0, 1]^2.
#[derive(Debug, Clone)]
pub enum Interpolant {
    Curve(CubicSpline),
    Surface(BicubicConvolution),
}

impl Interpolant {
    pub fn domain_dim(&self) -> usize {
        match self {
            Interpolant::Curve(_) => 1,
            Interpolant::Surface(_) => 2,
        }
    }

    pub fn value_dim(&self) -> usize {
        match self {
            Interpolant::Curve(s) => s.dim(),
            Interpolant::Surface(s) => s.dim(),
        }
    }

    /// Value at a point of the domain; `point.len()` must equal the domain
    /// dimension.
    pub fn value(&self, point: &[f64]) -> Vec<f64> {
        match self {
            Interpolant::Curve(s) => s.value(point[0]),
            Interpolant::Surface(s) => s.value(point[0], point[1]),
        }
    }
}
