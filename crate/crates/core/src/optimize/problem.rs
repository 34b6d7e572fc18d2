use std::f64::consts::PI;

use rayon::prelude::*;

use crate::diffeo::{det, CurveTrace, DiffeoNet, FieldTable, SineTable, SurfaceTrace};
use crate::error::{Error, Result};
use crate::geometry::{node, BicubicConvolution, Border, CubicSpline};
use crate::transforms::QMap;

/// Points per parallel work unit. Partial sums are combined in chunk order,
/// so results do not depend on the thread count.
const CHUNK: usize = 256;

/// `phi'` (or `det J_phi`) below this cannot be differentiated through the
/// square root.
pub const SINGULAR_TOL: f64 = 1e-10;

/// A discrete matching loss `E(W) = mean_x |q1(x) - sqrt(J_phi(x)) r(phi(x))|^2`.
pub trait LossProblem: Sync {
    /// Domain dimension (1 for curves, 2 for surfaces).
    fn domain_dim(&self) -> usize;

    fn n_points(&self) -> usize;

    fn loss(&self, net: &DiffeoNet) -> Result<f64>;

    /// Loss and its gradient with respect to the flattened weights.
    fn loss_grad(&self, net: &DiffeoNet) -> Result<(f64, Vec<f64>)>;
}

fn check_net(net: &DiffeoNet, dim: usize) -> Result<()> {
    if net.dim() != dim {
        return Err(Error::Dimension { expected: dim, found: net.dim() });
    }
    net.check_feasible()
}

fn check_pair(q1: &QMap, q2: &QMap, dim: usize) -> Result<()> {
    if q1.kind() != q2.kind() {
        return Err(Error::GridMismatch(format!(
            "transforms differ: {} vs {}",
            q1.kind().name(),
            q2.kind().name()
        )));
    }
    if q1.kind().domain_dim() != dim {
        return Err(Error::Dimension { expected: dim, found: q1.kind().domain_dim() });
    }
    if q1.dim() != q2.dim() {
        return Err(Error::Dimension { expected: q1.dim(), found: q2.dim() });
    }
    Ok(())
}

/// Sum per-chunk `(loss, grad)` results in chunk order.
fn reduce(parts: Vec<Result<(f64, Vec<f64>)>>, n_params: usize) -> Result<(f64, Vec<f64>)> {
    let mut loss = 0.0;
    let mut grad = vec![0.0; n_params];
    for part in parts {
        let (l, g) = part?;
        loss += l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    Ok((loss, grad))
}

/// Curve matching: `q1` sampled at the points, `r` a cubic spline of `q2`.
#[derive(Debug, Clone)]
pub struct CurveProblem {
    dim: usize,
    points: Vec<f64>,
    targets: Vec<f64>,
    r: CubicSpline,
}

impl CurveProblem {
    /// Points are the grid of `q1`.
    pub fn new(q1: &QMap, q2: &QMap) -> Result<Self> {
        check_pair(q1, q2, 1)?;
        let k = q1.grid_size();
        Ok(Self {
            dim: q1.dim(),
            points: (0..k).map(|i| node(i, k)).collect(),
            targets: q1.values().to_vec(),
            r: q2.to_curve()?.interpolant(),
        })
    }

    /// Points chosen freely in [0, 1]; targets come from the spline of `q1`.
    pub fn from_points(q1: &QMap, q2: &QMap, points: Vec<f64>) -> Result<Self> {
        check_pair(q1, q2, 1)?;
        if points.is_empty() || points.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidParameter("sample points must be nonempty and lie in [0, 1]".into()));
        }
        let s1 = q1.to_curve()?.interpolant();
        let targets = points.iter().flat_map(|&x| s1.value(x)).collect();
        Ok(Self { dim: q1.dim(), points, targets, r: q2.to_curve()?.interpolant() })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn value_dim(&self) -> usize {
        self.dim
    }

    fn chunk(&self, net: &DiffeoNet, start: usize, end: usize, want_grad: bool) -> Result<(f64, Vec<f64>)> {
        let d = self.dim;
        let m = net.layer_size();
        let mut table = SineTable::new(m);
        let mut trace = CurveTrace::default();
        let mut rv = vec![0.0; d];
        let mut rd = vec![0.0; d];
        let mut grad = if want_grad { vec![0.0; net.n_params()] } else { Vec::new() };
        let mut loss = 0.0;
        for idx in start..end {
            net.trace_curve_into(self.points[idx], &mut table, &mut trace);
            let phi = trace.value();
            let p = trace.derivative();
            self.r.eval(phi, &mut rv, &mut rd);
            let s = p.sqrt();
            let t = &self.targets[idx * d..(idx + 1) * d];
            let (mut e_r, mut e_rd) = (0.0, 0.0);
            for c in 0..d {
                let e = t[c] - s * rv[c];
                loss += e * e;
                e_r += e * rv[c];
                e_rd += e * rd[c];
            }
            if !want_grad {
                continue;
            }
            if p < SINGULAR_TOL {
                return Err(Error::NearSingularDerivative { sample: idx, value: p });
            }
            // adjoints of phi(x) and of the derivative product
            let mut a = -2.0 * s * e_rd;
            let c = -s * e_r;
            for l in (0..net.n_layers()).rev() {
                let dl = trace.derivs[l];
                table.fill(trace.points[l]);
                let cd = c / dl;
                let g = &mut grad[l * m..(l + 1) * m];
                for n in 0..m {
                    let kpi = (n + 1) as f64 * PI;
                    g[n] += a * table.sin[n] / kpi + cd * table.cos[n];
                }
                a = a * dl + cd * trace.seconds[l];
            }
        }
        Ok((loss, grad))
    }

    fn evaluate(&self, net: &DiffeoNet, want_grad: bool) -> Result<(f64, Vec<f64>)> {
        check_net(net, 1)?;
        let n = self.points.len();
        let parts: Vec<_> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| self.chunk(net, c * CHUNK, ((c + 1) * CHUNK).min(n), want_grad))
            .collect();
        let (loss, mut grad) = reduce(parts, if want_grad { net.n_params() } else { 0 })?;
        let scale = 1.0 / n as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        Ok((loss * scale, grad))
    }
}

impl LossProblem for CurveProblem {
    fn domain_dim(&self) -> usize {
        1
    }

    fn n_points(&self) -> usize {
        self.points.len()
    }

    fn loss(&self, net: &DiffeoNet) -> Result<f64> {
        Ok(self.evaluate(net, false)?.0)
    }

    fn loss_grad(&self, net: &DiffeoNet) -> Result<(f64, Vec<f64>)> {
        self.evaluate(net, true)
    }
}

/// Surface matching: `q1` sampled at the points, `r` a bicubic interpolant
/// of `q2` with extrapolated borders.
#[derive(Debug, Clone)]
pub struct SurfaceProblem {
    dim: usize,
    points: Vec<[f64; 2]>,
    targets: Vec<f64>,
    r: BicubicConvolution,
}

impl SurfaceProblem {
    /// Points are the `K x K` grid of `q1`.
    pub fn new(q1: &QMap, q2: &QMap) -> Result<Self> {
        check_pair(q1, q2, 2)?;
        let k = q1.grid_size();
        let r = BicubicConvolution::new(q2.grid_size(), q2.grid_size(), q2.dim(), q2.values().to_vec(), Border::Extrapolate)?;
        Ok(Self {
            dim: q1.dim(),
            points: (0..k * k).map(|idx| [node(idx % k, k), node(idx / k, k)]).collect(),
            targets: q1.values().to_vec(),
            r,
        })
    }

    /// Points chosen freely in [0, 1]^2; targets come from the interpolant
    /// of `q1`.
    pub fn from_points(q1: &QMap, q2: &QMap, points: Vec<[f64; 2]>) -> Result<Self> {
        check_pair(q1, q2, 2)?;
        if points.is_empty() || points.iter().flatten().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidParameter("sample points must be nonempty and lie in [0, 1]^2".into()));
        }
        let b1 = BicubicConvolution::new(q1.grid_size(), q1.grid_size(), q1.dim(), q1.values().to_vec(), Border::Extrapolate)?;
        let targets = points.iter().flat_map(|p| b1.value(p[0], p[1])).collect();
        let r = BicubicConvolution::new(q2.grid_size(), q2.grid_size(), q2.dim(), q2.values().to_vec(), Border::Extrapolate)?;
        Ok(Self { dim: q1.dim(), points, targets, r })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    fn chunk(&self, net: &DiffeoNet, start: usize, end: usize, want_grad: bool) -> Result<(f64, Vec<f64>)> {
        let crate::diffeo::Basis::Tangent(basis) = net.basis() else {
            return Err(Error::Dimension { expected: 2, found: 1 });
        };
        let d = self.dim;
        let m = net.layer_size();
        let mut table = FieldTable::new(basis);
        let mut trace = SurfaceTrace::default();
        let (mut rv, mut rx, mut ry) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
        let mut grad = if want_grad { vec![0.0; net.n_params()] } else { Vec::new() };
        let mut loss = 0.0;
        for idx in start..end {
            net.trace_surface_into(self.points[idx], &mut table, &mut trace);
            let phi = trace.value();
            let jac = det(&trace.jacobian());
            self.r.eval(phi[0], phi[1], &mut rv, &mut rx, &mut ry);
            let s = jac.max(0.0).sqrt();
            let t = &self.targets[idx * d..(idx + 1) * d];
            let (mut e_r, mut e_rx, mut e_ry) = (0.0, 0.0, 0.0);
            for c in 0..d {
                let e = t[c] - s * rv[c];
                loss += e * e;
                e_r += e * rv[c];
                e_rx += e * rx[c];
                e_ry += e * ry[c];
            }
            if !want_grad {
                continue;
            }
            if jac < SINGULAR_TOL {
                return Err(Error::NearSingularDerivative { sample: idx, value: jac });
            }
            let mut a = [-2.0 * s * e_rx, -2.0 * s * e_ry];
            let c = -s * e_r;
            for l in (0..net.n_layers()).rev() {
                let jl = &trace.jacobians[l];
                let local = &trace.locals[l];
                let dl = det(jl);
                let inv = [[jl[1][1] / dl, -jl[0][1] / dl], [-jl[1][0] / dl, jl[0][0] / dl]];
                let p = trace.points[l];
                table.fill(p[0], p[1]);
                let g = &mut grad[l * m..(l + 1) * m];
                for (gn, ev) in g.iter_mut().zip(&table.evals) {
                    let r = ev.component;
                    // a . F_n + c tr(J^-1 DF_n); DF_n has a single nonzero row r
                    *gn += a[r] * ev.value + c * (inv[0][r] * ev.grad[0] + inv[1][r] * ev.grad[1]);
                }
                let mut next = [0.0; 2];
                for (mm, nx) in next.iter_mut().enumerate() {
                    let mut tr = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            tr += inv[j][i] * local.djac[mm][i][j];
                        }
                    }
                    *nx = jl[0][mm] * a[0] + jl[1][mm] * a[1] + c * tr;
                }
                a = next;
            }
        }
        Ok((loss, grad))
    }

    fn evaluate(&self, net: &DiffeoNet, want_grad: bool) -> Result<(f64, Vec<f64>)> {
        check_net(net, 2)?;
        let n = self.points.len();
        let parts: Vec<_> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| self.chunk(net, c * CHUNK, ((c + 1) * CHUNK).min(n), want_grad))
            .collect();
        let (loss, mut grad) = reduce(parts, if want_grad { net.n_params() } else { 0 })?;
        let scale = 1.0 / n as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        Ok((loss * scale, grad))
    }
}

impl LossProblem for SurfaceProblem {
    fn domain_dim(&self) -> usize {
        2
    }

    fn n_points(&self) -> usize {
        self.points.len()
    }

    fn loss(&self, net: &DiffeoNet) -> Result<f64> {
        Ok(self.evaluate(net, false)?.0)
    }

    fn loss_grad(&self, net: &DiffeoNet) -> Result<(f64, Vec<f64>)> {
        self.evaluate(net, true)
    }
}

/// Central-difference gradient of `problem.loss` with step `h`.
pub fn finite_difference_gradient<P: LossProblem + ?Sized>(problem: &P, net: &DiffeoNet, h: f64) -> Result<Vec<f64>> {
    let w = net.flat_weights();
    let mut probe = net.clone();
    let mut out = Vec::with_capacity(w.len());
    for i in 0..w.len() {
        let mut wp = w.clone();
        wp[i] += h;
        probe.set_flat_weights(&wp)?;
        let fp = problem.loss(&probe)?;
        wp[i] -= 2.0 * h;
        probe.set_flat_weights(&wp)?;
        let fm = problem.loss(&probe)?;
        out.push((fp - fm) / (2.0 * h));
    }
    Ok(out)
}

/// `max |a - n| / max(||n||_inf, floor)`.
pub fn gradient_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    let scale = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(floor);
    analytic.iter().zip(numeric).map(|(a, n)| (a - n).abs()).fold(0.0, f64::max) / scale
}
