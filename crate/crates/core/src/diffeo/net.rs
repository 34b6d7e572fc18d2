use super::basis::{FieldTable, LayerLocal, SineTable};
use super::feasible::{check_epsilon, FeasibleSpec, FEASIBILITY_SLACK};
use super::{Basis1D, Basis2D};
use crate::error::{Error, Result};

/// 2x2 matrix, row-major: `m[r][c]`.
pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY2: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

#[inline]
pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

#[inline]
pub fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// The basis a network's layers are expanded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Sine(Basis1D),
    Tangent(Basis2D),
}

impl Basis {
    /// Dimension of the domain, 1 or 2.
    pub fn dim(&self) -> usize {
        match self {
            Basis::Sine(_) => 1,
            Basis::Tangent(_) => 2,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Basis::Sine(b) => b.size(),
            Basis::Tangent(b) => b.size(),
        }
    }

    pub fn lipschitz_constants(&self) -> Vec<f64> {
        match self {
            Basis::Sine(b) => b.lipschitz_constants(),
            Basis::Tangent(b) => b.lipschitz_constants(),
        }
    }
}

/// Forward pass of a 1D network at one point. `points[0]` is the input,
/// `points[l + 1] = phi_l(points[l])`; `derivs[l]` and `seconds[l]` are the
/// first and second derivatives of layer `l` at `points[l]`.
#[derive(Debug, Clone, Default)]
pub struct CurveTrace {
    pub points: Vec<f64>,
    pub derivs: Vec<f64>,
    pub seconds: Vec<f64>,
}

impl CurveTrace {
    pub fn value(&self) -> f64 {
        *self.points.last().expect("trace holds the input point")
    }

    pub fn derivative(&self) -> f64 {
        self.derivs.iter().product()
    }
}

/// Forward pass of a 2D network at one point. `jacobians[l]` is
/// `I + Df_l` at `points[l]`.
#[derive(Debug, Clone, Default)]
pub struct SurfaceTrace {
    pub points: Vec<[f64; 2]>,
    pub jacobians: Vec<Mat2>,
    pub(crate) locals: Vec<LayerLocal>,
}

impl SurfaceTrace {
    pub fn value(&self) -> [f64; 2] {
        *self.points.last().expect("trace holds the input point")
    }

    /// `J_L ... J_1`.
    pub fn jacobian(&self) -> Mat2 {
        self.jacobians.iter().fold(IDENTITY2, |acc, j| mat_mul(j, &acc))
    }
}

/// A composition `phi_L o ... o phi_1` of elementary diffeomorphisms
/// `phi_l = id + sum_n w_n^l f_n`. Layer 0 is applied first.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffeoNet {
    basis: Basis,
    epsilon: f64,
    lipschitz: Vec<f64>,
    layers: Vec<Vec<f64>>,
}

impl DiffeoNet {
    /// `n_layers` zero layers: the identity map.
    pub fn identity(basis: Basis, n_layers: usize, epsilon: f64) -> Result<Self> {
        Self::from_layers(basis, epsilon, vec![vec![0.0; basis.size()]; n_layers])
    }

    /// Layers are validated for length but not for feasibility; evaluation
    /// checks feasibility.
    pub fn from_layers(basis: Basis, epsilon: f64, layers: Vec<Vec<f64>>) -> Result<Self> {
        check_epsilon(epsilon)?;
        if basis.size() == 0 {
            return Err(Error::InvalidParameter("basis must have at least one element".into()));
        }
        for layer in &layers {
            if layer.len() != basis.size() {
                return Err(Error::Dimension { expected: basis.size(), found: layer.len() });
            }
            if layer.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidParameter("weights must be finite".into()));
            }
        }
        Ok(Self { basis, epsilon, lipschitz: basis.lipschitz_constants(), layers })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    pub fn spec(&self) -> FeasibleSpec {
        FeasibleSpec::new(self.epsilon, self.lipschitz.clone()).expect("validated at construction")
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Basis functions per layer.
    pub fn layer_size(&self) -> usize {
        self.basis.size()
    }

    pub fn n_params(&self) -> usize {
        self.layers.len() * self.basis.size()
    }

    pub fn layers(&self) -> &[Vec<f64>] {
        &self.layers
    }

    pub fn layer(&self, l: usize) -> &[f64] {
        &self.layers[l]
    }

    /// Weights concatenated layer by layer.
    pub fn flat_weights(&self) -> Vec<f64> {
        self.layers.concat()
    }

    pub fn set_flat_weights(&mut self, w: &[f64]) -> Result<()> {
        if w.len() != self.n_params() {
            return Err(Error::Dimension { expected: self.n_params(), found: w.len() });
        }
        for (layer, chunk) in self.layers.iter_mut().zip(w.chunks(self.basis.size().max(1))) {
            layer.copy_from_slice(chunk);
        }
        Ok(())
    }

    pub fn set_layer(&mut self, l: usize, w: &[f64]) -> Result<()> {
        if w.len() != self.basis.size() {
            return Err(Error::Dimension { expected: self.basis.size(), found: w.len() });
        }
        self.layers[l].copy_from_slice(w);
        Ok(())
    }

    /// Insert a layer at position `index`; index 0 makes it the innermost.
    pub fn insert_layer(&mut self, index: usize, w: Vec<f64>) -> Result<()> {
        if w.len() != self.basis.size() {
            return Err(Error::Dimension { expected: self.basis.size(), found: w.len() });
        }
        self.layers.insert(index, w);
        Ok(())
    }

    pub fn weighted_sum(&self, l: usize) -> f64 {
        self.layers[l].iter().zip(&self.lipschitz).map(|(w, c)| w.abs() * c).sum()
    }

    pub fn check_layer(&self, l: usize) -> Result<()> {
        let sum = self.weighted_sum(l);
        let bound = 1.0 - self.epsilon;
        if sum > bound * (1.0 + FEASIBILITY_SLACK) {
            return Err(Error::InfeasibleLayer { layer: l, sum, bound });
        }
        Ok(())
    }

    pub fn check_feasible(&self) -> Result<()> {
        (0..self.layers.len()).try_for_each(|l| self.check_layer(l))
    }

    pub fn is_feasible(&self) -> bool {
        self.check_feasible().is_ok()
    }

    /// Project every layer onto the feasible set. Returns whether any
    /// layer changed.
    pub fn project(&mut self) -> bool {
        let spec = self.spec();
        let mut changed = false;
        for layer in &mut self.layers {
            changed |= spec.project_in_place(layer);
        }
        changed
    }

    fn sine(&self) -> Result<&Basis1D> {
        match &self.basis {
            Basis::Sine(b) => Ok(b),
            Basis::Tangent(_) => Err(Error::Dimension { expected: 1, found: 2 }),
        }
    }

    fn tangent(&self) -> Result<&Basis2D> {
        match &self.basis {
            Basis::Tangent(b) => Ok(b),
            Basis::Sine(_) => Err(Error::Dimension { expected: 2, found: 1 }),
        }
    }

    // ---- 1D ----

    /// Value and derivative of layer `l` at `x`.
    pub fn layer_eval_curve(&self, l: usize, x: f64) -> Result<(f64, f64)> {
        let b = self.sine()?;
        self.check_layer(l)?;
        let mut table = SineTable::new(b.size());
        let (v, d, _) = layer_1d(&self.layers[l], x, &mut table);
        Ok((v, d))
    }

    /// `(phi(x), phi'(x))`.
    pub fn eval_curve(&self, x: f64) -> Result<(f64, f64)> {
        let t = self.trace_curve(x)?;
        Ok((t.value(), t.derivative()))
    }

    pub fn trace_curve(&self, x: f64) -> Result<CurveTrace> {
        let b = self.sine()?;
        self.check_feasible()?;
        let mut table = SineTable::new(b.size());
        let mut trace = CurveTrace::default();
        self.trace_curve_into(x, &mut table, &mut trace);
        Ok(trace)
    }

    /// Unchecked forward pass; the caller guarantees a 1D, feasible net.
    pub(crate) fn trace_curve_into(&self, x: f64, table: &mut SineTable, trace: &mut CurveTrace) {
        trace.points.clear();
        trace.derivs.clear();
        trace.seconds.clear();
        trace.points.push(x);
        let mut cur = x;
        for w in &self.layers {
            let (v, d, dd) = layer_1d(w, cur, table);
            trace.derivs.push(d);
            trace.seconds.push(dd);
            trace.points.push(v);
            cur = v;
        }
    }

    /// `phi` and `phi'` at every point of `xs`.
    pub fn eval_curve_many(&self, xs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let b = self.sine()?;
        self.check_feasible()?;
        let mut table = SineTable::new(b.size());
        let mut trace = CurveTrace::default();
        let mut values = Vec::with_capacity(xs.len());
        let mut derivs = Vec::with_capacity(xs.len());
        for &x in xs {
            self.trace_curve_into(x, &mut table, &mut trace);
            values.push(trace.value());
            derivs.push(trace.derivative());
        }
        Ok((values, derivs))
    }

    // ---- 2D ----

    /// Value and Jacobian `I + Df` of layer `l` at `p`.
    pub fn layer_eval_surface(&self, l: usize, p: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        let b = self.tangent()?;
        self.check_layer(l)?;
        let mut table = FieldTable::new(b);
        let (v, j, _) = layer_2d(&self.layers[l], p, &mut table);
        Ok((v, j))
    }

    /// `(phi(p), J_phi(p))`.
    pub fn eval_surface(&self, p: [f64; 2]) -> Result<([f64; 2], Mat2)> {
        let t = self.trace_surface(p)?;
        Ok((t.value(), t.jacobian()))
    }

    pub fn trace_surface(&self, p: [f64; 2]) -> Result<SurfaceTrace> {
        let b = self.tangent()?;
        self.check_feasible()?;
        let mut table = FieldTable::new(b);
        let mut trace = SurfaceTrace::default();
        self.trace_surface_into(p, &mut table, &mut trace);
        Ok(trace)
    }

    /// Unchecked forward pass; the caller guarantees a 2D, feasible net.
    pub(crate) fn trace_surface_into(&self, p: [f64; 2], table: &mut FieldTable, trace: &mut SurfaceTrace) {
        trace.points.clear();
        trace.jacobians.clear();
        trace.locals.clear();
        trace.points.push(p);
        let mut cur = p;
        for w in &self.layers {
            let (v, j, local) = layer_2d(w, cur, table);
            trace.jacobians.push(j);
            trace.locals.push(local);
            trace.points.push(v);
            cur = v;
        }
    }

    pub fn eval_surface_many(&self, ps: &[[f64; 2]]) -> Result<(Vec<[f64; 2]>, Vec<Mat2>)> {
        let b = self.tangent()?;
        self.check_feasible()?;
        let mut table = FieldTable::new(b);
        let mut trace = SurfaceTrace::default();
        let mut values = Vec::with_capacity(ps.len());
        let mut jacs = Vec::with_capacity(ps.len());
        for &p in ps {
            self.trace_surface_into(p, &mut table, &mut trace);
            values.push(trace.value());
            jacs.push(trace.jacobian());
        }
        Ok((values, jacs))
    }
}

/// `(phi(x), phi'(x), phi''(x))` for `phi = id + sum w_n f_n`. Endpoints are
/// fixed exactly and the value is kept inside [0, 1].
#[inline]
pub(crate) fn layer_1d(w: &[f64], x: f64, table: &mut SineTable) -> (f64, f64, f64) {
    table.fill(x);
    let (f, df, ddf) = table.combine(w);
    let v = if x == 0.0 || x == 1.0 { x } else { (x + f).clamp(0.0, 1.0) };
    (v, 1.0 + df, ddf)
}

/// Value, Jacobian `I + Df` and residual local data of a 2D layer. Points on
/// a boundary face keep that coordinate exactly.
#[inline]
pub(crate) fn layer_2d(w: &[f64], p: [f64; 2], table: &mut FieldTable) -> ([f64; 2], Mat2, LayerLocal) {
    table.fill(p[0], p[1]);
    let local = table.combine(w);
    let mut v = [0.0; 2];
    for c in 0..2 {
        v[c] = if p[c] == 0.0 || p[c] == 1.0 { p[c] } else { (p[c] + local.value[c]).clamp(0.0, 1.0) };
    }
    let j = [
        [1.0 + local.jac[0][0], local.jac[0][1]],
        [local.jac[1][0], 1.0 + local.jac[1][1]],
    ];
    (v, j, local)
}
