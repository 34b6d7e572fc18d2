use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Fill `s[n-1] = sin(n theta)`, `c[n-1] = cos(n theta)` for `n = 1..=s.len()`
/// by angle addition.
#[inline]
pub(crate) fn harmonics(theta: f64, s: &mut [f64], c: &mut [f64]) {
    if s.is_empty() {
        return;
    }
    let (s1, c1) = theta.sin_cos();
    s[0] = s1;
    c[0] = c1;
    for n in 1..s.len() {
        s[n] = s[n - 1] * c1 + c[n - 1] * s1;
        c[n] = c[n - 1] * c1 - s[n - 1] * s1;
    }
}

/// Sine basis on [0, 1]: `f_n(x) = sin(n pi x) / (n pi)`, `n = 1..=M`.
/// Every element vanishes at both endpoints and has `sup |f_n'| = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis1D {
    pub m: usize,
}

impl Basis1D {
    pub fn new(m: usize) -> Self {
        Self { m }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// `L_n = sup |f_n'| = 1` for every element.
    pub fn lipschitz_constants(&self) -> Vec<f64> {
        vec![1.0; self.m]
    }

    /// `f_n(x)` for 1-based index `n`.
    pub fn value(&self, n: usize, x: f64) -> f64 {
        let a = n as f64 * PI;
        (a * x).sin() / a
    }

    pub fn derivative(&self, n: usize, x: f64) -> f64 {
        (n as f64 * PI * x).cos()
    }
}

/// Per-point evaluation of the 1D sine basis: `sin(n pi x)` and `cos(n pi x)`.
#[derive(Debug, Clone)]
pub(crate) struct SineTable {
    pub sin: Vec<f64>,
    pub cos: Vec<f64>,
}

impl SineTable {
    pub fn new(m: usize) -> Self {
        Self { sin: vec![0.0; m], cos: vec![0.0; m] }
    }

    #[inline]
    pub fn fill(&mut self, x: f64) {
        harmonics(PI * x, &mut self.sin, &mut self.cos);
    }

    /// `(sum w_n f_n, sum w_n f_n', sum w_n f_n'')` at the filled point.
    #[inline]
    pub fn combine(&self, w: &[f64]) -> (f64, f64, f64) {
        let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
        for (i, &wn) in w.iter().enumerate() {
            let a = (i + 1) as f64 * PI;
            v += wn * self.sin[i] / a;
            d += wn * self.cos[i];
            dd -= wn * a * self.sin[i];
        }
        (v, d, dd)
    }
}

/// Family of a 2D basis field. For the first component, with `u = x` and
/// `v = y`:
/// `Xi(k) = sin(pi k u) / (pi k)`,
/// `Eta(k, l) = sin(pi k u) cos(2 pi l v) / (pi k l)`,
/// `Phi(k, l) = sin(pi k u) sin(2 pi l v) / (pi k l)`.
/// The second component uses the same functions with `u = y`, `v = x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Xi,
    Eta,
    Phi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field2D {
    /// Which component of the vector field is nonzero (0 = x, 1 = y).
    pub component: usize,
    pub family: Family,
    pub k: usize,
    /// Unused (zero) for `Xi`.
    pub l: usize,
}

/// How per-field Lipschitz constants of the 2D basis are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LipschitzRule {
    /// Closed-form supremum of the Jacobian's Frobenius norm,
    /// `max(k, 2 l) / (k l)` for `Eta` and `Phi`.
    #[default]
    Frobenius,
    /// `sqrt(k^2 + 2 l^2) / (k l)`. Below the Frobenius supremum whenever
    /// `k^2 < 2 l^2`, so it does not by itself guarantee invertibility.
    Reduced,
}

/// Boundary-tangent vector fields on [0, 1]^2 with maximal frequency `N`;
/// `2 (2 N^2 + N)` fields in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis2D {
    pub n: usize,
    pub rule: LipschitzRule,
}

/// Value, gradient and Hessian `(xx, xy, yy)` of the nonzero component of a
/// basis field at a point.
#[derive(Debug, Clone, Copy, Default)]
pub struct FieldEval {
    pub component: usize,
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

pub fn basis_size_2d(n: usize) -> usize {
    2 * (2 * n * n + n)
}

impl Basis2D {
    pub fn new(n: usize) -> Self {
        Self { n, rule: LipschitzRule::Frobenius }
    }

    pub fn with_rule(n: usize, rule: LipschitzRule) -> Self {
        Self { n, rule }
    }

    pub fn size(&self) -> usize {
        basis_size_2d(self.n)
    }

    /// Fields in storage order: component, then `Xi(k)`, `Eta(k, l)`,
    /// `Phi(k, l)` with `k` outer and `l` inner.
    pub fn fields(&self) -> Vec<Field2D> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.size());
        for component in 0..2 {
            for k in 1..=n {
                out.push(Field2D { component, family: Family::Xi, k, l: 0 });
            }
            for family in [Family::Eta, Family::Phi] {
                for k in 1..=n {
                    for l in 1..=n {
                        out.push(Field2D { component, family, k, l });
                    }
                }
            }
        }
        out
    }

    pub fn lipschitz_constants(&self) -> Vec<f64> {
        self.fields().iter().map(|f| field_lipschitz(f, self.rule)).collect()
    }

    /// Evaluate one field at `(x, y)` directly from trigonometric functions.
    pub fn eval_field(&self, f: &Field2D, x: f64, y: f64) -> FieldEval {
        let (u, v) = if f.component == 0 { (x, y) } else { (y, x) };
        let (kf, lf) = (f.k as f64, f.l as f64);
        let (su, cu) = (PI * kf * u).sin_cos();
        let (sv, cv) = (2.0 * PI * lf * v).sin_cos();
        let g = local_derivatives(f.family, kf, lf, su, cu, sv, cv);
        to_xy(f.component, g)
    }
}

/// `(g, g_u, g_v, g_uu, g_uv, g_vv)` of a field's nonzero component given
/// `sin/cos(pi k u)` and `sin/cos(2 pi l v)`.
#[inline]
fn local_derivatives(family: Family, k: f64, l: f64, su: f64, cu: f64, sv: f64, cv: f64) -> [f64; 6] {
    match family {
        Family::Xi => [su / (PI * k), cu, 0.0, -PI * k * su, 0.0, 0.0],
        Family::Eta => [
            su * cv / (PI * k * l),
            cu * cv / l,
            -2.0 * su * sv / k,
            -PI * k * su * cv / l,
            -2.0 * PI * cu * sv,
            -4.0 * PI * l * su * cv / k,
        ],
        Family::Phi => [
            su * sv / (PI * k * l),
            cu * sv / l,
            2.0 * su * cv / k,
            -PI * k * su * sv / l,
            2.0 * PI * cu * cv,
            -4.0 * PI * l * su * sv / k,
        ],
    }
}

#[inline]
fn to_xy(component: usize, g: [f64; 6]) -> FieldEval {
    let [value, gu, gv, guu, guv, gvv] = g;
    if component == 0 {
        FieldEval { component, value, grad: [gu, gv], hess: [guu, guv, gvv] }
    } else {
        FieldEval { component, value, grad: [gv, gu], hess: [gvv, guv, guu] }
    }
}

fn field_lipschitz(f: &Field2D, rule: LipschitzRule) -> f64 {
    let (k, l) = (f.k as f64, f.l as f64);
    match (f.family, rule) {
        (Family::Xi, _) => 1.0,
        (_, LipschitzRule::Frobenius) => k.max(2.0 * l) / (k * l),
        (_, LipschitzRule::Reduced) => (k * k + 2.0 * l * l).sqrt() / (k * l),
    }
}

/// Evaluates every field of a [`Basis2D`] at a point using shared harmonic
/// tables.
#[derive(Debug, Clone)]
pub(crate) struct FieldTable {
    fields: Vec<Field2D>,
    // sin/cos(pi k x), sin/cos(pi k y), sin/cos(2 pi l x), sin/cos(2 pi l y)
    skx: Vec<f64>,
    ckx: Vec<f64>,
    sky: Vec<f64>,
    cky: Vec<f64>,
    slx: Vec<f64>,
    clx: Vec<f64>,
    sly: Vec<f64>,
    cly: Vec<f64>,
    pub evals: Vec<FieldEval>,
}

impl FieldTable {
    pub fn new(basis: &Basis2D) -> Self {
        let n = basis.n;
        let fields = basis.fields();
        let m = fields.len();
        Self {
            fields,
            skx: vec![0.0; n],
            ckx: vec![0.0; n],
            sky: vec![0.0; n],
            cky: vec![0.0; n],
            slx: vec![0.0; n],
            clx: vec![0.0; n],
            sly: vec![0.0; n],
            cly: vec![0.0; n],
            evals: vec![FieldEval::default(); m],
        }
    }

    pub fn fill(&mut self, x: f64, y: f64) {
        harmonics(PI * x, &mut self.skx, &mut self.ckx);
        harmonics(PI * y, &mut self.sky, &mut self.cky);
        harmonics(2.0 * PI * x, &mut self.slx, &mut self.clx);
        harmonics(2.0 * PI * y, &mut self.sly, &mut self.cly);
        for (f, out) in self.fields.iter().zip(self.evals.iter_mut()) {
            let (ki, li) = (f.k - 1, f.l.max(1) - 1);
            let (su, cu, sv, cv) = if f.component == 0 {
                (self.skx[ki], self.ckx[ki], self.sly[li], self.cly[li])
            } else {
                (self.sky[ki], self.cky[ki], self.slx[li], self.clx[li])
            };
            let g = local_derivatives(f.family, f.k as f64, f.l as f64, su, cu, sv, cv);
            *out = to_xy(f.component, g);
        }
    }

    /// Residual value, Jacobian `Df` and the x/y derivatives of `Df` for the
    /// weighted sum of the filled fields.
    #[inline]
    pub fn combine(&self, w: &[f64]) -> LayerLocal {
        let mut out = LayerLocal::default();
        for (e, &wn) in self.evals.iter().zip(w) {
            if wn == 0.0 {
                continue;
            }
            let r = e.component;
            out.value[r] += wn * e.value;
            out.jac[r][0] += wn * e.grad[0];
            out.jac[r][1] += wn * e.grad[1];
            // d/dx of row r: (f_xx, f_xy); d/dy of row r: (f_xy, f_yy)
            out.djac[0][r][0] += wn * e.hess[0];
            out.djac[0][r][1] += wn * e.hess[1];
            out.djac[1][r][0] += wn * e.hess[1];
            out.djac[1][r][1] += wn * e.hess[2];
        }
        out
    }
}

/// Local quantities of a 2D residual map `f = sum w_n F_n` at a point.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct LayerLocal {
    pub value: [f64; 2],
    /// `jac[r][c] = d f_r / d x_c`.
    pub jac: [[f64; 2]; 2],
    /// `djac[m][r][c] = d/dx_m (d f_r / d x_c)`.
    pub djac: [[[f64; 2]; 2]; 2],
}
