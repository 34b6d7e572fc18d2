use serde::Serialize;

use super::LossProblem;
use crate::diffeo::DiffeoNet;
use crate::error::{Error, Result};

/// One convergence-log row. Row 0 describes the starting point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRow {
    pub iter: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub step: f64,
    /// Whether the accepted point was moved by the projection.
    pub projected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    LossFloor,
    StepCollapse,
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub net: DiffeoNet,
    pub log: Vec<LogRow>,
    pub stop: StopReason,
}

impl OptimResult {
    pub fn initial_loss(&self) -> f64 {
        self.log[0].loss
    }

    pub fn final_loss(&self) -> f64 {
        self.log.last().expect("log holds the starting row").loss
    }

    /// Accepted iterations.
    pub fn iterations(&self) -> usize {
        self.log.len() - 1
    }

    /// `E / E_0`, or 0 when `E_0 = 0`.
    pub fn relative_loss(&self) -> f64 {
        let e0 = self.initial_loss();
        if e0 == 0.0 {
            0.0
        } else {
            self.final_loss() / e0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsConfig {
    pub max_iter: usize,
    /// Stop when `||grad||_inf <= grad_tol`.
    pub grad_tol: f64,
    /// Stop when an accepted step lowers the loss by less than this
    /// fraction.
    pub rel_loss_floor: f64,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    /// Smallest trial step before giving up.
    pub min_step: f64,
    /// Scale the initial inverse Hessian by `s^T y / y^T y` after the first
    /// accepted step.
    pub scale_initial: bool,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        Self { max_iter: 200, grad_tol: 1e-8, rel_loss_floor: 1e-14, c1: 1e-4, min_step: 1e-12, scale_initial: true }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense inverse-Hessian approximation, row-major.
struct InverseHessian {
    n: usize,
    h: Vec<f64>,
}

impl InverseHessian {
    fn identity(n: usize, scale: f64) -> Self {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            h[i * n + i] = scale;
        }
        Self { n, h }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.h.chunks(self.n).map(|row| dot(row, v)).collect()
    }

    /// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`.
    fn update(&mut self, s: &[f64], y: &[f64]) {
        let n = self.n;
        let rho = 1.0 / dot(s, y);
        let hy = self.apply(y);
        let yhy = dot(y, &hy);
        let coef = rho * rho * yhy + rho;
        for i in 0..n {
            for j in 0..n {
                self.h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
            }
        }
        // keep exact symmetry
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (self.h[i * n + j] + self.h[j * n + i]);
                self.h[i * n + j] = avg;
                self.h[j * n + i] = avg;
            }
        }
    }
}

struct Trial {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    step: Vec<f64>,
    alpha: f64,
    projected: bool,
}

/// Projected BFGS on the network weights.
///
/// Trial points are `P(x + alpha d)` where `P` projects every layer onto its
/// feasible set; `alpha` halves from 1 until
/// `f(x_t) <= f(x) + c1 g^T (x_t - x)` and `f(x_t) < f(x)`. The inverse
/// Hessian resets to the identity whenever `d` is not a descent direction,
/// and the gradient direction is tried before giving up on a step. The
/// relative loss floor only ends the run once a gradient step stalls too.
/// Stagnation is not an error: the best iterate so far is returned.
pub fn bfgs_reparam<P: LossProblem + ?Sized>(problem: &P, start: DiffeoNet, cfg: &BfgsConfig) -> Result<OptimResult> {
    if !(cfg.c1 > 0.0 && cfg.c1 < 1.0) || cfg.min_step <= 0.0 || cfg.min_step >= 1.0 {
        return Err(Error::InvalidParameter("line search needs 0 < c1 < 1 and 0 < min_step < 1".into()));
    }
    let mut net = start;
    let projected0 = net.project();
    let n = net.n_params();
    let (mut f, mut g) = problem.loss_grad(&net)?;
    let mut log = vec![LogRow { iter: 0, loss: f, grad_norm: inf_norm(&g), step: 0.0, projected: projected0 }];
    let mut h = InverseHessian::identity(n, 1.0);
    let mut updated_once = false;
    let mut x = net.flat_weights();
    let mut trial = net.clone();
    let mut stop = StopReason::MaxIterations;

    for iter in 1..=cfg.max_iter {
        if inf_norm(&g) <= cfg.grad_tol {
            stop = StopReason::GradientTolerance;
            break;
        }
        let steepest: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut d: Vec<f64> = h.apply(&g).iter().map(|v| -v).collect();
        if dot(&g, &d) >= 0.0 || d.iter().any(|v| !v.is_finite()) {
            h = InverseHessian::identity(n, 1.0);
            updated_once = false;
            d = steepest.clone();
        }

        let mut search = |d: &[f64]| -> Result<Option<Trial>> {
            let mut alpha = 1.0;
            loop {
                let xt: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
                trial.set_flat_weights(&xt)?;
                let projected = trial.project();
                let xt = trial.flat_weights();
                let step: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
                let decrease = dot(&g, &step);
                if let Ok((ft, gt)) = problem.loss_grad(&trial) {
                    if ft.is_finite() && ft < f && ft <= f + cfg.c1 * decrease {
                        return Ok(Some(Trial { x: xt, f: ft, g: gt, step, alpha, projected }));
                    }
                }
                alpha *= 0.5;
                if alpha < cfg.min_step {
                    return Ok(None);
                }
            }
        };
        let mut from_gradient = d == steepest;
        let mut accepted = search(&d)?;
        if accepted.is_none() && !from_gradient {
            from_gradient = true;
            // the quasi-Newton direction can fail once projection bends it;
            // fall back to the gradient and restart the curvature model
            accepted = search(&steepest)?;
            h = InverseHessian::identity(n, 1.0);
            updated_once = false;
        }
        let Some(Trial { x: xt, f: ft, g: gt, step: s, alpha, projected }) = accepted else {
            stop = StopReason::StepCollapse;
            break;
        };

        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let (ns, ny) = (dot(&s, &s).sqrt(), dot(&y, &y).sqrt());
        if sy > 1e-10 * ns * ny {
            if !updated_once && cfg.scale_initial {
                h = InverseHessian::identity(n, sy / dot(&y, &y));
            }
            h.update(&s, &y);
            updated_once = true;
        }

        let rel_drop = (f - ft) / f.abs().max(f64::MIN_POSITIVE);
        x = xt;
        f = ft;
        g = gt;
        net.set_flat_weights(&x)?;
        log.push(LogRow { iter, loss: f, grad_norm: inf_norm(&g), step: alpha, projected });
        if f == 0.0 || (rel_drop < cfg.rel_loss_floor && from_gradient) {
            stop = StopReason::LossFloor;
            break;
        }
        if rel_drop < cfg.rel_loss_floor {
            // a stalled quasi-Newton step says more about H than about x
            h = InverseHessian::identity(n, 1.0);
            updated_once = false;
        }
    }
    if stop == StopReason::MaxIterations && inf_norm(&g) <= cfg.grad_tol {
        stop = StopReason::GradientTolerance;
    }
    Ok(OptimResult { net, log, stop })
}

/// `iter,loss,grad_norm,step,projected` rows.
pub fn log_csv(log: &[LogRow]) -> String {
    let mut s = String::from("iter,loss,grad_norm,step,projected\n");
    for r in log {
        s.push_str(&format!("{},{:e},{:e},{:e},{}\n", r.iter, r.loss, r.grad_norm, r.step, r.projected));
    }
    s
}
