use super::{LogRow, LossProblem, OptimResult, StopReason};
use crate::diffeo::{Basis, DiffeoNet, DEFAULT_EPSILON};
use crate::error::{Error, Result};

/// Settings for the compose-one-layer-per-step gradient descent baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdConfig {
    /// Initial step length `eta`; later iterations start from twice the
    /// last accepted value.
    pub eta: f64,
    pub max_iter: usize,
    /// Stop when `||lambda||_inf <= grad_tol`.
    pub grad_tol: f64,
    pub rel_loss_floor: f64,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    /// Step shrink factor in (0, 1).
    pub shrink: f64,
    /// Smallest `eta` tried before giving up.
    pub min_step: f64,
    pub epsilon: f64,
    /// Update the most recent layer in place instead of composing a new one.
    pub refit_last_layer: bool,
}

impl Default for GdConfig {
    fn default() -> Self {
        Self {
            eta: 1.0,
            max_iter: 200,
            grad_tol: 1e-8,
            rel_loss_floor: 1e-14,
            c1: 1e-4,
            shrink: 0.5,
            min_step: 1e-12,
            epsilon: DEFAULT_EPSILON,
            refit_last_layer: false,
        }
    }
}

/// Gradient descent on the diffeomorphism group:
/// `phi^{n+1} = phi^n o (id - eta sum_j lambda_j f_j)`.
///
/// `lambda` is the gradient of the loss with respect to a new innermost
/// layer at zero weights. Each new layer is projected onto the feasible set
/// and `eta` backtracks until the loss decreases sufficiently. Without
/// `refit_last_layer` the returned net has one layer per accepted step.
pub fn gd_reparam<P: LossProblem + ?Sized>(problem: &P, basis: Basis, cfg: &GdConfig) -> Result<OptimResult> {
    if !(cfg.eta > 0.0) || !(cfg.shrink > 0.0 && cfg.shrink < 1.0) || !(cfg.min_step > 0.0) {
        return Err(Error::InvalidParameter("gradient descent needs eta > 0, 0 < shrink < 1, min_step > 0".into()));
    }
    let m = basis.size();
    let mut net = DiffeoNet::identity(basis, 0, cfg.epsilon)?;
    let spec = net.spec();
    let mut f = problem.loss(&net)?;
    let mut log = vec![LogRow { iter: 0, loss: f, grad_norm: f64::NAN, step: 0.0, projected: false }];
    let mut eta = cfg.eta;
    let mut stop = StopReason::MaxIterations;

    for iter in 1..=cfg.max_iter {
        let refit = cfg.refit_last_layer && net.n_layers() > 0;
        let mut base = net.clone();
        if !refit {
            base.insert_layer(0, vec![0.0; m])?;
        }
        let (_, grad) = problem.loss_grad(&base)?;
        let lambda = &grad[..m];
        let lambda_norm = lambda.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if iter == 1 {
            log[0].grad_norm = lambda_norm;
        }
        if lambda_norm <= cfg.grad_tol {
            stop = StopReason::GradientTolerance;
            break;
        }
        let current = base.layer(0).to_vec();
        let mut trial_eta = eta;
        let accepted = loop {
            let raw: Vec<f64> = current.iter().zip(lambda).map(|(w, l)| w - trial_eta * l).collect();
            let w = spec.project(&raw);
            let projected = w != raw;
            let mut trial = base.clone();
            trial.set_layer(0, &w)?;
            let decrease: f64 = w.iter().zip(&current).zip(lambda).map(|((a, b), l)| (a - b) * l).sum();
            if let Ok(ft) = problem.loss(&trial) {
                if ft.is_finite() && ft < f && ft <= f + cfg.c1 * decrease {
                    break Some((trial, ft, projected));
                }
            }
            trial_eta *= cfg.shrink;
            if trial_eta < cfg.min_step {
                break None;
            }
        };
        let Some((trial, ft, projected)) = accepted else {
            if iter == 1 {
                return Err(Error::StagnatedStep { iteration: iter, min_step: cfg.min_step });
            }
            stop = StopReason::StepCollapse;
            break;
        };
        let rel_drop = (f - ft) / f.abs().max(f64::MIN_POSITIVE);
        net = trial;
        f = ft;
        log.push(LogRow { iter, loss: f, grad_norm: lambda_norm, step: trial_eta, projected });
        eta = (2.0 * trial_eta).min(cfg.eta.max(1.0) * 1e6);
        if rel_drop < cfg.rel_loss_floor || f == 0.0 {
            stop = StopReason::LossFloor;
            break;
        }
    }
    Ok(OptimResult { net, log, stop })
}
