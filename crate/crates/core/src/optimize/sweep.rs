use std::time::Instant;

use super::{bfgs_reparam, BfgsConfig, LossProblem};
use crate::diffeo::{Basis, DiffeoNet};

/// Result of one `(L, M)` cell. For surfaces `m` is the maximal frequency
/// `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub layers: usize,
    pub m: usize,
    /// NaN when the cell failed.
    pub final_loss: f64,
    pub iters: usize,
    pub seconds: f64,
    pub error: Option<String>,
}

/// Train one net per `(L, M)` cell from the identity with identical
/// settings. A failing cell is recorded and the sweep continues.
pub fn run_sweep<P, F>(problem: &P, cells: &[(usize, usize)], make_basis: F, epsilon: f64, cfg: &BfgsConfig) -> Vec<SweepRow>
where
    P: LossProblem + ?Sized,
    F: Fn(usize) -> Basis,
{
    cells
        .iter()
        .map(|&(layers, m)| {
            let started = Instant::now();
            let outcome = DiffeoNet::identity(make_basis(m), layers, epsilon).and_then(|net| bfgs_reparam(problem, net, cfg));
            let seconds = started.elapsed().as_secs_f64();
            match outcome {
                Ok(res) => {
                    SweepRow { layers, m, final_loss: res.final_loss(), iters: res.iterations(), seconds, error: None }
                }
                Err(e) => {
                    log::warn!("sweep cell L={layers} M={m} failed: {e}");
                    SweepRow { layers, m, final_loss: f64::NAN, iters: 0, seconds, error: Some(e.to_string()) }
                }
            }
        })
        .collect()
}

/// `L,M,final_loss,iters,seconds` rows; failed cells carry `NaN` loss.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("L,M,final_loss,iters,seconds\n");
    for r in rows {
        s.push_str(&format!("{},{},{:e},{},{:.3}\n", r.layers, r.m, r.final_loss, r.iters, r.seconds));
    }
    s
}
