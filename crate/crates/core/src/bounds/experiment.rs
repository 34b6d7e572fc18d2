use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::ck::{composition_sups, TrigGrid, GRID_SLACK};
use super::partitions::PartitionTable;
use super::schroeder_with;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    /// Every weight equal to 1.
    Ones,
    /// Independent standard normal weights.
    Normal,
}

impl InitStrategy {
    pub fn name(self) -> &'static str {
        match self {
            InitStrategy::Ones => "ones",
            InitStrategy::Normal => "normal",
        }
    }
}

/// Grid of `(L, M, k)` cells; each cell runs the ones init plus `runs`
/// normal inits.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundExperiment {
    pub layers: Vec<usize>,
    pub basis_sizes: Vec<usize>,
    pub orders: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
    pub n_grid: usize,
}

impl Default for BoundExperiment {
    fn default() -> Self {
        Self {
            layers: (1..=10).collect(),
            basis_sizes: (1..=10).collect(),
            orders: vec![1, 2, 3],
            runs: 500,
            seed: 0,
            n_grid: super::DEFAULT_GRID,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub k: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub strategy: InitStrategy,
    /// Seed of the run's generator; `None` for the ones init.
    pub seed: Option<u64>,
    /// `sum_l ||alpha f_l||_{C^k}`, at most 1.
    pub sum_norm: f64,
    pub comp_norm: f64,
    /// `comp_norm / (sum_norm e^{k sum_norm})`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellMax {
    pub k: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub max_ratio: f64,
    pub schroeder: u128,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// Sorted by `(k, L, M, strategy, seed)`.
    pub rows: Vec<BoundRow>,
    /// Sorted by `(k, L, M)`.
    pub cells: Vec<CellMax>,
}

impl BoundReport {
    /// Rows whose ratio exceeds `M_k` beyond the grid slack.
    pub fn violations(&self) -> Vec<&BoundRow> {
        let mk: BTreeMap<usize, u128> = self.cells.iter().map(|c| (c.k, c.schroeder)).collect();
        self.rows.iter().filter(|r| r.ratio > mk[&r.k] as f64 * (1.0 + GRID_SLACK)).collect()
    }

    /// Largest ratio over all cells of order `k`.
    pub fn max_ratio(&self, k: usize) -> Option<f64> {
        self.cells.iter().filter(|c| c.k == k).map(|c| c.max_ratio).reduce(f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,L,M,strategy,seed,sum_norm,comp_norm,ratio\n");
        for r in &self.rows {
            let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:e},{:e},{:e}",
                r.k,
                r.layers,
                r.m,
                r.strategy.name(),
                seed,
                r.sum_norm,
                r.comp_norm,
                r.ratio
            );
        }
        out
    }

    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            cells: &'a [CellMax],
            max_ratio_by_k: BTreeMap<usize, f64>,
            violations: usize,
        }
        let max_ratio_by_k = self.cells.iter().fold(BTreeMap::new(), |mut acc, c| {
            let e = acc.entry(c.k).or_insert(0.0f64);
            *e = e.max(c.max_ratio);
            acc
        });
        Ok(serde_json::to_string_pretty(&Summary {
            cells: &self.cells,
            max_ratio_by_k,
            violations: self.violations().len(),
        })?)
    }
}

fn run_seed(base: u64, layers: usize, m: usize, run: usize) -> u64 {
    base ^ ((layers as u64) << 48) ^ ((m as u64) << 32) ^ run as u64
}

struct Job {
    layers: usize,
    m: usize,
    strategy: InitStrategy,
    seed: Option<u64>,
}

impl Job {
    fn weights(&self) -> Vec<Vec<f64>> {
        match self.seed {
            None => vec![vec![1.0; self.m]; self.layers],
            Some(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..self.layers).map(|_| (0..self.m).map(|_| StandardNormal.sample(&mut rng)).collect()).collect()
            }
        }
    }
}

fn ratio(comp: f64, sum: f64, k: usize) -> f64 {
    if comp == 0.0 {
        0.0
    } else {
        comp / (sum * (k as f64 * sum).exp())
    }
}

/// Runs every cell of `exp` in parallel; results do not depend on the
/// thread count. `runs = 0` skips both strategies and yields an empty report.
pub fn bound_ratio_experiment(exp: &BoundExperiment) -> Result<BoundReport> {
    if exp.n_grid < 1001 {
        return Err(Error::InvalidParameter(format!("C^k grid needs at least 1001 nodes, got {}", exp.n_grid)));
    }
    if exp.layers.contains(&0) || exp.basis_sizes.contains(&0) {
        return Err(Error::InvalidParameter("layer and basis counts must be positive".into()));
    }
    if exp.orders.iter().any(|&k| k > super::MAX_ORDER) {
        return Err(Error::InvalidParameter(format!("orders above {} are not supported", super::MAX_ORDER)));
    }
    if exp.runs == 0 {
        return Ok(BoundReport { rows: Vec::new(), cells: Vec::new() });
    }
    let kmax = exp.orders.iter().copied().max().unwrap_or(0);
    let mk = schroeder_with(&PartitionTable::new(kmax));
    let trig = TrigGrid::new(exp.basis_sizes.iter().copied().max().unwrap_or(0), exp.n_grid);
    let mut jobs = Vec::new();
    for &layers in &exp.layers {
        for &m in &exp.basis_sizes {
            jobs.push(Job { layers, m, strategy: InitStrategy::Ones, seed: None });
            jobs.extend((0..exp.runs).map(|r| Job {
                layers,
                m,
                strategy: InitStrategy::Normal,
                seed: Some(run_seed(exp.seed, layers, m, r)),
            }));
        }
    }
    let per_job: Vec<Vec<BoundRow>> = jobs
        .par_iter()
        .map(|job| {
            let w = job.weights();
            let sups: Vec<Vec<f64>> = w.iter().map(|wl| trig.field_sups(wl, kmax)).collect();
            exp.orders
                .iter()
                .map(|&k| {
                    let norms = sups.iter().map(|s| s[..=k].iter().fold(0.0f64, |a, &b| a.max(b)));
                    let raw: f64 = norms.sum();
                    let alpha = if raw > 1.0 { 1.0 / raw } else { 1.0 };
                    let scaled: Vec<Vec<f64>> = w.iter().map(|wl| wl.iter().map(|v| alpha * v).collect()).collect();
                    let comp_sups = composition_sups(&scaled, k, exp.n_grid);
                    let comp_norm = comp_sups.iter().fold(0.0f64, |a, &b| a.max(b));
                    let sum_norm = alpha * raw;
                    BoundRow {
                        k,
                        layers: job.layers,
                        m: job.m,
                        strategy: job.strategy,
                        seed: job.seed,
                        sum_norm,
                        comp_norm,
                        ratio: ratio(comp_norm, sum_norm, k),
                    }
                })
                .collect()
        })
        .collect();
    let mut rows: Vec<BoundRow> = per_job.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.k, a.layers, a.m, a.strategy, a.seed).cmp(&(b.k, b.layers, b.m, b.strategy, b.seed))
    });
    let mut cells: Vec<CellMax> = Vec::new();
    for r in &rows {
        match cells.last_mut() {
            Some(c) if (c.k, c.layers, c.m) == (r.k, r.layers, r.m) => c.max_ratio = c.max_ratio.max(r.ratio),
            _ => cells.push(CellMax { k: r.k, layers: r.layers, m: r.m, max_ratio: r.ratio, schroeder: mk.get(r.k) }),
        }
    }
    Ok(BoundReport { rows, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BoundExperiment {
        BoundExperiment { layers: vec![1, 3], basis_sizes: vec![2, 4], orders: vec![0, 1, 2], runs: 6, seed: 7, n_grid: 2001 }
    }

    #[test]
    fn report_shape_and_hypothesis() {
        let rep = bound_ratio_experiment(&small()).unwrap();
        assert_eq!(rep.rows.len(), 3 * 4 * 7);
        assert_eq!(rep.cells.len(), 3 * 4);
        for r in &rep.rows {
            assert!(r.sum_norm <= 1.0 + 1e-9, "{r:?}");
            assert!(r.ratio >= 0.0);
        }
        assert!(rep.violations().is_empty());
        let csv = rep.to_csv();
        assert!(csv.starts_with("k,L,M,strategy,seed,sum_norm,comp_norm,ratio\n"));
        assert_eq!(csv.lines().count(), rep.rows.len() + 1);
        let json: serde_json::Value = serde_json::from_str(&rep.summary_json().unwrap()).unwrap();
        assert_eq!(json["cells"].as_array().unwrap().len(), 12);
        assert_eq!(json["violations"], 0);
    }

    #[test]
    fn single_layer_ratio_is_exponential_factor() {
        let rep = bound_ratio_experiment(&small()).unwrap();
        for r in rep.rows.iter().filter(|r| r.layers == 1) {
            let expect = (-(r.k as f64) * r.sum_norm).exp();
            assert!((r.ratio - expect).abs() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn deterministic_and_reproducible_from_seed() {
        let a = bound_ratio_experiment(&small()).unwrap();
        let b = bound_ratio_experiment(&small()).unwrap();
        assert_eq!(a, b);
        let row = a.rows.iter().find(|r| r.strategy == InitStrategy::Normal && r.k == 1 && r.layers == 3).unwrap();
        let job = Job { layers: 3, m: row.m, strategy: InitStrategy::Normal, seed: row.seed };
        let w = job.weights();
        let spec = crate::bounds::CkNormSpec::new(1, 2001).unwrap();
        let (_, scaled) = crate::bounds::scale_to_hypothesis(&w, &spec);
        assert!((spec.composition_norm(&scaled) - row.comp_norm).abs() < 1e-12);
    }

    #[test]
    fn zero_runs_give_an_empty_report() {
        let rep = bound_ratio_experiment(&BoundExperiment { runs: 0, ..small() }).unwrap();
        assert!(rep.rows.is_empty() && rep.cells.is_empty());
        assert_eq!(rep.to_csv().lines().count(), 1);
        assert_eq!(rep.max_ratio(1), None);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(bound_ratio_experiment(&BoundExperiment { n_grid: 10, ..small() }).is_err());
        assert!(bound_ratio_experiment(&BoundExperiment { layers: vec![0], ..small() }).is_err());
    }
}
