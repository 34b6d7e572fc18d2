//! Analytic shapes and warps with known optimal reparametrizations.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diffeo::{random_net, Basis, Basis2D, DiffeoNet, DEFAULT_EPSILON};
use crate::error::Result;
use crate::geometry::{node, GrayImage, SampledCurve, SampledSurface};

/// `c(t) = (cos 2 pi t, sin 4 pi t)`.
pub fn figure_eight(t: f64) -> [f64; 2] {
    [(2.0 * PI * t).cos(), (4.0 * PI * t).sin()]
}

/// `phi(t) = log(20 t + 1) / (2 log 21) + (1 + tanh(20 (t - 1/2))) / (4 tanh 10)`,
/// increasing, with `phi(0)` and `phi(1)` within 1e-8 of 0 and 1.
pub fn curve_warp(t: f64) -> f64 {
    (20.0 * t + 1.0).ln() / (2.0 * 21f64.ln()) + (1.0 + (20.0 * (t - 0.5)).tanh()) / (4.0 * 10f64.tanh())
}

pub fn curve_warp_derivative(t: f64) -> f64 {
    let sech = 1.0 / (20.0 * (t - 0.5)).cosh();
    10.0 / ((20.0 * t + 1.0) * 21f64.ln()) + 5.0 * sech * sech / 10f64.tanh()
}

/// A shape sampled twice: `target = source o warp`.
#[derive(Debug, Clone)]
pub struct CurvePair {
    pub target: SampledCurve,
    pub source: SampledCurve,
}

/// The figure-eight and its warped copy on `k` nodes.
pub fn curve_pair(k: usize) -> Result<CurvePair> {
    Ok(CurvePair {
        target: SampledCurve::from_fn(k, 2, |t| figure_eight(curve_warp(t)))?,
        source: SampledCurve::from_fn(k, 2, figure_eight)?,
    })
}

/// Graph of a smooth, asymmetric height field over the unit square.
pub fn graph_surface(x: f64, y: f64) -> [f64; 3] {
    let z = 0.5 * (x - 0.5).powi(2) - 0.5 * (y - 0.5).powi(2) + 0.25 * (PI * x).sin() * (2.0 * PI * y).sin() + 0.1 * x;
    [x, y, z]
}

#[derive(Debug, Clone)]
pub struct SurfacePair {
    pub target: SampledSurface,
    pub source: SampledSurface,
    /// The warp with `target = source o warp`.
    pub warp: DiffeoNet,
}

/// Seeded two-layer warp in the tangent basis with maximal frequency 2;
/// each layer's weighted Lipschitz sum is at most half the feasible bound.
pub fn surface_warp(seed: u64) -> Result<DiffeoNet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_net(Basis::Tangent(Basis2D::new(2)), 2, DEFAULT_EPSILON, 0.5, &mut rng)
}

/// `graph_surface` and its copy warped by [`surface_warp`], on a `k x k`
/// grid. The target is sampled exactly at the warped nodes.
pub fn surface_pair(k: usize, seed: u64) -> Result<SurfacePair> {
    let warp = surface_warp(seed)?;
    let ps: Vec<[f64; 2]> = (0..k * k).map(|idx| [node(idx % k, k), node(idx / k, k)]).collect();
    let (warped, _) = warp.eval_surface_many(&ps)?;
    let target = SampledSurface::new(k, warped.iter().map(|p| graph_surface(p[0], p[1])).collect())?;
    let source = SampledSurface::from_fn(k, graph_surface)?;
    Ok(SurfacePair { target, source, warp })
}

fn soft_step(signed_distance: f64, width: f64) -> f64 {
    0.5 * (1.0 - (signed_distance / width).tanh())
}

/// Bright disk of radius 0.3 centred in an `n x n` image, with a soft edge.
pub fn circle_image(n: usize) -> Result<GrayImage> {
    GrayImage::from_fn(n, n, |c, r| {
        let (x, y) = (node(c, n) - 0.5, node(r, n) - 0.5);
        soft_step((x * x + y * y).sqrt() - 0.3, 0.04)
    })
}

/// The upper half of [`circle_image`]'s disk (rows with `y <= 1/2`).
pub fn half_circle_image(n: usize) -> Result<GrayImage> {
    GrayImage::from_fn(n, n, |c, r| {
        let (x, y) = (node(c, n) - 0.5, node(r, n) - 0.5);
        let disk = (x * x + y * y).sqrt() - 0.3;
        soft_step(disk.max(y), 0.04)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_warp_is_increasing_and_nearly_fixes_endpoints() {
        assert!(curve_warp(0.0).abs() < 1e-8);
        assert!((curve_warp(1.0) - 1.0).abs() < 1e-8);
        let h = 1e-6;
        for i in 1..100 {
            let t = i as f64 / 100.0;
            let fd = (curve_warp(t + h) - curve_warp(t - h)) / (2.0 * h);
            assert!((fd - curve_warp_derivative(t)).abs() < 1e-6 * fd.abs().max(1.0));
            assert!(curve_warp_derivative(t) > 0.0);
        }
    }

    #[test]
    fn surface_pair_is_consistent() {
        let p = surface_pair(16, 0).unwrap();
        assert!(p.warp.is_feasible());
        assert_eq!(p.target.at(0, 0), graph_surface(0.0, 0.0));
        assert!(p.target.max_abs_diff(&p.source) > 1e-3);
        p.target.area_factor().unwrap();
    }

    #[test]
    fn images_have_expected_extent() {
        let c = circle_image(64).unwrap();
        let h = half_circle_image(64).unwrap();
        assert!(c.get(32, 32) > 0.99 && c.get(0, 0) < 0.01);
        assert!(h.get(32, 25) > 0.99 && h.get(32, 45) < 0.01);
    }
}
