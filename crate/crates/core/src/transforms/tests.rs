use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::diffeo::{det, random_net, Basis, Basis1D, Basis2D, DiffeoNet};
use crate::geometry::node;

fn figure_eight(t: f64) -> [f64; 2] {
    [(2.0 * PI * t).cos(), (4.0 * PI * t).sin()]
}

fn figure_eight_velocity(t: f64) -> [f64; 2] {
    [-2.0 * PI * (2.0 * PI * t).sin(), 4.0 * PI * (4.0 * PI * t).cos()]
}

fn line(k: usize, speed: f64) -> SampledCurve {
    SampledCurve::from_fn(k, 2, |t| [speed * t, 0.0]).unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn srvt_of_lines() {
    let q = srvt(&line(16, 1.0)).unwrap();
    assert!(q.values().chunks(2).all(|p| (p[0] - 1.0).abs() < 1e-12 && p[1] == 0.0));
    let q = srvt(&line(16, 4.0)).unwrap();
    assert!(q.values().chunks(2).all(|p| (p[0] - 2.0).abs() < 1e-12 && p[1] == 0.0));
    assert_eq!(q.kind(), TransformKind::Srvt);
}

#[test]
fn srvt_matches_analytic_on_figure_eight() {
    let k = 1024;
    let c = SampledCurve::from_fn(k, 2, figure_eight).unwrap();
    let q = srvt(&c).unwrap();
    let exact: Vec<f64> = (0..k)
        .flat_map(|i| {
            let v = figure_eight_velocity(node(i, k));
            let s = (v[0] * v[0] + v[1] * v[1]).sqrt().sqrt();
            [v[0] / s, v[1] / s]
        })
        .collect();
    assert!(sup_diff(q.values(), &exact) < 1e-2);
}

#[test]
fn degenerate_curve_is_rejected() {
    let c = SampledCurve::from_fn(8, 2, |_| [1.0, 2.0]).unwrap();
    assert!(matches!(srvt(&c), Err(Error::DegenerateCurve { node: 0, .. })));
    assert!(matches!(qmap_curve(&c), Err(Error::DegenerateCurve { .. })));
}

#[test]
fn srvt_inverse_of_constants() {
    let q = srvt(&line(11, 1.0)).unwrap();
    let c = srvt_inverse(&q).unwrap();
    assert!(c.max_abs_diff(&line(11, 1.0)) < 1e-14);
    let zero = QMap { kind: TransformKind::Srvt, k: 5, dim: 2, values: vec![0.0; 10] };
    assert!(srvt_inverse(&zero).unwrap().values().iter().all(|v| *v == 0.0));
}

#[test]
fn srvt_roundtrip_on_figure_eight() {
    let c = SampledCurve::from_fn(1024, 2, figure_eight).unwrap();
    let back = srvt_inverse(&srvt(&c).unwrap()).unwrap();
    assert!(back.max_abs_diff(&c.translated_to_origin()) < 1e-3);
}

#[test]
fn srvt_roundtrip_converges_at_second_order() {
    let err = |k: usize| {
        let c = SampledCurve::from_fn(k, 2, figure_eight).unwrap();
        srvt_inverse(&srvt(&c).unwrap()).unwrap().max_abs_diff(&c.translated_to_origin())
    };
    let (e1, e2) = (err(256), err(512));
    assert!(e2 <= e1 / 3.0, "{e1} {e2}");
}

#[test]
fn q_transform_of_lines() {
    let q = qmap_curve(&line(9, 1.0)).unwrap();
    for i in 0..9 {
        assert!((q.point(i)[0] - node(i, 9)).abs() < 1e-12);
    }
    let q = qmap_curve(&line(9, 4.0)).unwrap();
    for i in 0..9 {
        assert!((q.point(i)[0] - 8.0 * node(i, 9)).abs() < 1e-12);
    }
}

#[test]
fn q_transform_matches_analytic_on_figure_eight() {
    let k = 1024;
    let c = SampledCurve::from_fn(k, 2, figure_eight).unwrap();
    let q = qmap_curve(&c).unwrap();
    let exact: Vec<f64> = (0..k)
        .flat_map(|i| {
            let t = node(i, k);
            let v = figure_eight_velocity(t);
            let s = (v[0] * v[0] + v[1] * v[1]).sqrt().sqrt();
            let p = figure_eight(t);
            [s * p[0], s * p[1]]
        })
        .collect();
    assert!(sup_diff(q.values(), &exact) < 1e-2);
}

fn saddle(x: f64, y: f64) -> [f64; 3] {
    [x, y, x * x - y * y]
}

#[test]
fn srnf_simple_surfaces() {
    let flat = SampledSurface::from_fn(8, |x, y| [x, y, 0.0]).unwrap();
    let q = srnf(&flat).unwrap();
    assert!(q.values().chunks(3).all(|p| p[0].abs() < 1e-12 && p[1].abs() < 1e-12 && (p[2] - 1.0).abs() < 1e-12));
    let stretched = SampledSurface::from_fn(8, |x, y| [2.0 * x, y, 0.0]).unwrap();
    let q = srnf(&stretched).unwrap();
    assert!(q.values().chunks(3).all(|p| (p[2] - 2f64.sqrt()).abs() < 1e-12));
}

#[test]
fn q_surface_simple_surfaces() {
    let flat = SampledSurface::from_fn(8, |x, y| [x, y, 0.0]).unwrap();
    let q = qmap_surface(&flat).unwrap();
    let last = q.point(63);
    assert!((last[0] - 1.0).abs() < 1e-12 && (last[1] - 1.0).abs() < 1e-12 && last[2] == 0.0);
    let stretched = SampledSurface::from_fn(8, |x, y| [2.0 * x, y, 0.0]).unwrap();
    let q = qmap_surface(&stretched).unwrap();
    for (p, s) in q.values().chunks(3).zip(stretched.values()) {
        for c in 0..3 {
            assert!((p[c] - 2f64.sqrt() * s[c]).abs() < 1e-12);
        }
    }
}

#[test]
fn surface_transforms_match_analytic_patch() {
    let k = 128;
    let s = SampledSurface::from_fn(k, saddle).unwrap();
    let qn = srnf(&s).unwrap();
    let qs = qmap_surface(&s).unwrap();
    let (mut en, mut es) = (0.0f64, 0.0f64);
    for j in 0..k {
        for i in 0..k {
            let (x, y) = (node(i, k), node(j, k));
            let a = (1.0 + 4.0 * x * x + 4.0 * y * y).sqrt();
            let n = [-2.0 * x / a.sqrt(), 2.0 * y / a.sqrt(), 1.0 / a.sqrt()];
            let f = saddle(x, y);
            let idx = j * k + i;
            for c in 0..3 {
                en = en.max((qn.point(idx)[c] - n[c]).abs());
                es = es.max((qs.point(idx)[c] - a.sqrt() * f[c]).abs());
            }
        }
    }
    assert!(en < 1e-3 && es < 1e-3, "{en} {es}");
}

#[test]
fn preshape_distance_examples() {
    let q1 = srvt(&line(21, 1.0)).unwrap();
    assert_eq!(preshape_dist(&q1, &q1).unwrap(), 0.0);
    let zero = QMap { values: vec![0.0; 42], ..q1.clone() };
    assert!((preshape_dist(&q1, &zero).unwrap() - 1.0).abs() < 1e-12);
    let other = srvt(&line(22, 1.0)).unwrap();
    assert!(matches!(preshape_dist(&q1, &other), Err(Error::GridMismatch(_))));
    let q = qmap_curve(&line(21, 1.0)).unwrap();
    assert!(matches!(preshape_dist(&q1, &q), Err(Error::GridMismatch(_))));
}

#[test]
fn preshape_distance_squared_approaches_mean_squared_error() {
    // The trapezoid rule and the plain mean differ only in boundary weights,
    // so the gap shrinks like 1/K.
    let gap = |k: usize| {
        let c1 = SampledCurve::from_fn(k, 2, figure_eight).unwrap();
        let c2 = SampledCurve::from_fn(k, 2, |t| figure_eight(t * t)).unwrap();
        let (q1, q2) = (srvt(&c1).unwrap(), srvt(&c2).unwrap());
        let d = preshape_dist(&q1, &q2).unwrap();
        let mse = q1.values().iter().zip(q2.values()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / k as f64;
        (d * d - mse).abs() / mse
    };
    let (g1, g2) = (gap(256), gap(1024));
    assert!(g1 < 2e-2 && g2 < g1 / 3.0, "{g1} {g2}");
}

#[test]
fn geodesic_examples() {
    let k = 33;
    let c1 = line(k, 1.0);
    let path = geodesic_curves(&c1, &c1, &default_taus(11)).unwrap();
    assert_eq!(path.len(), 11);
    for c in &path {
        assert!(c.max_abs_diff(&c1.translated_to_origin()) < 1e-12);
    }
    // q = (1 + 2) / 2 = 1.5, so the midpoint is the segment of length 2.25
    let mid = geodesic_curves(&c1, &line(k, 4.0), &[0.5]).unwrap();
    assert!((mid[0].point(k - 1)[0] - 2.25).abs() < 1e-12);
    // q = (1 + sqrt 2) / 2, so the length is (3 + 2 sqrt 2) / 4
    let mid = geodesic_curves(&c1, &line(k, 2.0), &[0.5]).unwrap();
    assert!((mid[0].point(k - 1)[0] - (3.0 + 2.0 * 2f64.sqrt()) / 4.0).abs() < 1e-12);
}

#[test]
fn geodesic_endpoints_reproduce_inputs() {
    let k = 512;
    let c1 = SampledCurve::from_fn(k, 2, figure_eight).unwrap();
    let c2 = SampledCurve::from_fn(k, 2, |t| [t, 0.3 * (PI * t).sin()]).unwrap();
    let path = geodesic_curves(&c1, &c2, &[1.0, 0.0]).unwrap();
    assert!(path[0].max_abs_diff(&c1.translated_to_origin()) < 1e-3);
    assert!(path[1].max_abs_diff(&c2.translated_to_origin()) < 1e-3);
}

#[test]
fn geodesic_reports_vanishing_combination() {
    let k = 9;
    let c1 = line(k, 1.0);
    let c2 = SampledCurve::from_fn(k, 2, |t| [-t, 0.0]).unwrap();
    match geodesic_curves(&c1, &c2, &[0.0, 0.5]) {
        Err(Error::VanishingCombination { tau, node }) => {
            assert_eq!(tau, 0.5);
            assert_eq!(node, 0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn lerp_after_reparam_examples() {
    let k = 17;
    let f1 = SampledCurve::from_fn(k, 2, figure_eight).unwrap();
    let f2 = SampledCurve::from_fn(k, 2, |t| [t, t * t]).unwrap();
    let id = DiffeoNet::identity(Basis::Sine(Basis1D::new(3)), 2, 0.01).unwrap();
    let path = lerp_after_reparam(&f1, &f2, &id, &[1.0, 0.0, 0.5]).unwrap();
    assert_eq!(path[0], f1);
    assert!(path[1].max_abs_diff(&f2) < 1e-15);
    for i in 0..k {
        for c in 0..2 {
            let mean = 0.5 * (f1.point(i)[c] + f2.point(i)[c]);
            assert!((path[2].point(i)[c] - mean).abs() < 1e-15);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let net = random_net(Basis::Sine(Basis1D::new(4)), 2, 0.01, 1.0, &mut rng).unwrap();
    let path = lerp_after_reparam(&f1, &f2, &net, &[0.0]).unwrap();
    assert_eq!(path[0], compose_curve(&f2, &net).unwrap());
}

#[test]
fn path_files_list_every_tau() {
    let f = SampledCurve::from_fn(5, 1, |t| [t]).unwrap();
    let taus = default_taus(3);
    let files = path_files("geo", &taus, &[f.clone(), f.clone(), f]).unwrap();
    assert_eq!(files.len(), 4);
    assert_eq!(files[1].0, "geo_001.csv");
    let manifest: serde_json::Value = serde_json::from_slice(&files[3].1).unwrap();
    assert_eq!(manifest["taus"][1], 0.5);
    assert_eq!(manifest["files"][2], "geo_002.csv");
    assert_eq!(default_taus(11).len(), 11);
}

fn curve_equivariance_error(k: usize, net: &DiffeoNet) -> f64 {
    // R(c o phi) vs sqrt(phi') R(c) o phi, with c o phi sampled exactly
    let xs: Vec<f64> = (0..k).map(|i| node(i, k)).collect();
    let (phi, dphi) = net.eval_curve_many(&xs).unwrap();
    let composed = SampledCurve::new(2, phi.iter().flat_map(|&p| figure_eight(p)).collect()).unwrap();
    let lhs = srvt(&composed).unwrap();
    let spline = srvt(&SampledCurve::from_fn(k, 2, figure_eight).unwrap()).unwrap().spline();
    let rhs: Vec<f64> = phi
        .iter()
        .zip(&dphi)
        .flat_map(|(&p, &d)| spline.value(p).into_iter().map(move |v| d.sqrt() * v))
        .collect();
    sup_diff(lhs.values(), &rhs)
}

#[test]
fn srvt_equivariance_is_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let net = random_net(Basis::Sine(Basis1D::new(4)), 3, 0.1, 0.8, &mut rng).unwrap();
    let (e1, e2) = (curve_equivariance_error(1024, &net), curve_equivariance_error(2048, &net));
    assert!(e1 < 1e-2, "{e1}");
    assert!(e2 <= e1 / 3.0, "{e1} {e2}");
}

fn surface_equivariance_error(k: usize, net: &DiffeoNet) -> f64 {
    let ps: Vec<[f64; 2]> = (0..k * k).map(|idx| [node(idx % k, k), node(idx / k, k)]).collect();
    let (phi, jac) = net.eval_surface_many(&ps).unwrap();
    let wavy = |x: f64, y: f64| [x, y, 0.3 * (PI * x).sin() * (PI * y).cos() + 0.2 * x * y];
    let composed = SampledSurface::new(k, phi.iter().map(|p| wavy(p[0], p[1])).collect()).unwrap();
    let lhs = srnf(&composed).unwrap();
    let interp = srnf(&SampledSurface::from_fn(k, wavy).unwrap()).unwrap().bicubic();
    let rhs: Vec<f64> = phi
        .iter()
        .zip(&jac)
        .flat_map(|(p, j)| {
            let s = det(j).sqrt();
            interp.value(p[0], p[1]).into_iter().map(move |v| s * v)
        })
        .collect();
    sup_diff(lhs.values(), &rhs)
}

#[test]
fn srnf_equivariance_is_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net = random_net(Basis::Tangent(Basis2D::new(1)), 2, 0.1, 0.8, &mut rng).unwrap();
    let (e1, e2) = (surface_equivariance_error(128, &net), surface_equivariance_error(256, &net));
    assert!(e1 < 1e-2, "{e1}");
    assert!(e2 <= e1 / 3.0, "{e1} {e2}");
}

fn qmap_from(values: Vec<f64>) -> QMap {
    QMap { kind: TransformKind::Srvt, k: values.len() / 2, dim: 2, values }
}

proptest! {
    #[test]
    fn preshape_distance_is_a_metric(
        a in prop::collection::vec(-3.0f64..3.0, 16),
        b in prop::collection::vec(-3.0f64..3.0, 16),
        c in prop::collection::vec(-3.0f64..3.0, 16),
    ) {
        let (qa, qb, qc) = (qmap_from(a), qmap_from(b), qmap_from(c));
        let ab = preshape_dist(&qa, &qb).unwrap();
        prop_assert_eq!(ab, preshape_dist(&qb, &qa).unwrap());
        prop_assert_eq!(preshape_dist(&qa, &qa).unwrap(), 0.0);
        let ac = preshape_dist(&qa, &qc).unwrap();
        let cb = preshape_dist(&qc, &qb).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
        if qa != qb {
            prop_assert!(ab > 0.0);
        }
    }
}
