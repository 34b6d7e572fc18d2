//! Boundary-respecting bases, elementary diffeomorphism layers and their
//! compositions.

mod basis;
mod feasible;
mod io;
mod net;

pub use basis::{basis_size_2d, Basis1D, Basis2D, Family, Field2D, FieldEval, LipschitzRule};
pub(crate) use basis::{FieldTable, SineTable};
pub use feasible::{project_weights, FeasibleSpec, DEFAULT_EPSILON};
pub use net::{det, mat_mul, Basis, CurveTrace, DiffeoNet, Mat2, SurfaceTrace, IDENTITY2};

use rand::Rng;

/// A net with independent random layers. Each layer's direction is uniform
/// in `[-1, 1]^M` and its weighted Lipschitz sum is `scale * (1 - epsilon)`
/// with `scale` uniform in `[0, max_scale]`.
pub fn random_net(basis: Basis, n_layers: usize, epsilon: f64, max_scale: f64, rng: &mut impl Rng) -> crate::Result<DiffeoNet> {
    let spec = FeasibleSpec::new(epsilon, basis.lipschitz_constants())?;
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let mut w: Vec<f64> = (0..basis.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sum = spec.weighted_sum(&w);
        let target = rng.gen_range(0.0..=max_scale.clamp(0.0, 1.0)) * spec.bound();
        if sum > 0.0 {
            w.iter_mut().for_each(|v| *v *= target / sum);
        }
        layers.push(w);
    }
    DiffeoNet::from_layers(basis, epsilon, layers)
}

#[cfg(test)]
mod tests {
    use super::{det, random_net, Basis, Basis1D, Basis2D, DiffeoNet};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn net_1d(seed: u64, m: usize, l: usize, eps: f64) -> DiffeoNet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_net(Basis::Sine(Basis1D::new(m)), l, eps, 1.0, &mut rng).unwrap()
    }

    fn net_2d(seed: u64, n: usize, l: usize, eps: f64) -> DiffeoNet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_net(Basis::Tangent(Basis2D::new(n)), l, eps, 1.0, &mut rng).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn one_d_nets_are_monotone(seed in any::<u64>(), m in 1usize..12, l in 1usize..6, eps in 0.01f64..0.5) {
            let net = net_1d(seed, m, l, eps);
            let xs: Vec<f64> = (0..1001).map(|i| i as f64 / 1000.0).collect();
            let (v, d) = net.eval_curve_many(&xs).unwrap();
            prop_assert_eq!(v[0], 0.0);
            prop_assert_eq!(v[1000], 1.0);
            for i in 1..1001 {
                prop_assert!(v[i] > v[i - 1]);
            }
            let floor = eps.powi(l as i32) * (1.0 - 1e-12);
            prop_assert!(d.iter().all(|&d| d >= floor));
        }

        #[test]
        fn one_d_derivative_matches_finite_differences(seed in any::<u64>()) {
            let net = net_1d(seed, 8, 4, 0.01);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let h = 1e-6;
            for _ in 0..100 {
                let x: f64 = rng.gen_range(0.01..0.99);
                let (_, d) = net.eval_curve(x).unwrap();
                let fd = (net.eval_curve(x + h).unwrap().0 - net.eval_curve(x - h).unwrap().0) / (2.0 * h);
                prop_assert!((fd - d).abs() <= 1e-6 * d.abs(), "x={} fd={} d={}", x, fd, d);
            }
        }

        #[test]
        fn two_d_nets_preserve_orientation_and_boundary(seed in any::<u64>(), n in 1usize..3, l in 1usize..4) {
            let eps = 0.01;
            let net = net_2d(seed, n, l, eps);
            let k = 101;
            for j in 0..k {
                for i in 0..k {
                    let p = [i as f64 / 100.0, j as f64 / 100.0];
                    let t = net.trace_surface(p).unwrap();
                    for jl in &t.jacobians {
                        prop_assert!(det(jl) >= eps * eps * (1.0 - 1e-9));
                    }
                    prop_assert!(det(&t.jacobian()) > 0.0);
                    let v = t.value();
                    for c in 0..2 {
                        prop_assert!((0.0..=1.0).contains(&v[c]));
                        if p[c] == 0.0 || p[c] == 1.0 {
                            prop_assert!((v[c] - p[c]).abs() <= 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn random_nets_are_feasible_and_deterministic() {
        let a = net_2d(7, 2, 3, 0.05);
        let b = net_2d(7, 2, 3, 0.05);
        assert_eq!(a, b);
        assert!(a.is_feasible());
    }
}
