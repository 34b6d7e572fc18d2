use crate::error::{Error, Result};

/// Default feasibility margin shared by all layers.
pub const DEFAULT_EPSILON: f64 = 1e-2;

/// Relative slack admitted by feasibility checks, absorbing rounding in the
/// projection itself.
pub(crate) const FEASIBILITY_SLACK: f64 = 1e-12;

/// Weight vectors with `sum |w_n| L_n <= 1 - epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSpec {
    epsilon: f64,
    lipschitz: Vec<f64>,
}

impl FeasibleSpec {
    pub fn new(epsilon: f64, lipschitz: Vec<f64>) -> Result<Self> {
        check_epsilon(epsilon)?;
        if let Some(l) = lipschitz.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidParameter(format!("Lipschitz constant {l} must be positive")));
        }
        Ok(Self { epsilon, lipschitz })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    pub fn bound(&self) -> f64 {
        1.0 - self.epsilon
    }

    pub fn weighted_sum(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.lipschitz).map(|(w, l)| w.abs() * l).sum()
    }

    pub fn is_feasible(&self, w: &[f64]) -> bool {
        self.weighted_sum(w) <= self.bound() * (1.0 + FEASIBILITY_SLACK)
    }

    /// Scale `w` onto the feasible set in place. Returns whether it changed.
    pub fn project_in_place(&self, w: &mut [f64]) -> bool {
        let sum = self.weighted_sum(w);
        let bound = self.bound();
        if sum <= bound {
            return false;
        }
        let mut scale = bound / sum;
        // rounding can leave the scaled sum a few ulps above the bound
        while self.weighted_sum(&w.iter().map(|v| v * scale).collect::<Vec<_>>()) > bound {
            scale *= 1.0 - f64::EPSILON;
        }
        w.iter_mut().for_each(|v| *v *= scale);
        true
    }

    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        let mut out = w.to_vec();
        self.project_in_place(&mut out);
        out
    }
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} must lie in (0, 1)")));
    }
    Ok(())
}

/// `pi(w) = (1 - eps) / max(1 - eps, sum |w_n| L_n) * w`.
pub fn project_weights(w: &[f64], spec: &FeasibleSpec) -> Vec<f64> {
    spec.project(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeo::{Basis1D, Basis2D};
    use proptest::prelude::*;

    #[test]
    fn scales_infeasible_vector() {
        let spec = FeasibleSpec::new(0.1, Basis1D::new(2).lipschitz_constants()).unwrap();
        let p = project_weights(&[2.0, 0.0], &spec);
        assert!((p[0] - 0.9).abs() < 1e-15 && p[1] == 0.0);
    }

    #[test]
    fn feasible_vector_unchanged() {
        let spec = FeasibleSpec::new(0.1, vec![1.0; 3]).unwrap();
        let w = [0.3, -0.2, 0.1];
        assert_eq!(project_weights(&w, &spec), w.to_vec());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FeasibleSpec::new(0.0, vec![1.0]).is_err());
        assert!(FeasibleSpec::new(1.0, vec![1.0]).is_err());
        assert!(FeasibleSpec::new(0.5, vec![0.0]).is_err());
    }

    proptest! {
        #[test]
        fn two_d_projection_lands_on_the_boundary(w in prop::collection::vec(-3.0f64..3.0, 6), eps in 0.001f64..0.5) {
            let spec = FeasibleSpec::new(eps, Basis2D::new(1).lipschitz_constants()).unwrap();
            let p = project_weights(&w, &spec);
            // oracle: recompute the weighted sum from scratch
            let sum: f64 = p.iter().zip(spec.lipschitz()).map(|(a, l)| a.abs() * l).sum();
            prop_assert!(spec.weighted_sum(&p) <= spec.bound());
            if spec.weighted_sum(&w) > 1.0 - eps {
                prop_assert!((sum - (1.0 - eps)).abs() < 1e-12);
            }
        }

        #[test]
        fn projection_is_idempotent_and_direction_preserving(w in prop::collection::vec(-5.0f64..5.0, 1..12), eps in 0.001f64..0.9) {
            let spec = FeasibleSpec::new(eps, vec![1.0; w.len()]).unwrap();
            let p = spec.project(&w);
            let pp = spec.project(&p);
            for (a, b) in p.iter().zip(&pp) {
                prop_assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
            }
            // p = s w with s in (0, 1]
            let s = spec.bound() / spec.weighted_sum(&w).max(spec.bound());
            for (a, b) in p.iter().zip(&w) {
                prop_assert!((a - s * b).abs() <= 1e-15 * b.abs().max(1.0));
            }
            prop_assert!(spec.is_feasible(&p));
        }

        #[test]
        fn positive_homogeneity(w in prop::collection::vec(-1.0f64..1.0, 4), t in 0.1f64..10.0) {
            let spec = FeasibleSpec::new(0.05, vec![1.0, 2.0, 0.5, 1.5]).unwrap();
            let a = spec.project(&w);
            let scaled: Vec<f64> = w.iter().map(|v| v * t).collect();
            let b = spec.project(&scaled);
            let sa = spec.weighted_sum(&a);
            let sb = spec.weighted_sum(&b);
            // directions agree
            if sa > 1e-12 && sb > 1e-12 {
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!((x / sa - y / sb).abs() < 1e-9);
                }
            }
        }
    }
}
