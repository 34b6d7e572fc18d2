/// Second-order derivative of uniformly spaced samples at index `k`.
///
/// Central differences in the interior and one-sided three-point stencils
/// at both ends. `at(i)` returns sample `i`; `n >= 3`.
#[inline]
pub fn uniform_derivative(n: usize, h: f64, k: usize, at: impl Fn(usize) -> f64) -> f64 {
    debug_assert!(n >= 3);
    if k == 0 {
        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
    } else if k == n - 1 {
        (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
    } else {
        (at(k + 1) - at(k - 1)) / (2.0 * h)
    }
}
