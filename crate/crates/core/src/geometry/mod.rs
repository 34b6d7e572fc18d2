//! Sampled curves and surfaces on uniform grids, finite-difference
//! derivatives, continuous interpolants and image ingestion.

mod csv_io;
mod curve;
mod image;
mod interp;
mod stencil;
mod surface;

pub use csv_io::{read_curve_csv, read_surface_csv, write_curve_csv, write_surface_csv};
pub use curve::SampledCurve;
pub use image::{lift_image, parse_pgm, read_pgm, write_pgm, GrayImage};
pub use interp::{BicubicConvolution, Border, CubicSpline, Interpolant};
pub use stencil::uniform_derivative;
pub use surface::{AreaField, Partials, SampledSurface};

/// Speeds and area factors at or below this value are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Smallest number of nodes per axis accepted by any sampled shape.
pub const MIN_NODES: usize = 4;

/// Parameter value of node `k` on a closed uniform grid of `n` nodes over [0, 1].
#[inline]
pub fn node(k: usize, n: usize) -> f64 {
    k as f64 / (n - 1) as f64
}

/// Locate `t` on a uniform grid of `n` nodes: returns the cell index `i`
/// (with `i <= n - 2`) and the offset `u` in [0, 1] inside the cell.
///
/// Values within a few ulps of a node snap onto it so that evaluation at
/// grid nodes reproduces the samples bit-for-bit.
#[inline]
pub(crate) fn locate(t: f64, n: usize) -> (usize, f64) {
    let last = (n - 1) as f64;
    let mut s = (t * last).clamp(0.0, last);
    let r = s.round();
    if (s - r).abs() <= 8.0 * f64::EPSILON * r.max(1.0) {
        s = r;
    }
    let i = (s.floor() as usize).min(n - 2);
    (i, s - i as f64)
}
