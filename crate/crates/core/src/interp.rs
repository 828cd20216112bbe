//! Separable four-point cubic (Lagrange) interpolation on uniform grids.
//!
//! Samples outside the tabulated range count as zero. The weights are the
//! Lagrange basis on the four nearest nodes, so nodal values reproduce
//! exactly, cubic polynomials are exact away from the support boundary, and
//! the scheme is fourth-order on smooth data. Summed over a full lattice the
//! per-cell quadrature weights telescope to the plain lattice sum (unit
//! mass), which the left-invariance checks rely on.

use num_complex::Complex64;

/// Weights for the four samples at integer offsets (-1, 0, 1, 2) around the
/// base node, with `u` in [0, 1) the fractional position past the base.
#[inline]
pub fn cubic_weights(u: f64) -> [f64; 4] {
    let um = u - 1.0;
    let up = u + 1.0;
    let u2m = u - 2.0;
    [
        -u * um * u2m / 6.0,
        up * um * u2m / 2.0,
        -up * u * u2m / 2.0,
        up * u * um / 6.0,
    ]
}

/// A uniform sampling axis `x_k = x0 + k * dx`, `k = 0..n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(x0: f64, dx: f64, n: usize) -> Self {
        Axis { x0, dx, n }
    }

    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        self.x0 + self.dx * k as f64
    }

    /// Stencil for evaluating at `x`: base index and the four weights.
    #[inline]
    pub fn stencil(&self, x: f64) -> Stencil1 {
        let t = (x - self.x0) / self.dx;
        let base = t.floor();
        let u = t - base;
        Stencil1 {
            base: base as isize,
            w: cubic_weights(u),
        }
    }

    /// Gather a value from `row` (length `n`) using `st`, zero outside.
    #[inline]
    pub fn gather(&self, row: &[Complex64], st: &Stencil1) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &w) in st.w.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let idx = st.base - 1 + j as isize;
            if idx >= 0 && (idx as usize) < self.n {
                acc += row[idx as usize] * w;
            }
        }
        acc
    }
}

/// One-dimensional cubic stencil: base node index plus four weights for
/// offsets (-1, 0, 1, 2).
#[derive(Clone, Copy, Debug)]
pub struct Stencil1 {
    pub base: isize,
    pub w: [f64; 4],
}

impl Stencil1 {
    /// Indices and weights of the active (in-range, nonzero) taps.
    pub fn taps(&self, n: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..4usize).filter_map(move |j| {
            let idx = self.base - 1 + j as isize;
            let w = self.w[j];
            if w != 0.0 && idx >= 0 && (idx as usize) < n {
                Some((idx as usize, w))
            } else {
                None
            }
        })
    }
}

/// Evaluate a row-major 2D table `data[i * axis1.n + j]` at `(x0, x1)`.
pub fn eval2(axis0: &Axis, axis1: &Axis, data: &[Complex64], x0: f64, x1: f64) -> Complex64 {
    let s0 = axis0.stencil(x0);
    let s1 = axis1.stencil(x1);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, wi) in s0.taps(axis0.n) {
        let row = &data[i * axis1.n..(i + 1) * axis1.n];
        let mut racc = Complex64::new(0.0, 0.0);
        for (j, wj) in s1.taps(axis1.n) {
            racc += row[j] * wj;
        }
        acc += racc * wi;
    }
    acc
}
