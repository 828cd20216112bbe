//! Fourier transforms with the Minkowski pairing <xi; x> = xi1 x1 - xi2 x2.
//!
//! Forward: (F φ)(xi) = (1/2π) ∫ e^{ i<xi;x>} φ(x) dx.
//! Inverse: (F⁻¹ψ)(x) = (1/2π) ∫ e^{-i<xi;x>} ψ(xi) dxi.
//!
//! On the lattice x_j = -L + j h (h = 2L/n, n even, origin included) the
//! forward transform is the plus-sign Euclidean transform evaluated at
//! (-xi1, xi2); we compute the Euclidean table with FFTs and permute the
//! first frequency axis, so the stated relation holds bitwise. The dual
//! lattice is xi_k = (k - n/2) h_xi with h_xi = π/L; since h h_xi = 2π/n the
//! lattice phases reduce to (-1)^{j+k} checkerboards (the per-axis constant
//! i^n squares to one in 2D).
//!
//! With these conventions mft/imft are exact mutual inverses on the lattice
//! and Parseval holds to round-off; truncation of the continuum only enters
//! through sampling.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{PncError, Result};
use crate::grid::GroupFunction;
use crate::interp::{eval2, Axis};

/// Samples on the uniform lattice [-half, half)², row-major in (x1, x2).
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneFunction {
    pub n: usize,
    pub half: f64,
    pub values: Vec<Complex64>,
}

impl PlaneFunction {
    pub fn new(n: usize, half: f64, values: Vec<Complex64>) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(PncError::NonCompatibleGrid(format!(
                "plane lattice needs an even node count, got {n}"
            )));
        }
        if !(half > 0.0) {
            return Err(PncError::NonCompatibleGrid("nonpositive box".into()));
        }
        if values.len() != n * n {
            return Err(PncError::NonCompatibleGrid(format!(
                "value count {} vs lattice {n}x{n}",
                values.len()
            )));
        }
        Ok(PlaneFunction { n, half, values })
    }

    pub fn from_fn<F>(n: usize, half: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let mut values = Vec::with_capacity(n * n);
        let h = 2.0 * half / n as f64;
        for j1 in 0..n {
            let x1 = -half + j1 as f64 * h;
            for j2 in 0..n {
                let x2 = -half + j2 as f64 * h;
                values.push(f(x1, x2));
            }
        }
        PlaneFunction::new(n, half, values)
    }

    pub fn zero(n: usize, half: f64) -> Result<Self> {
        PlaneFunction::new(n, half, vec![Complex64::new(0.0, 0.0); n * n])
    }

    #[inline]
    pub fn h(&self) -> f64 {
        2.0 * self.half / self.n as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        -self.half + j as f64 * self.h()
    }

    /// Spacing of the dual lattice, π / half.
    #[inline]
    pub fn dual_spacing(&self) -> f64 {
        std::f64::consts::PI / self.half
    }

    /// Half-extent of the dual lattice, n π / (2 half).
    #[inline]
    pub fn dual_half(&self) -> f64 {
        self.n as f64 / 2.0 * self.dual_spacing()
    }

    pub fn axis(&self) -> Axis {
        Axis::new(-self.half, self.h(), self.n)
    }

    /// L² norm with lattice weight h².
    pub fn l2_norm(&self) -> f64 {
        let h2 = self.h() * self.h();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * h2).sqrt()
    }

    /// Largest |value| on the boundary ring relative to the overall maximum.
    /// The transforms assume this is small; callers that care should check.
    pub fn boundary_decay_ratio(&self) -> f64 {
        let n = self.n;
        let mut all = 0.0f64;
        for v in &self.values {
            all = all.max(v.norm());
        }
        if all == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0f64;
        for j in 0..n {
            for idx in [j, (n - 1) * n + j, j * n, j * n + n - 1] {
                edge = edge.max(self.values[idx].norm());
            }
        }
        edge / all
    }
}

fn same_lattice(a: &PlaneFunction, b: &PlaneFunction) -> Result<()> {
    if a.n != b.n || a.half != b.half {
        return Err(PncError::NonCompatibleGrid(format!(
            "{}x{} on ±{} vs {}x{} on ±{}",
            a.n, a.n, a.half, b.n, b.n, b.half
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum FftDir {
    /// e^{+2πi jk/n} (rustfft "inverse", unnormalized)
    Plus,
    /// e^{-2πi jk/n} (rustfft "forward")
    Minus,
}

/// Unnormalized 2D FFT on an n×n row-major buffer, with possibly different
/// phase signs per axis (axis 0 = rows index, axis 1 = within-row index).
fn fft2_mixed(values: &mut [Complex64], n: usize, dir_axis0: FftDir, dir_axis1: FftDir) {
    let mut planner = FftPlanner::new();
    let plan = |p: &mut FftPlanner<f64>, d: FftDir| match d {
        FftDir::Plus => p.plan_fft_inverse(n),
        FftDir::Minus => p.plan_fft_forward(n),
    };
    // Axis 1: contiguous rows.
    let fft1 = plan(&mut planner, dir_axis1);
    for row in values.chunks_mut(n) {
        fft1.process(row);
    }
    // Axis 0 via transpose.
    let fft0 = plan(&mut planner, dir_axis0);
    let mut t = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = values[i * n + j];
        }
    }
    for row in t.chunks_mut(n) {
        fft0.process(row);
    }
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = t[j * n + i];
        }
    }
}

fn fft2(values: &mut [Complex64], n: usize, dir: FftDir) {
    fft2_mixed(values, n, dir, dir);
}

#[inline]
fn checker(k1: usize, k2: usize) -> f64 {
    if (k1 + k2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Euclidean transform (1/2π) ∫ e^{-i xi·x} φ(x) dx on the dual lattice.
pub fn euclid_ft(phi: &PlaneFunction) -> PlaneFunction {
    let n = phi.n;
    let mut buf: Vec<Complex64> = phi
        .values
        .iter()
        .enumerate()
        .map(|(idx, v)| v * checker(idx / n, idx % n))
        .collect();
    fft2(&mut buf, n, FftDir::Minus);
    let scale = phi.h() * phi.h() / (2.0 * std::f64::consts::PI);
    for (idx, v) in buf.iter_mut().enumerate() {
        *v *= scale * checker(idx / n, idx % n);
    }
    PlaneFunction {
        n,
        half: phi.dual_half(),
        values: buf,
    }
}

/// Flip the first frequency axis in place: xi1 ↦ -xi1 on the dual lattice
/// (index k ↦ (n-k) mod n; the edge frequency is its own alias).
fn flip_axis1(f: &PlaneFunction) -> PlaneFunction {
    let n = f.n;
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    for k1 in 0..n {
        let src = (n - k1) % n;
        values[k1 * n..(k1 + 1) * n].copy_from_slice(&f.values[src * n..(src + 1) * n]);
    }
    PlaneFunction {
        n,
        half: f.half,
        values,
    }
}

/// Minkowski–Fourier transform (1/2π) ∫ e^{+i<xi;x>} φ(x) dx: the Euclidean
/// table read at (-xi1, xi2), bitwise.
pub fn mft(phi: &PlaneFunction) -> PlaneFunction {
    flip_axis1(&euclid_ft(phi))
}

/// Inverse Minkowski–Fourier transform; exact inverse of [`mft`] on the
/// lattice up to round-off.
///
/// The kernel e^{-i<xi;x>} = e^{-i xi1 x1} e^{+i xi2 x2} has opposite signs
/// on the two axes, so this is a mixed transform: minus-phase FFT along the
/// first axis, plus-phase along the second.
pub fn imft(psi: &PlaneFunction) -> PlaneFunction {
    let n = psi.n;
    let mut buf: Vec<Complex64> = psi
        .values
        .iter()
        .enumerate()
        .map(|(idx, v)| v * checker(idx / n, idx % n))
        .collect();
    fft2_mixed(&mut buf, n, FftDir::Minus, FftDir::Plus);
    let h_xi = psi.h();
    let scale = h_xi * h_xi / (2.0 * std::f64::consts::PI);
    for (idx, v) in buf.iter_mut().enumerate() {
        *v *= scale * checker(idx / n, idx % n);
    }
    PlaneFunction {
        n,
        half: psi.dual_half(),
        values: buf,
    }
}

/// Minkowski transform along the b plane of a group function, slab by slab.
///
/// The table lives on the dual lattice of the (optionally zero-padded)
/// b lattice; padding by `oversample` leaves the frequency range unchanged
/// and divides the frequency spacing, which is what the kernel
/// interpolation wants.
#[derive(Clone, Debug)]
pub struct BFourierTable {
    /// Padded lattice size (oversample * n_b).
    pub n: usize,
    /// Dual spacing π / (oversample * b_half).
    pub h_xi: f64,
    pub n_a: usize,
    pub n_phi: usize,
    pub d_loga: f64,
    pub d_phi: f64,
    /// Slab-major values: ((ia, iphi), k1, k2).
    pub values: Vec<Complex64>,
}

impl BFourierTable {
    #[inline]
    pub fn xi(&self, k: usize) -> f64 {
        (k as f64 - self.n as f64 / 2.0) * self.h_xi
    }

    pub fn axis(&self) -> Axis {
        Axis::new(
            -(self.n as f64) / 2.0 * self.h_xi,
            self.h_xi,
            self.n,
        )
    }

    pub fn slab(&self, ia: usize, iphi: usize) -> &[Complex64] {
        let len = self.n * self.n;
        let start = (ia * self.n_phi + iphi) * len;
        &self.values[start..start + len]
    }

    /// Cubic interpolation of one slab at a plane point, zero outside.
    pub fn eval(&self, ia: usize, iphi: usize, x: [f64; 2]) -> Complex64 {
        let ax = self.axis();
        eval2(&ax, &ax, self.slab(ia, iphi), x[0], x[1])
    }
}

/// F₁ table of `f`: the 2D [`mft`] of every (log a, phi) slab.
pub fn mft1_group(f: &GroupFunction) -> BFourierTable {
    mft1_group_oversampled(f, 1)
}

pub fn mft1_group_oversampled(f: &GroupFunction, oversample: usize) -> BFourierTable {
    let grid = &f.grid;
    let n_b = grid.n_b;
    let n = n_b * oversample.max(1);
    let pad = (n - n_b) / 2;
    let n_slabs = grid.n_slabs();
    let slab_len = n * n;

    let mut values = vec![Complex64::new(0.0, 0.0); n_slabs * slab_len];
    crate::exec::for_each_row(&mut values, slab_len, |slab_idx, out| {
        let ia = slab_idx / grid.n_phi;
        let iphi = slab_idx % grid.n_phi;
        let src = f.slab(ia, iphi);
        // Zero-padded copy with the sign checkerboard applied.
        for j1 in 0..n_b {
            for j2 in 0..n_b {
                out[(j1 + pad) * n + (j2 + pad)] =
                    src[j1 * n_b + j2] * checker(j1 + pad, j2 + pad);
            }
        }
        fft2(out, n, FftDir::Minus);
        let scale = grid.h_b * grid.h_b / (2.0 * std::f64::consts::PI);
        for (idx, v) in out.iter_mut().enumerate() {
            *v *= scale * checker(idx / n, idx % n);
        }
        // xi1 ↦ -xi1 permutation, row by row.
        for k1 in 1..n / 2 {
            let (a, b) = (k1, n - k1);
            for k2 in 0..n {
                out.swap(a * n + k2, b * n + k2);
            }
        }
    });

    BFourierTable {
        n,
        h_xi: std::f64::consts::PI / (grid.b_half * oversample.max(1) as f64),
        n_a: grid.n_a,
        n_phi: grid.n_phi,
        d_loga: grid.d_loga,
        d_phi: grid.d_phi,
        values,
    }
}

/// Conjugate-phase variant: (1/2π) Σ_b e^{-i<x;b>} f(b) h², i.e. the inverse
/// Minkowski transform applied to lattice samples. Equals the forward table
/// read at -x, so it shares the whole floating path with [`mft1_group`].
pub fn mft1_group_conj_oversampled(f: &GroupFunction, oversample: usize) -> BFourierTable {
    let mut table = mft1_group_oversampled(f, oversample);
    let n = table.n;
    let slab_len = n * n;
    for slab in table.values.chunks_mut(slab_len) {
        // x ↦ -x on the dual lattice: k ↦ (n-k) mod n in both axes.
        let copy = slab.to_vec();
        for k1 in 0..n {
            let s1 = (n - k1) % n;
            for k2 in 0..n {
                slab[k1 * n + k2] = copy[s1 * n + (n - k2) % n];
            }
        }
    }
    table
}

/// Inverse of [`mft1_group`]: 2D [`imft`] of each slab of a table back onto
/// the group grid (only defined for unpadded tables).
pub fn imft1_group(table: &BFourierTable, like: &GroupFunction) -> Result<GroupFunction> {
    let grid = &like.grid;
    if table.n != grid.n_b || table.n_a != grid.n_a || table.n_phi != grid.n_phi {
        return Err(PncError::NonCompatibleGrid(
            "table shape does not match the grid".into(),
        ));
    }
    let n = grid.n_b;
    let mut out = GroupFunction::zero(grid.clone());
    let slab_len = n * n;
    let dual_half = n as f64 / 2.0 * table.h_xi;
    crate::exec::for_each_row(&mut out.values, slab_len, |slab_idx, dst| {
        let ia = slab_idx / grid.n_phi;
        let iphi = slab_idx % grid.n_phi;
        let spectrum = PlaneFunction {
            n,
            half: dual_half,
            values: table.slab(ia, iphi).to_vec(),
        };
        let back = imft(&spectrum);
        dst.copy_from_slice(&back.values);
    });
    Ok(out)
}

/// The twisting change of variables (Tφ)(t1, t2) = φ(t1 + t2/2, t1 - t2/2),
/// evaluated by separable cubic interpolation (half-lattice points).
pub fn twist(phi: &PlaneFunction) -> PlaneFunction {
    let n = phi.n;
    let ax = phi.axis();
    let mut values = Vec::with_capacity(n * n);
    for j1 in 0..n {
        let t1 = phi.node(j1);
        for j2 in 0..n {
            let t2 = phi.node(j2);
            values.push(eval2(
                &ax,
                &ax,
                &phi.values,
                t1 + 0.5 * t2,
                t1 - 0.5 * t2,
            ));
        }
    }
    PlaneFunction {
        n,
        half: phi.half,
        values,
    }
}

/// Pointwise linear combination a f + b g on a shared lattice.
pub fn plane_axpy(
    a: Complex64,
    f: &PlaneFunction,
    b: Complex64,
    g: &PlaneFunction,
) -> Result<PlaneFunction> {
    same_lattice(f, g)?;
    let values = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(x, y)| a * x + b * y)
        .collect();
    Ok(PlaneFunction {
        n: f.n,
        half: f.half,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ChartGeometry;
    use crate::grid::GroupGrid;
    use crate::group::minkowski;

    fn gaussian_plane(n: usize, half: f64) -> PlaneFunction {
        PlaneFunction::from_fn(n, half, |x, y| {
            Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.0)
        })
        .unwrap()
    }

    /// Direct O(n⁴) quadrature of the Euclidean transform; the independent
    /// oracle for the FFT path.
    fn euclid_ft_direct(phi: &PlaneFunction) -> PlaneFunction {
        let n = phi.n;
        let h = phi.h();
        let h_xi = phi.dual_spacing();
        let mut values = vec![Complex64::new(0.0, 0.0); n * n];
        for k1 in 0..n {
            let xi1 = (k1 as f64 - n as f64 / 2.0) * h_xi;
            for k2 in 0..n {
                let xi2 = (k2 as f64 - n as f64 / 2.0) * h_xi;
                let mut acc = Complex64::new(0.0, 0.0);
                for j1 in 0..n {
                    let x1 = phi.node(j1);
                    for j2 in 0..n {
                        let x2 = phi.node(j2);
                        let phase = -(xi1 * x1 + xi2 * x2);
                        acc += phi.values[j1 * n + j2] * Complex64::new(0.0, phase).exp();
                    }
                }
                values[k1 * n + k2] = acc * h * h / (2.0 * std::f64::consts::PI);
            }
        }
        PlaneFunction {
            n,
            half: phi.dual_half(),
            values,
        }
    }

    #[test]
    fn euclid_ft_matches_direct_dft_oracle() {
        let phi = PlaneFunction::from_fn(16, 4.0, |x, y| {
            Complex64::new((-(x * x + 0.7 * y * y) / 2.0).exp() * (x + 0.3), 0.2 * y)
        })
        .unwrap();
        let fast = euclid_ft(&phi);
        let slow = euclid_ft_direct(&phi);
        let scale: f64 = slow.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in fast.values.iter().zip(&slow.values) {
            assert!((a - b).norm() <= 1e-12 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn mft_and_imft_match_their_defining_sums() {
        // Direct O(n⁴) quadrature of both defining integrals with the
        // Minkowski pairing; the FFT paths must agree to round-off.
        let phi = PlaneFunction::from_fn(16, 4.0, |x, y| {
            Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.3 * x * (-(y * y)).exp())
        })
        .unwrap();
        let n = phi.n;
        let h2 = phi.h() * phi.h() / (2.0 * std::f64::consts::PI);
        let h_xi = phi.dual_spacing();

        let fast = mft(&phi);
        let mut scale = 0.0f64;
        let mut direct = vec![Complex64::new(0.0, 0.0); n * n];
        for k1 in 0..n {
            let xi1 = (k1 as f64 - n as f64 / 2.0) * h_xi;
            for k2 in 0..n {
                let xi2 = (k2 as f64 - n as f64 / 2.0) * h_xi;
                let mut acc = Complex64::new(0.0, 0.0);
                for j1 in 0..n {
                    for j2 in 0..n {
                        let x = [phi.node(j1), phi.node(j2)];
                        acc += phi.values[j1 * n + j2]
                            * Complex64::new(0.0, minkowski([xi1, xi2], x)).exp();
                    }
                }
                direct[k1 * n + k2] = acc * h2;
                scale = scale.max(acc.norm() * h2);
            }
        }
        for (a, b) in fast.values.iter().zip(&direct) {
            assert!((a - b).norm() <= 1e-12 * scale, "mft: {a} vs {b}");
        }

        // Same for the inverse on the transformed data.
        let psi = fast;
        let back = imft(&psi);
        let g2 = psi.h() * psi.h() / (2.0 * std::f64::consts::PI);
        for j1 in (0..n).step_by(3) {
            for j2 in (0..n).step_by(3) {
                let x = [back.node(j1), back.node(j2)];
                let mut acc = Complex64::new(0.0, 0.0);
                for k1 in 0..n {
                    for k2 in 0..n {
                        let xi = [psi.node(k1), psi.node(k2)];
                        acc += psi.values[k1 * n + k2]
                            * Complex64::new(0.0, -minkowski(xi, x)).exp();
                    }
                }
                let want = acc * g2;
                let got = back.values[j1 * n + j2];
                assert!((got - want).norm() <= 1e-12, "imft ({j1},{j2}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn mft_is_the_flipped_euclidean_table() {
        let phi = PlaneFunction::from_fn(32, 8.0, |x, y| {
            Complex64::new((-(x * x + y * y) / 3.0).exp(), 0.1 * x * y * (-(x * x + y * y) / 4.0).exp())
        })
        .unwrap();
        let m = mft(&phi);
        let e = euclid_ft(&phi);
        let n = phi.n;
        for k1 in 0..n {
            for k2 in 0..n {
                let src = ((n - k1) % n) * n + k2;
                assert_eq!(m.values[k1 * n + k2], e.values[src]);
            }
        }
    }

    #[test]
    fn gaussian_maps_to_gaussian() {
        let phi = gaussian_plane(32, 8.0);
        let hat = mft(&phi);
        let mut err2 = 0.0;
        let mut ref2 = 0.0;
        for k1 in 0..hat.n {
            let xi1 = hat.node(k1);
            for k2 in 0..hat.n {
                let xi2 = hat.node(k2);
                let want = (-(xi1 * xi1 + xi2 * xi2) / 2.0).exp();
                let got = hat.values[k1 * hat.n + k2];
                err2 += (got - want).norm_sqr();
                ref2 += want * want;
            }
        }
        let rel = (err2 / ref2).sqrt();
        assert!(rel <= 1e-8, "rel L2 err {rel}");
    }

    #[test]
    fn mft_imft_round_trip_is_exact() {
        let phi = PlaneFunction::from_fn(32, 8.0, |x, y| {
            Complex64::new((-(x * x + y * y) / 2.5).exp(), (0.3 * x).sin() * (-(y * y) / 3.0).exp())
        })
        .unwrap();
        let back = imft(&mft(&phi));
        let scale = phi.l2_norm();
        let mut err2 = 0.0;
        for (a, b) in back.values.iter().zip(&phi.values) {
            err2 += (a - b).norm_sqr();
        }
        let rel = (err2.sqrt() * phi.h()) / scale;
        assert!(rel <= 1e-13, "round trip rel err {rel}");
    }

    #[test]
    fn imft_of_plane_wave_is_a_discrete_delta() {
        let n = 16;
        let half = 4.0;
        let proto = PlaneFunction::zero(n, half).unwrap();
        let h_xi = proto.dual_spacing();
        let dual_half = proto.dual_half();
        // Target node m on the primal lattice.
        let (m1, m2) = (5usize, 11usize);
        let xm = [proto.node(m1), proto.node(m2)];
        let psi = PlaneFunction::from_fn(n, dual_half, |xi1, xi2| {
            Complex64::new(0.0, minkowski([xi1, xi2], xm)).exp()
        })
        .unwrap();
        let back = imft(&psi);
        let peak = n as f64 * n as f64 * h_xi * h_xi / (2.0 * std::f64::consts::PI);
        for j1 in 0..n {
            for j2 in 0..n {
                let v = back.values[j1 * n + j2];
                if (j1, j2) == (m1, m2) {
                    assert!((v.re - peak).abs() <= 1e-10 * peak && v.im.abs() <= 1e-10 * peak);
                } else {
                    assert!(v.norm() <= 1e-10 * peak, "({j1},{j2}) -> {v}");
                }
            }
        }
    }

    #[test]
    fn linearity_and_parseval() {
        let f = gaussian_plane(32, 8.0);
        let g = PlaneFunction::from_fn(32, 8.0, |x, y| {
            Complex64::new(0.0, (-(x - 1.0) * (x - 1.0) / 2.0 - y * y / 3.0).exp())
        })
        .unwrap();
        let a = Complex64::new(0.7, -0.2);
        let b = Complex64::new(-0.3, 0.5);
        let lhs = mft(&plane_axpy(a, &f, b, &g).unwrap());
        let rhs = plane_axpy(a, &mft(&f), b, &mft(&g)).unwrap();
        let scale = lhs.l2_norm();
        for (x, y) in lhs.values.iter().zip(&rhs.values) {
            assert!((x - y).norm() <= 1e-12 * scale);
        }

        let rel = (mft(&f).l2_norm() - f.l2_norm()).abs() / f.l2_norm();
        assert!(rel <= 1e-10, "Parseval rel err {rel}");
    }

    fn small_group() -> GroupFunction {
        let chart = ChartGeometry::new(-2.0, 2.0, 8, -2.0, 2.0, 8).unwrap();
        let grid = GroupGrid::aligned(&chart, 6.0, 16, 6, 6).unwrap();
        GroupFunction::from_fn(grid, |b, la, ph| {
            Complex64::new(
                (-(b[0] * b[0] + 0.8 * b[1] * b[1]) / 3.0 - la * la / 0.2 - ph * ph / 0.3).exp(),
                0.0,
            ) * Complex64::new(0.0, 0.4 * b[0]).exp()
        })
    }

    #[test]
    fn mft1_is_separable_and_parseval_per_slab() {
        let f = small_group();
        let grid = f.grid.clone();
        let table = mft1_group(&f);

        // Separability oracle: f = g(b) h(la, ph), so each slab transform is
        // mft(g) scaled by h(la, ph).
        let gplane = PlaneFunction::from_fn(grid.n_b, grid.b_half, |x, y| {
            Complex64::new((-(x * x + 0.8 * y * y) / 3.0).exp(), 0.0)
                * Complex64::new(0.0, 0.4 * x).exp()
        })
        .unwrap();
        let ghat = mft(&gplane);
        let scale: f64 = ghat.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for ia in 0..grid.n_a {
            let la = grid.loga(ia);
            for ip in 0..grid.n_phi {
                let ph = grid.phi(ip);
                let hfac = (-la * la / 0.2 - ph * ph / 0.3).exp();
                let slab = table.slab(ia, ip);
                for (k, want) in ghat.values.iter().enumerate() {
                    assert!(
                        (slab[k] - want * hfac).norm() <= 1e-12 * scale,
                        "slab ({ia},{ip}) k={k}"
                    );
                }
                // Per-slab Parseval.
                let src = f.slab(ia, ip);
                let lhs: f64 =
                    slab.iter().map(|v| v.norm_sqr()).sum::<f64>() * table.h_xi * table.h_xi;
                let rhs: f64 =
                    src.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.h_b * grid.h_b;
                if rhs > 0.0 {
                    assert!((lhs - rhs).abs() <= 1e-12 * rhs);
                }
            }
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let grid = small_group().grid;
        let z = GroupFunction::zero(grid);
        let table = mft1_group(&z);
        assert!(table.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn oversampled_table_refines_the_dual_lattice() {
        let f = small_group();
        let t1 = mft1_group(&f);
        let t2 = mft1_group_oversampled(&f, 2);
        assert_eq!(t2.n, 2 * t1.n);
        assert!((t2.h_xi - 0.5 * t1.h_xi).abs() < 1e-15);
        // Even output nodes of the padded table coincide with the coarse one.
        let scale: f64 = t1.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (k1, k2) in [(3usize, 7usize), (8, 2), (12, 12)] {
            let coarse = t1.slab(2, 3)[k1 * t1.n + k2];
            let fine = t2.slab(2, 3)[(2 * k1) * t2.n + 2 * k2];
            assert!((coarse - fine).norm() <= 1e-12 * scale, "{coarse} vs {fine}");
        }
    }

    #[test]
    fn conj_table_is_the_transform_at_minus_x() {
        let f = small_group();
        let fwd = mft1_group(&f);
        let conj = mft1_group_conj_oversampled(&f, 1);
        let n = fwd.n;
        for (k1, k2) in [(1usize, 5usize), (9, 3), (0, 0)] {
            let a = conj.slab(1, 4)[k1 * n + k2];
            let b = fwd.slab(1, 4)[((n - k1) % n) * n + (n - k2) % n];
            assert_eq!(a, b);
        }
    }

    #[test]
    fn imft1_inverts_the_slab_transform() {
        let f = small_group();
        let table = mft1_group(&f);
        let back = imft1_group(&table, &f).unwrap();
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for (a, b) in back.values.iter().zip(&f.values) {
            err = err.max((a - b).norm());
            scale = scale.max(b.norm());
        }
        assert!(err <= 1e-13 * scale, "max err {err}");
    }

    #[test]
    fn twist_fixes_constants_and_affine_data() {
        // The evaluation point (t1 + t2/2, t1 - t2/2) leaves the box for
        // extreme node pairs, so exactness claims apply where it stays
        // safely inside (two cells from the edge for the 4-point stencil).
        let inside = |f: &PlaneFunction, j1: usize, j2: usize| {
            let (t1, t2) = (f.node(j1), f.node(j2));
            let lim = f.half - 2.5 * f.h();
            (t1 + 0.5 * t2).abs() < lim && (t1 - 0.5 * t2).abs() < lim
        };

        let c = PlaneFunction::from_fn(32, 8.0, |_, _| Complex64::new(2.5, -1.0)).unwrap();
        let tc = twist(&c);
        let mut checked = 0;
        for j1 in 0..32 {
            for j2 in 0..32 {
                if inside(&c, j1, j2) {
                    assert!((tc.values[j1 * 32 + j2] - Complex64::new(2.5, -1.0)).norm() < 1e-12);
                    checked += 1;
                }
            }
        }
        assert!(checked > 200);

        let aff = PlaneFunction::from_fn(32, 8.0, |u, v| Complex64::new(u + v, 0.0)).unwrap();
        let ta = twist(&aff);
        for j1 in 0..32 {
            for j2 in 0..32 {
                if !inside(&aff, j1, j2) {
                    continue;
                }
                let t1 = aff.node(j1);
                let got = ta.values[j1 * 32 + j2];
                assert!(
                    (got.re - 2.0 * t1).abs() <= 1e-10,
                    "({j1},{j2}): {} vs {}",
                    got.re,
                    2.0 * t1
                );
            }
        }
    }

    #[test]
    fn twist_preserves_gaussian_norm() {
        // Width chosen so the sheared support stays inside the box
        // (|t2| = |u - v| reaches sqrt(2)·4σ); the lattice must resolve the
        // Gaussian well since the defect is pure interpolation error O(h⁴).
        let phi = PlaneFunction::from_fn(128, 8.0, |x, y| {
            Complex64::new((-(x * x + y * y) / 4.5).exp(), 0.0)
        })
        .unwrap();
        let t = twist(&phi);
        let rel = (t.l2_norm() - phi.l2_norm()).abs() / phi.l2_norm();
        assert!(rel <= 1e-6, "norm rel err {rel}");
    }
}
