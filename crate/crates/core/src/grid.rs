//! Tensor grid over the group with left-Haar quadrature weights.
//!
//! Coordinates are (b1, b2, log a, phi). The b plane is the FFT lattice
//! b_j = -L + j h on [-L, L)² (even node count, origin included). The log a
//! and phi nodes are *integer multiples* of their spacings; when those
//! spacings equal the chart spacings (see [`GroupGrid::aligned`]) every grid
//! (a, phi) pair acts on a chart by an exact index shift.
//!
//! Left Haar measure: db da dphi / a³ = db d(log a) dphi / a², so the node
//! weight is h² Δ(log a) Δphi / a².

use num_complex::Complex64;

use crate::cone::ChartGeometry;
use crate::error::{PncError, Result};
use crate::exec;
use crate::group::{GroupElement, Vec2};
use crate::interp::{cubic_weights, Axis};

#[derive(Clone, Debug, PartialEq)]
pub struct GroupGrid {
    pub b_half: f64,
    pub n_b: usize,
    pub h_b: f64,
    pub d_loga: f64,
    pub n_a: usize,
    pub d_phi: f64,
    pub n_phi: usize,
}

impl GroupGrid {
    pub fn new(
        b_half: f64,
        n_b: usize,
        d_loga: f64,
        n_a: usize,
        d_phi: f64,
        n_phi: usize,
    ) -> Result<Self> {
        if n_b < 2 || n_b % 2 != 0 {
            return Err(PncError::BadParams(format!(
                "b lattice needs an even node count >= 2 (origin on the grid), got {n_b}"
            )));
        }
        if n_a < 2 || n_phi < 2 {
            return Err(PncError::BadParams(
                "need at least 2 nodes per group axis".into(),
            ));
        }
        if !(b_half > 0.0) || !(d_loga > 0.0) || !(d_phi > 0.0) {
            return Err(PncError::BadParams("nonpositive grid spacing".into()));
        }
        Ok(GroupGrid {
            b_half,
            n_b,
            h_b: 2.0 * b_half / n_b as f64,
            d_loga,
            n_a,
            d_phi,
            n_phi,
        })
    }

    /// Grid whose (log a, phi) spacings are copied from a chart geometry, so
    /// every grid (a, phi) acts on that chart by exact index shifts.
    pub fn aligned(
        chart: &ChartGeometry,
        b_half: f64,
        n_b: usize,
        n_a: usize,
        n_phi: usize,
    ) -> Result<Self> {
        GroupGrid::new(b_half, n_b, chart.d_logs, n_a, chart.d_t, n_phi)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_b * self.n_b * self.n_a * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn n_slabs(&self) -> usize {
        self.n_a * self.n_phi
    }

    #[inline]
    pub fn b(&self, j: usize) -> f64 {
        -self.b_half + j as f64 * self.h_b
    }

    #[inline]
    pub fn loga(&self, k: usize) -> f64 {
        (k as isize - (self.n_a / 2) as isize) as f64 * self.d_loga
    }

    #[inline]
    pub fn phi(&self, k: usize) -> f64 {
        (k as isize - (self.n_phi / 2) as isize) as f64 * self.d_phi
    }

    /// Flat index, slab-major: ((ia, iphi), b1, b2).
    #[inline]
    pub fn index(&self, ia: usize, iphi: usize, j1: usize, j2: usize) -> usize {
        ((ia * self.n_phi + iphi) * self.n_b + j1) * self.n_b + j2
    }

    #[inline]
    pub fn split_index(&self, idx: usize) -> (usize, usize, usize, usize) {
        let j2 = idx % self.n_b;
        let r = idx / self.n_b;
        let j1 = r % self.n_b;
        let r = r / self.n_b;
        let iphi = r % self.n_phi;
        let ia = r / self.n_phi;
        (ia, iphi, j1, j2)
    }

    pub fn element(&self, ia: usize, iphi: usize, j1: usize, j2: usize) -> GroupElement {
        GroupElement {
            b: [self.b(j1), self.b(j2)],
            a: self.loga(ia).exp(),
            phi: self.phi(iphi),
        }
    }

    /// Left-Haar node weight h² Δ(log a) Δphi / a².
    #[inline]
    pub fn w_left(&self, ia: usize) -> f64 {
        let a = self.loga(ia).exp();
        self.h_b * self.h_b * self.d_loga * self.d_phi / (a * a)
    }

    /// Index of the identity element (b = 0, a = 1, phi = 0).
    pub fn identity_index(&self) -> (usize, usize, usize, usize) {
        (self.n_a / 2, self.n_phi / 2, self.n_b / 2, self.n_b / 2)
    }

    fn b_axis(&self) -> Axis {
        Axis::new(-self.b_half, self.h_b, self.n_b)
    }
}

/// Complex samples over a [`GroupGrid`], slab-major layout.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupFunction {
    pub grid: GroupGrid,
    pub values: Vec<Complex64>,
}

impl GroupFunction {
    pub fn new(grid: GroupGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(PncError::BadParams(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(PncError::BadParams("non-finite sample".into()));
        }
        Ok(GroupFunction { grid, values })
    }

    pub fn zero(grid: GroupGrid) -> Self {
        let n = grid.len();
        GroupFunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Sample `f(b, log a, phi)` at every node.
    pub fn from_fn<F>(grid: GroupGrid, f: F) -> Self
    where
        F: Fn(Vec2, f64, f64) -> Complex64 + Sync,
    {
        let n_phi = grid.n_phi;
        let n_b = grid.n_b;
        let slab_len = n_b * n_b;
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        exec::for_each_row(&mut values, slab_len, |slab, row| {
            let ia = slab / n_phi;
            let iphi = slab % n_phi;
            let loga = grid.loga(ia);
            let phi = grid.phi(iphi);
            for j1 in 0..n_b {
                for j2 in 0..n_b {
                    row[j1 * n_b + j2] = f([grid.b(j1), grid.b(j2)], loga, phi);
                }
            }
        });
        GroupFunction { grid, values }
    }

    #[inline]
    pub fn value(&self, ia: usize, iphi: usize, j1: usize, j2: usize) -> Complex64 {
        self.values[self.grid.index(ia, iphi, j1, j2)]
    }

    /// A slab (fixed log a, phi) as a contiguous b-plane.
    pub fn slab(&self, ia: usize, iphi: usize) -> &[Complex64] {
        let start = self.grid.index(ia, iphi, 0, 0);
        &self.values[start..start + self.grid.n_b * self.grid.n_b]
    }
}

/// Left-Haar inner product Σ F conj(G) w_L.
pub fn group_inner(f: &GroupFunction, g: &GroupFunction) -> Result<Complex64> {
    if f.grid != g.grid {
        return Err(PncError::GridMismatch);
    }
    let grid = &f.grid;
    let slab_len = grid.n_b * grid.n_b;
    let n_phi = grid.n_phi;
    Ok(exec::pairwise_sum(0, grid.len(), &|idx| {
        let ia = idx / (slab_len * n_phi);
        f.values[idx] * g.values[idx].conj() * grid.w_left(ia)
    }))
}

pub fn group_norm(f: &GroupFunction) -> f64 {
    group_inner(f, f).expect("same grid").re.max(0.0).sqrt()
}

/// Evaluate a sampled group function at arbitrary group points by separable
/// cubic interpolation (log a, then phi, then b1, then b2); zero outside.
pub struct GroupSampler<'a> {
    f: &'a GroupFunction,
    b_axis: Axis,
}

impl<'a> GroupSampler<'a> {
    pub fn new(f: &'a GroupFunction) -> Self {
        GroupSampler {
            f,
            b_axis: f.grid.b_axis(),
        }
    }

    pub fn eval(&self, g: &GroupElement) -> Complex64 {
        self.eval_coords(g.b, g.a.ln(), g.phi)
    }

    pub fn eval_coords(&self, b: Vec2, loga: f64, phi: f64) -> Complex64 {
        let grid = &self.f.grid;
        let ka = (grid.n_a / 2) as f64;
        let kp = (grid.n_phi / 2) as f64;
        let ta = loga / grid.d_loga + ka;
        let tp = phi / grid.d_phi + kp;
        let base_a = ta.floor();
        let base_p = tp.floor();
        let wa = cubic_weights(ta - base_a);
        let wp = cubic_weights(tp - base_p);
        let s1 = self.b_axis.stencil(b[0]);
        let s2 = self.b_axis.stencil(b[1]);

        let n_b = grid.n_b;
        let mut acc = Complex64::new(0.0, 0.0);
        for (da, &wia) in wa.iter().enumerate() {
            if wia == 0.0 {
                continue;
            }
            let ia = base_a as isize - 1 + da as isize;
            if ia < 0 || ia as usize >= grid.n_a {
                continue;
            }
            let mut acc_p = Complex64::new(0.0, 0.0);
            for (dp, &wip) in wp.iter().enumerate() {
                if wip == 0.0 {
                    continue;
                }
                let ip = base_p as isize - 1 + dp as isize;
                if ip < 0 || ip as usize >= grid.n_phi {
                    continue;
                }
                let slab = self.f.slab(ia as usize, ip as usize);
                let mut acc_b = Complex64::new(0.0, 0.0);
                for (i, wi) in s1.taps(n_b) {
                    let row = &slab[i * n_b..(i + 1) * n_b];
                    let mut racc = Complex64::new(0.0, 0.0);
                    for (j, wj) in s2.taps(n_b) {
                        racc += row[j] * wj;
                    }
                    acc_b += racc * wi;
                }
                acc_p += acc_b * wip;
            }
            acc += acc_p * wia;
        }
        acc
    }
}

/// F(g0⁻¹ ∗ ·) on the grid.
///
/// Evaluation strategy, most exact applicable path first:
/// * pure lattice b-shift (no dilation/rotation, b0 on the lattice):
///   index permutation, exact;
/// * (log a, phi) on the lattice: index shifts there; the b plane undergoes
///   the exact linear map (1/a0) Λ_{-phi0} (b - b0), resampled through each
///   slab's trigonometric interpolant (spectral accuracy on band-limited
///   data; no periodic wrap — points mapped off the box read zero);
/// * anything else: separable cubic interpolation at g0⁻¹ ∗ node.
///
/// Paths beyond the first require `interpolate = true`.
pub fn left_translate(
    f: &GroupFunction,
    g0: &GroupElement,
    interpolate: bool,
) -> Result<GroupFunction> {
    let grid = &f.grid;
    let loga0 = g0.a.ln();
    let (m, l) = match (
        aligned_steps(loga0, grid.d_loga),
        aligned_steps(g0.phi, grid.d_phi),
    ) {
        (Some(m), Some(l)) => (m, l),
        _ if interpolate => {
            // Fully off-lattice: cubic resampling in all four axes.
            let sampler = GroupSampler::new(f);
            let g0_inv = g0.inverse();
            let mut out = GroupFunction::zero(grid.clone());
            let n_phi = grid.n_phi;
            let n_b = grid.n_b;
            let slab_len = n_b * n_b;
            exec::for_each_row(&mut out.values, slab_len, |slab, row| {
                let (ia, ip) = (slab / n_phi, slab % n_phi);
                for j1 in 0..n_b {
                    for j2 in 0..n_b {
                        let g = grid.element(ia, ip, j1, j2);
                        row[j1 * n_b + j2] = sampler.eval(&g0_inv.compose(&g));
                    }
                }
            });
            return Ok(out);
        }
        _ => {
            return Err(PncError::NotGridAligned(format!(
                "(log a, phi) = ({loga0}, {}) off the lattice",
                g0.phi
            )))
        }
    };

    let pure_b_shift = m == 0 && l == 0;
    let b_steps = (
        aligned_steps(g0.b[0], grid.h_b),
        aligned_steps(g0.b[1], grid.h_b),
    );

    let mut out = GroupFunction::zero(grid.clone());
    if pure_b_shift {
        if let (Some(k1), Some(k2)) = b_steps {
            // Pure lattice translation: index permutation, zero off the edge.
            for ia in 0..grid.n_a {
                for ip in 0..grid.n_phi {
                    for j1 in 0..grid.n_b {
                        let src1 = j1 as isize - k1;
                        if src1 < 0 || src1 as usize >= grid.n_b {
                            continue;
                        }
                        for j2 in 0..grid.n_b {
                            let src2 = j2 as isize - k2;
                            if src2 < 0 || src2 as usize >= grid.n_b {
                                continue;
                            }
                            out.values[grid.index(ia, ip, j1, j2)] =
                                f.value(ia, ip, src1 as usize, src2 as usize);
                        }
                    }
                }
            }
            return Ok(out);
        }
    }
    if !interpolate {
        return Err(PncError::NotGridAligned(
            "translation moves the b lattice off itself; pass interpolate = true".into(),
        ));
    }

    // General aligned case: index shifts in (log a, phi); the b plane
    // undergoes the exact linear map b' = (1/a0) Λ_{-phi0} (b - b0), which we
    // evaluate through the trigonometric interpolant of each slab (the slabs
    // are band-limited up to their own aliasing, so this resamples at
    // spectral accuracy; points mapped outside the box read as zero, no
    // periodic wrap).
    let g0_inv = g0.inverse();
    let n_b = grid.n_b;
    let slab_len = n_b * n_b;
    let half = grid.b_half;
    // Precompute the mapped points once; they are the same for every slab.
    let mapped: Vec<Option<[f64; 2]>> = (0..slab_len)
        .map(|p| {
            let b = [grid.b(p / n_b), grid.b(p % n_b)];
            let s = g0_inv.compose(&GroupElement { b, a: 1.0, phi: 0.0 }).b;
            if s[0] >= -half && s[0] < half && s[1] >= -half && s[1] < half {
                Some(s)
            } else {
                None
            }
        })
        .collect();

    let mut planner = rustfft::FftPlanner::new();
    let fft = planner.plan_fft_forward(n_b);
    let out_slabs: Vec<Vec<Complex64>> = exec::map_indexed(grid.n_slabs(), |slab_idx| {
        let (ia, ip) = (slab_idx / grid.n_phi, slab_idx % grid.n_phi);
        let (src_a, src_p) = (ia as isize - m, ip as isize - l);
        if src_a < 0
            || src_a as usize >= grid.n_a
            || src_p < 0
            || src_p as usize >= grid.n_phi
        {
            return vec![Complex64::new(0.0, 0.0); slab_len];
        }
        // Centered 2D spectrum of the source slab.
        let mut spec = f.slab(src_a as usize, src_p as usize).to_vec();
        for row in spec.chunks_mut(n_b) {
            fft.process(row);
        }
        let mut t = vec![Complex64::new(0.0, 0.0); slab_len];
        for i in 0..n_b {
            for j in 0..n_b {
                t[j * n_b + i] = spec[i * n_b + j];
            }
        }
        for row in t.chunks_mut(n_b) {
            fft.process(row);
        }
        for i in 0..n_b {
            for j in 0..n_b {
                spec[i * n_b + j] = t[j * n_b + i];
            }
        }
        // Evaluate the interpolant Σ_k spec_k e^{i κ_k (b' + L)} / n² at the
        // mapped points, with signed frequencies κ_k = π(k - n/2)/L.
        let norm = 1.0 / (n_b * n_b) as f64;
        let freq = |k: usize| {
            std::f64::consts::PI * (((k + n_b / 2) % n_b) as f64 - (n_b / 2) as f64) / half
        };
        let freqs: Vec<f64> = (0..n_b).map(freq).collect();
        mapped
            .iter()
            .map(|p| match p {
                None => Complex64::new(0.0, 0.0),
                Some(bp) => {
                    let e1: Vec<Complex64> = freqs
                        .iter()
                        .map(|&w| Complex64::new(0.0, w * (bp[0] + half)).exp())
                        .collect();
                    let e2: Vec<Complex64> = freqs
                        .iter()
                        .map(|&w| Complex64::new(0.0, w * (bp[1] + half)).exp())
                        .collect();
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k1 in 0..n_b {
                        let row = &spec[k1 * n_b..(k1 + 1) * n_b];
                        let mut racc = Complex64::new(0.0, 0.0);
                        for k2 in 0..n_b {
                            racc += row[k2] * e2[k2];
                        }
                        acc += racc * e1[k1];
                    }
                    acc * norm
                }
            })
            .collect()
    });
    for (slab_idx, slab) in out_slabs.into_iter().enumerate() {
        let start = slab_idx * slab_len;
        out.values[start..start + slab_len].copy_from_slice(&slab);
    }
    Ok(out)
}

/// Integer step count if `x` is a lattice multiple of `step` (tolerance
/// 1e-9 steps), else None.
fn aligned_steps(x: f64, step: f64) -> Option<isize> {
    let t = x / step;
    let r = t.round();
    if (t - r).abs() <= 1e-9 {
        Some(r as isize)
    } else {
        None
    }
}

/// The working pair of discretizations: one chart geometry shared by the
/// four cones, and a group grid whose (log a, phi) lattice is spacing-aligned
/// with it. Everything downstream (transforms, symbols, Wigner fields)
/// operates on one of these.
#[derive(Clone, Debug, PartialEq)]
pub struct Discretization {
    pub geometry: crate::cone::ChartGeometry,
    pub grid: GroupGrid,
}

impl Discretization {
    pub fn new(geometry: crate::cone::ChartGeometry, grid: GroupGrid) -> Result<Self> {
        if (grid.d_loga - geometry.d_logs).abs() > 1e-12 * geometry.d_logs
            || (grid.d_phi - geometry.d_t).abs() > 1e-12 * geometry.d_t
        {
            return Err(PncError::BadParams(
                "group (log a, phi) spacings must match the chart spacings".into(),
            ));
        }
        Ok(Discretization { geometry, grid })
    }

    pub fn aligned(
        geometry: crate::cone::ChartGeometry,
        b_half: f64,
        n_b: usize,
        n_a: usize,
        n_phi: usize,
    ) -> Result<Self> {
        let grid = GroupGrid::aligned(&geometry, b_half, n_b, n_a, n_phi)?;
        Ok(Discretization { geometry, grid })
    }

    pub fn chart(&self, label: crate::group::ConeLabel) -> crate::cone::ConeChart {
        crate::cone::ConeChart::new(label, self.geometry.clone())
    }

    pub fn charts(&self) -> [crate::cone::ConeChart; 4] {
        [
            self.chart(crate::group::ConeLabel::ALL[0]),
            self.chart(crate::group::ConeLabel::ALL[1]),
            self.chart(crate::group::ConeLabel::ALL[2]),
            self.chart(crate::group::ConeLabel::ALL[3]),
        ]
    }
}

/// Discrete left-Haar integral Σ F w_L (not a norm; used by invariance tests).
pub fn group_integral(f: &GroupFunction) -> Complex64 {
    let grid = &f.grid;
    let slab_len = grid.n_b * grid.n_b;
    let n_phi = grid.n_phi;
    exec::pairwise_sum(0, grid.len(), &|idx| {
        let ia = idx / (slab_len * n_phi);
        f.values[idx] * grid.w_left(ia)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ChartGeometry;

    fn grid() -> GroupGrid {
        let chart = ChartGeometry::new(-3.0, 3.0, 24, -4.0, 4.0, 24).unwrap();
        GroupGrid::aligned(&chart, 8.0, 32, 16, 16).unwrap()
    }

    fn gaussian(grid: GroupGrid) -> GroupFunction {
        // The log a factor must stay narrow: the left-Haar weight e^{-2 log a}
        // shifts its effective mass toward the lower truncation edge.
        GroupFunction::from_fn(grid, |b, la, ph| {
            let q = b[0] * b[0] / 2.5 + b[1] * b[1] / 2.5 + la * la / 0.125 + ph * ph / 0.23;
            Complex64::new((-0.5 * q).exp(), 0.0)
                * Complex64::new(0.0, 0.7 * b[0] - 0.4 * b[1]).exp()
        })
    }

    #[test]
    fn weights_positive_and_identity_on_grid() {
        let g = grid();
        for ia in 0..g.n_a {
            assert!(g.w_left(ia) > 0.0);
        }
        let (ia, ip, j1, j2) = g.identity_index();
        let e = g.element(ia, ip, j1, j2);
        assert_eq!(e.b, [0.0, 0.0]);
        assert_eq!(e.a, 1.0);
        assert_eq!(e.phi, 0.0);
        // loga and phi nodes are integer multiples of the spacing.
        for k in 0..g.n_a {
            let t = g.loga(k) / g.d_loga;
            assert!((t - t.round()).abs() < 1e-12);
        }
    }

    #[test]
    fn box_indicator_integrates_to_analytic_value() {
        // F = indicator of j1 < n/2, all loga, all phi. The b1 half-box has
        // length L, b2 the full box 2L; the (log a) factor is
        // Σ exp(-2 loga) Δ and phi contributes n_phi Δphi.
        let g = grid();
        let f = GroupFunction::from_fn(g.clone(), |b, _, _| {
            Complex64::new(if b[0] < 0.0 { 1.0 } else { 0.0 }, 0.0)
        });
        let got = group_inner(&f, &f).unwrap().re;
        let mut aw = 0.0;
        for k in 0..g.n_a {
            aw += (-2.0 * g.loga(k)).exp() * g.d_loga;
        }
        let want = (g.b_half * 2.0 * g.b_half) * aw * (g.n_phi as f64 * g.d_phi);
        assert!((got - want).abs() <= 1e-10 * want, "got {got} want {want}");
    }

    #[test]
    fn zero_norm_and_cauchy_schwarz() {
        let g = grid();
        assert_eq!(group_norm(&GroupFunction::zero(g.clone())), 0.0);
        let f = gaussian(g.clone());
        let h = GroupFunction::from_fn(g, |b, la, ph| {
            Complex64::new((-(b[0] - 1.0).powi(2) / 3.0 - b[1] * b[1] / 5.0).exp(), 0.0)
                * Complex64::new(0.0, la + ph).exp()
        });
        let lhs = group_inner(&f, &h).unwrap().norm();
        let rhs = group_norm(&f) * group_norm(&h);
        assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} vs {rhs}");
    }

    #[test]
    fn gaussian_norm_matches_1d_quadrature_product() {
        // Oracle: |f|² factors into four 1D integrals; integrate each with a
        // fine midpoint rule, independently of the grid machinery.
        let g = grid();
        let f = gaussian(g.clone());
        let got = group_norm(&f).powi(2);

        // The lattice sums are cell-centered rules, so the matching continuum
        // integrals run over wide boxes (the integrands have decayed to
        // nothing well inside them).
        let quad_1d = |lo: f64, hi: f64, n: usize, f: &dyn Fn(f64) -> f64| -> f64 {
            let h = (hi - lo) / n as f64;
            (0..n).map(|i| f(lo + (i as f64 + 0.5) * h) * h).sum()
        };
        let ib1 = quad_1d(-12.0, 12.0, 60_000, &|x| (-x * x / 2.5).exp());
        let ib2 = ib1;
        let ia = quad_1d(-5.0, 5.0, 60_000, &|u| {
            (-u * u / 0.125).exp() * (-2.0 * u).exp()
        });
        let iphi = quad_1d(-5.0, 5.0, 60_000, &|p| (-p * p / 0.23).exp());
        let want = ib1 * ib2 * ia * iphi;
        let rel = (got - want).abs() / want;
        assert!(rel <= 1e-8, "rel err {rel}: got {got} want {want}");
    }

    #[test]
    fn translate_by_identity_is_identity() {
        let f = gaussian(grid());
        let e = GroupElement::identity();
        let t = left_translate(&f, &e, false).unwrap();
        assert_eq!(t.values, f.values);
    }

    #[test]
    fn aligned_b_shift_preserves_norm_of_interior_data() {
        let g = grid();
        // Compactly supported in b well inside the box.
        let f = GroupFunction::from_fn(g.clone(), |b, la, ph| {
            let r2 = b[0] * b[0] + b[1] * b[1];
            if r2 < 9.0 {
                Complex64::new((-r2 - la * la - ph * ph).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let g0 = GroupElement::new([2.0 * g.h_b, -3.0 * g.h_b], 1.0, 0.0).unwrap();
        let t = left_translate(&f, &g0, false).unwrap();
        let rel = (group_norm(&t) - group_norm(&f)).abs() / group_norm(&f);
        assert!(rel <= 1e-12, "rel {rel}");
    }

    #[test]
    fn misaligned_shift_without_interp_is_rejected() {
        let f = gaussian(grid());
        let g0 = GroupElement::new([0.123, 0.0], 1.0, 0.0).unwrap();
        assert!(matches!(
            left_translate(&f, &g0, false),
            Err(PncError::NotGridAligned(_))
        ));
        let g1 = GroupElement::new([0.0, 0.0], 1.7, 0.0).unwrap();
        assert!(matches!(
            left_translate(&f, &g1, false),
            Err(PncError::NotGridAligned(_))
        ));
    }

    #[test]
    fn aligned_dilation_preserves_left_haar_integral() {
        // Left invariance of dμ_L under an aligned dilation+rotation shift.
        // The b plane is resampled cubically; the integral of the cubic
        // interpolant reproduces the lattice sum exactly (unit-mass kernel),
        // so the defect is pure aliasing of a smooth rapidly decaying field.
        // The shift contracts the b support (a0 < 1 dominates the hyperbolic
        // stretch e^{|phi0|}) and the widths keep every translated tail many
        // sigmas inside the truncation box.
        let g = grid();
        let f = GroupFunction::from_fn(g.clone(), |b, la, ph| {
            let q = b[0] * b[0] / 1.2 + b[1] * b[1] / 1.2 + la * la / 0.05 + ph * ph / 0.1;
            Complex64::new((-0.5 * q).exp(), 0.0)
        });
        let g0 = GroupElement::new([0.0, 0.0], (-g.d_loga).exp(), -g.d_phi).unwrap();
        let t = left_translate(&f, &g0, true).unwrap();
        let i0 = group_integral(&f).re;
        let i1 = group_integral(&t).re;
        let rel = (i1 - i0).abs() / i0;
        assert!(rel <= 1e-10, "rel {rel}: {i1} vs {i0}");
    }

    fn smooth(grid: GroupGrid) -> GroupFunction {
        GroupFunction::from_fn(grid, |b, la, ph| {
            let q = b[0] * b[0] / 4.5 + b[1] * b[1] / 4.5 + la * la / 0.5 + ph * ph / 0.9;
            Complex64::new((-0.5 * q).exp(), 0.0)
                * Complex64::new(0.0, 0.7 * b[0] - 0.4 * b[1]).exp()
        })
    }

    #[test]
    fn sampler_reproduces_nodes_and_decays_outside() {
        let g = grid();
        let f = smooth(g.clone());
        let s = GroupSampler::new(&f);
        let e = g.element(5, 7, 11, 20);
        let got = s.eval(&e);
        let want = f.value(5, 7, 11, 20);
        assert!((got - want).norm() < 1e-13);
        let far = GroupElement::new([100.0, 0.0], 1.0, 0.0).unwrap();
        assert_eq!(s.eval(&far), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sampler_interpolates_smooth_data_accurately() {
        let g = grid();
        let f = smooth(g.clone());
        let s = GroupSampler::new(&f);
        let p = GroupElement::new([0.37, -1.21], (0.13f64).exp(), 0.21).unwrap();
        let got = s.eval(&p);
        let want = {
            let q = p.b[0] * p.b[0] / 4.5 + p.b[1] * p.b[1] / 4.5 + 0.13 * 0.13 / 0.5
                + 0.21 * 0.21 / 0.9;
            Complex64::new((-0.5 * q).exp(), 0.0)
                * Complex64::new(0.0, 0.7 * p.b[0] - 0.4 * p.b[1]).exp()
        };
        assert!(
            (got - want).norm() < 5e-3,
            "interp error {}",
            (got - want).norm()
        );
    }
}
