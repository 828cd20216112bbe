//! Group-level Fourier–Wigner and Wigner transforms, their orthogonality
//! relations, and the Weyl transform of an operator-valued symbol.
//!
//! Both bilinear transforms evaluate the same scalar field
//! F(w; xi) = f(xi^{1/2} * w) conj(g(w⁻¹ * xi^{1/2})) and push it through
//! the operator-valued Fourier transform — over w at fixed xi for the
//! Fourier–Wigner field V(f,g)(π, xi), and over xi at fixed w for the
//! Wigner field W(f,g)(w, π). The square-root element lands on the
//! (log a, phi) half-lattice exactly; only the b components need
//! resampling, done by separable cubic interpolation after a one-time
//! extension of the samples onto that half-lattice.

use num_complex::Complex64;

use crate::error::{PncError, Result};
use crate::exec;
use crate::gft::{GftTable, HSOperator};
use crate::grid::{group_inner, Discretization, GroupFunction, GroupGrid};
use crate::group::{minkowski, ConeLabel, GroupElement};
use crate::interp::Axis;
use crate::psido::SymbolField;

/// Argument ordering of an operator-valued field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldBase {
    /// V(f,g): (representation, group point).
    DualTimesGroup,
    /// W(f,g): (group point, representation).
    GroupTimesDual,
}

/// Group samples extended onto the (log a, phi) half-lattice, with cubic
/// b-plane evaluation. Exactly the points xi^{1/2} * w and w⁻¹ * xi^{1/2}
/// are touched; their (log a, phi) coordinates are half-lattice-exact.
pub struct HalfSampler {
    grid: GroupGrid,
    /// Stored half-step index range: k in [-k_half, k_half].
    ka_half: isize,
    kp_half: isize,
    /// values[(ka, kp) slab][b1 * n_b + b2]
    values: Vec<Complex64>,
    /// Forward interpolation taps, kept for the adjoint scatter.
    w_a: Vec<Vec<(usize, f64)>>,
    w_p: Vec<Vec<(usize, f64)>>,
    b_axis: Axis,
}

impl HalfSampler {
    pub fn new(f: &GroupFunction) -> Self {
        let grid = f.grid.clone();
        let n_b = grid.n_b;
        let slab_len = n_b * n_b;
        let ka_half = (3 * grid.n_a / 2 + 2) as isize;
        let kp_half = (3 * grid.n_phi / 2 + 2) as isize;
        let n_ka = (2 * ka_half + 1) as usize;
        let n_kp = (2 * kp_half + 1) as usize;

        let a_axis = Axis::new(
            -((grid.n_a / 2) as f64) * grid.d_loga,
            grid.d_loga,
            grid.n_a,
        );
        let p_axis = Axis::new(
            -((grid.n_phi / 2) as f64) * grid.d_phi,
            grid.d_phi,
            grid.n_phi,
        );
        let w_a: Vec<Vec<(usize, f64)>> = (0..n_ka)
            .map(|i| {
                let k = i as isize - ka_half;
                let st = a_axis.stencil(k as f64 * grid.d_loga / 2.0);
                st.taps(grid.n_a).collect()
            })
            .collect();
        let w_p: Vec<Vec<(usize, f64)>> = (0..n_kp)
            .map(|i| {
                let k = i as isize - kp_half;
                let st = p_axis.stencil(k as f64 * grid.d_phi / 2.0);
                st.taps(grid.n_phi).collect()
            })
            .collect();

        // Two-stage resampling onto the half lattice.
        let mut stage_a = vec![Complex64::new(0.0, 0.0); n_ka * grid.n_phi * slab_len];
        for (i, taps) in w_a.iter().enumerate() {
            for ip in 0..grid.n_phi {
                let dst = i * grid.n_phi + ip;
                for &(ia, w) in taps {
                    let src = f.slab(ia, ip);
                    let out = &mut stage_a[dst * slab_len..(dst + 1) * slab_len];
                    for (o, s) in out.iter_mut().zip(src) {
                        *o += s * w;
                    }
                }
            }
        }
        let mut values = vec![Complex64::new(0.0, 0.0); n_ka * n_kp * slab_len];
        for i in 0..n_ka {
            for (j, taps) in w_p.iter().enumerate() {
                let dst = i * n_kp + j;
                for &(ip, w) in taps {
                    let src = &stage_a[(i * grid.n_phi + ip) * slab_len
                        ..(i * grid.n_phi + ip + 1) * slab_len];
                    let out = &mut values[dst * slab_len..(dst + 1) * slab_len];
                    for (o, s) in out.iter_mut().zip(src) {
                        *o += s * w;
                    }
                }
            }
        }
        let b_axis = Axis::new(-grid.b_half, grid.h_b, n_b);
        HalfSampler {
            grid,
            ka_half,
            kp_half,
            values,
            w_a,
            w_p,
            b_axis,
        }
    }

    #[inline]
    fn slab_index(&self, ka: isize, kp: isize) -> Option<usize> {
        if ka.abs() > self.ka_half || kp.abs() > self.kp_half {
            return None;
        }
        let i = (ka + self.ka_half) as usize;
        let j = (kp + self.kp_half) as usize;
        Some(i * (2 * self.kp_half + 1) as usize + j)
    }

    /// Evaluate at b (cubic) and half-lattice step counts (ka, kp) of
    /// (log a, phi) in units of half the grid spacings.
    pub fn eval(&self, b: [f64; 2], ka: isize, kp: isize) -> Complex64 {
        let slab_idx = match self.slab_index(ka, kp) {
            Some(i) => i,
            None => return Complex64::new(0.0, 0.0),
        };
        let n_b = self.grid.n_b;
        let slab = &self.values[slab_idx * n_b * n_b..(slab_idx + 1) * n_b * n_b];
        let s1 = self.b_axis.stencil(b[0]);
        let s2 = self.b_axis.stencil(b[1]);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, wi) in s1.taps(n_b) {
            let row = &slab[i * n_b..(i + 1) * n_b];
            let mut racc = Complex64::new(0.0, 0.0);
            for (j, wj) in s2.taps(n_b) {
                racc += row[j] * wj;
            }
            acc += racc * wi;
        }
        acc
    }
}

/// Accumulator adjoint to [`HalfSampler`] evaluation: scattering a
/// coefficient at an evaluation point distributes it through the transposed
/// stencils back onto grid samples.
pub struct HalfScatter {
    grid: GroupGrid,
    ka_half: isize,
    kp_half: isize,
    acc: Vec<Complex64>,
    b_axis: Axis,
}

impl HalfScatter {
    pub fn new(grid: &GroupGrid) -> Self {
        let ka_half = (3 * grid.n_a / 2 + 2) as isize;
        let kp_half = (3 * grid.n_phi / 2 + 2) as isize;
        let n_ka = (2 * ka_half + 1) as usize;
        let n_kp = (2 * kp_half + 1) as usize;
        let slab_len = grid.n_b * grid.n_b;
        HalfScatter {
            grid: grid.clone(),
            ka_half,
            kp_half,
            acc: vec![Complex64::new(0.0, 0.0); n_ka * n_kp * slab_len],
            b_axis: Axis::new(-grid.b_half, grid.h_b, grid.n_b),
        }
    }

    pub fn add(&mut self, b: [f64; 2], ka: isize, kp: isize, coef: Complex64) {
        if ka.abs() > self.ka_half || kp.abs() > self.kp_half {
            return;
        }
        let n_b = self.grid.n_b;
        let i = (ka + self.ka_half) as usize;
        let j = (kp + self.kp_half) as usize;
        let slab_idx = i * (2 * self.kp_half + 1) as usize + j;
        let slab = &mut self.acc[slab_idx * n_b * n_b..(slab_idx + 1) * n_b * n_b];
        let s1 = self.b_axis.stencil(b[0]);
        let s2 = self.b_axis.stencil(b[1]);
        for (i1, w1) in s1.taps(n_b) {
            for (i2, w2) in s2.taps(n_b) {
                slab[i1 * n_b + i2] += coef * (w1 * w2);
            }
        }
    }

    /// Fold the half-lattice accumulator back to the grid through the
    /// transposed two-stage interpolation (reusing a sampler's taps).
    pub fn fold(self, sampler: &HalfSampler) -> GroupFunction {
        let grid = self.grid;
        let n_b = grid.n_b;
        let slab_len = n_b * n_b;
        let n_kp = (2 * self.kp_half + 1) as usize;
        let n_ka = (2 * self.ka_half + 1) as usize;

        let mut stage_a = vec![Complex64::new(0.0, 0.0); n_ka * grid.n_phi * slab_len];
        for i in 0..n_ka {
            for (j, taps) in sampler.w_p.iter().enumerate() {
                let src = &self.acc[(i * n_kp + j) * slab_len..(i * n_kp + j + 1) * slab_len];
                for &(ip, w) in taps {
                    let dst = &mut stage_a[(i * grid.n_phi + ip) * slab_len
                        ..(i * grid.n_phi + ip + 1) * slab_len];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += s * w;
                    }
                }
            }
        }
        let mut out = GroupFunction::zero(grid.clone());
        for (i, taps) in sampler.w_a.iter().enumerate() {
            for ip in 0..grid.n_phi {
                let src = &stage_a
                    [(i * grid.n_phi + ip) * slab_len..(i * grid.n_phi + ip + 1) * slab_len];
                for &(ia, w) in taps {
                    let start = grid.index(ia, ip, 0, 0);
                    let dst = &mut out.values[start..start + slab_len];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += s * w;
                    }
                }
            }
        }
        out
    }
}

/// The scalar field F(·; fixed) over the grid: the free variable is w when
/// `fixed_is_xi`, else xi.
fn translated_field(
    fs: &HalfSampler,
    gs: &HalfSampler,
    grid: &GroupGrid,
    fixed_idx: usize,
    fixed_is_xi: bool,
) -> Result<GroupFunction> {
    let (fa, fp, fj1, fj2) = grid.split_index(fixed_idx);
    let fixed = grid.element(fa, fp, fj1, fj2);
    let root_fixed = fixed.sqrt_element();
    let check = root_fixed.compose(&root_fixed);
    let defect = (check.b[0] - fixed.b[0]).abs()
        + (check.b[1] - fixed.b[1]).abs()
        + (check.a - fixed.a).abs()
        + (check.phi - fixed.phi).abs();
    if defect > 1e-12 * (1.0 + fixed.b[0].abs() + fixed.b[1].abs() + fixed.a) {
        return Err(PncError::BadParams(format!(
            "square-root defect {defect} at node {fixed_idx}"
        )));
    }
    let m_fixed = fa as isize - (grid.n_a / 2) as isize;
    let l_fixed = fp as isize - (grid.n_phi / 2) as isize;

    let n_b = grid.n_b;
    let slab_len = n_b * n_b;
    let mut out = GroupFunction::zero(grid.clone());
    exec::for_each_row(&mut out.values, slab_len, |slab, row| {
        let var_ia = slab / grid.n_phi;
        let var_ip = slab % grid.n_phi;
        let m_var = var_ia as isize - (grid.n_a / 2) as isize;
        let l_var = var_ip as isize - (grid.n_phi / 2) as isize;
        let (m_xi, l_xi, m_w, l_w) = if fixed_is_xi {
            (m_fixed, l_fixed, m_var, l_var)
        } else {
            (m_var, l_var, m_fixed, l_fixed)
        };
        // xi^{1/2} * w sits at half-steps m_xi + 2 m_w; w⁻¹ * xi^{1/2} at
        // m_xi - 2 m_w (same pattern in phi).
        let (ka_l, kp_l) = (m_xi + 2 * m_w, l_xi + 2 * l_w);
        let (ka_r, kp_r) = (m_xi - 2 * m_w, l_xi - 2 * l_w);
        for b1 in 0..n_b {
            for b2 in 0..n_b {
                let (w_elem, xi_elem) = if fixed_is_xi {
                    (grid.element(var_ia, var_ip, b1, b2), fixed)
                } else {
                    (fixed, grid.element(var_ia, var_ip, b1, b2))
                };
                let root = xi_elem.sqrt_element();
                let left = root.compose(&w_elem);
                let right = w_elem.inverse().compose(&root);
                row[b1 * n_b + b2] =
                    fs.eval(left.b, ka_l, kp_l) * gs.eval(right.b, ka_r, kp_r).conj();
            }
        }
    });
    Ok(out)
}

/// Lazily evaluated operator-valued field over the grid: V(f,g) for
/// [`FieldBase::DualTimesGroup`], W(f,g) for [`FieldBase::GroupTimesDual`].
pub struct OperatorValuedField<'a> {
    pub base: FieldBase,
    pub disc: &'a Discretization,
    fs: HalfSampler,
    gs: HalfSampler,
    oversample: usize,
}

impl<'a> OperatorValuedField<'a> {
    /// Transform tables at one grid node (xi for V, w for W).
    pub fn table_at(&self, node_idx: usize) -> Result<GftTable> {
        let field = translated_field(
            &self.fs,
            &self.gs,
            &self.disc.grid,
            node_idx,
            self.base == FieldBase::DualTimesGroup,
        )?;
        GftTable::new(&field, self.disc, self.oversample)
    }

    /// Materialize the operator at (node, cone).
    pub fn operator_at(&self, node_idx: usize, label: ConeLabel) -> Result<HSOperator> {
        Ok(self.table_at(node_idx)?.kernel_block(label))
    }
}

/// Fourier–Wigner transform V(f, g).
pub fn fourier_wigner<'a>(
    f: &GroupFunction,
    g: &GroupFunction,
    disc: &'a Discretization,
    oversample: usize,
) -> Result<OperatorValuedField<'a>> {
    if f.grid != disc.grid || g.grid != disc.grid {
        return Err(PncError::GridMismatch);
    }
    Ok(OperatorValuedField {
        base: FieldBase::DualTimesGroup,
        disc,
        fs: HalfSampler::new(f),
        gs: HalfSampler::new(g),
        oversample,
    })
}

/// Wigner transform W(f, g).
pub fn wigner<'a>(
    f: &GroupFunction,
    g: &GroupFunction,
    disc: &'a Discretization,
    oversample: usize,
) -> Result<OperatorValuedField<'a>> {
    if f.grid != disc.grid || g.grid != disc.grid {
        return Err(PncError::GridMismatch);
    }
    Ok(OperatorValuedField {
        base: FieldBase::GroupTimesDual,
        disc,
        fs: HalfSampler::new(f),
        gs: HalfSampler::new(g),
        oversample,
    })
}

/// Which orthogonality identity a check targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoyalKind {
    FourierWigner,
    Wigner,
}

#[derive(Clone, Copy, Debug)]
pub struct MoyalReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_err: f64,
}

/// Both sides of ⟨X(f,h), X(g,k)⟩ = ⟨f,g⟩ conj(⟨h,k⟩), X = V or W.
pub fn moyal_check(
    f: &GroupFunction,
    g: &GroupFunction,
    h: &GroupFunction,
    k: &GroupFunction,
    kind: MoyalKind,
    disc: &Discretization,
    oversample: usize,
) -> Result<MoyalReport> {
    let base = match kind {
        MoyalKind::FourierWigner => FieldBase::DualTimesGroup,
        MoyalKind::Wigner => FieldBase::GroupTimesDual,
    };
    let first = OperatorValuedField {
        base,
        disc,
        fs: HalfSampler::new(f),
        gs: HalfSampler::new(h),
        oversample,
    };
    let second = OperatorValuedField {
        base,
        disc,
        fs: HalfSampler::new(g),
        gs: HalfSampler::new(k),
        oversample,
    };

    let grid = &disc.grid;
    let n_nodes = grid.len();
    let contributions = exec::map_indexed(n_nodes, |node| {
        let t1 = first.table_at(node).expect("field node");
        let t2 = second.table_at(node).expect("field node");
        let (ia, _, _, _) = grid.split_index(node);
        let w = grid.w_left(ia);
        let mut acc = Complex64::new(0.0, 0.0);
        for label in ConeLabel::ALL {
            acc += t1.hs_inner_table(&t2, label);
        }
        acc * w
    });
    let lhs = exec::pairwise_sum(0, n_nodes, &|i| contributions[i]);
    let rhs = group_inner(f, g)? * group_inner(h, k)?.conj();
    let scale = rhs.norm().max(f64::MIN_POSITIVE);
    Ok(MoyalReport {
        lhs,
        rhs,
        rel_err: (lhs - rhs).norm() / scale,
    })
}

/// The Weyl transform of an operator-valued symbol, applied weakly:
/// ⟨W_σ f, v⟩ = ∫ Σ_cones Tr[D σ(w,π) W(f,v)(w,π)] dμ_L(w), assembled
/// against the coordinate basis through the adjoint interpolation stencils.
pub fn group_weyl_apply(
    sigma: &SymbolField,
    f: &GroupFunction,
    budget: u64,
) -> Result<GroupFunction> {
    let disc = &sigma.disc;
    let grid = &disc.grid;
    if f.grid != *grid {
        return Err(PncError::GridMismatch);
    }
    let geom = &disc.geometry;
    let n_nodes = grid.len();
    // The (w, xi) double loop is dense over grid-node pairs.
    let needed = (n_nodes as u64).pow(2) * 16;
    if needed > budget {
        return Err(PncError::MemoryBudgetExceeded { needed, budget });
    }

    let fs = HalfSampler::new(f);
    let n = geom.len();

    // coef(w, xi) = w_L(w) w_L(xi) f(xi^{1/2} * w) Σ_l Tr[Dσ(w,l) Π_xi(l)],
    // with Π_xi the one-shift-per-row kernel of π(xi) D. The v slot sits at
    // p = w⁻¹ * xi^{1/2}, scattered through the adjoint stencils.
    let rows: Vec<Vec<([f64; 2], isize, isize, Complex64)>> =
        exec::map_indexed(n_nodes, |w_idx| {
            let (wa, wp, wb1, wb2) = grid.split_index(w_idx);
            let w_elem = grid.element(wa, wp, wb1, wb2);
            let m_w = wa as isize - (grid.n_a / 2) as isize;
            let l_w = wp as isize - (grid.n_phi / 2) as isize;
            let w_weight = grid.w_left(wa);
            let dsig: Vec<HSOperator> = ConeLabel::ALL
                .iter()
                .map(|&lab| sigma.d_sigma(w_idx, lab))
                .collect();
            let charts: Vec<_> = ConeLabel::ALL.iter().map(|&l| disc.chart(l)).collect();
            let mut out = Vec::new();
            for xi_idx in 0..n_nodes {
                let (xa, xp, xb1, xb2) = grid.split_index(xi_idx);
                let xi = grid.element(xa, xp, xb1, xb2);
                let m_xi = xa as isize - (grid.n_a / 2) as isize;
                let l_xi = xp as isize - (grid.n_phi / 2) as isize;
                let mut tr = Complex64::new(0.0, 0.0);
                for label in ConeLabel::ALL {
                    let a_op = &dsig[label.index()];
                    let chart = &charts[label.index()];
                    for y in 0..n {
                        let (ys, yt) = geom.split_index(y);
                        let xs = ys as isize + m_xi;
                        let xt = yt as isize - l_xi;
                        if xs < 0
                            || xs as usize >= geom.n_s
                            || xt < 0
                            || xt as usize >= geom.n_t
                        {
                            continue;
                        }
                        let x_idx = geom.node_index(xs as usize, xt as usize);
                        let a_val = a_op.kernel[x_idx * n + y];
                        if a_val.norm_sqr() == 0.0 {
                            continue;
                        }
                        let ypt = chart.point(ys, yt);
                        tr += a_val
                            * Complex64::new(0.0, minkowski(ypt, xi.b)).exp()
                            * (xi.a * geom.s(xs as usize) / (2.0 * std::f64::consts::PI))
                            * geom.w_dy(y);
                    }
                }
                if tr.norm_sqr() == 0.0 {
                    continue;
                }
                let root = xi.sqrt_element();
                let left = root.compose(&w_elem);
                let fval = fs.eval(left.b, m_xi + 2 * m_w, l_xi + 2 * l_w);
                if fval.norm_sqr() == 0.0 {
                    continue;
                }
                let coef = fval * tr * (w_weight * grid.w_left(xa));
                let p = w_elem.inverse().compose(&root);
                out.push((p.b, m_xi - 2 * m_w, l_xi - 2 * l_w, coef));
            }
            out
        });

    let mut scatter = HalfScatter::new(grid);
    for row in rows {
        for (b, ka, kp, coef) in row {
            scatter.add(b, ka, kp, coef);
        }
    }
    let mut out = scatter.fold(&fs);
    // Riesz representative against the coordinate basis.
    let slab_len = grid.n_b * grid.n_b;
    for idx in 0..n_nodes {
        let ia = idx / (slab_len * grid.n_phi);
        out.values[idx] /= grid.w_left(ia);
    }
    Ok(out)
}
