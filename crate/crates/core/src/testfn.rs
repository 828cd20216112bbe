//! Deterministic smooth test data: Gaussians in chart/grid coordinates.
//!
//! All verification suites draw their inputs from these families, either
//! with fixed parameters or seeded through [`crate::rng::Xoshiro256`]. Two
//! calls with equal parameters are bitwise identical.
//!
//! Closed forms: a 1D factor with center c, width w > 0 and frequency k is
//! `exp(-(x-c)²/(2w²)) * exp(i k (x-c))`; a field is the product of its
//! per-axis factors times an overall amplitude.

use num_complex::Complex64;

use crate::cone::{ConeChart, ConeFunction};
use crate::error::{PncError, Result};
use crate::fourier::PlaneFunction;
use crate::grid::{GroupFunction, GroupGrid};
use crate::rng::Xoshiro256;

/// One Gaussian axis factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gauss1 {
    pub center: f64,
    pub width: f64,
    pub freq: f64,
}

impl Gauss1 {
    pub fn new(center: f64, width: f64, freq: f64) -> Self {
        Gauss1 {
            center,
            width,
            freq,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.width > 0.0) || !self.width.is_finite() {
            return Err(PncError::BadParams(format!("width {}", self.width)));
        }
        if !self.center.is_finite() || !self.freq.is_finite() {
            return Err(PncError::BadParams("non-finite Gaussian parameter".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        let u = x - self.center;
        let mag = (-u * u / (2.0 * self.width * self.width)).exp();
        mag * Complex64::new(0.0, self.freq * u).exp()
    }

    fn seeded(rng: &mut Xoshiro256, half_range: f64) -> Self {
        Gauss1 {
            center: rng.uniform_in(-0.08, 0.08) * half_range,
            width: rng.uniform_in(0.16, 0.22) * half_range,
            freq: rng.uniform_in(-0.9, 0.9),
        }
    }
}

/// Gaussian in chart coordinates (log s, t) on one cone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianCone {
    pub amp: f64,
    pub logs: Gauss1,
    pub t: Gauss1,
}

impl GaussianCone {
    pub fn build(&self, chart: ConeChart) -> Result<ConeFunction> {
        self.logs.check()?;
        self.t.check()?;
        if !self.amp.is_finite() {
            return Err(PncError::BadParams("non-finite amplitude".into()));
        }
        Ok(ConeFunction::from_fn(chart, |u, t| {
            self.amp * self.logs.eval(u) * self.t.eval(t)
        }))
    }

    /// Seeded member of the cone corpus, scaled to the chart extents.
    pub fn seeded(rng: &mut Xoshiro256, chart: &ConeChart) -> Self {
        let half_logs = 0.5 * (chart.geom.logs_max - chart.geom.logs_min);
        let half_t = 0.5 * (chart.geom.t_max - chart.geom.t_min);
        GaussianCone {
            amp: rng.uniform_in(0.5, 1.5),
            logs: Gauss1::seeded(rng, half_logs),
            t: Gauss1::seeded(rng, half_t),
        }
    }
}

/// Separable Gaussian on the group grid: product of factors in b1, b2,
/// log a and phi.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianGroup {
    pub amp: f64,
    pub b1: Gauss1,
    pub b2: Gauss1,
    pub loga: Gauss1,
    pub phi: Gauss1,
}

impl GaussianGroup {
    pub fn build(&self, grid: GroupGrid) -> Result<GroupFunction> {
        for g in [&self.b1, &self.b2, &self.loga, &self.phi] {
            g.check()?;
        }
        if !self.amp.is_finite() {
            return Err(PncError::BadParams("non-finite amplitude".into()));
        }
        let me = *self;
        Ok(GroupFunction::from_fn(grid, move |b, la, ph| {
            me.amp * me.b1.eval(b[0]) * me.b2.eval(b[1]) * me.loga.eval(la) * me.phi.eval(ph)
        }))
    }

    /// Fixed default used when a suite needs one canonical input.
    pub fn default_for(grid: &GroupGrid) -> Self {
        let half_a = 0.5 * grid.n_a as f64 * grid.d_loga;
        let half_p = 0.5 * grid.n_phi as f64 * grid.d_phi;
        GaussianGroup {
            amp: 1.0,
            b1: Gauss1::new(0.4, 0.17 * grid.b_half, 0.8),
            b2: Gauss1::new(-0.3, 0.19 * grid.b_half, 0.5),
            loga: Gauss1::new(0.04 * half_a, 0.19 * half_a, 0.4),
            phi: Gauss1::new(-0.05 * half_p, 0.20 * half_p, 0.3),
        }
    }

    /// Seeded member of the group corpus, scaled to the grid extents.
    pub fn seeded(rng: &mut Xoshiro256, grid: &GroupGrid) -> Self {
        let half_a = 0.5 * grid.n_a as f64 * grid.d_loga;
        let half_p = 0.5 * grid.n_phi as f64 * grid.d_phi;
        GaussianGroup {
            amp: rng.uniform_in(0.5, 1.5),
            b1: Gauss1::seeded(rng, grid.b_half),
            b2: Gauss1::seeded(rng, grid.b_half),
            loga: Gauss1::seeded(rng, half_a),
            phi: Gauss1::seeded(rng, half_p),
        }
    }
}

/// Gaussian on a plane grid (b1, b2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPlane {
    pub amp: f64,
    pub x1: Gauss1,
    pub x2: Gauss1,
}

impl GaussianPlane {
    pub fn build(&self, n: usize, half: f64) -> Result<PlaneFunction> {
        self.x1.check()?;
        self.x2.check()?;
        let me = *self;
        PlaneFunction::from_fn(n, half, move |x, y| me.amp * me.x1.eval(x) * me.x2.eval(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{ChartGeometry, ConeChart};
    use crate::group::ConeLabel;

    fn chart() -> ConeChart {
        ConeChart::new(
            ConeLabel::TIMELIKE_MINUS,
            ChartGeometry::new(-3.0, 3.0, 24, -4.0, 4.0, 24).unwrap(),
        )
    }

    #[test]
    fn equal_params_are_bitwise_identical() {
        let g = GaussianCone {
            amp: 1.3,
            logs: Gauss1::new(0.1, 0.5, 0.7),
            t: Gauss1::new(-0.2, 0.8, -0.4),
        };
        let a = g.build(chart()).unwrap();
        let b = g.build(chart()).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn narrow_width_approaches_a_discrete_delta() {
        let c = chart();
        // Center exactly on a node.
        let g = GaussianCone {
            amp: 1.0,
            logs: Gauss1::new(c.geom.logs(12), 1e-3, 0.0),
            t: Gauss1::new(c.geom.t(10), 1e-3, 0.0),
        };
        let f = g.build(c.clone()).unwrap();
        let center = c.geom.node_index(12, 10);
        for (idx, v) in f.values.iter().enumerate() {
            if idx == center {
                assert!((v.re - 1.0).abs() < 1e-12);
            } else {
                assert!(v.norm() < 1e-300, "idx {idx} value {v}");
            }
        }
    }

    #[test]
    fn bad_widths_are_rejected() {
        let g = GaussianCone {
            amp: 1.0,
            logs: Gauss1::new(0.0, 0.0, 0.0),
            t: Gauss1::new(0.0, 1.0, 0.0),
        };
        assert!(matches!(g.build(chart()), Err(PncError::BadParams(_))));
    }

    #[test]
    fn seeded_corpus_is_reproducible() {
        let c = chart();
        let mut r1 = Xoshiro256::seed_from_u64(99);
        let mut r2 = Xoshiro256::seed_from_u64(99);
        let a = GaussianCone::seeded(&mut r1, &c);
        let b = GaussianCone::seeded(&mut r2, &c);
        assert_eq!(a, b);
    }
}
