//! Log-hyperbolic charts on the four cones and sampled functions on them.
//!
//! A chart is the uniform midpoint grid in (log s, t), where a cone point is
//! x = ±s (cosh t, sinh t) (spacelike) or ±s (sinh t, cosh t) (timelike).
//! In these coordinates the dilation/rotation action is a pure translation,
//! which is what makes representation application exact on aligned elements.
//!
//! Two measures matter: the Lebesgue measure dy = s² d(log s) dt and the
//! invariant measure dy/|<y;y>| = d(log s) dt. Their node weights are kept
//! side by side so the ratio w_dy/w_inv = s² is an identity, not a recompute.

use num_complex::Complex64;

use crate::error::{PncError, Result};
use crate::exec;
use crate::group::{from_hyperbolic, ConeLabel, HyperbolicCoords, Vec2};

/// Shared (log s, t) box geometry of the four charts.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartGeometry {
    pub logs_min: f64,
    pub logs_max: f64,
    pub n_s: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub d_logs: f64,
    pub d_t: f64,
    /// Cached s = exp(log s) per row.
    s: Vec<f64>,
    /// Cached log s per row (midpoints).
    logs: Vec<f64>,
    /// Cached t per column (midpoints).
    t: Vec<f64>,
}

impl ChartGeometry {
    pub fn new(
        logs_min: f64,
        logs_max: f64,
        n_s: usize,
        t_min: f64,
        t_max: f64,
        n_t: usize,
    ) -> Result<Self> {
        if n_s < 2 || n_t < 2 {
            return Err(PncError::BadParams(format!(
                "chart needs at least 2 nodes per axis, got {n_s}x{n_t}"
            )));
        }
        if !(logs_max > logs_min) || !(t_max > t_min) {
            return Err(PncError::BadParams("empty chart box".into()));
        }
        let d_logs = (logs_max - logs_min) / n_s as f64;
        let d_t = (t_max - t_min) / n_t as f64;
        let logs: Vec<f64> = (0..n_s)
            .map(|i| logs_min + (i as f64 + 0.5) * d_logs)
            .collect();
        let s: Vec<f64> = logs.iter().map(|&l| l.exp()).collect();
        let t: Vec<f64> = (0..n_t)
            .map(|j| t_min + (j as f64 + 0.5) * d_t)
            .collect();
        Ok(ChartGeometry {
            logs_min,
            logs_max,
            n_s,
            t_min,
            t_max,
            n_t,
            d_logs,
            d_t,
            s,
            logs,
            t,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_s * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i * self.n_t + j
    }

    #[inline]
    pub fn split_index(&self, idx: usize) -> (usize, usize) {
        (idx / self.n_t, idx % self.n_t)
    }

    #[inline]
    pub fn logs(&self, i: usize) -> f64 {
        self.logs[i]
    }

    #[inline]
    pub fn s(&self, i: usize) -> f64 {
        self.s[i]
    }

    #[inline]
    pub fn t(&self, j: usize) -> f64 {
        self.t[j]
    }

    /// Lebesgue node weight s² Δ(log s) Δt.
    #[inline]
    pub fn w_dy(&self, idx: usize) -> f64 {
        let (i, _) = self.split_index(idx);
        self.s[i] * self.s[i] * self.d_logs * self.d_t
    }

    /// Invariant node weight Δ(log s) Δt.
    #[inline]
    pub fn w_inv(&self) -> f64 {
        self.d_logs * self.d_t
    }
}

/// One cone chart: shared geometry plus the cone it maps into.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeChart {
    pub label: ConeLabel,
    pub geom: ChartGeometry,
}

impl ConeChart {
    pub fn new(label: ConeLabel, geom: ChartGeometry) -> Self {
        ConeChart { label, geom }
    }

    /// The plane point of node (i, j).
    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        from_hyperbolic(&HyperbolicCoords {
            s: self.geom.s(i),
            t: self.geom.t(j),
            label: self.label,
        })
    }

    pub fn point_flat(&self, idx: usize) -> Vec2 {
        let (i, j) = self.geom.split_index(idx);
        self.point(i, j)
    }
}

/// Which cone measure an inner product uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeMeasure {
    Lebesgue,
    Invariant,
}

/// Complex samples over a cone chart, row-major in (log s, t).
#[derive(Clone, Debug, PartialEq)]
pub struct ConeFunction {
    pub chart: ConeChart,
    pub values: Vec<Complex64>,
}

impl ConeFunction {
    pub fn new(chart: ConeChart, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != chart.geom.len() {
            return Err(PncError::BadParams(format!(
                "value count {} does not match chart size {}",
                values.len(),
                chart.geom.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(PncError::BadParams("non-finite sample".into()));
        }
        Ok(ConeFunction { chart, values })
    }

    pub fn zero(chart: ConeChart) -> Self {
        let n = chart.geom.len();
        ConeFunction {
            chart,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn<F>(chart: ConeChart, mut f: F) -> Self
    where
        F: FnMut(f64, f64) -> Complex64,
    {
        let g = &chart.geom;
        let mut values = Vec::with_capacity(g.len());
        for i in 0..g.n_s {
            for j in 0..g.n_t {
                values.push(f(g.logs(i), g.t(j)));
            }
        }
        ConeFunction { chart, values }
    }
}

/// Chart inner product Σ f conj(g) w with the selected measure weight.
pub fn cone_inner(
    f: &ConeFunction,
    g: &ConeFunction,
    measure: ConeMeasure,
) -> Result<Complex64> {
    if f.chart != g.chart {
        return Err(PncError::ChartMismatch);
    }
    let geom = &f.chart.geom;
    let sum = match measure {
        ConeMeasure::Lebesgue => exec::pairwise_sum(0, geom.len(), &|idx| {
            f.values[idx] * g.values[idx].conj() * geom.w_dy(idx)
        }),
        ConeMeasure::Invariant => {
            let w = geom.w_inv();
            exec::pairwise_sum(0, geom.len(), &|idx| {
                f.values[idx] * g.values[idx].conj() * w
            })
        }
    };
    Ok(sum)
}

pub fn cone_norm(f: &ConeFunction, measure: ConeMeasure) -> f64 {
    cone_inner(f, f, measure).expect("same chart").re.max(0.0).sqrt()
}
