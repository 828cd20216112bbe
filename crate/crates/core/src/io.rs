//! Binary serialization of function containers and operator kernels.
//!
//! Layouts (all little-endian):
//!
//! `PNCF` (function container): magic `PNCF`, version u32, kind u32
//! (0 = cone, 1 = group). Cone: label u32 (cone index), logs_min f64,
//! logs_max f64, n_s u32, t_min f64, t_max f64, n_t u32, then n_s·n_t
//! complex values. Group: b_half f64, n_b u32, d_loga f64, n_a u32,
//! d_phi f64, n_phi u32, then the values slab-major. A complex value is a
//! pair of f64 (re, im); cone values are row-major over (log s, t).
//!
//! `PNHS` (operator kernel): magic `PNHS`, version u32, the chart
//! descriptor (label u32, logs_min, logs_max, n_s, t_min, t_max, n_t as
//! above), then the n×n kernel row-major as complex pairs.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::cone::{ChartGeometry, ConeChart, ConeFunction};
use crate::error::{PncError, Result};
use crate::gft::HSOperator;
use crate::grid::{GroupFunction, GroupGrid};
use crate::group::ConeLabel;

pub const FORMAT_VERSION: u32 = 1;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_values(out: &mut Vec<u8>, values: &[Complex64]) {
    for v in values {
        put_f64(out, v.re);
        put_f64(out, v.im);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(PncError::BadFormat("truncated data".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn values(&mut self, n: usize) -> Result<Vec<Complex64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let re = self.f64()?;
            let im = self.f64()?;
            out.push(Complex64::new(re, im));
        }
        Ok(out)
    }

    fn done(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(PncError::BadFormat(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn put_chart(out: &mut Vec<u8>, chart: &ConeChart) {
    put_u32(out, chart.label.index() as u32);
    let g = &chart.geom;
    put_f64(out, g.logs_min);
    put_f64(out, g.logs_max);
    put_u32(out, g.n_s as u32);
    put_f64(out, g.t_min);
    put_f64(out, g.t_max);
    put_u32(out, g.n_t as u32);
}

fn read_chart(r: &mut Reader) -> Result<ConeChart> {
    let label_idx = r.u32()? as usize;
    if label_idx >= 4 {
        return Err(PncError::BadFormat(format!("cone index {label_idx}")));
    }
    let logs_min = r.f64()?;
    let logs_max = r.f64()?;
    let n_s = r.u32()? as usize;
    let t_min = r.f64()?;
    let t_max = r.f64()?;
    let n_t = r.u32()? as usize;
    Ok(ConeChart::new(
        ConeLabel::from_index(label_idx),
        ChartGeometry::new(logs_min, logs_max, n_s, t_min, t_max, n_t)?,
    ))
}

pub fn encode_cone_function(f: &ConeFunction) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"PNCF");
    put_u32(&mut out, FORMAT_VERSION);
    put_u32(&mut out, 0);
    put_chart(&mut out, &f.chart);
    put_values(&mut out, &f.values);
    out
}

pub fn encode_group_function(f: &GroupFunction) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"PNCF");
    put_u32(&mut out, FORMAT_VERSION);
    put_u32(&mut out, 1);
    let g = &f.grid;
    put_f64(&mut out, g.b_half);
    put_u32(&mut out, g.n_b as u32);
    put_f64(&mut out, g.d_loga);
    put_u32(&mut out, g.n_a as u32);
    put_f64(&mut out, g.d_phi);
    put_u32(&mut out, g.n_phi as u32);
    put_values(&mut out, &f.values);
    out
}

/// Either kind of serialized function container.
pub enum Function {
    Cone(ConeFunction),
    Group(GroupFunction),
}

pub fn decode_function(buf: &[u8]) -> Result<Function> {
    let mut r = Reader::new(buf);
    if r.take(4)? != b"PNCF" {
        return Err(PncError::BadFormat("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(PncError::BadFormat(format!("unknown version {version}")));
    }
    match r.u32()? {
        0 => {
            let chart = read_chart(&mut r)?;
            let values = r.values(chart.geom.len())?;
            r.done()?;
            Ok(Function::Cone(ConeFunction::new(chart, values)?))
        }
        1 => {
            let b_half = r.f64()?;
            let n_b = r.u32()? as usize;
            let d_loga = r.f64()?;
            let n_a = r.u32()? as usize;
            let d_phi = r.f64()?;
            let n_phi = r.u32()? as usize;
            let grid = GroupGrid::new(b_half, n_b, d_loga, n_a, d_phi, n_phi)?;
            let values = r.values(grid.len())?;
            r.done()?;
            Ok(Function::Group(GroupFunction::new(grid, values)?))
        }
        k => Err(PncError::BadFormat(format!("unknown kind {k}"))),
    }
}

pub fn encode_operator(op: &HSOperator) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"PNHS");
    put_u32(&mut out, FORMAT_VERSION);
    put_chart(&mut out, &op.chart);
    put_values(&mut out, &op.kernel);
    out
}

pub fn decode_operator(buf: &[u8]) -> Result<HSOperator> {
    let mut r = Reader::new(buf);
    if r.take(4)? != b"PNHS" {
        return Err(PncError::BadFormat("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(PncError::BadFormat(format!("unknown version {version}")));
    }
    let chart = read_chart(&mut r)?;
    let n = chart.geom.len();
    let kernel = r.values(n * n)?;
    r.done()?;
    HSOperator::new(chart, kernel)
}

pub fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn read_file(path: &std::path::Path) -> Result<Vec<u8>> {
    let mut f = std::fs::File::open(path)?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)?;
    Ok(buf)
}
