//! File-backed symbols: a directory of serialized operator kernels, one
//! PNHS record per (grid node, cone), named `node<idx>.cone<idx>.pnhs`.

use std::path::Path;

use num_complex::Complex64;
use pnc_core::grid::Discretization;
use pnc_core::io::{decode_operator, read_file};

pub fn load_blocks(dir: &Path, disc: &Discretization) -> Result<Vec<Vec<Complex64>>, String> {
    let n_nodes = disc.grid.len();
    let mut blocks = Vec::with_capacity(4 * n_nodes);
    for g_idx in 0..n_nodes {
        for cone in 0..4 {
            let path = dir.join(format!("node{g_idx}.cone{cone}.pnhs"));
            let bytes =
                read_file(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let op = decode_operator(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
            if op.chart.geom != disc.geometry {
                return Err(format!("{}: chart mismatch", path.display()));
            }
            blocks.push(op.kernel);
        }
    }
    Ok(blocks)
}
