//! Flat key-value experiment configuration.
//!
//! Grammar: one `key = value` per line, `#` starts a comment, `[section]`
//! headers group keys (the section name is prefixed to the key with a dot).
//! Unknown keys are rejected so typos surface as config errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Everything a suite run needs beyond its built-in defaults.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Ascending resolution scale factors; 1.0 is the base.
    pub ladder: Vec<f64>,
    /// Grid overrides (applied on top of per-suite defaults).
    pub grid: GridOverrides,
    /// Symbol specification for the psido/trace/weyl suites.
    pub symbol: SymbolSpec,
    /// Tolerance overrides by check name.
    pub tolerances: BTreeMap<String, f64>,
    /// Dense-kernel memory budget in bytes.
    pub memory_budget: u64,
    /// Test-function width scale (b widths as a fraction of the box).
    pub b_width_frac: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct GridOverrides {
    pub n_s: Option<usize>,
    pub n_t: Option<usize>,
    pub logs_half: Option<f64>,
    pub t_half: Option<f64>,
    pub b_half: Option<f64>,
    pub n_b: Option<usize>,
    pub n_a: Option<usize>,
    pub n_phi: Option<usize>,
    pub oversample: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymbolSpec {
    /// Seeded diagonal family (the default corpus).
    Diagonal,
    /// Seeded rank-one kernel family on the group.
    Alpha,
    /// Serialized D σ blocks, one PNHS record per (node, cone).
    File(PathBuf),
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 7,
            out_dir: PathBuf::from("pnc-out"),
            ladder: vec![1.0],
            grid: GridOverrides::default(),
            symbol: SymbolSpec::Diagonal,
            tolerances: BTreeMap::new(),
            memory_budget: pnc_core::psido::DEFAULT_MEMORY_BUDGET,
            b_width_frac: None,
        }
    }
}

pub fn parse_config(text: &str, base: ExperimentConfig) -> Result<ExperimentConfig, String> {
    let mut cfg = base;
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(format!("line {}: malformed section header", lineno + 1));
            }
            section = line[1..line.len() - 1].trim().to_string();
            continue;
        }
        let (key, value) = match line.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => return Err(format!("line {}: expected key = value", lineno + 1)),
        };
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        apply_key(&mut cfg, &full, value)
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
    }
    Ok(cfg)
}

fn apply_key(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<(), String> {
    let p_f64 = |v: &str| v.parse::<f64>().map_err(|_| format!("bad number `{v}`"));
    let p_usize = |v: &str| v.parse::<usize>().map_err(|_| format!("bad integer `{v}`"));
    match key {
        "run.seed" | "seed" => {
            cfg.seed = value.parse().map_err(|_| format!("bad seed `{value}`"))?
        }
        "run.out" | "out" => cfg.out_dir = PathBuf::from(value),
        "run.ladder" | "ladder" => cfg.ladder = parse_ladder(value)?,
        "run.memory_budget_mb" => {
            cfg.memory_budget = (p_f64(value)? * 1024.0 * 1024.0) as u64
        }
        "grids.n_s" => cfg.grid.n_s = Some(p_usize(value)?),
        "grids.n_t" => cfg.grid.n_t = Some(p_usize(value)?),
        "grids.logs_half" => cfg.grid.logs_half = Some(p_f64(value)?),
        "grids.t_half" => cfg.grid.t_half = Some(p_f64(value)?),
        "grids.b_half" => cfg.grid.b_half = Some(p_f64(value)?),
        "grids.n_b" => cfg.grid.n_b = Some(p_usize(value)?),
        "grids.n_a" => cfg.grid.n_a = Some(p_usize(value)?),
        "grids.n_phi" => cfg.grid.n_phi = Some(p_usize(value)?),
        "grids.oversample" => cfg.grid.oversample = Some(p_usize(value)?),
        "test.b_width_frac" => cfg.b_width_frac = Some(p_f64(value)?),
        "symbol.kind" => {
            cfg.symbol = match value {
                "diagonal" => SymbolSpec::Diagonal,
                "alpha" => SymbolSpec::Alpha,
                other => return Err(format!("unknown symbol kind `{other}`")),
            }
        }
        "symbol.file" => cfg.symbol = SymbolSpec::File(PathBuf::from(value)),
        _ => {
            if let Some(name) = key.strip_prefix("tolerances.") {
                cfg.tolerances.insert(name.to_string(), p_f64(value)?);
            } else {
                return Err(format!("unknown key `{key}`"));
            }
        }
    }
    Ok(())
}

pub fn parse_ladder(value: &str) -> Result<Vec<f64>, String> {
    let ladder: Result<Vec<f64>, _> = value
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect();
    let ladder = ladder.map_err(|_| format!("bad ladder `{value}`"))?;
    if ladder.is_empty() || ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] <= 0.0 {
        return Err("ladder must be nonempty, positive and ascending".into());
    }
    Ok(ladder)
}

pub fn load(path: Option<&Path>, base: ExperimentConfig) -> Result<ExperimentConfig, String> {
    match path {
        None => Ok(base),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            parse_config(&text, base)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_values() {
        let text = "\n# top comment\nseed = 42\n[run]\nladder = 1, 1.5, 2 # trailing\n[grids]\nn_s = 24\nb_half = 8.0\n[tolerances]\nplancherel_gaussian = 0.04\n";
        let cfg = parse_config(text, ExperimentConfig::default()).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.ladder, vec![1.0, 1.5, 2.0]);
        assert_eq!(cfg.grid.n_s, Some(24));
        assert_eq!(cfg.grid.b_half, Some(8.0));
        assert_eq!(cfg.tolerances["plancherel_gaussian"], 0.04);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_ladders() {
        assert!(parse_config("nope = 1\n", ExperimentConfig::default()).is_err());
        assert!(parse_config("ladder = 2,1\n", ExperimentConfig::default()).is_err());
        assert!(parse_config("ladder =\n", ExperimentConfig::default()).is_err());
    }
}
