//! Line-delimited verification reports.
//!
//! `report.jsonl` holds one JSON record per line: an `env` header, one
//! `check` record per (check, resolution scale) in canonical order, and a
//! `summary` footer. The file is a pure function of (config, seed), so
//! re-runs are bitwise identical; wall-clock timings go to the sibling
//! `timings.jsonl`, which is excluded from that guarantee.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub scale: f64,
    pub grid: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
struct EnvRecord<'a> {
    version: &'a str,
    suite: &'a str,
    seed: u64,
}

#[derive(Clone, Debug, Serialize)]
struct SummaryRecord<'a> {
    suite: &'a str,
    checks: usize,
    failures: usize,
}

#[derive(Clone, Debug)]
pub struct Timing {
    pub name: String,
    pub scale: f64,
    pub runtime_ms: u128,
}

pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub timings: Vec<Timing>,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            seed,
            checks: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    /// Serialize the deterministic report (no timings).
    pub fn render(&self) -> String {
        let mut out = String::new();
        let env = EnvRecord {
            version: env!("CARGO_PKG_VERSION"),
            suite: &self.suite,
            seed: self.seed,
        };
        out.push_str(&format!(
            "{{\"type\":\"env\",{}}}\n",
            strip_braces(&serde_json::to_string(&env).expect("env json"))
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "{{\"type\":\"check\",{}}}\n",
                strip_braces(&serde_json::to_string(c).expect("check json"))
            ));
        }
        let summary = SummaryRecord {
            suite: &self.suite,
            checks: self.checks.len(),
            failures: self.failures(),
        };
        out.push_str(&format!(
            "{{\"type\":\"summary\",{}}}\n",
            strip_braces(&serde_json::to_string(&summary).expect("summary json"))
        ));
        out
    }

    pub fn render_timings(&self) -> String {
        let mut out = String::new();
        for t in &self.timings {
            out.push_str(&format!(
                "{{\"type\":\"timing\",\"name\":{},\"scale\":{},\"runtime_ms\":{}}}\n",
                serde_json::to_string(&t.name).expect("name"),
                t.scale,
                t.runtime_ms
            ));
        }
        out
    }

    /// Write report.jsonl and timings.jsonl under `dir`, prefixed by suite.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let report_path = dir.join(format!("{}.report.jsonl", self.suite));
        let mut f = std::fs::File::create(report_path)?;
        f.write_all(self.render().as_bytes())?;
        let timing_path = dir.join(format!("{}.timings.jsonl", self.suite));
        let mut t = std::fs::File::create(timing_path)?;
        t.write_all(self.render_timings().as_bytes())?;
        Ok(())
    }

    /// Print one pass/fail line per check.
    pub fn print_lines(&self) {
        for c in &self.checks {
            println!(
                "[{}] {} scale={} rel_err={:.3e} tol={:.1e} ({})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.scale,
                c.rel_err,
                c.tolerance,
                c.grid
            );
        }
        println!(
            "suite {}: {}/{} checks passed",
            self.suite,
            self.checks.len() - self.failures(),
            self.checks.len()
        );
    }
}

fn strip_braces(json: &str) -> &str {
    json.trim_start_matches('{').trim_end_matches('}')
}
