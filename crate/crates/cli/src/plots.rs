//! CSV emission from verification reports, for external plotting.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Parse a report plus its sibling timings file and emit one CSV per check
/// with columns (resolution_scale, rel_err, runtime_ms). Returns the list of
/// CSV paths written (the manifest content).
pub fn emit_plots(report_paths: &[PathBuf], out_dir: &Path) -> Result<Vec<PathBuf>, String> {
    std::fs::create_dir_all(out_dir).map_err(|e| e.to_string())?;
    let mut written = Vec::new();
    for report_path in report_paths {
        let text = std::fs::read_to_string(report_path)
            .map_err(|e| format!("cannot read {}: {e}", report_path.display()))?;
        // Timings are optional; a missing file leaves the column empty.
        let timing_path = report_path
            .to_string_lossy()
            .replace(".report.jsonl", ".timings.jsonl");
        let timings_text = std::fs::read_to_string(&timing_path).unwrap_or_default();
        let mut timings: BTreeMap<(String, String), u128> = BTreeMap::new();
        for line in timings_text.lines() {
            let v: serde_json::Value =
                serde_json::from_str(line).map_err(|e| format!("bad timing line: {e}"))?;
            if v["type"] == "timing" {
                timings.insert(
                    (
                        v["name"].as_str().unwrap_or_default().to_string(),
                        v["scale"].to_string(),
                    ),
                    v["runtime_ms"].as_u64().unwrap_or(0) as u128,
                );
            }
        }

        let mut suite = String::from("suite");
        let mut per_check: BTreeMap<String, Vec<(f64, f64, Option<u128>)>> = BTreeMap::new();
        for line in text.lines() {
            let v: serde_json::Value =
                serde_json::from_str(line).map_err(|e| format!("bad report line: {e}"))?;
            match v["type"].as_str() {
                Some("env") => {
                    if let Some(s) = v["suite"].as_str() {
                        suite = s.to_string();
                    }
                }
                Some("check") => {
                    let name = v["name"].as_str().unwrap_or_default().to_string();
                    let scale = v["scale"].as_f64().unwrap_or(1.0);
                    let rel = v["rel_err"].as_f64().unwrap_or(f64::NAN);
                    let ms = timings.get(&(name.clone(), v["scale"].to_string())).copied();
                    per_check.entry(name).or_default().push((scale, rel, ms));
                }
                _ => {}
            }
        }
        for (name, rows) in per_check {
            let path = out_dir.join(format!("{suite}.{name}.csv"));
            let mut f = std::fs::File::create(&path).map_err(|e| e.to_string())?;
            writeln!(f, "resolution_scale,rel_err,runtime_ms").map_err(|e| e.to_string())?;
            for (scale, rel, ms) in rows {
                let ms_str = ms.map(|m| m.to_string()).unwrap_or_default();
                writeln!(f, "{scale},{rel},{ms_str}").map_err(|e| e.to_string())?;
            }
            written.push(path);
        }
    }
    // The manifest lists every CSV produced (empty input -> empty manifest).
    let manifest = out_dir.join("manifest.txt");
    let mut f = std::fs::File::create(&manifest).map_err(|e| e.to_string())?;
    for p in &written {
        writeln!(f, "{}", p.display()).map_err(|e| e.to_string())?;
    }
    Ok(written)
}
