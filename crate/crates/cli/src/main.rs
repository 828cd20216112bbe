//! Batch verification runner.
//!
//! Usage:
//!   pnc <verb> [--config PATH] [--out DIR] [--seed N] [--ladder "1,1.5"]
//!   pnc emit-plots [--out DIR] REPORT.jsonl...
//!
//! Verbs: group-axioms, plancherel, invert, moyal, psido, trace, weyl,
//! emit-plots. Exit codes: 0 success, 1 check failures, 2 config errors.
//! `PNC_THREADS` caps the worker count; reports are bitwise reproducible
//! for a fixed (config, seed) regardless of it.

use std::path::PathBuf;

use pnc_cli::config::{load, parse_ladder, ExperimentConfig};
use pnc_cli::suites::{self, Fault};
use pnc_cli::plots;

struct Args {
    verb: String,
    config_path: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    ladder: Option<Vec<f64>>,
    fault: Fault,
    extra: Vec<PathBuf>,
}

fn usage() -> &'static str {
    "usage: pnc <group-axioms|plancherel|invert|moyal|psido|trace|weyl|emit-plots>\n\
     \t[--config PATH] [--out DIR] [--seed N] [--ladder \"1,1.5\"]\n\
     \t[--inject-fault compose]   (negative control for group-axioms)\n\
     emit-plots additionally takes report.jsonl paths as positional arguments."
}

fn parse_args() -> Result<Args, String> {
    let mut args = std::env::args().skip(1);
    let verb = args.next().ok_or_else(|| "missing verb".to_string())?;
    let mut out = Args {
        verb,
        config_path: None,
        out: None,
        seed: None,
        ladder: None,
        fault: Fault::None,
        extra: Vec::new(),
    };
    while let Some(a) = args.next() {
        match a.as_str() {
            "--config" => {
                out.config_path =
                    Some(PathBuf::from(args.next().ok_or("missing --config value")?))
            }
            "--out" => out.out = Some(PathBuf::from(args.next().ok_or("missing --out value")?)),
            "--seed" => {
                out.seed = Some(
                    args.next()
                        .ok_or("missing --seed value")?
                        .parse()
                        .map_err(|_| "bad --seed value".to_string())?,
                )
            }
            "--ladder" => {
                out.ladder = Some(parse_ladder(&args.next().ok_or("missing --ladder value")?)?)
            }
            "--inject-fault" => {
                let what = args.next().ok_or("missing --inject-fault value")?;
                out.fault = match what.as_str() {
                    "compose" => Fault::Compose,
                    other => return Err(format!("unknown fault `{other}`")),
                };
            }
            other if !other.starts_with("--") => out.extra.push(PathBuf::from(other)),
            other => return Err(format!("unknown flag `{other}`")),
        }
    }
    Ok(out)
}

fn default_ladder(verb: &str) -> Vec<f64> {
    match verb {
        "plancherel" => vec![1.0, 4.0 / 3.0],
        "invert" => vec![1.0, 7.0 / 6.0],
        "moyal" => vec![1.0, 1.25],
        "psido" => vec![1.0, 1.25],
        _ => vec![1.0],
    }
}

fn main() {
    let args = match parse_args() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}\n\n{}", usage());
            std::process::exit(2);
        }
    };

    if let Ok(threads) = std::env::var("PNC_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }

    if args.verb == "emit-plots" {
        let out_dir = args.out.unwrap_or_else(|| PathBuf::from("pnc-out"));
        match plots::emit_plots(&args.extra, &out_dir) {
            Ok(written) => {
                println!("wrote {} csv file(s) under {}", written.len(), out_dir.display());
                std::process::exit(0);
            }
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(2);
            }
        }
    }

    let mut base = ExperimentConfig {
        ladder: default_ladder(&args.verb),
        ..ExperimentConfig::default()
    };
    let mut cfg = match load(args.config_path.as_deref(), base.clone()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            std::process::exit(2);
        }
    };
    // Flags override the file.
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.out_dir = out;
    }
    if let Some(ladder) = args.ladder {
        cfg.ladder = ladder;
    }
    base.ladder = cfg.ladder.clone();

    let rep = match args.verb.as_str() {
        "group-axioms" => suites::cmd_group_axioms(&cfg, args.fault),
        "plancherel" => suites::cmd_plancherel(&cfg),
        "invert" => suites::cmd_invert(&cfg),
        "moyal" => suites::cmd_moyal(&cfg),
        "psido" => suites::cmd_psido(&cfg),
        "trace" => suites::cmd_trace(&cfg),
        "weyl" => suites::cmd_weyl(&cfg),
        other => {
            eprintln!("unknown verb `{other}`\n\n{}", usage());
            std::process::exit(2);
        }
    };

    rep.print_lines();
    if let Err(e) = rep.write(&cfg.out_dir) {
        eprintln!("cannot write report: {e}");
        std::process::exit(2);
    }
    std::process::exit(if rep.failures() == 0 { 0 } else { 1 });
}
