//! Running the command-line binary.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

pub fn logiclm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logiclm"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Replaces the value of every `"elapsed_ms"` field, the only timing data
/// in reports and traces.
pub fn strip_timing(json: &str) -> String {
    json.lines()
        .map(|l| match l.find("\"elapsed_ms\": ") {
            Some(i) => {
                let comma = if l.trim_end().ends_with(',') { "," } else { "" };
                format!("{}\"elapsed_ms\": 0{comma}", &l[..i])
            }
            None => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Evaluates the gold set against its replay fixture into `dir` and returns
/// the report and every trace file, timing removed.
pub fn replay_eval(dir: &Path, workers: usize) -> (String, BTreeMap<String, String>) {
    let dataset = super::fixture_path("gold.jsonl");
    let fixture = super::fixture_path("gold.replay.json");
    let report = dir.join("report.json");
    let traces = dir.join("traces");
    let workers = workers.to_string();
    let out = logiclm(&[
        "eval",
        dataset.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "--traces",
        traces.to_str().unwrap(),
        "--workers",
        &workers,
        "--provider",
        "replay",
        "--fixture",
        fixture.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(&traces).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        files.insert(name, strip_timing(&std::fs::read_to_string(&path).unwrap()));
    }
    (strip_timing(&std::fs::read_to_string(report).unwrap()), files)
}
