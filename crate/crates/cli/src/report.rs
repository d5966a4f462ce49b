//! Machine-readable run reports: one JSON line per check, fixed key order,
//! byte-identical output for identical reports.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use lindyn_core::Verdict;

use crate::spec::ExperimentSpec;

/// One record per check. The serialized form deliberately contains only
/// deterministic fields so that report files are byte-stable across runs;
/// wall-clock runtimes live next to the records in [`RunReport`] and are
/// printed to the console instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    pub family: String,
    pub verdict: Verdict,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub spec_digest: String,
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub records: Vec<RunRecord>,
    pub runtimes_ms: Vec<u128>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.verdict == Verdict::Pass)
    }
}

/// Stable hash of the canonicalized (validated, defaults-filled) spec.
pub fn spec_digest(spec: &ExperimentSpec) -> String {
    let canonical = serde_json::to_string(spec).expect("spec serialization is infallible");
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    format!("sha256:{:x}", hasher.finalize())
}

/// Render one record as its canonical JSON line.
pub fn render_record(record: &RunRecord) -> String {
    serde_json::to_string(record).expect("record serialization is infallible")
}

/// Write the report as JSON lines, one record per line.
pub fn emit_report(report: &RunReport, path: &Path) -> std::io::Result<()> {
    let mut out = String::new();
    for record in &report.records {
        out.push_str(&render_record(record));
        out.push('\n');
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(out.as_bytes())
}

/// Metric helper: finite numbers stay numbers, non-finite values become
/// their string names (JSON has no infinities).
pub fn metric_number(value: f64) -> serde_json::Value {
    match serde_json::Number::from_f64(value) {
        Some(n) => serde_json::Value::Number(n),
        None => serde_json::Value::String(format!("{value}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(name: &str) -> RunRecord {
        let mut metrics = BTreeMap::new();
        metrics.insert("coverage".to_string(), metric_number(1.0));
        metrics.insert("max_gap".to_string(), metric_number(f64::INFINITY));
        RunRecord {
            experiment: name.to_string(),
            family: "poly_trunc".to_string(),
            verdict: Verdict::Pass,
            metrics,
            seed: 7,
            spec_digest: "sha256:dead".to_string(),
        }
    }

    #[test]
    fn emit_one_line_per_record_and_roundtrip() {
        let report = RunReport {
            records: vec![record("density"), record("hc_grid"), record("closure")],
            runtimes_ms: vec![1, 2, 3],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.jsonl");
        emit_report(&report, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        for (line, original) in lines.iter().zip(&report.records) {
            let parsed: RunRecord = serde_json::from_str(line).unwrap();
            assert_eq!(&parsed, original);
        }
    }

    #[test]
    fn emit_is_byte_identical_for_identical_reports() {
        let report = RunReport {
            records: vec![record("density")],
            runtimes_ms: vec![5],
        };
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.jsonl");
        let p2 = dir.path().join("b.jsonl");
        emit_report(&report, &p1).unwrap();
        emit_report(&report, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }
}
