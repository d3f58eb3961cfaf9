//! Run configuration, orchestration and reporting.
//!
//! A run reads a [`RunConfig`], builds the configured exhaustion, certifies
//! it, and writes to the output directory:
//!
//! - `records.jsonl`: a header line (`"kind": "header"`, with the resolved
//!   config and every selected constant) followed by one line per certified
//!   inequality (`"kind": "record"`);
//! - `summary.txt`: the records grouped by anchor;
//! - `state.json`: the pipeline state, enough to rebuild the field;
//! - `tables/*.csv`: plot-ready tables.
//!
//! Apart from the header's `timestamp`, two runs of one config write
//! byte-identical files.

pub mod config;
pub mod run;

use std::fmt::Write as _;
use std::path::Path;

pub use config::{CertifyConfig, DomainConfig, GaussianConfig, OutputConfig, PipelineConfig, RunConfig};
pub use run::{run, run_path, Overrides, RunOutcome, EXIT_ABORT, EXIT_CERTIFICATION, EXIT_CONFIG, EXIT_PASS};

use crate::error::{Error, Result};
use crate::exhaustion::PipelineState;
use crate::report::Record;

/// The domains and pipelines a config can name.
pub fn list_catalog() -> String {
    let mut s = String::from("domains:\n");
    for (name, params) in [
        ("ball", "radius = 1.0, center = [[re, im], ...] (origin if omitted)"),
        ("polydisc", "radii = [r1, r2, ...]"),
        ("halfspace_intersection", "normals = [[[re, im], ...], ...], offsets = [b1, ...]"),
        ("hartogs_wedge", "radius = 1.0"),
        ("full_space", ""),
        ("hollowed_ball", "outer = 1.0, inner (not pseudo-convex)"),
    ] {
        writeln!(s, "  {name:<24}{params}").ok();
    }
    s.push_str("pipelines:\n");
    for (name, what) in [
        ("lipschitz_eta", "-ln d + |z|^2 + c0"),
        ("smooth_Psi", "smooth exhaustion"),
        ("semi_anti_Psi", "Lipschitz semi-anti-plurisubharmonic exhaustion"),
        ("psh_eta", "smooth plurisubharmonic exhaustion (pseudo-convex domains)"),
    ] {
        writeln!(s, "  {name:<24}{what}").ok();
    }
    s
}

/// Human summary of records, grouped by anchor in order of first appearance.
pub fn describe_records(records: &[Record], state: Option<&PipelineState>) -> String {
    let mut s = String::new();
    if let Some(st) = state {
        writeln!(
            s,
            "stage {} on {} (n = {}, seed = {}, K = {}, c0 = {})",
            st.stage.as_str(),
            st.domain,
            st.dim,
            st.seed,
            st.truncation_k,
            st.c0
        )
        .ok();
    }
    let mut anchors: Vec<&str> = Vec::new();
    for r in records {
        if !anchors.contains(&r.anchor.as_str()) {
            anchors.push(&r.anchor);
        }
    }
    for a in &anchors {
        let group: Vec<&Record> = records.iter().filter(|r| r.anchor == *a).collect();
        let failed = group.iter().filter(|r| !r.passed).count();
        writeln!(s, "{a}: {} record(s), {failed} failed", group.len()).ok();
        for r in group {
            writeln!(
                s,
                "  [{}] {}: worst {:.6e} vs tolerance {:.3e} over {} samples{}",
                if r.passed { "pass" } else { "FAIL" },
                r.subject,
                r.worst_violation,
                r.tolerance,
                r.samples,
                match (&r.location, r.passed) {
                    (Some(l), false) => format!(" at {l:?}"),
                    _ => String::new(),
                }
            )
            .ok();
        }
    }
    let failures = records.iter().filter(|r| !r.passed).count();
    writeln!(s, "{} records, {failures} failures", records.len()).ok();
    s
}

/// Reads a records file and renders its summary.
pub fn describe(report_path: &Path) -> Result<String> {
    let text =
        std::fs::read_to_string(report_path).map_err(|e| Error::Io(format!("{}: {e}", report_path.display())))?;
    let mut records = Vec::new();
    let mut state = None;
    let mut abort = None;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::Io(format!("{}:{}: {e}", report_path.display(), i + 1)))?;
        match value.get("kind").and_then(|k| k.as_str()) {
            Some("header") => {
                if let Some(st) = value.get("state") {
                    state = serde_json::from_value::<PipelineState>(st.clone()).ok();
                }
                abort = value.get("abort").and_then(|a| a.as_str()).map(String::from);
            }
            _ => records.push(
                serde_json::from_value::<Record>(value)
                    .map_err(|e| Error::Io(format!("{}:{}: {e}", report_path.display(), i + 1)))?,
            ),
        }
    }
    let mut s = describe_records(&records, state.as_ref());
    if let Some(a) = abort {
        writeln!(s, "pipeline aborted: {a}").ok();
    }
    Ok(s)
}
