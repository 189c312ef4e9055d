//! Report finalization and atomic file output.

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::CliError;

/// Stamp the report with the wall time and a content hash. The hash covers
/// the canonical JSON with `wall_time_ms` zeroed and `content_hash` absent,
/// so repeated runs with the same seed hash identically.
pub fn finalize_report(mut report: serde_json::Value, wall_time_ms: f64) -> serde_json::Value {
    let obj = report.as_object_mut().expect("report is a JSON object");
    obj.insert("wall_time_ms".into(), serde_json::json!(0.0));
    obj.remove("content_hash");
    let canonical = serde_json::to_string(&report).expect("serializable report");
    let hash = hex_digest(canonical.as_bytes());
    let obj = report.as_object_mut().expect("report is a JSON object");
    obj.insert("content_hash".into(), serde_json::json!(hash));
    obj.insert("wall_time_ms".into(), serde_json::json!(wall_time_ms));
    report
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write bytes through a temp file in the target directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .map_err(|e| CliError::usage(format!("cannot create temp file near {}: {e}", path.display())))?;
    tmp.write_all(bytes)
        .map_err(|e| CliError::usage(format!("write failed: {e}")))?;
    tmp.persist(path)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Write the report as pretty JSON to the path, or to stdout when no path
/// was given.
pub fn emit_report(out: Option<&Path>, report: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).expect("serializable report");
    text.push('\n');
    match out {
        Some(path) => atomic_write(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Write CSV rows (first row headers) atomically.
pub fn write_csv(path: &Path, headers: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(headers)
            .map_err(|e| CliError::usage(format!("csv: {e}")))?;
        for row in rows {
            w.write_record(row.iter().map(|v| format!("{v:.17e}")))
                .map_err(|e| CliError::usage(format!("csv: {e}")))?;
        }
        w.flush().map_err(|e| CliError::usage(format!("csv: {e}")))?;
    }
    atomic_write(path, &buf)
}
