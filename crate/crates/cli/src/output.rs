//! Output files. Every file starts with a provenance header: comment lines
//! for CSV, a `provenance` member for JSON, a first line for JSON-lines.

use anyhow::{Context, Result};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub const TOOL: &str = concat!("posdef-lab ", env!("CARGO_PKG_VERSION"));

/// Header payload: tool version, the full parsed command line and the seed.
pub fn provenance(run_config: &impl Serialize, seed: u64) -> Result<serde_json::Value> {
    Ok(serde_json::json!({
        "tool": TOOL,
        "seed": seed,
        "run_config": serde_json::to_value(run_config)?,
    }))
}

/// Destination: a file, or stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).context("writing to stdout")?;
            out.flush().context("writing to stdout")
        }
    }
}

/// Pretty JSON object `{"provenance": ..., "result": ...}` plus newline.
pub fn json_document(provenance: &serde_json::Value, result: &impl Serialize) -> Result<Vec<u8>> {
    let doc = serde_json::json!({ "provenance": provenance, "result": serde_json::to_value(result)? });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text.into_bytes())
}

/// Numbers are written in Rust's shortest round-trip form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// CSV with `# `-prefixed header lines (one compact JSON line of provenance).
pub fn csv_document(provenance: &serde_json::Value, columns: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut bytes = format!("# {}\n", serde_json::to_string(provenance)?).into_bytes();
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(columns)?;
    for row in rows {
        writer.write_record(row)?;
    }
    bytes.extend(writer.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?);
    Ok(bytes)
}

/// Parses a file written by [`csv_document`].
pub fn parse_csv_document(bytes: &[u8]) -> Result<(serde_json::Value, Vec<String>, Vec<Vec<String>>)> {
    let text = std::str::from_utf8(bytes).context("CSV is not UTF-8")?;
    let first = text.lines().next().context("empty CSV")?;
    let header = first.strip_prefix("# ").context("CSV lacks a provenance line")?;
    let provenance = serde_json::from_str(header)?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let columns = reader.headers()?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| Ok(r?.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok((provenance, columns, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let prov = serde_json::json!({"tool": TOOL, "seed": 7});
        let rows = vec![vec![num(0.1), num(1e-300), "x,y".into()], vec![num(2.0), num(-3.5), "\"q\"".into()]];
        let first = csv_document(&prov, &["a", "b", "c"], &rows).unwrap();
        let (p, cols, parsed) = parse_csv_document(&first).unwrap();
        let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
        let second = csv_document(&p, &cols, &parsed).unwrap();
        assert_eq!(first, second);
    }
}
