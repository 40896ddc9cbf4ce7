//! CSV reading and writing with a pinned schema header.
//!
//! Every file this tool produces starts with a comment line naming the
//! producer and a schema number, e.g.
//!
//! ```text
//! # minkowski-lab v0.1.0 schema=1
//! ```
//!
//! Readers accept any producer version but insist on the schema number, so
//! silently reinterpreting a stale file is impossible.  Numbers are written
//! with Rust's shortest round-trip formatting: re-reading a file reproduces
//! the original `f64`s bit for bit, which is what makes byte-level
//! determinism checks meaningful.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Schema number stamped into (and required from) every CSV file.
pub const SCHEMA_VERSION: u32 = 1;

/// The first line of every file written by this tool.
pub fn schema_header() -> String {
    format!(
        "# minkowski-lab v{} schema={}",
        env!("CARGO_PKG_VERSION"),
        SCHEMA_VERSION
    )
}

/// An in-memory CSV file: leading comments, column names, numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    /// Comment lines (without the `# ` prefix), schema header excluded.
    pub comments: Vec<String>,
    /// Column names from the header row.
    pub columns: Vec<String>,
    /// Data rows; every row has `columns.len()` entries.
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    /// Index of the named column.
    ///
    /// # Errors
    ///
    /// When the column is absent (message lists what is present).
    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .with_context(|| {
                format!(
                    "column `{name}` not found (file has: {})",
                    self.columns.join(", ")
                )
            })
    }

    /// All values of the named column, in row order.
    ///
    /// # Errors
    ///
    /// When the column is absent.
    pub fn column_values(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self.column(name)?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Renders a table to a string (schema header, comments, header row, rows).
pub fn render_csv(comments: &[String], columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&schema_header());
    out.push('\n');
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{v}");
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Writes a table to disk.
///
/// # Errors
///
/// I/O errors, annotated with the path.
pub fn write_csv(
    path: &Path,
    comments: &[String],
    columns: &[&str],
    rows: &[Vec<f64>],
) -> Result<()> {
    let text = render_csv(comments, columns, rows);
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Reads a table from disk, checking the schema header.
///
/// # Errors
///
/// I/O errors, a missing or mismatched schema line, ragged rows, or cells
/// that do not parse as `f64`.
pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_csv(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Parses CSV text in the format produced by [`render_csv`].
///
/// # Errors
///
/// As for [`read_csv`], minus I/O.
pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut lines = text.lines();
    let first = lines.next().context("empty file")?;
    let Some(rest) = first.strip_prefix("# minkowski-lab v") else {
        bail!("missing `# minkowski-lab v… schema=…` header line");
    };
    let schema: u32 = rest
        .rsplit("schema=")
        .next()
        .context("header line lacks schema=")?
        .trim()
        .parse()
        .context("header schema number")?;
    if schema != SCHEMA_VERSION {
        bail!("schema {schema} unsupported (this build reads schema {SCHEMA_VERSION})");
    }

    let mut comments = Vec::new();
    let mut columns = Vec::new();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if columns.is_empty() {
                comments.push(c.trim_start().to_string());
            }
            continue;
        }
        if columns.is_empty() {
            columns = line.split(',').map(|s| s.trim().to_string()).collect();
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                cell.trim()
                    .parse::<f64>()
                    .with_context(|| format!("line {}: bad number `{cell}`", lineno + 2))
            })
            .collect::<Result<_>>()?;
        if row.len() != columns.len() {
            bail!(
                "line {}: {} cells, header has {}",
                lineno + 2,
                row.len(),
                columns.len()
            );
        }
        rows.push(row);
    }
    if columns.is_empty() {
        bail!("no header row");
    }
    Ok(CsvTable {
        comments,
        columns,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let rows = vec![
            vec![0.1, -3.0, 1.0 / 3.0],
            vec![f64::MIN_POSITIVE, 1e-300, 2.5e17],
            vec![-0.0, 9_007_199_254_740_993.0, 1.0 + f64::EPSILON],
        ];
        let text = render_csv(&["note".to_string()], &["a", "b", "c"], &rows);
        let table = parse_csv(&text).unwrap();
        assert_eq!(table.comments, vec!["note".to_string()]);
        assert_eq!(table.columns, vec!["a", "b", "c"]);
        for (orig, read) in rows.iter().zip(&table.rows) {
            for (&x, &y) in orig.iter().zip(read) {
                assert_eq!(x.to_bits(), y.to_bits(), "{x} re-read as {y}");
            }
        }
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let text = "# minkowski-lab v9.9.9 schema=2\nv\n1.0\n";
        let err = parse_csv(text).unwrap_err().to_string();
        assert!(err.contains("schema 2"), "{err}");
        // Foreign producer version with the right schema is fine.
        let text = "# minkowski-lab v9.9.9 schema=1\nv\n1.0\n";
        assert!(parse_csv(text).is_ok());
    }

    #[test]
    fn missing_header_is_rejected() {
        assert!(parse_csv("v,chi\n1.0,2.0\n").is_err());
        assert!(parse_csv("").is_err());
    }

    #[test]
    fn ragged_rows_and_bad_cells_are_rejected() {
        let head = schema_header();
        assert!(parse_csv(&format!("{head}\na,b\n1.0\n")).is_err());
        assert!(parse_csv(&format!("{head}\na,b\n1.0,zebra\n")).is_err());
    }

    #[test]
    fn column_lookup() {
        let text = render_csv(&[], &["v", "chi"], &[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let table = parse_csv(&text).unwrap();
        assert_eq!(table.column_values("chi").unwrap(), vec![2.0, 4.0]);
        let err = table.column("nope").unwrap_err().to_string();
        assert!(err.contains("v, chi"), "{err}");
    }
}
