//! CSV reports with a `#`-prefixed header block.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// A CSV table with comment header lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: Vec<String>, columns: &[&str]) -> CsvTable {
        CsvTable {
            header,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.header {
            for part in line.lines() {
                out.push_str("# ");
                out.push_str(part);
                out.push('\n');
            }
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|c| escape(c)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// Writes through a temporary file so a failed run never leaves a partial report.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Parses a table produced by [`CsvTable::render`] (no quoted cells).
pub fn parse_simple(text: &str) -> CsvTable {
    let mut t = CsvTable::default();
    for line in text.lines() {
        if let Some(h) = line.strip_prefix("# ") {
            t.header.push(h.to_string());
        } else if let Some(h) = line.strip_prefix('#') {
            t.header.push(h.to_string());
        } else if t.columns.is_empty() {
            t.columns = line.split(',').map(str::to_string).collect();
        } else if !line.is_empty() {
            t.rows.push(line.split(',').map(str::to_string).collect());
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_parse() {
        let mut t = CsvTable::new(vec!["seed = 1".into()], &["a", "b"]);
        t.push(vec!["1".into(), "2.5".into()]);
        let text = t.render();
        assert_eq!(text, "# seed = 1\na,b\n1,2.5\n");
        assert_eq!(parse_simple(&text), t);
    }

    #[test]
    fn quoting() {
        assert_eq!(escape("x,y"), "\"x,y\"");
    }
}
