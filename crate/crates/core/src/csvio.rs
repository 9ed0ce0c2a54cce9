//! Numeric CSV tables with a header row.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Column-major numeric table read from a headered CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    /// Source line of each data row, for diagnostics.
    pub lines: Vec<u64>,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.lines.len()
    }

    /// Index of a column by case-insensitive name.
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h.eq_ignore_ascii_case(name))
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.column_index(name).map(|i| self.columns[i].as_slice())
    }

    /// Returns the named columns or a parse error naming the first missing one.
    pub fn require(&self, source: &str, names: &[&str]) -> Result<Vec<&[f64]>> {
        names
            .iter()
            .map(|n| {
                self.column(n).ok_or_else(|| Error::Parse {
                    path: source.to_string(),
                    line: 1,
                    message: format!("missing column '{n}' (have: {})", self.header.join(", ")),
                })
            })
            .collect()
    }
}

pub fn read_table(path: impl AsRef<Path>) -> Result<Table> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    parse_table(&text, &path.display().to_string())
}

pub fn parse_table(text: &str, source: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let parse_err = |line: u64, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(parse_err(1, "missing header row".into()));
    }
    let mut columns = vec![Vec::new(); header.len()];
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        for (i, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("column '{}': cannot parse '{field}' as a number", header[i])))?;
            columns[i].push(v);
        }
        lines.push(line);
    }
    Ok(Table {
        header,
        columns,
        lines,
    })
}

/// Formats a table; `f64` values use the shortest representation that parses back exactly.
pub fn format_table(header: &[&str], columns: &[&[f64]]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    let n = columns.first().map_or(0, |c| c.len());
    for row in 0..n {
        let fields: Vec<String> = columns.iter().map(|c| format!("{}", c[row])).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_table(path: impl AsRef<Path>, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    write_text(path, &format_table(header, columns))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path.display(), e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| Error::io(path.display(), e))
}
