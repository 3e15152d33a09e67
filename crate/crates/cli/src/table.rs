//! Plain CSV tables: comma separated, LF line endings, mandatory header.

use std::io::{self, Write};

/// Formats a value with 9 significant digits.
pub fn format_value(x: f64) -> String {
    if x == 0.0 {
        "0".to_owned()
    } else {
        format!("{x:.8e}")
    }
}

pub fn write_table<W: Write + ?Sized, R: AsRef<[f64]>>(
    out: &mut W,
    header: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for row in rows {
        line.clear();
        for (i, x) in row.as_ref().iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format_value(*x));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

/// A parsed table: header names and numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn parse_table(text: &str) -> Result<Table, String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("empty table")?
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .enumerate()
        .map(|(n, line)| {
            let row = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| format!("row {}: {e}", n + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != header.len() {
                return Err(format!(
                    "row {} has {} fields, header has {}",
                    n + 1,
                    row.len(),
                    header.len()
                ));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Table { header, rows })
}
