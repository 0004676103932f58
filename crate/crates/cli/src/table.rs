//! CSV result tables with a `#`-prefixed metadata block.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    /// Undefined value, written as an empty field.
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File name without extension.
    pub file: String,
    pub columns: &'static [&'static str],
    pub meta: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: impl Into<String>, columns: &'static [&'static str]) -> Self {
        Self {
            file: file.into(),
            columns,
            meta: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Index of `name` in the schema.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Numeric column, with `None` for empty or text cells.
    pub fn numbers(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column(name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[k] {
                    Cell::Num(v) => Some(v),
                    _ => None,
                })
                .collect(),
        )
    }

    pub fn render(&self) -> CliResult<String> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}").expect("writing to a String");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(CliError::Io(std::io::Error::other(format!(
                    "{}: row {i} has {} fields, schema has {}",
                    self.file,
                    row.len(),
                    self.columns.len()
                ))));
            }
            for (j, cell) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(v) if v.is_finite() => write!(out, "{v:e}").expect("writing to a String"),
                    Cell::Num(v) => {
                        return Err(CliError::Io(std::io::Error::other(format!(
                            "{}: non-finite value {v} in column {}",
                            self.file, self.columns[j]
                        ))))
                    }
                    Cell::Text(s) => out.push_str(s),
                    Cell::Empty => {}
                }
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_to(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(format!("{}.csv", self.file));
        std::fs::write(&path, self.render()?)?;
        Ok(path)
    }
}
