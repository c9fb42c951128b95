//! In-memory artifacts, serialized once the computation is reduced.

use atomcav::spectrum::fmt_f64;
use atomcav::trajectory::TrajectoryRecord;
use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::error::CliError;

/// Everything a subcommand produces.
#[derive(Debug, Default)]
pub struct Output {
    /// Printed to stdout as pretty JSON.
    pub stdout: Value,
    /// Relative file name and contents.
    pub files: Vec<(String, Vec<u8>)>,
    /// The scenario section with every default filled in.
    pub resolved: Option<Value>,
    pub warnings: Vec<String>,
}

impl Output {
    pub fn new(stdout: Value) -> Self {
        Output {
            stdout,
            ..Default::default()
        }
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn table(&mut self, stem: &str, table: &Table, format: Format) -> Result<(), CliError> {
        match format {
            Format::Csv => {
                self.files.push((format!("{stem}.csv"), table.csv()));
                Ok(())
            }
            Format::Json => self.json(&format!("{stem}.json"), table),
        }
    }

    /// Trajectory samples as CSV (or JSON) plus a sidecar with seed, params
    /// and events.
    pub fn trajectory(&mut self, stem: &str, rec: &TrajectoryRecord, format: Format) -> Result<(), CliError> {
        match format {
            Format::Csv => {
                let mut buf = Vec::new();
                rec.write_csv(&mut buf)?;
                self.files.push((format!("{stem}.csv"), buf));
            }
            Format::Json => {
                let mut table = Table::new(std::iter::once("t").chain(rec.columns.iter().map(String::as_str)));
                table.data[0] = rec.time.clone();
                for (dst, src) in table.data[1..].iter_mut().zip(&rec.data) {
                    dst.clone_from(src);
                }
                self.json(&format!("{stem}.json"), &table)?;
            }
        }
        self.json(&format!("{stem}_events.json"), &rec.sidecar())
    }
}

/// Named numeric columns of equal length.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    /// Column-major.
    pub data: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<'a>(columns: impl IntoIterator<Item = &'a str>) -> Self {
        let columns: Vec<String> = columns.into_iter().map(str::to_string).collect();
        let data = vec![Vec::new(); columns.len()];
        Table { columns, data }
    }

    pub fn push(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.columns.len());
        for (c, v) in self.data.iter_mut().zip(row) {
            c.push(*v);
        }
    }

    pub fn csv(&self) -> Vec<u8> {
        let mut s = self.columns.join(",");
        s.push('\n');
        let rows = self.data.first().map_or(0, Vec::len);
        for i in 0..rows {
            let row: Vec<String> = self.data.iter().map(|c| fmt_f64(c[i])).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s.into_bytes()
    }
}
