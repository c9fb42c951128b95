//! Time-domain records shared by the stochastic and deterministic
//! integrators: named columns on a common time grid, plus discrete events.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::spectrum::fmt_f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: String,
    pub time: f64,
    /// Sample index the event is attached to, if any.
    pub index: Option<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub time: Vec<f64>,
    pub columns: Vec<String>,
    /// Column-major samples, one vector per entry of `columns`.
    pub data: Vec<Vec<f64>>,
    pub seed: Option<u64>,
    pub events: Vec<Event>,
    /// Parameters that produced the run, for the JSON sidecar.
    pub params: serde_json::Value,
}

impl TrajectoryRecord {
    pub fn new(columns: &[&str], seed: Option<u64>, params: serde_json::Value) -> Self {
        TrajectoryRecord {
            time: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            data: vec![Vec::new(); columns.len()],
            seed,
            events: Vec::new(),
            params,
        }
    }

    pub fn push(&mut self, t: f64, row: &[f64]) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.time.push(t);
        for (col, v) in self.data.iter_mut().zip(row) {
            col.push(*v);
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|i| self.data[i].as_slice())
    }

    pub fn events_of<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Event> + 'a {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.column(name).and_then(|c| c.last().copied())
    }

    /// Time strictly increasing, every column complete, and any
    /// `n_photons` column non-negative.
    pub fn is_consistent(&self) -> bool {
        let monotone = self.time.windows(2).all(|w| w[1] > w[0]);
        let complete = self.data.iter().all(|c| c.len() == self.time.len());
        let photons_ok = self.column("n_photons").is_none_or(|c| c.iter().all(|&n| n >= 0.0));
        monotone && complete && photons_ok
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "t")?;
        for c in &self.columns {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
        for i in 0..self.time.len() {
            write!(w, "{}", fmt_f64(self.time[i]))?;
            for col in &self.data {
                write!(w, ",{}", fmt_f64(col[i]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Sidecar with parameters, seed and events (no samples).
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "columns": self.columns,
            "samples": self.time.len(),
            "seed": self.seed,
            "params": self.params,
            "events": self.events,
        })
    }
}
