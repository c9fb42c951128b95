//! Frequency-domain series and their CSV form.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

/// Values sampled on a frequency grid, with provenance metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSeries {
    pub quantity: String,
    pub units: String,
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub imag: Option<Vec<f64>>,
    /// FNV-1a hash of the canonical JSON of the generating parameters.
    pub params_hash: String,
}

impl SpectrumSeries {
    pub fn real(quantity: &str, units: &str, omega: Vec<f64>, values: Vec<f64>, params_hash: String) -> Self {
        SpectrumSeries {
            quantity: quantity.to_string(),
            units: units.to_string(),
            omega,
            values,
            imag: None,
            params_hash,
        }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Writes `omega_rad_s,value[,imag]` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        match &self.imag {
            None => {
                writeln!(w, "omega_rad_s,value")?;
                for (o, v) in self.omega.iter().zip(&self.values) {
                    writeln!(w, "{},{}", fmt_f64(*o), fmt_f64(*v))?;
                }
            }
            Some(im) => {
                writeln!(w, "omega_rad_s,value,imag")?;
                for ((o, v), i) in self.omega.iter().zip(&self.values).zip(im) {
                    writeln!(w, "{},{},{}", fmt_f64(*o), fmt_f64(*v), fmt_f64(*i))?;
                }
            }
        }
        Ok(())
    }
}

/// Round-trip-safe decimal form with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// 64-bit FNV-1a over the canonical JSON form of `value`.
pub fn params_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).unwrap_or_default();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    let step = (stop - start) / (n - 1) as f64;
    (0..n).map(|i| start + step * i as f64).collect()
}

/// `n` log-spaced points from `start` to `stop` inclusive (both > 0).
pub fn logspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    linspace(start.ln(), stop.ln(), n).into_iter().map(f64::exp).collect()
}
