//! Command-line surface.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "atomcav", version, about = "Cold-atom cavity optomechanics toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print derived quantities (cooperativity, g_om, Z_ho, ...) as JSON.
    Derive(Common),
    /// Intracavity photon-number spectrum S_nn(ω).
    Spectrum(Common),
    /// Ponderomotive AM/PM gain and squeezing spectrum.
    Gain(Common),
    /// Self-consistent photon number versus detuning.
    SweepBistability(Common),
    /// Side-pumped self-organization ensemble.
    Selforg(Common),
    /// Single-atom transit with photon counting.
    Transit(Common),
    /// Bang-bang feedback on a trapped atom, on versus off.
    Feedback(Common),
    /// Stokes/anti-Stokes sideband rates for a resonant probe.
    Sideband(Common),
    /// Semiclassical nonlinear dynamics with burst detection.
    Dynamics(Common),
    /// Re-run the scenario recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON configuration (or a manifest from a previous run).
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Output directory; nothing is written without it.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid as [NAME=]START:STOP:N, rad/s. Repeatable.
    #[arg(long = "grid", allow_hyphen_values = true)]
    pub grids: Vec<Grid>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Mechanical occupation for `sideband`.
    #[arg(long)]
    pub nu_bar: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub name: Option<String>,
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        atomcav::spectrum::linspace(self.start, self.stop, self.n)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, spec) = match s.split_once('=') {
            Some((n, rest)) => (Some(n.trim().to_string()), rest),
            None => (None, s),
        };
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid `{s}` is not START:STOP:N"));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("grid `{s}`: `{p}` is not a number"))
        };
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("grid `{s}`: `{}` is not a count", parts[2]))?;
        if n < 2 {
            return Err(format!("grid `{s}` needs at least 2 points"));
        }
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return Err(format!("grid `{s}` needs finite START < STOP"));
        }
        Ok(Grid { name, start, stop, n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_named_and_bare_grids() {
        let g: Grid = "omega=-1e6:1e6:11".parse().unwrap();
        assert_eq!(g.name.as_deref(), Some("omega"));
        assert_eq!(g.points().len(), 11);
        let g: Grid = "0:1:2".parse().unwrap();
        assert_eq!(g.name, None);
        assert_eq!(g.points(), vec![0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        for s in ["0:1:1", "1:0:5", "a:1:3", "0:1", "0:inf:3"] {
            assert!(s.parse::<Grid>().is_err(), "{s}");
        }
    }
}
