//! One atom moving classically through a driven cavity in the dispersive
//! regime, and radial bang-bang feedback on a trapped atom.
//!
//! The atom shifts the cavity by `U(r) = g(r)²/Δ_ca` and feels the
//! potential `ħ U(r) |α|²`. The field obeys
//! `dα/dt = [i(Δ − U(r)) − κ]α + η`, with Δ the probe detuning from the
//! empty cavity. Transmitted photons are detected as a Poisson process at
//! rate `ε·2κ|α|²`; spontaneous emission at `2γ g²|α|²/Δ_ca²` adds recoil
//! kicks (absorption along the cavity axis, emission with a dipole pattern).

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::consts::HBAR;
use crate::error::{PhysicsError, Result};
use crate::exec::stream_rng;
use crate::params::ValidatedSystem;
use crate::trajectory::{Event, TrajectoryRecord};

/// |Δ_ca| below this multiple of g0 is flagged as outside the dispersive
/// regime.
pub const DISPERSIVE_MARGIN: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleAtomParams {
    pub g0: f64,
    pub k: f64,
    pub waist: f64,
    pub kappa: f64,
    /// Atomic half-linewidth.
    pub gamma: f64,
    /// ω_c − ω_a.
    pub delta_ca: f64,
    pub mass: f64,
}

impl SingleAtomParams {
    pub fn from_system(sys: &ValidatedSystem) -> Self {
        SingleAtomParams {
            g0: sys.atom.g0,
            k: sys.atom.k,
            waist: sys.cavity.waist,
            kappa: sys.cavity.kappa,
            gamma: sys.atom.gamma,
            delta_ca: sys.delta_ca(),
            mass: sys.atom.mass,
        }
    }

    pub fn check(&self) -> Result<bool> {
        if self.delta_ca == 0.0 {
            return Err(PhysicsError::DivergentDispersive);
        }
        Ok(self.delta_ca.abs() < DISPERSIVE_MARGIN * self.g0)
    }

    /// g(r) for a standing wave along z with Gaussian waist.
    pub fn coupling(&self, r: &[f64; 3]) -> f64 {
        let rho2 = r[0] * r[0] + r[1] * r[1];
        self.g0 * (-rho2 / (self.waist * self.waist)).exp() * (self.k * r[2]).sin()
    }

    /// Cavity shift U(r) = g²/Δ_ca and its gradient.
    pub fn shift(&self, r: &[f64; 3]) -> (f64, [f64; 3]) {
        let w2 = self.waist * self.waist;
        let rho2 = r[0] * r[0] + r[1] * r[1];
        let radial = (-2.0 * rho2 / w2).exp();
        let s = (self.k * r[2]).sin();
        let u0 = self.g0 * self.g0 / self.delta_ca;
        let u = u0 * radial * s * s;
        let grad = [
            -4.0 * r[0] / w2 * u,
            -4.0 * r[1] / w2 * u,
            u0 * radial * 2.0 * s * (self.k * r[2]).cos() * self.k,
        ];
        (u, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldModel {
    /// Field integrated in time (exact exponential at frozen position).
    Dynamic,
    /// Field slaved to its instantaneous steady state.
    Adiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitConfig {
    /// Initial velocity (m/s); the atom starts upstream of the cavity axis
    /// along this direction.
    pub velocity: [f64; 3],
    /// Closest radial approach to the cavity axis (m).
    pub impact_parameter: f64,
    /// Axial coordinate; default is an antinode.
    pub axial_position: Option<f64>,
    /// Start and stop this far from the axis along the path; default 3 w0.
    pub half_path: Option<f64>,
    /// Probe minus empty-cavity frequency.
    pub detuning: f64,
    pub eta: f64,
    pub dipole_force: bool,
    pub recoil: bool,
    pub bin_width: f64,
    pub field: FieldModel,
    pub detection_efficiency: f64,
    /// Dipole axis for the emission pattern.
    pub polarization: [f64; 3],
    /// Overrides the run length (s).
    pub duration: Option<f64>,
    /// Integration step cap; the step is also bounded by 0.05/κ.
    pub max_step: Option<f64>,
    /// Start from this position instead of the straight-line entry point.
    pub start: Option<[f64; 3]>,
}

impl Default for TransitConfig {
    fn default() -> Self {
        TransitConfig {
            velocity: [0.3, 0.0, 0.0],
            impact_parameter: 0.0,
            axial_position: None,
            half_path: None,
            detuning: 0.0,
            eta: 0.0,
            dipole_force: true,
            recoil: false,
            bin_width: 1e-6,
            field: FieldModel::Dynamic,
            detection_efficiency: 1.0,
            polarization: [1.0, 0.0, 0.0],
            duration: None,
            max_step: None,
            start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitResult {
    pub record: TrajectoryRecord,
    /// Detected photons per bin.
    pub counts: Vec<u64>,
    pub bin_width: f64,
    /// Detection timestamps (s).
    pub detections: Vec<f64>,
    /// |Δ_ca| < 3 g0.
    pub dispersive_warning: bool,
}

/// Steady-state field at a position.
pub fn steady_field(p: &SingleAtomParams, detuning: f64, eta: f64, r: &[f64; 3]) -> Complex64 {
    let (u, _) = p.shift(r);
    eta / Complex64::new(p.kappa, -(detuning - u))
}

/// Potential whose gradient is the adiabatic-field dipole force:
/// `−(ħη²/κ) atan((Δ − U)/κ)`.
pub fn adiabatic_potential(p: &SingleAtomParams, detuning: f64, eta: f64, r: &[f64; 3]) -> f64 {
    let (u, _) = p.shift(r);
    -HBAR * eta * eta / p.kappa * ((detuning - u) / p.kappa).atan()
}

/// Detected photon rate with no atom.
pub fn empty_cavity_rate(p: &SingleAtomParams, cfg: &TransitConfig) -> f64 {
    cfg.detection_efficiency * 2.0 * p.kappa * cfg.eta * cfg.eta / (p.kappa * p.kappa + cfg.detuning * cfg.detuning)
}

/// Unit vector drawn from the dipole emission pattern ∝ sin²θ about `axis`.
pub fn dipole_direction(axis: [f64; 3], rng: &mut impl Rng) -> [f64; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let a = [axis[0] / n, axis[1] / n, axis[2] / n];
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm == 0.0 {
            continue;
        }
        let u = [v[0] / norm, v[1] / norm, v[2] / norm];
        let cos = u[0] * a[0] + u[1] * a[1] + u[2] * a[2];
        if rng.random::<f64>() <= 1.0 - cos * cos {
            return u;
        }
    }
}

fn poisson(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

pub const TRANSIT_COLUMNS: [&str; 10] = [
    "x",
    "y",
    "z",
    "vx",
    "vy",
    "vz",
    "alpha_re",
    "alpha_im",
    "n_photons",
    "counts",
];

/// Integrates one transit. Photon detection and recoil draw from separate
/// streams of `seed`.
pub fn simulate_transit(p: &SingleAtomParams, cfg: &TransitConfig, seed: u64) -> Result<TransitResult> {
    let dispersive_warning = p.check()?;
    if !(cfg.bin_width > 0.0) {
        return Err(PhysicsError::InvalidArgument("bin width must be positive".into()));
    }
    if cfg.velocity.iter().any(|v| !v.is_finite()) {
        return Err(PhysicsError::InvalidArgument("velocity must be finite".into()));
    }
    let mut photon_rng = stream_rng(seed, 1);
    let mut recoil_rng = stream_rng(seed, 2);
    let speed = cfg.velocity.iter().map(|v| v * v).sum::<f64>().sqrt();
    let half = cfg.half_path.unwrap_or(3.0 * p.waist);
    let mut r = match cfg.start {
        Some(s) => s,
        None => {
            // Radial entry: travel along the in-plane velocity direction with
            // the impact parameter perpendicular to it.
            let vr = (cfg.velocity[0].powi(2) + cfg.velocity[1].powi(2)).sqrt();
            let (ux, uy) = if vr > 0.0 {
                (cfg.velocity[0] / vr, cfg.velocity[1] / vr)
            } else {
                (1.0, 0.0)
            };
            let z = cfg.axial_position.unwrap_or(std::f64::consts::FRAC_PI_2 / p.k);
            [
                -half * ux - cfg.impact_parameter * uy,
                -half * uy + cfg.impact_parameter * ux,
                z,
            ]
        }
    };
    let duration = match cfg.duration {
        Some(d) => d,
        None if speed > 0.0 => 2.0 * half / speed,
        None => {
            return Err(PhysicsError::InvalidArgument(
                "zero velocity needs an explicit duration".into(),
            ))
        }
    };
    let mut v = cfg.velocity;
    let h_cap = cfg.max_step.unwrap_or(f64::INFINITY).min(0.05 / p.kappa);
    let steps_per_bin = (cfg.bin_width / h_cap).ceil().max(1.0) as usize;
    let dt = cfg.bin_width / steps_per_bin as f64;
    if dt < 1e-18 || dt * 1e-12 > duration {
        return Err(PhysicsError::StepSizeUnderflow { t: 0.0, h: dt });
    }
    let bins = (duration / cfg.bin_width).round().max(1.0) as usize;

    let mut alpha = steady_field(p, cfg.detuning, cfg.eta, &r);
    let force = |r: &[f64; 3], alpha: Complex64| -> [f64; 3] {
        if !cfg.dipole_force {
            return [0.0; 3];
        }
        let (_, g) = p.shift(r);
        let n = alpha.norm_sqr();
        [-HBAR * n * g[0], -HBAR * n * g[1], -HBAR * n * g[2]]
    };
    let mut f = force(&r, alpha);
    let recoil_p = HBAR * p.k / p.mass;
    let params = serde_json::json!({ "atom": p, "transit": cfg });
    let mut rec = TrajectoryRecord::new(&TRANSIT_COLUMNS, Some(seed), params);
    let row = |r: &[f64; 3], v: &[f64; 3], a: Complex64, c: f64| {
        [r[0], r[1], r[2], v[0], v[1], v[2], a.re, a.im, a.norm_sqr(), c]
    };
    rec.push(0.0, &row(&r, &v, alpha, 0.0));
    let mut counts = Vec::with_capacity(bins);
    let mut detections = Vec::new();
    let mut t = 0.0;
    for b in 0..bins {
        let mut c = 0u64;
        for s in 0..steps_per_bin {
            for i in 0..3 {
                v[i] += 0.5 * dt * f[i] / p.mass;
                r[i] += dt * v[i];
            }
            alpha = match cfg.field {
                FieldModel::Dynamic => {
                    let (u, _) = p.shift(&r);
                    let lam = Complex64::new(-p.kappa, cfg.detuning - u);
                    let ss = -cfg.eta / lam;
                    ss + (alpha - ss) * (lam * dt).exp()
                }
                FieldModel::Adiabatic => steady_field(p, cfg.detuning, cfg.eta, &r),
            };
            f = force(&r, alpha);
            for i in 0..3 {
                v[i] += 0.5 * dt * f[i] / p.mass;
            }
            let n = alpha.norm_sqr();
            if cfg.recoil {
                let g = p.coupling(&r);
                let rate = 2.0 * p.gamma * g * g * n / (p.delta_ca * p.delta_ca);
                for _ in 0..poisson(rate * dt, &mut recoil_rng) {
                    let sign = if recoil_rng.random::<bool>() { 1.0 } else { -1.0 };
                    v[2] += sign * recoil_p;
                    let e = dipole_direction(cfg.polarization, &mut recoil_rng);
                    for i in 0..3 {
                        v[i] += recoil_p * e[i];
                    }
                }
            }
            let k = poisson(cfg.detection_efficiency * 2.0 * p.kappa * n * dt, &mut photon_rng);
            let t0 = t + s as f64 * dt;
            for _ in 0..k {
                detections.push(t0 + dt * photon_rng.random::<f64>());
            }
            c += k;
        }
        t = (b + 1) as f64 * cfg.bin_width;
        counts.push(c);
        rec.push(t, &row(&r, &v, alpha, c as f64));
    }
    detections.sort_by(f64::total_cmp);
    rec.events = detections
        .iter()
        .map(|&t| Event {
            kind: "photon".into(),
            time: t,
            index: None,
            value: 1.0,
        })
        .collect();
    Ok(TransitResult {
        record: rec,
        counts,
        bin_width: cfg.bin_width,
        detections,
        dispersive_warning,
    })
}

/// Transit duration from binned counts: the span between the first and
/// last bins whose moving-average rate exceeds half-way between the
/// empty-cavity rate and the peak. None when no excess is visible.
pub fn transit_duration(counts: &[u64], bin_width: f64, empty_rate: f64, smoothing: usize) -> Option<f64> {
    if counts.is_empty() {
        return None;
    }
    let w = smoothing.max(1);
    let n = counts.len();
    let rate: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(w / 2);
            let hi = (i + w - w / 2).min(n);
            counts[lo..hi].iter().sum::<u64>() as f64 / ((hi - lo) as f64 * bin_width)
        })
        .collect();
    let (peak_i, &peak) = rate.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if peak <= empty_rate {
        return None;
    }
    let level = 0.5 * (peak + empty_rate);
    let lo = rate.iter().position(|&r| r >= level).unwrap_or(peak_i);
    let hi = rate.iter().rposition(|&r| r >= level).unwrap_or(peak_i);
    Some((hi - lo + 1) as f64 * bin_width)
}

/// Two-dimensional radial trap with switchable curvature and a
/// position-dependent detected photon rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialTrap {
    pub mass: f64,
    pub k: f64,
    pub waist: f64,
    /// Detected rate with the atom far off axis (1/s).
    pub rate_empty: f64,
    /// Detected rate with the atom on axis (1/s).
    pub rate_max: f64,
    /// Spontaneous scattering rate driving recoil heating (1/s).
    pub scatter_rate: f64,
    /// Initial thermal temperature (K).
    pub temperature: f64,
    pub polarization: [f64; 3],
}

impl RadialTrap {
    /// `r_empty + (r_max − r_empty) e^{−2ρ²/w0²}`.
    pub fn detection_rate(&self, x: f64, y: f64) -> f64 {
        let rho2 = x * x + y * y;
        self.rate_empty + (self.rate_max - self.rate_empty) * (-2.0 * rho2 / (self.waist * self.waist)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackConfig {
    pub bin_width: f64,
    pub omega_low: f64,
    pub omega_high: f64,
    /// Count difference that must be exceeded to switch (0: any change).
    pub threshold: u64,
    pub enabled: bool,
    /// With photon counting off every bin is empty and the rule never fires.
    pub photon_counting: bool,
    pub recoil: bool,
    /// Integration steps per bin.
    pub substeps: usize,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        FeedbackConfig {
            bin_width: 20e-6,
            omega_low: std::f64::consts::TAU * 1.4e3,
            omega_high: std::f64::consts::TAU * 2.6e3,
            threshold: 0,
            enabled: true,
            photon_counting: true,
            recoil: true,
            substeps: 10,
        }
    }
}

impl FeedbackConfig {
    /// The curvature used with feedback off and on a tie:
    /// ω² = (ω_low² + ω_high²)/2.
    pub fn omega_mean(&self) -> f64 {
        (0.5 * (self.omega_low.powi(2) + self.omega_high.powi(2))).sqrt()
    }

    pub fn check(&self) -> Result<()> {
        if !(self.omega_low < self.omega_high) || !(self.omega_low > 0.0) {
            return Err(PhysicsError::InvalidArgument("need 0 < omega_low < omega_high".into()));
        }
        if !(self.bin_width > 0.0) || self.substeps == 0 {
            return Err(PhysicsError::InvalidArgument(
                "bin width and substeps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Curvature setting chosen for the next bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Low,
    Mean,
    High,
}

/// Counts falling (atom moving out) → high curvature; rising → low.
pub fn decide(previous: u64, current: u64, threshold: u64) -> Curvature {
    if previous > current + threshold {
        Curvature::High
    } else if current > previous + threshold {
        Curvature::Low
    } else {
        Curvature::Mean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackResult {
    /// Per-bin samples: x, y, vx, vy, omega, energy, counts.
    pub record: TrajectoryRecord,
    pub decisions: Vec<Curvature>,
    pub counts: Vec<u64>,
    /// Radial energy at the mean curvature, ½m v² + ½m ω̄² ρ².
    pub final_energy: f64,
}

fn rotate(x: &mut f64, v: &mut f64, omega: f64, dt: f64) {
    let (s, c) = (omega * dt).sin_cos();
    let (x0, v0) = (*x, *v);
    *x = x0 * c + v0 / omega * s;
    *v = -x0 * omega * s + v0 * c;
}

pub const FEEDBACK_COLUMNS: [&str; 7] = ["x", "y", "vx", "vy", "omega", "energy", "counts"];

/// Radial dynamics under bang-bang curvature switching. Initial thermal
/// state, photon counts and recoil use streams 0, 1 and 2 of `seed`.
pub fn simulate_bang_bang(trap: &RadialTrap, cfg: &FeedbackConfig, duration: f64, seed: u64) -> Result<FeedbackResult> {
    cfg.check()?;
    let mut init_rng = stream_rng(seed, 0);
    let mut photon_rng = stream_rng(seed, 1);
    let mut recoil_rng = stream_rng(seed, 2);
    let w_mean = cfg.omega_mean();
    let kt = crate::consts::K_B * trap.temperature;
    let sx = (kt / (trap.mass * w_mean * w_mean)).sqrt();
    let sv = (kt / trap.mass).sqrt();
    let draw = |rng: &mut ChaCha8Rng, s: f64| s * rng.sample::<f64, _>(StandardNormal);
    let (mut x, mut y) = (draw(&mut init_rng, sx), draw(&mut init_rng, sx));
    let (mut vx, mut vy) = (draw(&mut init_rng, sv), draw(&mut init_rng, sv));
    let energy =
        |x: f64, y: f64, vx: f64, vy: f64| 0.5 * trap.mass * (vx * vx + vy * vy + w_mean * w_mean * (x * x + y * y));
    let bins = (duration / cfg.bin_width).round().max(1.0) as usize;
    let dt = cfg.bin_width / cfg.substeps as f64;
    let recoil_v = HBAR * trap.k / trap.mass;
    let params = serde_json::json!({ "trap": trap, "feedback": cfg, "duration": duration });
    let mut rec = TrajectoryRecord::new(&FEEDBACK_COLUMNS, Some(seed), params);
    rec.push(0.0, &[x, y, vx, vy, w_mean, energy(x, y, vx, vy), 0.0]);
    let mut omega = w_mean;
    let mut decisions = Vec::with_capacity(bins);
    let mut counts = Vec::with_capacity(bins);
    for b in 0..bins {
        let mut c = 0u64;
        for _ in 0..cfg.substeps {
            rotate(&mut x, &mut vx, omega, dt);
            rotate(&mut y, &mut vy, omega, dt);
            if cfg.recoil {
                for _ in 0..poisson(trap.scatter_rate * dt, &mut recoil_rng) {
                    // Absorption along the cavity axis carries no radial
                    // momentum; emission follows the dipole pattern.
                    let e = dipole_direction(trap.polarization, &mut recoil_rng);
                    vx += recoil_v * e[0];
                    vy += recoil_v * e[1];
                }
            }
            if cfg.photon_counting {
                c += poisson(trap.detection_rate(x, y) * dt, &mut photon_rng);
            }
        }
        counts.push(c);
        let decision = match (cfg.enabled, counts.len()) {
            (true, n) if n >= 2 => decide(counts[n - 2], c, cfg.threshold),
            _ => Curvature::Mean,
        };
        omega = match decision {
            Curvature::Low => cfg.omega_low,
            Curvature::Mean => w_mean,
            Curvature::High => cfg.omega_high,
        };
        decisions.push(decision);
        rec.push(
            (b + 1) as f64 * cfg.bin_width,
            &[x, y, vx, vy, omega, energy(x, y, vx, vy), c as f64],
        );
    }
    Ok(FeedbackResult {
        final_energy: energy(x, y, vx, vy),
        record: rec,
        decisions,
        counts,
    })
}
