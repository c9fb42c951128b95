//! Static radiation-pressure nonlinearity and semiclassical time-domain
//! dynamics.
//!
//! Static bistability: the collective mode settles at
//! `x̄ = ⟨b+b†⟩ = −2g_om n/ω_z`, pulling the detuning to `Δ + βn` with
//! `β = 2g_om²/ω_z`. Photon-number self-consistency is then the cubic
//! `β²n³ + 2Δβn² + (κ²+Δ²)n − n_max κ² = 0`.
//!
//! Dynamics (x, p in zero-point units, `[x, p] = 2i`):
//! `dα/dt = [i(Δ − g x) − κ]α + η (+ ξ)`,
//! `dx/dt = ω p`, `dp/dt = −ω x − γ p − 2g|α|²`.
//! Steps are Strang splits of the field flow at frozen x (solved exactly)
//! and the damped oscillator under constant force (solved exactly).

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::consts::{HBAR, K_B};
use crate::error::{PhysicsError, Result};
use crate::exec::{stream_rng, Execution};
use crate::linear::OptomechParams;
use crate::params::ValidatedSystem;
use crate::poly::real_cubic_roots;
use crate::stats::median;
use crate::trajectory::{Event, TrajectoryRecord};

/// One detuning of a stability diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub detuning: f64,
    /// Self-consistent photon numbers, ascending.
    pub roots: Vec<f64>,
    pub stable: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityDiagram {
    pub g_om: f64,
    pub kappa: f64,
    pub omega_z: f64,
    pub n_max: f64,
    pub points: Vec<BranchPoint>,
    /// Detuning intervals with three roots, edges refined by bisection.
    pub bistable_regions: Vec<(f64, f64)>,
}

/// Residual `n[κ² + (Δ+βn)²] − n_max κ²` of the self-consistency cubic.
pub fn bistability_residual(beta: f64, kappa: f64, detuning: f64, n_max: f64, n: f64) -> f64 {
    n * (kappa * kappa + (detuning + beta * n).powi(2)) - n_max * kappa * kappa
}

/// All self-consistent photon numbers with the slope stability flag.
pub fn self_consistent_photons(g_om: f64, kappa: f64, omega_z: f64, detuning: f64, n_max: f64) -> BranchPoint {
    let beta = 2.0 * g_om * g_om / omega_z;
    let k2 = kappa * kappa;
    let mut roots: Vec<f64> = real_cubic_roots(
        -n_max * k2,
        k2 + detuning * detuning,
        2.0 * detuning * beta,
        beta * beta,
    )
    .into_iter()
    .filter(|&n| n >= 0.0)
    .collect();
    roots.sort_by(f64::total_cmp);
    // Folds: a double root may survive as two nearly equal values.
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1e-300));
    let stable = roots
        .iter()
        .map(|&n| {
            let s = detuning + beta * n;
            k2 + s * s + 2.0 * beta * n * s > 0.0
        })
        .collect();
    BranchPoint {
        detuning,
        roots,
        stable,
    }
}

pub fn static_bistability(
    g_om: f64,
    kappa: f64,
    omega_z: f64,
    detunings: &[f64],
    n_max: f64,
    exec: Execution,
) -> StabilityDiagram {
    let points = exec.map(detunings, |&d| self_consistent_photons(g_om, kappa, omega_z, d, n_max));
    let count = |d: f64| self_consistent_photons(g_om, kappa, omega_z, d, n_max).roots.len();
    let refine = |mut lo: f64, mut hi: f64| {
        let target = count(lo);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if count(mid) == target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut regions = Vec::new();
    let mut open: Option<f64> = None;
    for (i, pt) in points.iter().enumerate() {
        let three = pt.roots.len() >= 3;
        match (three, open) {
            (true, None) => {
                open = Some(if i == 0 {
                    pt.detuning
                } else {
                    refine(points[i - 1].detuning, pt.detuning)
                });
            }
            (false, Some(start)) => {
                regions.push((start, refine(points[i - 1].detuning, pt.detuning)));
                open = None;
            }
            _ => {}
        }
    }
    if let (Some(start), Some(last)) = (open, points.last()) {
        regions.push((start, last.detuning));
    }
    StabilityDiagram {
        g_om,
        kappa,
        omega_z,
        n_max,
        points,
        bistable_regions: regions,
    }
}

/// Stability diagram of a configured system at its derived g_om.
pub fn static_bistability_for(
    sys: &ValidatedSystem,
    detunings: &[f64],
    n_max: f64,
    exec: Execution,
) -> Result<StabilityDiagram> {
    let p = OptomechParams::from_system(sys)?;
    Ok(static_bistability(p.g_om, p.kappa, p.omega_m, detunings, n_max, exec))
}

/// Self-consistent breathing-mode closure for quadratic coupling. Cavity
/// shift `g₂ σ²/Z_ho²` with σ² the single-atom position variance; each atom
/// sees the added curvature `2ħ g₂ n/(N m Z_ho²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticClosure {
    pub g2: f64,
    /// Collective zero-point length, same units as used for g₂.
    pub z_ho: f64,
    pub n_atoms: f64,
    pub mass: f64,
    pub omega_z: f64,
    pub temperature: f64,
    pub kappa: f64,
    /// Probe detuning from the resonance at the bare (undriven) width.
    pub detuning: f64,
    /// Resonant photon number at this drive, η²/κ².
    pub n_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFixedPoint {
    pub n: f64,
    pub omega_eff: f64,
    pub sigma2: f64,
    pub detuning_eff: f64,
    pub stable: bool,
}

/// Thermal single-atom position variance in a trap of frequency `omega`.
pub fn thermal_variance(mass: f64, omega: f64, temperature: f64) -> f64 {
    let zp = HBAR / (2.0 * mass * omega);
    if temperature <= 0.0 {
        return zp;
    }
    let x = HBAR * omega / (2.0 * K_B * temperature);
    if x < 1e-6 {
        zp / x
    } else {
        zp / x.tanh()
    }
}

impl QuadraticClosure {
    pub fn from_system(sys: &ValidatedSystem, n_max: f64) -> Result<Self> {
        let d = crate::params::derive(sys)?;
        Ok(QuadraticClosure {
            g2: d.g2,
            z_ho: d.z_ho,
            n_atoms: sys.ensemble.n_atoms as f64,
            mass: sys.atom.mass,
            omega_z: sys.ensemble.omega_z,
            temperature: sys.ensemble.temperature,
            kappa: sys.cavity.kappa,
            detuning: d.detuning,
            n_max,
        })
    }

    fn shift_per_area(&self) -> f64 {
        self.g2 / (self.z_ho * self.z_ho)
    }

    pub fn omega_eff_sq(&self, n: f64) -> f64 {
        self.omega_z * self.omega_z + 2.0 * HBAR * self.shift_per_area() * n / (self.n_atoms * self.mass)
    }

    pub fn bare_variance(&self) -> f64 {
        thermal_variance(self.mass, self.omega_z, self.temperature)
    }

    /// (ω_eff, σ², Δ_eff) at photon number n, or None once the trap
    /// curvature has been cancelled.
    pub fn state_at(&self, n: f64) -> Option<(f64, f64, f64)> {
        let w2 = self.omega_eff_sq(n);
        if w2 <= 0.0 {
            return None;
        }
        let w = w2.sqrt();
        let s2 = thermal_variance(self.mass, w, self.temperature);
        let d = self.detuning - self.shift_per_area() * (s2 - self.bare_variance());
        Some((w, s2, d))
    }

    /// Photon number the Lorentzian returns for an assumed n.
    pub fn lorentzian(&self, n: f64) -> Option<f64> {
        self.state_at(n)
            .map(|(_, _, d)| self.n_max * self.kappa.powi(2) / (self.kappa.powi(2) + d * d))
    }

    /// Reduced equation L(n) − n whose zeros are the fixed points.
    pub fn reduced(&self, n: f64) -> Option<f64> {
        self.lorentzian(n).map(|l| l - n)
    }
}

/// All fixed points of the quadratic closure, by a dense scan of the
/// reduced equation on [0, n_max] followed by bisection of each bracket.
pub fn quadratic_fixed_points(c: &QuadraticClosure) -> Result<Vec<QuadraticFixedPoint>> {
    if c.n_max <= 0.0 {
        let (w, s2, d) = c
            .state_at(0.0)
            .ok_or(PhysicsError::NoConvergence { lo: 0.0, hi: 0.0 })?;
        return Ok(vec![QuadraticFixedPoint {
            n: 0.0,
            omega_eff: w,
            sigma2: s2,
            detuning_eff: d,
            stable: true,
        }]);
    }
    // Upper end of the admissible bracket: n_max, or where the trap opens.
    let mut hi = c.n_max;
    if c.state_at(hi).is_none() {
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if c.state_at(mid).is_some() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi = lo;
    }
    const SCAN: usize = 20_000;
    let f = |n: f64| c.reduced(n).expect("inside admissible bracket");
    let mut roots = Vec::new();
    let mut prev_n = 0.0;
    let mut prev_f = f(0.0);
    for i in 1..=SCAN {
        let n = hi * i as f64 / SCAN as f64;
        let fv = f(n);
        if fv == 0.0 {
            roots.push(n);
        } else if prev_f != 0.0 && prev_f.signum() != fv.signum() {
            let (mut a, mut b, fa) = (prev_n, n, prev_f);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
                if b - a <= 1e-15 * b {
                    break;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_n = n;
        prev_f = fv;
    }
    if roots.is_empty() {
        return Err(PhysicsError::NoConvergence { lo: 0.0, hi });
    }
    Ok(roots
        .into_iter()
        .map(|n| {
            let (w, s2, d) = c.state_at(n).expect("root inside admissible bracket");
            let h = 1e-7 * n.max(1e-3 * c.n_max);
            let slope = match (c.reduced(n + h), c.reduced((n - h).max(0.0))) {
                (Some(a), Some(b)) => (a - b) / (n + h - (n - h).max(0.0)),
                _ => -1.0,
            };
            QuadraticFixedPoint {
                n,
                omega_eff: w,
                sigma2: s2,
                detuning_eff: d,
                stable: slope < 0.0,
            }
        })
        .collect())
}

/// Parameters of the semiclassical single-mode dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub g_om: f64,
    pub kappa: f64,
    pub detuning: f64,
    pub omega_m: f64,
    /// Viscous damping of p (energy damping rate).
    pub gamma_m: f64,
    /// Drive amplitude, units of √photons per second.
    pub eta: f64,
}

impl DynamicsParams {
    /// Drive chosen so the resonant photon number equals the configured n̄.
    pub fn from_system(sys: &ValidatedSystem) -> Result<Self> {
        let p = OptomechParams::from_system(sys)?;
        Ok(DynamicsParams {
            g_om: p.g_om,
            kappa: p.kappa,
            detuning: p.detuning,
            omega_m: p.omega_m,
            gamma_m: p.gamma_m,
            eta: sys.eta(),
        })
    }

    pub fn max_step(&self) -> f64 {
        (0.05 / self.kappa).min(0.05 / self.omega_m)
    }

    /// Classical energy in the rotating frame, `ω(x²+p²)/4 + (g x − Δ)|α|²`.
    pub fn energy(&self, s: &State) -> f64 {
        self.omega_m * (s.x * s.x + s.p * s.p) / 4.0 + (self.g_om * s.x - self.detuning) * s.alpha.norm_sqr()
    }

    /// Static equilibria, one per self-consistent photon number.
    pub fn equilibria(&self) -> Vec<(State, bool)> {
        let n_max = (self.eta / self.kappa).powi(2);
        let bp = self_consistent_photons(self.g_om, self.kappa, self.omega_m, self.detuning, n_max);
        bp.roots
            .iter()
            .zip(&bp.stable)
            .map(|(&n, &st)| {
                let x = -2.0 * self.g_om * n / self.omega_m;
                let lam = Complex64::new(-self.kappa, self.detuning - self.g_om * x);
                (
                    State {
                        alpha: -self.eta / lam,
                        x,
                        p: 0.0,
                    },
                    st,
                )
            })
            .collect()
    }

    /// Linearization about an equilibrium, in the conventions of
    /// [`crate::linear`].
    pub fn linearized(&self, eq: &State) -> OptomechParams {
        OptomechParams {
            g_om: self.g_om,
            n_bar: eq.alpha.norm_sqr(),
            kappa: self.kappa,
            detuning: self.detuning - self.g_om * eq.x,
            omega_m: self.omega_m,
            gamma_m: self.gamma_m,
            n_th: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub alpha: Complex64,
    pub x: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurstDetector {
    /// Bursts must exceed this multiple of the median |α|².
    pub threshold: f64,
    /// Samples skipped after each accepted burst.
    pub refractory: usize,
}

impl Default for BurstDetector {
    fn default() -> Self {
        BurstDetector {
            threshold: 5.0,
            refractory: 10,
        }
    }
}

impl BurstDetector {
    /// Peak indices of excursions above threshold × median. Excursions
    /// separated by fewer than `refractory` samples belong to one burst, so
    /// the ringing tail of a fast resonance crossing is not double-counted.
    pub fn detect(&self, n: &[f64]) -> Vec<usize> {
        if n.len() < 3 {
            return Vec::new();
        }
        let floor = self.threshold * median(n);
        let mut out: Vec<usize> = Vec::new();
        let mut last_above: Option<usize> = None;
        for i in 0..n.len() {
            if n[i] <= floor {
                continue;
            }
            let joins = last_above.is_some_and(|j| i - j <= self.refractory.max(1));
            match out.last_mut() {
                Some(peak) if joins => {
                    if n[i] > n[*peak] {
                        *peak = i;
                    }
                }
                _ => out.push(i),
            }
            last_above = Some(i);
        }
        // Excursions clipped by the ends of the record are not resolved.
        out.retain(|&i| i > 0 && i + 1 < n.len() && n[i] > n[i - 1] && n[i] >= n[i + 1]);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub duration: f64,
    /// Output spacing; defaults to the maximum step.
    pub sample_interval: Option<f64>,
    pub noise: bool,
    pub seed: u64,
    /// Forces a fixed step (always used when noise is on).
    pub fixed_step: Option<f64>,
    /// Local error target of the step-doubling controller.
    pub tolerance: f64,
    pub bursts: BurstDetector,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            duration: 1.0,
            sample_interval: None,
            noise: false,
            seed: 0,
            fixed_step: None,
            tolerance: 1e-9,
            bursts: BurstDetector::default(),
        }
    }
}

/// exp(A t) for `A = [[0, ω], [−ω, −γ]]`, as (c, s) with
/// `exp(At) = e^{−γt/2}(c·I + s·(A + γ/2·I))`.
fn oscillator_propagator(omega: f64, gamma: f64, t: f64) -> [[f64; 2]; 2] {
    let h = gamma / 2.0;
    let disc = omega * omega - h * h;
    let (c, s) = if disc > 0.0 {
        let w = disc.sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    } else if disc < 0.0 {
        let w = (-disc).sqrt();
        ((w * t).cosh(), (w * t).sinh() / w)
    } else {
        (1.0, t)
    };
    let e = (-h * t).exp();
    [[e * (c + s * h), e * s * omega], [-e * s * omega, e * (c - s * h)]]
}

fn mechanics_flow(p: &DynamicsParams, s: &mut State, dt: f64) {
    let force = -2.0 * p.g_om * s.alpha.norm_sqr();
    let x_eq = force / p.omega_m;
    let m = oscillator_propagator(p.omega_m, p.gamma_m, dt);
    let (u, v) = (s.x - x_eq, s.p);
    s.x = x_eq + m[0][0] * u + m[0][1] * v;
    s.p = m[1][0] * u + m[1][1] * v;
}

/// Exact field flow at frozen x; `noise` is the Itô integral of the input
/// over the step, already propagated.
fn field_flow(p: &DynamicsParams, s: &mut State, dt: f64, noise: Complex64) {
    let lam = Complex64::new(-p.kappa, p.detuning - p.g_om * s.x);
    let decay = (lam * dt).exp();
    let ss = -p.eta / lam;
    s.alpha = ss + (s.alpha - ss) * decay + noise;
}

fn strang(p: &DynamicsParams, s: &State, dt: f64, noise: Complex64) -> State {
    let mut out = *s;
    mechanics_flow(p, &mut out, 0.5 * dt);
    field_flow(p, &mut out, dt, noise);
    mechanics_flow(p, &mut out, 0.5 * dt);
    out
}

/// Input noise integrated over one step: each quadrature of the input has
/// variance κ/2 per unit time, filtered by the cavity decay.
fn field_noise(p: &DynamicsParams, dt: f64, rng: &mut ChaCha8Rng) -> Complex64 {
    let var = 0.5 * p.kappa * (-(-2.0 * p.kappa * dt).exp_m1()) / (2.0 * p.kappa);
    let sd = var.sqrt();
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * a, sd * b)
}

fn state_error(a: &State, b: &State) -> f64 {
    let d = [(a.alpha - b.alpha).norm(), (a.x - b.x).abs(), (a.p - b.p).abs()];
    let scale = [
        1.0 + a.alpha.norm(),
        1.0 + a.x.abs().max(a.p.abs()),
        1.0 + a.x.abs().max(a.p.abs()),
    ];
    d.iter().zip(&scale).map(|(d, s)| d / s).fold(0.0, f64::max)
}

pub const DYNAMICS_COLUMNS: [&str; 5] = ["x", "p", "alpha_re", "alpha_im", "n_photons"];

/// Integrates from `init` and records samples on a uniform grid.
pub fn simulate_dynamics(p: &DynamicsParams, init: State, cfg: &DynamicsConfig) -> Result<TrajectoryRecord> {
    if !(cfg.duration > 0.0) || !(p.kappa > 0.0) || !(p.omega_m > 0.0) {
        return Err(PhysicsError::InvalidArgument(
            "duration, kappa and omega_m must be positive".into(),
        ));
    }
    let h_max = p.max_step();
    let dt_out = cfg.sample_interval.unwrap_or(h_max);
    let h_min = 1e-12 * h_max;
    let mut rng = stream_rng(cfg.seed, 0);
    let params = serde_json::json!({ "dynamics": p, "config": cfg });
    let mut rec = TrajectoryRecord::new(&DYNAMICS_COLUMNS, cfg.noise.then_some(cfg.seed), params);
    let push = |rec: &mut TrajectoryRecord, t: f64, s: &State| {
        rec.push(t, &[s.x, s.p, s.alpha.re, s.alpha.im, s.alpha.norm_sqr()]);
    };
    let mut s = init;
    push(&mut rec, 0.0, &s);
    let samples = (cfg.duration / dt_out).floor() as usize;
    let fixed = cfg.fixed_step.or(cfg.noise.then_some(h_max)).map(|h| h.min(h_max));
    let mut h = fixed.unwrap_or(h_max);
    let mut t = 0.0;
    for k in 1..=samples {
        let target = k as f64 * dt_out;
        while t < target {
            let step = h.min(target - t);
            if fixed.is_some() {
                let noise = if cfg.noise {
                    field_noise(p, step, &mut rng)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                s = strang(p, &s, step, noise);
                t = if target - t <= h { target } else { t + step };
                continue;
            }
            let full = strang(p, &s, step, Complex64::new(0.0, 0.0));
            let half = strang(
                p,
                &strang(p, &s, 0.5 * step, Complex64::new(0.0, 0.0)),
                0.5 * step,
                Complex64::new(0.0, 0.0),
            );
            let err = state_error(&full, &half);
            if err <= cfg.tolerance || step <= h_min {
                if err > cfg.tolerance {
                    return Err(PhysicsError::StepSizeUnderflow { t, h: step });
                }
                s = half;
                t = if step == target - t { target } else { t + step };
                let grow = if err == 0.0 {
                    2.0
                } else {
                    (0.9 * (cfg.tolerance / err).powf(1.0 / 3.0)).clamp(0.2, 2.0)
                };
                if step == h || grow < 1.0 {
                    h = (step * grow).min(h_max);
                }
            } else {
                h = step * (0.9 * (cfg.tolerance / err).powf(1.0 / 3.0)).clamp(0.1, 0.5);
                if h < h_min {
                    return Err(PhysicsError::StepSizeUnderflow { t, h });
                }
            }
        }
        push(&mut rec, target, &s);
    }
    let n = rec.column("n_photons").expect("photon column").to_vec();
    for i in cfg.bursts.detect(&n) {
        rec.events.push(Event {
            kind: "burst".into(),
            time: rec.time[i],
            index: Some(i),
            value: n[i],
        });
    }
    Ok(rec)
}

/// Independent seeded trajectories; trajectory `i` uses seed stream `i`
/// of `master`.
pub fn simulate_ensemble(
    p: &DynamicsParams,
    init: State,
    cfg: &DynamicsConfig,
    master: u64,
    count: usize,
    exec: Execution,
) -> Vec<Result<TrajectoryRecord>> {
    exec.map_indices(count, |i| {
        let seed = stream_rng(master, i as u64).random::<u64>();
        simulate_dynamics(p, init, &DynamicsConfig { seed, ..*cfg })
    })
}

/// Bursts per unit time, measured over an even number of inter-burst
/// intervals: a resonance crossed twice per cycle away from the turning
/// points gives alternating short and long gaps.
pub fn burst_rate(rec: &TrajectoryRecord) -> Option<f64> {
    let times: Vec<f64> = rec.events_of("burst").map(|e| e.time).collect();
    if times.len() < 3 {
        return None;
    }
    let m = (times.len() - 1) & !1;
    Some(m as f64 / (times[m] - times[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_gives_lorentzian() {
        for d in [-3.0, -0.5, 0.0, 2.0] {
            let bp = self_consistent_photons(0.0, 1.0, 1.0, d, 4.0);
            assert_eq!(bp.roots.len(), 1);
            assert!((bp.roots[0] - 4.0 / (1.0 + d * d)).abs() < 1e-12);
            assert!(bp.stable[0]);
        }
    }

    #[test]
    fn roots_satisfy_cubic() {
        let (g, k, w) = (0.3, 1.0, 0.5);
        let beta = 2.0 * g * g / w;
        for d in [-6.0, -3.0, -2.0, -1.0, 0.5] {
            for n_max in [0.1, 5.0, 30.0, 400.0] {
                let bp = self_consistent_photons(g, k, w, d, n_max);
                for &n in &bp.roots {
                    let scale = n * (k * k + (d + beta * n).powi(2)) + n_max * k * k;
                    assert!(bistability_residual(beta, k, d, n_max, n).abs() <= 1e-10 * scale);
                }
            }
        }
    }

    #[test]
    fn middle_branch_is_unstable() {
        let bp = self_consistent_photons(1.0, 1.0, 1.0, -5.0, 10.0);
        assert_eq!(bp.roots.len(), 3);
        assert_eq!(bp.stable, vec![true, false, true]);
    }

    #[test]
    fn bistable_region_is_red_and_refined() {
        let ds: Vec<f64> = (0..200).map(|i| -10.0 + 12.0 * i as f64 / 199.0).collect();
        let sd = static_bistability(1.0, 1.0, 1.0, &ds, 10.0, Execution::Sequential);
        assert_eq!(sd.bistable_regions.len(), 1);
        let (a, b) = sd.bistable_regions[0];
        assert!(a < b && b < -3f64.sqrt());
        let just_in = self_consistent_photons(1.0, 1.0, 1.0, b - 1e-6, 10.0);
        let just_out = self_consistent_photons(1.0, 1.0, 1.0, b + 1e-6, 10.0);
        assert_eq!((just_in.roots.len(), just_out.roots.len()), (3, 1));
    }

    #[test]
    fn propagator_matches_series() {
        let (w, g, t) = (1.3, 0.2, 0.7);
        let m = oscillator_propagator(w, g, t);
        // Taylor series of exp(A t).
        let a = [[0.0, w], [-w, -g]];
        let mut term = [[1.0, 0.0], [0.0, 1.0]];
        let mut sum = term;
        for k in 1..40 {
            let mut next = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    next[i][j] = (0..2).map(|l| term[i][l] * a[l][j]).sum::<f64>() * t / k as f64;
                }
            }
            term = next;
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[i][j] - sum[i][j]).abs() < 1e-14);
            }
        }
        let over = oscillator_propagator(0.1, 3.0, 0.5);
        assert!(over.iter().flatten().all(|v| v.is_finite()));
    }

    fn free() -> DynamicsParams {
        DynamicsParams {
            g_om: 0.0,
            kappa: 10.0,
            detuning: 0.0,
            omega_m: 1.0,
            gamma_m: 0.02,
            eta: 0.0,
        }
    }

    #[test]
    fn free_oscillator_decays_at_gamma() {
        let p = free();
        let period = std::f64::consts::TAU;
        let cfg = DynamicsConfig {
            duration: 10.0 * period,
            ..Default::default()
        };
        let rec = simulate_dynamics(
            &p,
            State {
                alpha: Complex64::new(0.0, 0.0),
                x: 1.0,
                p: 0.0,
            },
            &cfg,
        )
        .unwrap();
        let x = rec.column("x").unwrap();
        let pm = rec.column("p").unwrap();
        let e_end = (x[x.len() - 1].powi(2) + pm[pm.len() - 1].powi(2)) / 4.0;
        let t_end = *rec.time.last().unwrap();
        let rate = -(e_end / 0.25).ln() / t_end;
        assert!((rate / p.gamma_m - 1.0).abs() < 0.01, "rate {rate}");
        assert!(rec.is_consistent());
    }

    #[test]
    fn burst_detector_respects_refractory_window() {
        let mut n = vec![1.0; 100];
        n[20] = 50.0;
        n[25] = 60.0;
        n[60] = 40.0;
        n[80] = 30.0;
        n[91] = 30.0;
        let det = BurstDetector::default();
        assert_eq!(det.detect(&n), vec![25, 60, 80, 91]);
        assert!(det.detect(&[1.0; 50]).is_empty());
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let p = DynamicsParams {
            g_om: 0.1,
            eta: 1.0,
            ..free()
        };
        let init = State {
            alpha: Complex64::new(0.0, 0.0),
            x: 0.0,
            p: 0.0,
        };
        let cfg = DynamicsConfig {
            duration: 3.0,
            noise: true,
            seed: 42,
            ..Default::default()
        };
        let a = simulate_dynamics(&p, init, &cfg).unwrap();
        let b = simulate_dynamics(&p, init, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_dynamics(&p, init, &DynamicsConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn vacuum_noise_half_quantum() {
        let p = DynamicsParams {
            g_om: 0.0,
            eta: 0.0,
            gamma_m: 1.0,
            ..free()
        };
        let init = State {
            alpha: Complex64::new(0.0, 0.0),
            x: 0.0,
            p: 0.0,
        };
        let cfg = DynamicsConfig {
            duration: 400.0,
            noise: true,
            seed: 5,
            ..Default::default()
        };
        let rec = simulate_dynamics(&p, init, &cfg).unwrap();
        let n = rec.column("n_photons").unwrap();
        let mean = crate::stats::mean(&n[100..]);
        assert!((mean - 0.5).abs() < 0.03, "mean |α|² {mean}");
    }

    #[test]
    fn equilibria_are_fixed_points() {
        let p = DynamicsParams {
            g_om: 0.2,
            kappa: 1.0,
            detuning: -0.5,
            omega_m: 0.7,
            gamma_m: 0.01,
            eta: 1.5,
        };
        for (eq, _) in p.equilibria() {
            let next = strang(&p, &eq, 0.01, Complex64::new(0.0, 0.0));
            assert!(state_error(&eq, &next) < 1e-12);
        }
    }
}
