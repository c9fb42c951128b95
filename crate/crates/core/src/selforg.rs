//! Side-pumped self-organization: a transversely pumped ensemble scatters
//! into the cavity through a density grating, giving
//! `H = −Δ a†a + ω_M b†b + λ(b + b†)(a + a†)` for a Fabry-Pérot resonator
//! (Z₂ symmetry) and `λ(x_c X + x_s Y)` for a ring resonator, whose cosine
//! and sine gratings couple to the two field quadratures (U(1) symmetry).
//!
//! State ordering is `(X, Y, x, p)` for Fabry-Pérot and
//! `(X, Y, x_c, p_c, x_s, p_s)` for the ring, all with vacuum variance 1.
//! Mechanical damping is split evenly between x and p.
//!
//! Thresholds: [`instability_threshold`] is the perturbative
//! `√(ω_M(|Δ| − ω_M))`, where the one-term soft-mode shift cancels ω_M.
//! [`exact_threshold`] is the zero of the static determinant,
//! `½√(ω_M(Δ² + κ²)/|Δ|)`, which is what the normal modes and the
//! time-domain dynamics reproduce.

use nalgebra::{DMatrix, SMatrix, SVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::consts::HBAR;
use crate::error::{PhysicsError, Result};
use crate::exec::{stream_rng, Execution};
use crate::stats::{histogram, ks_uniform, linear_fit, median};
use crate::trajectory::TrajectoryRecord;

type Mat6 = SMatrix<f64, 6, 6>;
type Vec6 = SVector<f64, 6>;

/// Perturbative validity requires |λ| below this fraction of ||Δ| − ω_M|.
pub const PERTURBATIVE_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SidePumpGeometry {
    FabryPerot,
    Ring,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidePumpParams {
    pub lambda: f64,
    pub omega_m: f64,
    /// Pump minus cavity frequency; red detuning is negative.
    pub detuning: f64,
    pub kappa: f64,
    pub gamma_m: f64,
    pub geometry: SidePumpGeometry,
}

/// Recoil excitation frequency ħk²/m of the lowest momentum-grating mode.
pub fn recoil_mode_frequency(k: f64, mass: f64) -> f64 {
    HBAR * k * k / mass
}

/// Collective coupling √N G_p g0/(2Δ_ca).
pub fn pump_coupling(n_atoms: f64, pump_rabi: f64, g0: f64, delta_ca: f64) -> Result<f64> {
    if delta_ca == 0.0 {
        return Err(PhysicsError::DivergentDispersive);
    }
    Ok(n_atoms.sqrt() * pump_rabi * g0 / (2.0 * delta_ca))
}

impl SidePumpParams {
    /// Fabry-Pérot modes sit at ħk²/m; ring gratings at ω_2k = 2ħk²/m.
    #[allow(clippy::too_many_arguments)]
    pub fn from_physical(
        n_atoms: f64,
        pump_rabi: f64,
        g0: f64,
        delta_ca: f64,
        k: f64,
        mass: f64,
        detuning: f64,
        kappa: f64,
        geometry: SidePumpGeometry,
    ) -> Result<Self> {
        let base = recoil_mode_frequency(k, mass);
        let omega_m = match geometry {
            SidePumpGeometry::FabryPerot => base,
            SidePumpGeometry::Ring => 2.0 * base,
        };
        Ok(SidePumpParams {
            lambda: pump_coupling(n_atoms, pump_rabi, g0, delta_ca)?,
            omega_m,
            detuning,
            kappa,
            gamma_m: 0.0,
            geometry,
        })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn lossless(mut self) -> Self {
        self.kappa = 0.0;
        self.gamma_m = 0.0;
        self
    }

    pub fn dim(&self) -> usize {
        match self.geometry {
            SidePumpGeometry::FabryPerot => 4,
            SidePumpGeometry::Ring => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftForm {
    /// λ²/(ω_M + Δ): the co-rotating (beam-splitter) term alone.
    OneTerm,
    /// 2Δλ²/(Δ² − ω_M²): co- and counter-rotating terms.
    TwoTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftModeShift {
    pub shift: f64,
    /// False when |λ| is not small against ||Δ| − ω_M|.
    pub perturbative: bool,
}

pub fn soft_mode_shift(p: &SidePumpParams, form: ShiftForm) -> SoftModeShift {
    let l2 = p.lambda * p.lambda;
    let (w, d) = (p.omega_m, p.detuning);
    let shift = match form {
        ShiftForm::OneTerm => l2 / (w + d),
        ShiftForm::TwoTerm => 2.0 * d * l2 / (d * d - w * w),
    };
    let gap = (d.abs() - w).abs();
    SoftModeShift {
        shift,
        perturbative: p.lambda.abs() < PERTURBATIVE_FRACTION * gap,
    }
}

/// √(ω_M(|Δ| − ω_M)) on the red branch; None when |Δ| < ω_M or Δ > 0.
pub fn instability_threshold(p: &SidePumpParams) -> Option<f64> {
    let excess = -p.detuning - p.omega_m;
    (p.detuning <= 0.0 && excess >= 0.0).then(|| (p.omega_m * excess).sqrt())
}

/// Zero of the static determinant, ½√(ω_M(Δ² + κ²)/|Δ|), red branch only.
pub fn exact_threshold(p: &SidePumpParams) -> Option<f64> {
    (p.detuning < 0.0).then(|| 0.5 * (p.omega_m * (p.detuning.powi(2) + p.kappa.powi(2)) / -p.detuning).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    /// λ(b + b†)(a + a†).
    Full,
    /// λ(a†b + b†a), whose exact second-order shift is the one-term formula.
    RotatingWave,
}

/// Drift matrix padded to 6×6; Fabry-Pérot leaves the last two rows empty.
fn drift6(p: &SidePumpParams, form: CouplingForm, damping: bool) -> Mat6 {
    let (k, h) = if damping {
        (p.kappa, 0.5 * p.gamma_m)
    } else {
        (0.0, 0.0)
    };
    let (d, w, l) = (p.detuning, p.omega_m, p.lambda);
    let mut a = Mat6::zeros();
    a[(0, 0)] = -k;
    a[(0, 1)] = -d;
    a[(1, 0)] = d;
    a[(1, 1)] = -k;
    let osc = |a: &mut Mat6, i: usize| {
        a[(i, i)] = -h;
        a[(i, i + 1)] = w;
        a[(i + 1, i)] = -w;
        a[(i + 1, i + 1)] = -h;
    };
    osc(&mut a, 2);
    match (p.geometry, form) {
        (SidePumpGeometry::FabryPerot, CouplingForm::Full) => {
            a[(1, 2)] = -2.0 * l;
            a[(3, 0)] = -2.0 * l;
        }
        (SidePumpGeometry::FabryPerot, CouplingForm::RotatingWave) => {
            a[(0, 3)] = l;
            a[(1, 2)] = -l;
            a[(2, 1)] = l;
            a[(3, 0)] = -l;
        }
        (SidePumpGeometry::Ring, CouplingForm::Full) => {
            osc(&mut a, 4);
            a[(1, 2)] = -2.0 * l;
            a[(3, 0)] = -2.0 * l;
            a[(0, 4)] = 2.0 * l;
            a[(5, 1)] = -2.0 * l;
        }
        (SidePumpGeometry::Ring, CouplingForm::RotatingWave) => {
            // Co-rotating parts of λ x_c X and λ x_s Y:
            // λ(X x_c + Y p_c)/2 + λ(Y x_s − X p_s)/2.
            osc(&mut a, 4);
            a[(0, 3)] = l;
            a[(1, 2)] = -l;
            a[(2, 1)] = l;
            a[(3, 0)] = -l;
            a[(1, 5)] = l;
            a[(0, 4)] = l;
            a[(5, 1)] = -l;
            a[(4, 0)] = -l;
        }
    }
    a
}

/// Drift matrix at its natural size (4×4 or 6×6).
pub fn dynamical_matrix(p: &SidePumpParams, form: CouplingForm, damping: bool) -> DMatrix<f64> {
    let n = p.dim();
    let a = drift6(p, form, damping);
    DMatrix::from_fn(n, n, |i, j| a[(i, j)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalModes {
    pub eigenvalues: Vec<Complex64>,
    pub unstable: bool,
    /// Largest real part.
    pub growth_rate: f64,
}

fn eigenvalues(m: DMatrix<f64>) -> Vec<Complex64> {
    m.complex_eigenvalues().iter().cloned().collect()
}

/// Relative size below which a real part counts as zero for lossless
/// spectra, whose eigenvalues are otherwise purely imaginary.
const MARGINAL: f64 = 1e-9;

pub fn normal_modes(p: &SidePumpParams, include_damping: bool, form: CouplingForm) -> NormalModes {
    let ev = eigenvalues(dynamical_matrix(p, form, include_damping));
    let growth = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let scale = p.omega_m + p.detuning.abs() + p.lambda.abs();
    NormalModes {
        eigenvalues: ev,
        unstable: growth > MARGINAL * scale,
        growth_rate: growth,
    }
}

/// Lossless mechanical eigenfrequency: the positive frequency nearest ω_M.
pub fn mechanical_frequency(p: &SidePumpParams, form: CouplingForm) -> f64 {
    let lossless = p.lossless();
    eigenvalues(dynamical_matrix(&lossless, form, false))
        .into_iter()
        .map(|z| z.im.abs())
        .min_by(|a, b| (a - p.omega_m).abs().total_cmp(&(b - p.omega_m).abs()))
        .expect("non-empty spectrum")
}

/// Spectra of the cosine-grating and sine-grating sectors of a ring, each
/// coupled alone to the field.
pub fn ring_sector_spectra(p: &SidePumpParams, include_damping: bool) -> (Vec<Complex64>, Vec<Complex64>) {
    let a = drift6(
        &SidePumpParams {
            geometry: SidePumpGeometry::Ring,
            ..*p
        },
        CouplingForm::Full,
        include_damping,
    );
    let cos_idx = [0usize, 1, 2, 3];
    let sin_idx = [0usize, 1, 4, 5];
    let pick = |idx: &[usize; 4]| DMatrix::from_fn(4, 4, |i, j| a[(idx[i], idx[j])]);
    (eigenvalues(pick(&cos_idx)), eigenvalues(pick(&sin_idx)))
}

/// Smallest λ in `[0, hi]` whose normal modes grow, by bisection.
pub fn eigen_threshold(p: &SidePumpParams, include_damping: bool, hi: f64) -> Option<f64> {
    let unstable = |l: f64| normal_modes(&p.with_lambda(l), include_damping, CouplingForm::Full).unstable;
    if !unstable(hi) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if unstable(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Cubic restoring force `−u r² x` per grating quadrature.
fn drift(a: &Mat6, u: f64, s: &Vec6) -> Vec6 {
    let mut f = a * s;
    if u != 0.0 {
        let r2 = s[2] * s[2] + s[4] * s[4];
        f[3] -= u * r2 * s[2];
        f[5] -= u * r2 * s[4];
    }
    f
}

fn rk4(a: &Mat6, u: f64, s: &Vec6, dt: f64) -> Vec6 {
    let k1 = drift(a, u, s);
    let k2 = drift(a, u, &(s + k1 * (0.5 * dt)));
    let k3 = drift(a, u, &(s + k2 * (0.5 * dt)));
    let k4 = drift(a, u, &(s + k3 * dt));
    s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Zero-point initial state: each quadrature drawn with unit variance.
fn zero_point_state(dim: usize, rng: &mut ChaCha8Rng) -> Vec6 {
    let mut s = Vec6::zeros();
    for i in 0..dim {
        s[i] = rng.sample(StandardNormal);
    }
    s
}

/// Runs the lossless-or-damped linear flow from a zero-point seed and
/// reports whether the grating amplitude grows by `factor` within `window`.
pub fn time_domain_unstable(p: &SidePumpParams, seed: u64, window: f64, dt: f64, factor: f64) -> bool {
    let mut rng = stream_rng(seed, 0);
    let mut s = zero_point_state(p.dim(), &mut rng);
    let a = drift6(p, CouplingForm::Full, true);
    let scale = s.norm();
    let steps = (window / dt).ceil() as usize;
    for _ in 0..steps {
        s = rk4(&a, 0.0, &s, dt);
        if (s[2] * s[2] + s[4] * s[4]).sqrt() > factor * scale {
            return true;
        }
    }
    false
}

/// Time-domain threshold: bisection of λ on [lo, hi] using
/// [`time_domain_unstable`] with a window of 100/ω_M, RK4 step 0.01/ω_M
/// and growth factor 100.
pub fn time_domain_threshold(p: &SidePumpParams, seed: u64, lo: f64, hi: f64, iterations: usize) -> Result<f64> {
    let window = 100.0 / p.omega_m;
    let dt = 0.01 / p.omega_m.max(p.detuning.abs());
    let test = |l: f64| time_domain_unstable(&p.with_lambda(l), seed, window, dt, 100.0);
    if test(lo) || !test(hi) {
        return Err(PhysicsError::NoConvergence { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if test(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryBreakingConfig {
    pub n_seeds: usize,
    pub duration: f64,
    pub dt: f64,
    /// Quartic coefficient u; None picks the value that saturates the
    /// grating at [`DEFAULT_SATURATION_AMPLITUDE`].
    pub saturation: Option<f64>,
    pub master_seed: u64,
    /// Vacuum input on the field and thermal input on the gratings.
    pub noise: bool,
    pub n_th: f64,
    /// Keep every `record_every`-th step in the records.
    pub record_every: usize,
}

pub const DEFAULT_SATURATION_AMPLITUDE: f64 = 10.0;

impl Default for SymmetryBreakingConfig {
    fn default() -> Self {
        SymmetryBreakingConfig {
            n_seeds: 200,
            duration: 200.0,
            dt: 0.01,
            saturation: None,
            master_seed: 0,
            noise: true,
            n_th: 0.0,
            record_every: 100,
        }
    }
}

/// Quartic coefficient placing the static saturated grating at `amplitude`,
/// from `ω + u x² = 4λ²|Δ|/(Δ² + κ²)`. Below threshold the unsaturated
/// spring is used as a scale.
pub fn saturation_for_amplitude(p: &SidePumpParams, amplitude: f64) -> f64 {
    let drive = if p.detuning < 0.0 {
        4.0 * p.lambda.powi(2) * -p.detuning / (p.detuning.powi(2) + p.kappa.powi(2))
    } else {
        0.0
    };
    let excess = drive - p.omega_m;
    if excess > 0.0 {
        excess / amplitude.powi(2)
    } else {
        p.omega_m / amplitude.powi(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderHistogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

/// Ensemble summary written alongside the trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub geometry: SidePumpGeometry,
    /// Threshold of the damped normal modes.
    pub threshold: Option<f64>,
    pub perturbative_threshold: Option<f64>,
    /// Median early-time growth rate, fitted on the unsaturated flow.
    pub growth_rate: Option<f64>,
    pub eigen_growth_rate: f64,
    pub order_parameter_histogram: OrderHistogram,
    /// Ring: KS p-value of final angles against uniform on [0, 2π).
    pub ks_p_value: Option<f64>,
    /// Fabry-Pérot: fraction of seeds ending with x > 0.
    pub sign_fraction: Option<f64>,
    pub mean_magnitude: f64,
    pub saturation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryBreakingResult {
    pub records: Vec<TrajectoryRecord>,
    /// Fabry-Pérot: final x. Ring: final angle in [0, 2π).
    pub order_parameters: Vec<f64>,
    /// Final grating amplitude √(x_c² + x_s²).
    pub magnitudes: Vec<f64>,
    pub growth_rates: Vec<Option<f64>>,
    pub summary: EnsembleSummary,
}

fn noise_amplitudes(p: &SidePumpParams, cfg: &SymmetryBreakingConfig) -> Vec6 {
    let mut s = Vec6::zeros();
    if cfg.noise {
        let field = (2.0 * p.kappa).sqrt();
        let mech = (p.gamma_m * (2.0 * cfg.n_th + 1.0)).sqrt();
        s[0] = field;
        s[1] = field;
        for i in 2..p.dim() {
            s[i] = mech;
        }
    }
    s
}

/// Fits the exponential rate of the grating amplitude on the unsaturated,
/// noise-free flow from `init`, between 3× and 10³× the seed amplitude.
fn growth_rate_from(a: &Mat6, init: &Vec6, dt: f64, horizon: f64) -> Option<f64> {
    let amp = |s: &Vec6| (s[2] * s[2] + s[4] * s[4]).sqrt();
    let seed_scale = init.norm();
    let (lo, hi) = (3.0 * seed_scale, 1e3 * seed_scale);
    let mut s = *init;
    let (mut ts, mut ys) = (Vec::new(), Vec::new());
    let steps = (horizon / dt).ceil() as usize;
    for i in 1..=steps {
        s = rk4(a, 0.0, &s, dt);
        let r = amp(&s);
        if r > hi {
            break;
        }
        if r > lo {
            ts.push(i as f64 * dt);
            ys.push(r.ln());
        }
    }
    (ts.len() >= 10).then(|| linear_fit(&ts, &ys).1)
}

fn run_seed(
    p: &SidePumpParams,
    cfg: &SymmetryBreakingConfig,
    u: f64,
    index: usize,
) -> (TrajectoryRecord, Vec6, Option<f64>) {
    let seed = stream_rng(cfg.master_seed, index as u64).random::<u64>();
    let mut rng = stream_rng(seed, 0);
    let a = drift6(p, CouplingForm::Full, true);
    let sig = noise_amplitudes(p, cfg);
    let init = zero_point_state(p.dim(), &mut rng);
    let growth = growth_rate_from(&a, &init, cfg.dt, cfg.duration);
    let columns: &[&str] = match p.geometry {
        SidePumpGeometry::FabryPerot => &["X", "Y", "x", "p"],
        SidePumpGeometry::Ring => &["X", "Y", "x_c", "p_c", "x_s", "p_s"],
    };
    let mut rec = TrajectoryRecord::new(
        columns,
        Some(seed),
        serde_json::json!({ "side_pump": p, "saturation": u }),
    );
    let dim = p.dim();
    rec.push(0.0, &init.as_slice()[..dim]);
    let mut s = init;
    let steps = (cfg.duration / cfg.dt).round() as usize;
    let sq = cfg.dt.sqrt();
    let every = cfg.record_every.max(1);
    for i in 1..=steps {
        s = rk4(&a, u, &s, cfg.dt);
        if cfg.noise {
            for j in 0..dim {
                if sig[j] != 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    s[j] += sig[j] * sq * z;
                }
            }
        }
        if i % every == 0 || i == steps {
            rec.push(i as f64 * cfg.dt, &s.as_slice()[..dim]);
        }
    }
    (rec, s, growth)
}

/// Seed-parallel ensemble of saturating trajectories from zero-point seeds.
pub fn simulate_symmetry_breaking(
    p: &SidePumpParams,
    cfg: &SymmetryBreakingConfig,
    exec: Execution,
) -> Result<SymmetryBreakingResult> {
    if cfg.n_seeds == 0 || !(cfg.duration > 0.0) || !(cfg.dt > 0.0) {
        return Err(PhysicsError::InvalidArgument(
            "need seeds, duration > 0 and dt > 0".into(),
        ));
    }
    let u = cfg
        .saturation
        .unwrap_or_else(|| saturation_for_amplitude(p, DEFAULT_SATURATION_AMPLITUDE));
    let runs = exec.map_indices(cfg.n_seeds, |i| run_seed(p, cfg, u, i));
    let mut records = Vec::with_capacity(runs.len());
    let mut order = Vec::with_capacity(runs.len());
    let mut mags = Vec::with_capacity(runs.len());
    let mut growth = Vec::with_capacity(runs.len());
    for (rec, s, g) in runs {
        let mag = (s[2] * s[2] + s[4] * s[4]).sqrt();
        order.push(match p.geometry {
            SidePumpGeometry::FabryPerot => s[2],
            SidePumpGeometry::Ring => s[4].atan2(s[2]).rem_euclid(std::f64::consts::TAU),
        });
        mags.push(mag);
        growth.push(g);
        records.push(rec);
    }
    let fitted: Vec<f64> = growth.iter().flatten().copied().collect();
    let growth_rate = (!fitted.is_empty()).then(|| median(&fitted));
    let modes = normal_modes(p, true, CouplingForm::Full);
    let scale = 2.0 * mags.iter().cloned().fold(DEFAULT_SATURATION_AMPLITUDE, f64::max);
    let (histogram_, ks, sign) = match p.geometry {
        SidePumpGeometry::FabryPerot => {
            let positive = order.iter().filter(|&&x| x > 0.0).count() as f64;
            (
                OrderHistogram {
                    lo: -scale,
                    hi: scale,
                    counts: histogram(&order, -scale, scale, 20),
                },
                None,
                Some(positive / order.len() as f64),
            )
        }
        SidePumpGeometry::Ring => {
            let tau = std::f64::consts::TAU;
            (
                OrderHistogram {
                    lo: 0.0,
                    hi: tau,
                    counts: histogram(&order, 0.0, tau, 16),
                },
                Some(ks_uniform(&order, 0.0, tau).1),
                None,
            )
        }
    };
    let upper = 10.0 * (p.omega_m + p.detuning.abs() + p.kappa + p.lambda.abs());
    let summary = EnsembleSummary {
        geometry: p.geometry,
        threshold: eigen_threshold(p, true, upper),
        perturbative_threshold: instability_threshold(p),
        growth_rate,
        eigen_growth_rate: modes.growth_rate,
        order_parameter_histogram: histogram_,
        ks_p_value: ks,
        sign_fraction: sign,
        mean_magnitude: crate::stats::mean(&mags),
        saturation: u,
    };
    Ok(SymmetryBreakingResult {
        records,
        order_parameters: order,
        magnitudes: mags,
        growth_rates: growth,
        summary,
    })
}
