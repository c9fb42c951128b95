//! Linearized closed-loop optomechanics.
//!
//! The cavity field is linearized about a real coherent amplitude ā = √n̄.
//! With quadratures `X = δa + δa†`, `Y = −i(δa − δa†)` and mechanical
//! `x = b + b†`, `p = −i(b − b†)` (zero-point units, vacuum variance 1), the
//! equations of motion are
//!
//! ```text
//! dX/dt = −κ X − Δ Y                 + √(2κ) X_in
//! dY/dt =  Δ X − κ Y − 2G x          + √(2κ) Y_in
//! dx/dt = −(γ_m/2) x + ω_m p         + √γ_m x_in
//! dp/dt = −ω_m x − (γ_m/2) p − 2G X  + √γ_m p_in
//! ```
//!
//! with `G = g_om ā`. The cavity is single sided: every photon leaves through
//! the detected port, and `X_out = √(2κ) X − X_in`. Amplitude quadrature is
//! aligned with ā. In this basis
//!
//! * `F_a(ω) = (−iω − A_a)⁻¹`, `A_a = [[−κ, −Δ], [Δ, −κ]]`
//! * `F_b(ω) = (−iω − A_b)⁻¹`, `A_b = [[−γ_m/2, ω_m], [−ω_m, −γ_m/2]]`
//! * `T = [[0, 0], [−2G, 0]]`, used both for mechanics → field (x drives Y)
//!   and field → mechanics (X drives p).
//!
//! The closed-loop characteristic polynomial is
//! `[(s+κ)² + Δ²][(s+γ_m/2)² + ω_m²] + 4G²Δω_m`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::consts::{HBAR, K_B};
use crate::error::{PhysicsError, Result};
use crate::exec::Execution;
use crate::params::{derive, ValidatedSystem};
use crate::poly;
use crate::spectrum::{params_hash, SpectrumSeries};

/// Above this value of g_om √n̄ / κ the linearization is flagged as doubtful.
pub const LINEARIZATION_WARNING: f64 = 0.3;

/// Linearized optomechanical parameters in angular-frequency units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptomechParams {
    pub g_om: f64,
    pub n_bar: f64,
    /// Half-linewidth.
    pub kappa: f64,
    /// Probe detuning from the (shifted) cavity resonance, Δ = ω_p − ω_c′.
    pub detuning: f64,
    pub omega_m: f64,
    /// Energy damping rate of the mechanical mode.
    pub gamma_m: f64,
    /// Mechanical bath occupancy.
    pub n_th: f64,
}

impl OptomechParams {
    pub fn from_system(sys: &ValidatedSystem) -> Result<Self> {
        let d = derive(sys)?;
        Ok(OptomechParams {
            g_om: d.g_om,
            n_bar: d.n_bar,
            kappa: sys.cavity.kappa,
            detuning: d.detuning,
            omega_m: sys.ensemble.omega_z,
            gamma_m: sys.ensemble.gamma_m,
            n_th: sys.bath_occupancy(),
        })
    }

    /// Linearized coupling G = g_om √n̄.
    pub fn loop_coupling(&self) -> f64 {
        self.g_om * self.n_bar.sqrt()
    }

    pub fn with_coupling(mut self, g_om: f64) -> Self {
        self.g_om = g_om;
        self
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn linearization_warning(&self) -> bool {
        self.loop_coupling() / self.kappa > LINEARIZATION_WARNING
    }
}

/// Mechanical bath occupancy at temperature `t`: Bose–Einstein, replaced by
/// the classical k_B T/(ħω) once that exceeds 20.
pub fn bath_occupancy(t: f64, omega: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let classical = K_B * t / (HBAR * omega);
    if classical > 20.0 {
        classical
    } else {
        1.0 / ((HBAR * omega / (K_B * t)).exp() - 1.0)
    }
}

/// The 4×4 drift matrix of `(X, Y, x, p)`.
pub fn dynamical_matrix(p: &OptomechParams) -> Matrix4<f64> {
    let g = p.loop_coupling();
    let (k, d, w, h) = (p.kappa, p.detuning, p.omega_m, 0.5 * p.gamma_m);
    Matrix4::new(
        -k,
        -d,
        0.0,
        0.0, //
        d,
        -k,
        -2.0 * g,
        0.0, //
        0.0,
        0.0,
        -h,
        w, //
        -2.0 * g,
        0.0,
        -w,
        -h,
    )
}

/// Coefficients `c0..c4` of the closed-loop characteristic polynomial in `s`.
pub fn characteristic_polynomial(p: &OptomechParams) -> [f64; 5] {
    let g = p.loop_coupling();
    let (k, d, w, h) = (p.kappa, p.detuning, p.omega_m, 0.5 * p.gamma_m);
    // P_a = s² + 2κ s + (κ² + Δ²),  P_b = s² + γ_m s + (γ_m²/4 + ω²)
    let a = [k * k + d * d, 2.0 * k, 1.0];
    let b = [h * h + w * w, 2.0 * h, 1.0];
    let mut c = [0.0; 5];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            c[i + j] += ai * bj;
        }
    }
    c[0] += 4.0 * g * g * d * w;
    c
}

/// Closed-loop poles from the loop characteristic polynomial.
pub fn closed_loop_poles(p: &OptomechParams) -> Vec<Complex64> {
    let c: Vec<Complex64> = characteristic_polynomial(p)
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    poly::complex_roots(&c)
}

/// Errors with `InstabilityDetected` when any closed-loop pole grows.
pub fn check_stability(p: &OptomechParams) -> Result<()> {
    let growth = closed_loop_poles(p)
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if growth > 0.0 {
        return Err(PhysicsError::InstabilityDetected { growth_rate: growth });
    }
    Ok(())
}

/// The mechanical-like pole: the closed-loop pole nearest `−γ_m/2 + iω_m`.
pub fn mechanical_pole(p: &OptomechParams) -> Complex64 {
    let target = Complex64::new(-0.5 * p.gamma_m, p.omega_m);
    closed_loop_poles(p)
        .into_iter()
        .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
        .expect("quartic has four roots")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopMatrices {
    pub f_a: Matrix2<Complex64>,
    pub f_b: Matrix2<Complex64>,
    pub t: Matrix2<f64>,
    /// g_om √n̄ / κ exceeds [`LINEARIZATION_WARNING`].
    pub linearization_warning: bool,
}

fn resolvent(a: Matrix2<f64>, omega: f64) -> Matrix2<Complex64> {
    let m = Matrix2::from_fn(|i, j| {
        let diag = if i == j {
            Complex64::new(0.0, -omega)
        } else {
            Complex64::new(0.0, 0.0)
        };
        diag - Complex64::new(a[(i, j)], 0.0)
    });
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det
}

fn loop_matrices_unchecked(p: &OptomechParams, omega: f64) -> LoopMatrices {
    let a_a = Matrix2::new(-p.kappa, -p.detuning, p.detuning, -p.kappa);
    let h = 0.5 * p.gamma_m;
    let a_b = Matrix2::new(-h, p.omega_m, -p.omega_m, -h);
    LoopMatrices {
        f_a: resolvent(a_a, omega),
        f_b: resolvent(a_b, omega),
        t: Matrix2::new(0.0, 0.0, -2.0 * p.loop_coupling(), 0.0),
        linearization_warning: p.linearization_warning(),
    }
}

/// Transfer matrices of the feedback loop at frequency `omega`.
pub fn loop_matrices(p: &OptomechParams, omega: f64) -> Result<LoopMatrices> {
    check_stability(p)?;
    Ok(loop_matrices_unchecked(p, omega))
}

/// Output quadratures `(X_out, Y_out)` in terms of the four inputs
/// `(X_in, Y_in, x_in, p_in)`, solved through the loop matrices.
fn output_transfer(p: &OptomechParams, omega: f64) -> [[Complex64; 4]; 2] {
    let lm = loop_matrices_unchecked(p, omega);
    let t = lm.t.map(|x| Complex64::new(x, 0.0));
    let one = Matrix2::<Complex64>::identity();
    // v_a = F_a (B_a w_a + T v_b),  v_b = F_b (B_b w_b + T v_a)
    let closed = (one - lm.f_a * t * lm.f_b * t)
        .try_inverse()
        .expect("closed loop is singular on the real frequency axis");
    let ba = Complex64::new((2.0 * p.kappa).sqrt(), 0.0);
    let bb = Complex64::new(p.gamma_m.sqrt(), 0.0);
    let from_field = closed * lm.f_a * ba;
    let from_mech = closed * lm.f_a * t * lm.f_b * bb;
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let direct = if r == c { 1.0 } else { 0.0 };
            out[r][c] = ba * from_field[(r, c)] - direct;
            out[r][c + 2] = ba * from_mech[(r, c)];
        }
    }
    out
}

/// Complex gains from an amplitude-modulated input at frequency `omega`.
///
/// `am_am` is the AM → AM output response divided by the same response of
/// the empty cavity (g_om = 0); `am_pm` is the AM → PM output response in
/// units where the empty cavity returns an AM input with unit total
/// magnitude. With g_om = 0, `am_am ≡ 1` and `am_pm` is the bare quadrature
/// rotation of the detuned cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainPoint {
    pub omega: f64,
    pub am_am: Complex64,
    pub am_pm: Complex64,
}

impl GainPoint {
    pub fn am_power_gain(&self) -> f64 {
        self.am_am.norm_sqr()
    }

    pub fn pm_power_gain(&self) -> f64 {
        self.am_pm.norm_sqr()
    }
}

fn gain_at(p: &OptomechParams, omega: f64) -> GainPoint {
    let h = output_transfer(p, omega);
    let h0 = output_transfer(&p.with_coupling(0.0), omega);
    GainPoint {
        omega,
        am_am: h[0][0] / h0[0][0],
        am_pm: h[1][0],
    }
}

/// Ponderomotive gain spectrum on a frequency grid.
pub fn ponderomotive_gain(p: &OptomechParams, grid: &[f64], exec: Execution) -> Result<Vec<GainPoint>> {
    check_stability(p)?;
    Ok(exec.map(grid, |&w| gain_at(p, w)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringDamping {
    /// Optical-spring frequency shift δω_m (rad/s).
    pub delta_omega: f64,
    /// Optical energy damping rate Γ_opt (rad/s); negative means anti-damping.
    pub gamma_opt: f64,
    /// Steady-state phonon occupancy (γ_m n_th + Γ_up)/(γ_m + Γ_opt);
    /// infinite when unstable.
    pub effective_occupancy: f64,
    /// Γ_opt < −γ_m.
    pub unstable: bool,
}

fn lorentzian_snn(p: &OptomechParams, omega: f64) -> f64 {
    2.0 * p.n_bar * p.kappa / (p.kappa * p.kappa + (p.detuning + omega).powi(2))
}

/// Weak-coupling optical spring and damping.
pub fn spring_damping(p: &OptomechParams) -> SpringDamping {
    let g2 = p.g_om * p.g_om;
    let (k, d, w) = (p.kappa, p.detuning, p.omega_m);
    let delta_omega = g2 * p.n_bar * ((d + w) / (k * k + (d + w).powi(2)) + (d - w) / (k * k + (d - w).powi(2)));
    let gamma_up = g2 * lorentzian_snn(p, -w);
    let gamma_down = g2 * lorentzian_snn(p, w);
    let gamma_opt = gamma_down - gamma_up;
    let total = p.gamma_m + gamma_opt;
    let unstable = total < 0.0;
    let effective_occupancy = if total > 0.0 {
        (p.gamma_m * p.n_th + gamma_up) / total
    } else {
        f64::INFINITY
    };
    SpringDamping {
        delta_omega,
        gamma_opt,
        effective_occupancy,
        unstable,
    }
}

/// Symmetrized output quadrature spectrum at angle `theta` (θ = 0 amplitude,
/// θ = π/2 phase), in units of shot noise. Inputs are vacuum at the cavity port
/// and a thermal bath of occupancy `n_th` on the mechanics.
pub fn output_quadrature_psd(p: &OptomechParams, omega: f64, theta: f64) -> f64 {
    let h = output_transfer(p, omega);
    let (c, s) = (theta.cos(), theta.sin());
    let noise = [1.0, 1.0, 2.0 * p.n_th + 1.0, 2.0 * p.n_th + 1.0];
    (0..4).map(|j| (h[0][j] * c + h[1][j] * s).norm_sqr() * noise[j]).sum()
}

/// Output quadrature noise spectrum on a grid, in shot-noise units.
pub fn output_noise_spectrum(p: &OptomechParams, grid: &[f64], theta: f64, exec: Execution) -> Result<SpectrumSeries> {
    check_stability(p)?;
    let values = exec.map(grid, |&w| output_quadrature_psd(p, w, theta));
    Ok(SpectrumSeries::real(
        "output_quadrature_psd",
        "shot_noise",
        grid.to_vec(),
        values,
        params_hash(&(p, theta)),
    ))
}

/// Quadrature angle minimizing the output spectrum at `omega`, found from
/// the 2×2 symmetrized covariance of `(X_out, Y_out)`. Returns `(θ, S_min)`.
pub fn optimal_quadrature(p: &OptomechParams, omega: f64) -> (f64, f64) {
    let h = output_transfer(p, omega);
    let noise = [1.0, 1.0, 2.0 * p.n_th + 1.0, 2.0 * p.n_th + 1.0];
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for j in 0..4 {
        sxx += h[0][j].norm_sqr() * noise[j];
        syy += h[1][j].norm_sqr() * noise[j];
        sxy += (h[0][j] * h[1][j].conj()).re * noise[j];
    }
    // S(θ) = sxx c² + syy s² + 2 sxy c s
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy) + std::f64::consts::FRAC_PI_2;
    let mean = 0.5 * (sxx + syy);
    let radius = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    (theta, mean - radius)
}
