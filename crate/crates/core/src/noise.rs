//! Quantum-noise quantities: photon-number fluctuations, position-measurement
//! response, momentum diffusion of a single atom, radiation-pressure
//! back-action rates, sideband thermometry and granular-regime scales.
//!
//! Back-action rates use the two-sided photon-number spectrum
//! `S_nn(ω) = 2n̄κ/(κ² + (Δ+ω)²)` with the single-photon coupling g_om:
//! `Γ_up = g_om² S_nn(−ω_m)` adds phonons and `Γ_down = g_om² S_nn(+ω_m)`
//! removes them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::consts::HBAR;
use crate::coupling::{mode_coupling, mode_coupling_dz, Position};
use crate::error::{PhysicsError, Result};
use crate::exec::Execution;
use crate::linear::OptomechParams;
use crate::params::ValidatedSystem;
use crate::spectrum::{params_hash, SpectrumSeries};

/// Excited-state population above which the weak-excitation closure is
/// flagged.
pub const SATURATION_LIMIT: f64 = 0.1;

/// Two-sided photon-number spectrum S_nn(ω) (per rad/s).
pub fn photon_number_psd(p: &OptomechParams, omega: f64) -> f64 {
    2.0 * p.n_bar * p.kappa / (p.kappa * p.kappa + (p.detuning + omega).powi(2))
}

pub fn photon_number_spectrum(p: &OptomechParams, grid: &[f64], exec: Execution) -> SpectrumSeries {
    let values = exec.map(grid, |&w| photon_number_psd(p, w));
    SpectrumSeries::real("S_nn", "1/(rad/s)", grid.to_vec(), values, params_hash(p))
}

/// Field change δE/E0 caused by a static displacement `dz` of the collective
/// coordinate (same length units as `z_ho`), in the quasi-static limit.
pub fn displacement_field_response(p: &OptomechParams, dz: f64, z_ho: f64) -> Complex64 {
    Complex64::new(0.0, p.g_om) / Complex64::new(p.kappa, -p.detuning) * (dz / z_ho)
}

/// Single-atom cavity parameters for the weak-drive steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomCavity {
    pub g0: f64,
    pub k: f64,
    pub waist: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// ω_p − ω_c (bare cavity).
    pub detuning_pc: f64,
    /// ω_p − ω_a.
    pub detuning_pa: f64,
    pub mass: f64,
}

impl AtomCavity {
    /// Probe frequency ω_p = ω_c′ + Δ taken from the system drive.
    pub fn from_system(sys: &ValidatedSystem) -> Self {
        let wp = sys.omega_c_shifted() + sys.detuning();
        AtomCavity {
            g0: sys.atom.g0,
            k: sys.atom.k,
            waist: sys.cavity.waist,
            kappa: sys.cavity.kappa,
            gamma: sys.atom.gamma,
            detuning_pc: wp - sys.cavity.omega_c,
            detuning_pa: wp - sys.atom.omega_a,
            mass: sys.atom.mass,
        }
    }

    pub fn coupling(&self, pos: Position) -> f64 {
        mode_coupling(self.g0, self.k, self.waist, pos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateAtomCavity {
    pub field: Complex64,
    pub dipole: Complex64,
    pub excited_population: f64,
    /// Excited population exceeds [`SATURATION_LIMIT`].
    pub saturation_warning: bool,
}

fn field_denominator(ac: &AtomCavity, g: f64) -> Complex64 {
    Complex64::new(ac.kappa, -ac.detuning_pc) + g * g / Complex64::new(ac.gamma, -ac.detuning_pa)
}

/// Weak-excitation steady state for local coupling `g` and drive `eta`.
pub fn steady_state_for_coupling(ac: &AtomCavity, g: f64, eta: f64) -> SteadyStateAtomCavity {
    let field = eta / field_denominator(ac, g);
    let dipole = Complex64::new(0.0, g) * field / Complex64::new(-ac.gamma, ac.detuning_pa);
    let pe = dipole.norm_sqr();
    SteadyStateAtomCavity {
        field,
        dipole,
        excited_population: pe,
        saturation_warning: pe > SATURATION_LIMIT,
    }
}

pub fn atom_cavity_steady_state(ac: &AtomCavity, pos: Position, eta: f64) -> SteadyStateAtomCavity {
    steady_state_for_coupling(ac, ac.coupling(pos), eta)
}

/// Momentum diffusion constant and its three contributions (kg² m² s⁻³).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumDiffusion {
    /// (ħk)² γ P_e
    pub spontaneous: f64,
    /// |ħ ∇⟨σ⟩|² γ
    pub dipole_fluctuation: f64,
    /// |ħ ∇⟨a⟩|² κ
    pub field_fluctuation: f64,
    pub total: f64,
    pub saturation_warning: bool,
}

impl MomentumDiffusion {
    /// Free-space limit: the cavity field-fluctuation term dropped.
    pub fn without_cavity_term(&self) -> f64 {
        self.spontaneous + self.dipole_fluctuation
    }
}

/// Analytic z-gradients of ⟨a⟩ and ⟨σ⟩ given g and ∂g/∂z.
pub fn steady_state_gradients(ac: &AtomCavity, g: f64, dg: f64, eta: f64) -> (Complex64, Complex64) {
    let den = field_denominator(ac, g);
    let atom_den = Complex64::new(ac.gamma, -ac.detuning_pa);
    let field = eta / den;
    let d_den = 2.0 * g * dg / atom_den;
    let d_field = -eta * d_den / (den * den);
    let pre = Complex64::new(0.0, 1.0) / Complex64::new(-ac.gamma, ac.detuning_pa);
    let d_dipole = pre * (dg * field + g * d_field);
    (d_field, d_dipole)
}

/// Diffusion for an explicit local coupling and gradient.
pub fn diffusion_with_gradient(ac: &AtomCavity, g: f64, dg: f64, eta: f64) -> MomentumDiffusion {
    let ss = steady_state_for_coupling(ac, g, eta);
    let (d_field, d_dipole) = steady_state_gradients(ac, g, dg, eta);
    let spontaneous = (HBAR * ac.k).powi(2) * ac.gamma * ss.excited_population;
    let dipole_fluctuation = HBAR * HBAR * d_dipole.norm_sqr() * ac.gamma;
    let field_fluctuation = HBAR * HBAR * d_field.norm_sqr() * ac.kappa;
    MomentumDiffusion {
        spontaneous,
        dipole_fluctuation,
        field_fluctuation,
        total: spontaneous + dipole_fluctuation + field_fluctuation,
        saturation_warning: ss.saturation_warning,
    }
}

/// Momentum diffusion along the cavity axis at `pos`.
pub fn momentum_diffusion(ac: &AtomCavity, pos: Position, eta: f64) -> MomentumDiffusion {
    let g = ac.coupling(pos);
    let dg = mode_coupling_dz(ac.g0, ac.k, ac.waist, pos);
    diffusion_with_gradient(ac, g, dg, eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackactionRates {
    /// Phonon-adding rate g_om² S_nn(−ω_m) (1/s).
    pub gamma_up: f64,
    /// Phonon-removing rate g_om² S_nn(+ω_m) (1/s).
    pub gamma_down: f64,
    pub omega_m: f64,
}

impl BackactionRates {
    /// Net phonon flux into the oscillator at occupation `nu`.
    pub fn phonon_flux(&self, nu: f64) -> f64 {
        self.gamma_up * (nu + 1.0) - self.gamma_down * nu
    }

    /// Net energy flux (W) at occupation `nu`.
    pub fn heat_flux(&self, nu: f64) -> f64 {
        HBAR * self.omega_m * self.phonon_flux(nu)
    }

    /// Atom-loss rate from a trap of depth `trap_depth` (J) per unit energy
    /// deposited, for bolometric readout.
    pub fn loss_rate(&self, nu: f64, trap_depth: f64) -> f64 {
        self.heat_flux(nu) / trap_depth
    }
}

pub fn backaction_rates(p: &OptomechParams) -> BackactionRates {
    let g2 = p.g_om * p.g_om;
    BackactionRates {
        gamma_up: g2 * photon_number_psd(p, -p.omega_m),
        gamma_down: g2 * photon_number_psd(p, p.omega_m),
        omega_m: p.omega_m,
    }
}

/// Net back-action heating power versus detuning at constant n̄.
pub fn bolometric_lineshape(p: &OptomechParams, detunings: &[f64], nu: f64, exec: Execution) -> Vec<f64> {
    exec.map(detunings, |&d| backaction_rates(&p.with_detuning(d)).heat_flux(nu))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandResult {
    /// Stokes (phonon-adding) rate, ∝ ν̄ + 1.
    pub r_plus: f64,
    /// Anti-Stokes (phonon-removing) rate, ∝ ν̄.
    pub r_minus: f64,
    /// R₊/R₋; infinite when the anti-Stokes sideband vanishes.
    pub ratio: f64,
    pub occupation: f64,
    /// Net heat flux ħω_m (R₊ − R₋) into the oscillator (W).
    pub heat_flux: f64,
}

/// Sideband powers for a resonant probe at occupation `nu`, in phonon
/// transition rates. Off-resonant probing is rejected.
pub fn sideband_spectrum(p: &OptomechParams, nu: f64) -> Result<SidebandResult> {
    if p.detuning != 0.0 {
        return Err(PhysicsError::OffResonantProbe(p.detuning));
    }
    if !(nu >= 0.0) {
        return Err(PhysicsError::InvalidArgument(format!(
            "occupation must be >= 0, got {nu}"
        )));
    }
    let (k, w) = (p.kappa, p.omega_m);
    let rate = 2.0 * p.g_om * p.g_om * p.n_bar * k / (k * k + w * w);
    let r_plus = rate * (nu + 1.0);
    let r_minus = rate * nu;
    let ratio = if r_minus == 0.0 {
        f64::INFINITY
    } else {
        r_plus / r_minus
    };
    Ok(SidebandResult {
        r_plus,
        r_minus,
        ratio,
        occupation: nu,
        heat_flux: HBAR * w * (r_plus - r_minus),
    })
}

/// Occupation inferred from sideband rates, ν̄ = R₋/(R₊ − R₋).
pub fn thermometry(r_plus: f64, r_minus: f64) -> Option<f64> {
    (r_plus > r_minus).then(|| r_minus / (r_plus - r_minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GranularScales {
    /// Position resolution from one transmitted photon, Z_ho κ/g_om (m).
    pub delta_z: f64,
    /// Single-photon impulse uncertainty (g_om/κ)(ħ/Z_ho) (kg m/s).
    pub delta_p: f64,
    pub granularity: f64,
}

pub fn granular_scales(g_om: f64, kappa: f64, z_ho: f64) -> Result<GranularScales> {
    if !(g_om > 0.0) {
        return Err(PhysicsError::InvalidArgument("granular scales need g_om > 0".into()));
    }
    let eps = g_om / kappa;
    Ok(GranularScales {
        delta_z: z_ho / eps,
        delta_p: eps * HBAR / z_ho,
        granularity: eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> OptomechParams {
        OptomechParams {
            g_om: 0.1,
            n_bar: 1.0,
            kappa: 1.0,
            detuning: 0.0,
            omega_m: 0.2,
            gamma_m: 1e-3,
            n_th: 0.0,
        }
    }

    #[test]
    fn snn_values() {
        let p = unit();
        assert_eq!(photon_number_psd(&p, 0.0), 2.0);
        assert_eq!(photon_number_psd(&p, 1.0), 1.0);
    }

    #[test]
    fn snn_peaks_at_minus_detuning() {
        for d in [-3.0, -0.4, 0.0, 1.7] {
            for kappa in [0.3, 1.0, 4.0] {
                let p = OptomechParams {
                    detuning: d,
                    kappa,
                    n_bar: 2.5,
                    ..unit()
                };
                let peak = photon_number_psd(&p, -d);
                assert_eq!(peak, 2.0 * 2.5 / kappa);
                for dw in [1e-3, 0.1, 1.0] {
                    assert!(photon_number_psd(&p, -d + dw) < peak);
                    assert!(photon_number_psd(&p, -d - dw) < peak);
                }
            }
        }
    }

    #[test]
    fn field_response_modulus() {
        let p = OptomechParams {
            detuning: -0.6,
            ..unit()
        };
        assert_eq!(displacement_field_response(&p, 0.0, 1.0).norm(), 0.0);
        let r = displacement_field_response(&p, 0.3, 1.5);
        let expect = p.g_om.powi(2) / (p.kappa.powi(2) + p.detuning.powi(2)) * (0.3f64 / 1.5).powi(2);
        assert!((r.norm_sqr() - expect).abs() < 1e-15);
    }

    #[test]
    fn field_response_tracks_shot_noise_lineshape() {
        let base = unit();
        let ratios: Vec<f64> = [-2.0, -0.5, 0.0, 0.7, 3.0]
            .iter()
            .map(|&d| {
                let p = base.with_detuning(d);
                displacement_field_response(&p, 1.0, 1.0).norm_sqr() / photon_number_psd(&p, 0.0)
            })
            .collect();
        for r in &ratios {
            assert!((r / ratios[0] - 1.0).abs() < 1e-12);
        }
    }

    fn atom() -> AtomCavity {
        AtomCavity {
            g0: 2.0,
            k: 1.0,
            waist: 10.0,
            kappa: 1.0,
            gamma: 1.5,
            detuning_pc: 0.0,
            detuning_pa: -30.0,
            mass: 1.0,
        }
    }

    #[test]
    fn empty_cavity_steady_state() {
        let ac = AtomCavity {
            detuning_pc: 0.4,
            ..atom()
        };
        let ss = steady_state_for_coupling(&ac, 0.0, 0.2);
        let expect = 0.2 / Complex64::new(1.0, -0.4);
        assert!((ss.field - expect).norm() < 1e-15);
        assert_eq!(ss.dipole.norm(), 0.0);
        let zero = steady_state_for_coupling(&ac, 1.0, 0.0);
        assert_eq!(zero.field.norm() + zero.dipole.norm() + zero.excited_population, 0.0);
    }

    #[test]
    fn antinode_atom_detunes_resonant_cavity() {
        let ac = atom();
        let pos = Position::new(std::f64::consts::FRAC_PI_2 / ac.k, 0.0);
        let with = atom_cavity_steady_state(&ac, pos, 0.1).field.norm_sqr();
        let without = steady_state_for_coupling(&ac, 0.0, 0.1).field.norm_sqr();
        assert!(with < without);
    }

    #[test]
    fn saturation_flag() {
        let ac = AtomCavity {
            detuning_pa: -1.0,
            ..atom()
        };
        let ss = steady_state_for_coupling(&ac, 2.0, 5.0);
        assert!(ss.saturation_warning);
        assert!(!steady_state_for_coupling(&ac, 2.0, 0.01).saturation_warning);
    }

    #[test]
    fn uniform_coupling_leaves_spontaneous_term_only() {
        let ac = atom();
        let d = diffusion_with_gradient(&ac, 1.3, 0.0, 0.1);
        let ss = steady_state_for_coupling(&ac, 1.3, 0.1);
        assert_eq!(d.dipole_fluctuation, 0.0);
        assert_eq!(d.field_fluctuation, 0.0);
        assert_eq!(d.total, (HBAR * ac.k).powi(2) * ac.gamma * ss.excited_population);
    }

    #[test]
    fn gradients_match_central_differences() {
        let ac = atom();
        let eta = 0.05;
        for &kz in &[0.0, 0.3, 1.0, 2.2] {
            let z = kz / ac.k;
            let pos = Position::new(z, 0.5);
            let g = ac.coupling(pos);
            let dg = mode_coupling_dz(ac.g0, ac.k, ac.waist, pos);
            let (da, ds) = steady_state_gradients(&ac, g, dg, eta);
            let h = 1e-5 / ac.k;
            let plus = atom_cavity_steady_state(&ac, Position::new(z + h, 0.5), eta);
            let minus = atom_cavity_steady_state(&ac, Position::new(z - h, 0.5), eta);
            let fd_a = (plus.field - minus.field) / (2.0 * h);
            let fd_s = (plus.dipole - minus.dipole) / (2.0 * h);
            assert!((fd_a - da).norm() <= 1e-6 * da.norm().max(1e-30), "kz={kz}");
            assert!((fd_s - ds).norm() <= 1e-6 * ds.norm().max(1e-30), "kz={kz}");
        }
    }

    #[test]
    fn diffusion_components_are_nonnegative() {
        let ac = atom();
        for i in 0..50 {
            let pos = Position::new(i as f64 * 0.13, 0.1 * i as f64);
            let d = momentum_diffusion(&ac, pos, 0.1);
            assert!(d.spontaneous >= 0.0 && d.dipole_fluctuation >= 0.0 && d.field_fluctuation >= 0.0);
            assert!(d.without_cavity_term() <= d.total);
        }
    }

    #[test]
    fn resonant_backaction_is_pure_heating() {
        let p = unit();
        let r = backaction_rates(&p);
        assert_eq!(r.gamma_up, r.gamma_down);
        for nu in [0.0, 0.5, 10.0] {
            assert!((r.heat_flux(nu) - HBAR * p.omega_m * r.gamma_up).abs() < 1e-40);
            assert!(r.heat_flux(nu) > 0.0);
        }
    }

    #[test]
    fn no_light_no_backaction() {
        let p = OptomechParams {
            n_bar: 0.0,
            detuning: -0.3,
            ..unit()
        };
        let r = backaction_rates(&p);
        assert_eq!((r.gamma_up, r.gamma_down, r.heat_flux(3.0)), (0.0, 0.0, 0.0));
    }

    #[test]
    fn red_detuning_favours_phonon_removal() {
        let r = backaction_rates(&unit().with_detuning(-0.5));
        assert!(r.gamma_down > r.gamma_up);
    }

    #[test]
    fn detuning_reflection_symmetry() {
        for d in [-2.0, -0.3, 0.1, 1.4] {
            let a = backaction_rates(&unit().with_detuning(d));
            let b = backaction_rates(&unit().with_detuning(-d));
            assert!((a.gamma_up - b.gamma_down).abs() <= 1e-15 * a.gamma_up);
        }
    }

    #[test]
    fn bolometric_lineshape_follows_snn_for_slow_oscillator() {
        let p = OptomechParams {
            omega_m: 1e-6,
            ..unit()
        };
        let ds = [-2.0, -1.0, 0.0, 0.5, 2.5];
        let heat = bolometric_lineshape(&p, &ds, 0.0, Execution::Sequential);
        let ratios: Vec<f64> = ds
            .iter()
            .zip(&heat)
            .map(|(&d, h)| h / photon_number_psd(&p.with_detuning(d), 0.0))
            .collect();
        for r in &ratios {
            assert!((r / ratios[2] - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn sideband_ratios() {
        let p = unit();
        let half = sideband_spectrum(&p, 0.5).unwrap();
        assert!((half.ratio - 3.0).abs() < 1e-12);
        let ground = sideband_spectrum(&p, 0.0).unwrap();
        assert_eq!(ground.r_minus, 0.0);
        assert!(ground.ratio.is_infinite());
        let hot = sideband_spectrum(&p, 100.0).unwrap();
        assert!((hot.ratio - 1.01).abs() < 1e-12);
    }

    #[test]
    fn sideband_rejects_detuned_probe() {
        let p = unit().with_detuning(0.1);
        assert!(matches!(
            sideband_spectrum(&p, 1.0),
            Err(PhysicsError::OffResonantProbe(_))
        ));
    }

    #[test]
    fn thermometry_inverts_sidebands() {
        let p = unit();
        for i in 0..=60 {
            let nu = 10f64.powf(-3.0 + 0.1 * i as f64);
            let s = sideband_spectrum(&p, nu).unwrap();
            let back = thermometry(s.r_plus, s.r_minus).unwrap();
            assert!(((back - nu) / nu).abs() < 1e-12, "nu={nu}");
        }
    }

    #[test]
    fn granular_boundary_and_identity() {
        let z = 3.0e-9;
        let s = granular_scales(2.0, 2.0, z).unwrap();
        assert!((s.delta_z - z).abs() < 1e-24);
        assert!((s.delta_p - HBAR / z).abs() < 1e-12 * HBAR / z);
        let s = granular_scales(1.5, 1.0, z).unwrap();
        assert!((s.delta_z - 2.0 / 3.0 * z).abs() < 1e-22);
        assert!((s.delta_z * s.delta_p / HBAR - 1.0).abs() < 1e-14);
        assert!(granular_scales(0.0, 1.0, z).is_err());
    }
}
