//! Atom–cavity coupling: the spatial mode function, dressed-state energies,
//! and reduction of the dispersive many-atom interaction to collective linear
//! and quadratic optomechanical couplings.
//!
//! Collective couplings are evaluated on the cavity axis (ρ = 0); transverse
//! motion of the ensemble is not modelled.

use serde::{Deserialize, Serialize};

use crate::consts::HBAR;
use crate::error::{PhysicsError, Result};
use crate::params::ValidatedSystem;

/// Measured phase step between adjacent lattice wells in the Berkeley
/// atom-chip experiment (rad).
pub const ADJACENT_WELL_PHASE_STEP: f64 = 0.26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    /// Axial coordinate (m).
    pub z: f64,
    /// Radial distance from the axis (m), non-negative.
    pub rho: f64,
}

impl Position {
    pub fn new(z: f64, rho: f64) -> Self {
        debug_assert!(rho >= 0.0);
        Position { z, rho }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedPair {
    pub e_plus: f64,
    pub e_minus: f64,
}

/// A single harmonic well of the trapping lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellSpec {
    pub n_atoms: u64,
    /// Position of the well in the probe standing wave, φ = k z_well (rad).
    pub phase: f64,
    /// Axial trap frequency of this well (rad/s).
    pub omega_z: f64,
}

impl WellSpec {
    /// `count` wells of `n_per_well` atoms each, starting at `phase0` and
    /// stepping the probe phase by `step` from well to well.
    pub fn lattice(count: usize, n_per_well: u64, phase0: f64, step: f64, omega_z: f64) -> Vec<WellSpec> {
        (0..count)
            .map(|j| WellSpec {
                n_atoms: n_per_well,
                phase: phase0 + step * j as f64,
                omega_z,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCoupling {
    pub g_om: f64,
    pub omega_c_shifted: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BecCoupling {
    pub g_om: f64,
    pub omega_2k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiWellCoupling {
    pub per_well: Vec<f64>,
    pub g_om: f64,
    pub weights: Vec<f64>,
}

/// Standing-wave mode function g0 exp(−ρ²/w0²) sin(kz).
pub fn mode_coupling(g0: f64, k: f64, waist: f64, pos: Position) -> f64 {
    g0 * (-(pos.rho / waist).powi(2)).exp() * (k * pos.z).sin()
}

/// ∂g/∂z of [`mode_coupling`].
pub fn mode_coupling_dz(g0: f64, k: f64, waist: f64, pos: Position) -> f64 {
    g0 * (-(pos.rho / waist).powi(2)).exp() * k * (k * pos.z).cos()
}

/// Local atom–cavity coupling g(r) in the standing-wave mode (sign kept).
pub fn coupling_at(sys: &ValidatedSystem, pos: Position) -> f64 {
    mode_coupling(sys.atom.g0, sys.atom.k, sys.cavity.waist, pos)
}

/// Energies of the first excited dressed doublet for coupling `g`.
pub fn dressed_pair(omega_a: f64, omega_c: f64, g: f64) -> DressedPair {
    let mid = 0.5 * (omega_a + omega_c);
    let half_split = (0.25 * (omega_c - omega_a).powi(2) + g * g).sqrt();
    DressedPair {
        e_plus: mid + half_split,
        e_minus: mid - half_split,
    }
}

pub fn dressed_energies(sys: &ValidatedSystem, pos: Position) -> DressedPair {
    dressed_pair(sys.atom.omega_a, sys.cavity.omega_c, coupling_at(sys, pos))
}

fn dispersive_shift_per_atom(sys: &ValidatedSystem) -> Result<f64> {
    let dca = sys.delta_ca();
    if dca == 0.0 {
        return Err(PhysicsError::DivergentDispersive);
    }
    Ok(sys.atom.g0 * sys.atom.g0 / dca)
}

/// Linear coupling of one well of `n` atoms at probe phase `phase`:
/// g = N (g0²/Δ_ca) sin(2φ) · k sqrt(ħ/(2 N m ω)).
fn well_linear_coupling(sys: &ValidatedSystem, n: u64, phase: f64, omega: f64) -> Result<f64> {
    let per_atom = dispersive_shift_per_atom(sys)?;
    let nf = n as f64;
    let z_ho = (HBAR / (2.0 * nf * sys.atom.mass * omega)).sqrt();
    Ok(nf * per_atom * (2.0 * phase).sin() * sys.atom.k * z_ho)
}

/// Collective linear coupling and atom-shifted resonance for an ensemble in
/// a single harmonic well at phase φ0.
pub fn collective_linear(sys: &ValidatedSystem) -> Result<LinearCoupling> {
    let e = &sys.ensemble;
    let per_atom = dispersive_shift_per_atom(sys)?;
    let g_om = well_linear_coupling(sys, e.n_atoms, e.phi0, e.omega_z)?;
    Ok(LinearCoupling {
        g_om,
        omega_c_shifted: sys.cavity.omega_c + e.n_atoms as f64 * per_atom * e.phi0.sin().powi(2),
    })
}

/// Quadratic coupling coefficient g₂, defined so that the cavity shift from
/// the second-order Lamb-Dicke term is g₂ (Z_cm² + σ²)/Z_ho², i.e.
///
/// g₂ = N (g0²/Δ_ca) cos(2φ0) k² Z_ho² = (g0²/Δ_ca) cos(2φ0) ħk²/(2 m ω_z).
///
/// This is the linear coupling with sin(2φ0) replaced by one, times k Z_ho
/// cos(2φ0). The variance term is normalised by Z_ho² (not Z_ho) so that both
/// terms are dimensionless.
pub fn collective_quadratic(sys: &ValidatedSystem) -> Result<f64> {
    let per_atom = dispersive_shift_per_atom(sys)?;
    let e = &sys.ensemble;
    let k = sys.atom.k;
    Ok(per_atom * (2.0 * e.phi0).cos() * HBAR * k * k / (2.0 * sys.atom.mass * e.omega_z))
}

/// Coupling of the cosine density-modulation mode of a uniform condensate,
/// √N g0² √2 / (4 Δ_ca), with mode frequency ω_2k = 2ħk²/m.
pub fn bec_coupling(n_atoms: f64, g0: f64, delta_ca: f64) -> Result<f64> {
    if delta_ca == 0.0 {
        return Err(PhysicsError::DivergentDispersive);
    }
    Ok(n_atoms.sqrt() * g0 * g0 * std::f64::consts::SQRT_2 / (4.0 * delta_ca))
}

pub fn bec_mode_coupling(sys: &ValidatedSystem) -> Result<BecCoupling> {
    let g_om = bec_coupling(sys.ensemble.n_atoms as f64, sys.atom.g0, sys.delta_ca())?;
    let k = sys.atom.k;
    Ok(BecCoupling {
        g_om,
        omega_2k: 2.0 * HBAR * k * k / sys.atom.mass,
    })
}

/// Couplings of a multi-well ensemble.
///
/// The cavity selects the collective coordinate Σ_j w_j Z_j with weights
/// proportional to the per-well couplings; its coupling is the quadrature sum
/// sqrt(Σ g_j²). The overall sign follows the sign of Σ g_j (positive when
/// that sum vanishes), so a single well reproduces [`collective_linear`]
/// exactly and the result is invariant under permutation of the wells.
pub fn multi_well_coupling(sys: &ValidatedSystem, wells: &[WellSpec]) -> Result<MultiWellCoupling> {
    if wells.is_empty() {
        return Err(PhysicsError::EmptyWells);
    }
    let per_well = wells
        .iter()
        .map(|w| well_linear_coupling(sys, w.n_atoms, w.phase, w.omega_z))
        .collect::<Result<Vec<f64>>>()?;
    let norm = per_well.iter().map(|g| g * g).sum::<f64>().sqrt();
    let sign = if per_well.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let weights = if norm > 0.0 {
        per_well.iter().map(|g| sign * g / norm).collect()
    } else {
        vec![0.0; wells.len()]
    };
    Ok(MultiWellCoupling {
        g_om: sign * norm,
        per_well,
        weights,
    })
}
