//! Parameter types, configuration validation and derived quantities.
//!
//! All frequencies are angular (rad/s). Configuration documents may give any
//! frequency under a key suffixed `_hz`, in which case it is multiplied by 2π.
//! `gamma` and `kappa` are half-linewidths (half width at half maximum of the
//! respective resonance), not the full-width convention.
//!
//! The probe detuning `Δ = ω_p − ω_c′` is measured from the atom-shifted
//! cavity resonance `ω_c′`, which is what an experiment locks to. When the
//! probe is given as an absolute frequency the shift is computed from the
//! ensemble.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::consts::{C_LIGHT, HBAR, TWO_PI};
use crate::coupling::{self, WellSpec};
use crate::error::{ConfigError, PhysicsError};

/// Default intrinsic mechanical damping relative to the trap frequency.
pub const DEFAULT_GAMMA_M_FRACTION: f64 = 1e-3;
/// Allowed relative slack between `k` and `ω_a / c`.
pub const WAVEVECTOR_SLACK: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    #[default]
    StandingWave,
    Ring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    pub mass: f64,
    pub omega_a: f64,
    pub gamma: f64,
    pub g0: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub omega_c: f64,
    pub kappa: f64,
    pub waist: f64,
    pub geometry: Geometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n_atoms: u64,
    pub omega_z: f64,
    pub phi0: f64,
    pub temperature: f64,
    pub gamma_m: f64,
    /// True when `gamma_m` was not configured and the default was applied.
    pub gamma_m_defaulted: bool,
    pub wells: Vec<WellSpec>,
    pub trap_depth: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeSpec {
    Frequency(f64),
    Detuning(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhotonSpec {
    MeanPhotons(f64),
    Amplitude(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub probe: ProbeSpec,
    pub photons: PhotonSpec,
    pub side_pump: Option<f64>,
}

/// A fully validated parameter set in SI angular-frequency units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatedSystem {
    pub atom: AtomParams,
    pub cavity: CavityParams,
    pub ensemble: EnsembleParams,
    pub drive: DriveParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// ω_c − ω_a
    pub delta_ca: f64,
    /// ω_p − ω_c′
    pub detuning: f64,
    pub n_bar: f64,
    pub cooperativity: f64,
    pub g_om: f64,
    pub g2: f64,
    pub z_ho: f64,
    pub granularity: f64,
    pub optomechanical_cooperativity: f64,
    pub omega_c_shifted: f64,
    pub omega_2k: f64,
    pub gamma_m: f64,
    pub gamma_m_defaulted: bool,
}

impl ValidatedSystem {
    pub fn new(
        atom: AtomParams,
        cavity: CavityParams,
        ensemble: EnsembleParams,
        drive: DriveParams,
    ) -> Result<Self, ConfigError> {
        let sys = ValidatedSystem {
            atom,
            cavity,
            ensemble,
            drive,
        };
        sys.check()?;
        Ok(sys)
    }

    fn check(&self) -> Result<(), ConfigError> {
        let a = &self.atom;
        positive("atom.mass", a.mass)?;
        positive("atom.omega_a", a.omega_a)?;
        positive("atom.gamma", a.gamma)?;
        positive("atom.g0", a.g0)?;
        positive("atom.k", a.k)?;
        if a.gamma >= a.omega_a {
            return Err(ConfigError::OutOfRange(
                "atom.gamma".into(),
                "must be smaller than omega_a".into(),
            ));
        }
        let k_light = a.omega_a / C_LIGHT;
        if ((a.k - k_light) / k_light).abs() > WAVEVECTOR_SLACK {
            return Err(ConfigError::UnitMismatch(
                "atom.k".into(),
                format!("k = {:e} 1/m inconsistent with omega_a / c = {:e} 1/m", a.k, k_light),
            ));
        }
        let c = &self.cavity;
        positive("cavity.omega_c", c.omega_c)?;
        positive("cavity.kappa", c.kappa)?;
        positive("cavity.waist", c.waist)?;
        if c.kappa >= 1e-2 * c.omega_c {
            return Err(ConfigError::OutOfRange(
                "cavity.kappa".into(),
                "must be much smaller than omega_c".into(),
            ));
        }
        let e = &self.ensemble;
        if e.n_atoms < 1 {
            return Err(ConfigError::NonPositive("ensemble.n_atoms".into()));
        }
        positive("ensemble.omega_z", e.omega_z)?;
        finite("ensemble.phi0", e.phi0)?;
        nonnegative("ensemble.temperature", e.temperature)?;
        nonnegative("ensemble.gamma_m", e.gamma_m)?;
        if let Some(d) = e.trap_depth {
            positive("ensemble.trap_depth", d)?;
        }
        if !e.wells.is_empty() {
            let sum: u64 = e.wells.iter().map(|w| w.n_atoms).sum();
            if sum != e.n_atoms {
                return Err(ConfigError::WellCountMismatch {
                    sum,
                    expected: e.n_atoms,
                });
            }
            for (i, w) in e.wells.iter().enumerate() {
                if w.n_atoms < 1 {
                    return Err(ConfigError::NonPositive(format!("ensemble.wells[{i}].n_atoms")));
                }
                positive(&format!("ensemble.wells[{i}].omega_z"), w.omega_z)?;
            }
        }
        match self.drive.probe {
            ProbeSpec::Frequency(w) => positive("drive.omega_p", w)?,
            ProbeSpec::Detuning(d) => finite("drive.detuning", d)?,
        }
        match self.drive.photons {
            PhotonSpec::MeanPhotons(n) => nonnegative("drive.n_bar", n)?,
            PhotonSpec::Amplitude(eta) => nonnegative("drive.eta", eta)?,
        }
        if let Some(gp) = self.drive.side_pump {
            nonnegative("drive.g_p", gp)?;
        }
        Ok(())
    }

    /// ω_c − ω_a.
    pub fn delta_ca(&self) -> f64 {
        self.cavity.omega_c - self.atom.omega_a
    }

    /// Atom-shifted cavity resonance ω_c′; equals ω_c when Δ_ca = 0.
    pub fn omega_c_shifted(&self) -> f64 {
        let dca = self.delta_ca();
        if dca == 0.0 {
            return self.cavity.omega_c;
        }
        let per_atom = self.atom.g0 * self.atom.g0 / dca;
        let shift: f64 = if self.ensemble.wells.is_empty() {
            self.ensemble.n_atoms as f64 * per_atom * self.ensemble.phi0.sin().powi(2)
        } else {
            self.ensemble
                .wells
                .iter()
                .map(|w| w.n_atoms as f64 * per_atom * w.phase.sin().powi(2))
                .sum()
        };
        self.cavity.omega_c + shift
    }

    /// Probe detuning Δ = ω_p − ω_c′.
    pub fn detuning(&self) -> f64 {
        match self.drive.probe {
            ProbeSpec::Detuning(d) => d,
            ProbeSpec::Frequency(wp) => wp - self.omega_c_shifted(),
        }
    }

    /// Mean intracavity photon number; from an input amplitude η it is the
    /// empty-cavity Lorentzian η²/(κ² + Δ²).
    pub fn n_bar(&self) -> f64 {
        match self.drive.photons {
            PhotonSpec::MeanPhotons(n) => n,
            PhotonSpec::Amplitude(eta) => {
                let d = self.detuning();
                eta * eta / (self.cavity.kappa.powi(2) + d * d)
            }
        }
    }

    /// Input drive amplitude η reproducing `n_bar` in the empty cavity.
    pub fn eta(&self) -> f64 {
        match self.drive.photons {
            PhotonSpec::Amplitude(eta) => eta,
            PhotonSpec::MeanPhotons(n) => {
                let d = self.detuning();
                (n * (self.cavity.kappa.powi(2) + d * d)).sqrt()
            }
        }
    }

    /// Collective zero-point length of the centre-of-mass mode.
    pub fn z_ho(&self) -> f64 {
        (HBAR / (2.0 * self.ensemble.n_atoms as f64 * self.atom.mass * self.ensemble.omega_z)).sqrt()
    }

    /// Mechanical bath occupancy: Bose–Einstein, switching to the classical
    /// value k_B T/(ħ ω_z) once that exceeds 20.
    pub fn bath_occupancy(&self) -> f64 {
        crate::linear::bath_occupancy(self.ensemble.temperature, self.ensemble.omega_z)
    }
}

/// Single-atom cooperativity g0²/(2γκ).
pub fn cooperativity(g0: f64, gamma: f64, kappa: f64) -> f64 {
    g0 * g0 / (2.0 * gamma * kappa)
}

/// Computes every derived quantity of a validated system.
pub fn derive(sys: &ValidatedSystem) -> Result<DerivedQuantities, PhysicsError> {
    let dca = sys.delta_ca();
    let g_om = if sys.ensemble.wells.is_empty() {
        coupling::collective_linear(sys)?.g_om
    } else {
        coupling::multi_well_coupling(sys, &sys.ensemble.wells)?.g_om
    };
    let g2 = coupling::collective_quadratic(sys)?;
    let kappa = sys.cavity.kappa;
    let n_bar = sys.n_bar();
    let gamma_m = sys.ensemble.gamma_m;
    let c_om = if gamma_m > 0.0 {
        4.0 * g_om * g_om * n_bar / (kappa * gamma_m)
    } else {
        f64::INFINITY
    };
    let a = &sys.atom;
    Ok(DerivedQuantities {
        delta_ca: dca,
        detuning: sys.detuning(),
        n_bar,
        cooperativity: cooperativity(a.g0, a.gamma, kappa),
        g_om,
        g2,
        z_ho: sys.z_ho(),
        granularity: g_om / kappa,
        optomechanical_cooperativity: c_om,
        omega_c_shifted: sys.omega_c_shifted(),
        omega_2k: 2.0 * HBAR * a.k * a.k / a.mass,
        gamma_m,
        gamma_m_defaulted: sys.ensemble.gamma_m_defaulted,
    })
}

/// True in the granular regime, ε = g_om/κ > 1.
pub fn is_granular(d: &DerivedQuantities) -> bool {
    d.granularity > 1.0
}

// ---------------------------------------------------------------------------
// configuration parsing

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if !v.is_finite() || v <= 0.0 {
        return Err(ConfigError::NonPositive(name.to_string()));
    }
    Ok(())
}

fn nonnegative(name: &str, v: f64) -> Result<(), ConfigError> {
    if !v.is_finite() || v < 0.0 {
        return Err(ConfigError::OutOfRange(name.to_string(), "must be >= 0".into()));
    }
    Ok(())
}

fn finite(name: &str, v: f64) -> Result<(), ConfigError> {
    if !v.is_finite() {
        return Err(ConfigError::OutOfRange(name.to_string(), "must be finite".into()));
    }
    Ok(())
}

struct Section<'a> {
    name: &'static str,
    map: &'a serde_json::Map<String, Value>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Value, name: &'static str) -> Result<Self, ConfigError> {
        match root.get(name) {
            Some(Value::Object(map)) => Ok(Section { name, map }),
            Some(_) => Err(ConfigError::Malformed(format!("`{name}` must be an object"))),
            None => Err(ConfigError::MissingField(name.to_string())),
        }
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{}", self.name, key)
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_f64()
                .map(Some)
                .ok_or_else(|| ConfigError::Malformed(format!("`{}` must be a number", self.path(key)))),
        }
    }

    /// Angular frequency under `key` (rad/s) or `key_hz` (Hz); never both.
    fn frequency(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let hz_key = format!("{key}_hz");
        match (self.number(key)?, self.number(&hz_key)?) {
            (Some(_), Some(_)) => Err(ConfigError::UnitMismatch(
                self.path(key),
                format!("both `{key}` and `{hz_key}` given"),
            )),
            (Some(w), None) => Ok(Some(w)),
            (None, Some(f)) => Ok(Some(TWO_PI * f)),
            (None, None) => Ok(None),
        }
    }

    fn required_frequency(&self, key: &str) -> Result<f64, ConfigError> {
        self.frequency(key)?
            .ok_or_else(|| ConfigError::MissingField(self.path(key)))
    }

    fn required(&self, key: &str) -> Result<f64, ConfigError> {
        self.number(key)?
            .ok_or_else(|| ConfigError::MissingField(self.path(key)))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        for key in self.map.keys() {
            let base = key.strip_suffix("_hz").unwrap_or(key);
            if !allowed.contains(&key.as_str()) && !allowed.contains(&base) {
                return Err(ConfigError::Malformed(format!("unknown field `{}`", self.path(key))));
            }
        }
        Ok(())
    }
}

/// Validates a parsed JSON configuration document.
pub fn validate(config: &Value) -> Result<ValidatedSystem, ConfigError> {
    if !config.is_object() {
        return Err(ConfigError::Malformed("configuration must be a JSON object".into()));
    }
    let atom = Section::new(config, "atom")?;
    atom.check_keys(&["mass", "omega_a", "gamma", "g0", "k"])?;
    let atom_params = AtomParams {
        mass: atom.required("mass")?,
        omega_a: atom.required_frequency("omega_a")?,
        gamma: atom.required_frequency("gamma")?,
        g0: atom.required_frequency("g0")?,
        k: match atom.number("k")? {
            Some(k) => k,
            None => atom.required_frequency("omega_a")? / C_LIGHT,
        },
    };

    let cavity = Section::new(config, "cavity")?;
    cavity.check_keys(&["omega_c", "kappa", "waist", "geometry"])?;
    let geometry = match cavity.map.get("geometry") {
        None | Some(Value::Null) => Geometry::StandingWave,
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|_| ConfigError::Malformed("`cavity.geometry` must be \"standing_wave\" or \"ring\"".into()))?,
    };
    let cavity_params = CavityParams {
        omega_c: cavity.required_frequency("omega_c")?,
        kappa: cavity.required_frequency("kappa")?,
        waist: cavity.required("waist")?,
        geometry,
    };

    let ens = Section::new(config, "ensemble")?;
    ens.check_keys(&[
        "n_atoms",
        "omega_z",
        "phi0",
        "temperature",
        "gamma_m",
        "wells",
        "trap_depth",
    ])?;
    let n_atoms = ens.required("n_atoms")?;
    if n_atoms < 1.0 || n_atoms.fract() != 0.0 {
        return Err(ConfigError::NonPositive("ensemble.n_atoms".into()));
    }
    let omega_z = ens.required_frequency("omega_z")?;
    let (gamma_m, gamma_m_defaulted) = match ens.frequency("gamma_m")? {
        Some(g) => (g, false),
        None => (DEFAULT_GAMMA_M_FRACTION * omega_z, true),
    };
    let wells = match ens.map.get("wells") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, w)| parse_well(w, i, omega_z))
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(ConfigError::Malformed("`ensemble.wells` must be an array".into())),
    };
    let ensemble_params = EnsembleParams {
        n_atoms: n_atoms as u64,
        omega_z,
        phi0: ens.number("phi0")?.unwrap_or(std::f64::consts::FRAC_PI_4),
        temperature: ens.number("temperature")?.unwrap_or(0.0),
        gamma_m,
        gamma_m_defaulted,
        wells,
        trap_depth: ens.number("trap_depth")?,
    };

    let drive = Section::new(config, "drive")?;
    drive.check_keys(&["omega_p", "detuning", "n_bar", "eta", "g_p"])?;
    let probe = match (drive.frequency("omega_p")?, drive.frequency("detuning")?) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::OverdeterminedDrive(
                "both `omega_p` and `detuning` given".into(),
            ))
        }
        (Some(w), None) => ProbeSpec::Frequency(w),
        (None, Some(d)) => ProbeSpec::Detuning(d),
        (None, None) => return Err(ConfigError::MissingField("drive.detuning".into())),
    };
    let photons = match (drive.number("n_bar")?, drive.frequency("eta")?) {
        (Some(_), Some(_)) => return Err(ConfigError::OverdeterminedDrive("both `n_bar` and `eta` given".into())),
        (Some(n), None) => PhotonSpec::MeanPhotons(n),
        (None, Some(e)) => PhotonSpec::Amplitude(e),
        (None, None) => return Err(ConfigError::MissingField("drive.n_bar".into())),
    };
    let drive_params = DriveParams {
        probe,
        photons,
        side_pump: drive.frequency("g_p")?,
    };

    ValidatedSystem::new(atom_params, cavity_params, ensemble_params, drive_params)
}

fn parse_well(v: &Value, i: usize, default_omega: f64) -> Result<WellSpec, ConfigError> {
    let obj = v
        .as_object()
        .ok_or_else(|| ConfigError::Malformed(format!("`ensemble.wells[{i}]` must be an object")))?;
    let num = |key: &str| -> Result<Option<f64>, ConfigError> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(x) => x
                .as_f64()
                .map(Some)
                .ok_or_else(|| ConfigError::Malformed(format!("`ensemble.wells[{i}].{key}` must be a number"))),
        }
    };
    let n = num("n_atoms")?.ok_or_else(|| ConfigError::MissingField(format!("ensemble.wells[{i}].n_atoms")))?;
    if n < 1.0 || n.fract() != 0.0 {
        return Err(ConfigError::NonPositive(format!("ensemble.wells[{i}].n_atoms")));
    }
    let phase = num("phase")?.ok_or_else(|| ConfigError::MissingField(format!("ensemble.wells[{i}].phase")))?;
    let omega_z = match (num("omega_z")?, num("omega_z_hz")?) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::UnitMismatch(
                format!("ensemble.wells[{i}].omega_z"),
                "both `omega_z` and `omega_z_hz` given".into(),
            ))
        }
        (Some(w), None) => w,
        (None, Some(f)) => TWO_PI * f,
        (None, None) => default_omega,
    };
    Ok(WellSpec {
        n_atoms: n as u64,
        phase,
        omega_z,
    })
}

/// A representative ⁸⁷Rb ensemble in a high-finesse Fabry–Pérot cavity, at
/// maximal linear coupling.
pub fn example_config() -> Value {
    serde_json::json!({
        "atom": {
            "mass": 1.443_160_648e-25,
            "omega_a_hz": 384.230_484_468_5e12,
            "gamma_hz": 3.0333e6,
            "g0_hz": 13.1e6
        },
        "cavity": {
            "omega_c_hz": 384.270_484_468_5e12,
            "kappa_hz": 0.66e6,
            "waist": 23.4e-6,
            "geometry": "standing_wave"
        },
        "ensemble": {
            "n_atoms": 3750,
            "omega_z_hz": 58.9e3,
            "phi0": std::f64::consts::FRAC_PI_4,
            "temperature": 1.0e-6
        },
        "drive": {
            "detuning_hz": -1.0e6,
            "n_bar": 3.5
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        example_config()
    }

    #[test]
    fn example_validates() {
        let sys = validate(&base()).unwrap();
        assert!(sys.ensemble.gamma_m_defaulted);
        assert!((sys.ensemble.gamma_m - 1e-3 * sys.ensemble.omega_z).abs() < 1e-9);
        let d = derive(&sys).unwrap();
        assert!(d.g_om > 0.0 && d.g_om.is_finite());
    }

    #[test]
    fn zero_kappa_is_rejected() {
        let mut c = base();
        c["cavity"]["kappa_hz"] = json!(0.0);
        assert_eq!(validate(&c), Err(ConfigError::NonPositive("cavity.kappa".into())));
    }

    #[test]
    fn probe_frequency_and_detuning_is_overdetermined() {
        let mut c = base();
        c["drive"]["omega_p"] = json!(2.4e15);
        assert!(matches!(validate(&c), Err(ConfigError::OverdeterminedDrive(_))));
    }

    #[test]
    fn n_bar_and_eta_is_overdetermined() {
        let mut c = base();
        c["drive"]["eta"] = json!(1.0e6);
        assert!(matches!(validate(&c), Err(ConfigError::OverdeterminedDrive(_))));
    }

    #[test]
    fn well_sum_mismatch_names_wells() {
        let mut c = base();
        c["ensemble"]["wells"] = json!([{"n_atoms": 1000, "phase": 0.5}, {"n_atoms": 1000, "phase": 0.76}]);
        let err = validate(&c).unwrap_err();
        assert!(matches!(
            err,
            ConfigError::WellCountMismatch {
                sum: 2000,
                expected: 3750
            }
        ));
        assert!(err.to_string().contains("wells"));
    }

    #[test]
    fn missing_field_is_named() {
        let mut c = base();
        c["atom"].as_object_mut().unwrap().remove("g0_hz");
        assert_eq!(validate(&c), Err(ConfigError::MissingField("atom.g0".into())));
    }

    #[test]
    fn both_unit_forms_is_a_unit_mismatch() {
        let mut c = base();
        c["cavity"]["kappa"] = json!(4.0e6);
        assert!(matches!(validate(&c), Err(ConfigError::UnitMismatch(f, _)) if f == "cavity.kappa"));
    }

    #[test]
    fn inconsistent_wavevector_is_a_unit_mismatch() {
        let mut c = base();
        c["atom"]["k"] = json!(1.0e7 * 2.0);
        assert!(matches!(validate(&c), Err(ConfigError::UnitMismatch(f, _)) if f == "atom.k"));
    }

    #[test]
    fn hz_conversion_round_trips() {
        for f in [1.0, 58.9e3, 0.66e6, 384.230_484_468_5e12] {
            let back = (TWO_PI * f) / TWO_PI;
            assert!(((back - f) / f).abs() <= 2.0 * f64::EPSILON);
        }
    }

    #[test]
    fn cooperativity_unit_rates() {
        assert_eq!(cooperativity(1.0, 1.0, 1.0), 0.5);
    }

    #[test]
    fn granularity_matches_max_reported_value() {
        let mut sys = validate(&base()).unwrap();
        let d = derive(&sys).unwrap();
        // rescale kappa so that g_om = 1.5 kappa
        sys.cavity.kappa = d.g_om / 1.5;
        let d2 = derive(&sys).unwrap();
        assert!((d2.granularity - 1.5).abs() < 1e-12);
        assert!(is_granular(&d2));
    }

    #[test]
    fn z_ho_halves_for_four_times_atoms() {
        let mut sys = validate(&base()).unwrap();
        let z1 = derive(&sys).unwrap().z_ho;
        sys.ensemble.n_atoms *= 4;
        let z4 = derive(&sys).unwrap().z_ho;
        assert!((z4 / z1 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn derive_is_bitwise_deterministic() {
        let sys = validate(&base()).unwrap();
        let a = serde_json::to_string(&derive(&sys).unwrap()).unwrap();
        let b = serde_json::to_string(&derive(&sys.clone()).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn eta_and_n_bar_are_consistent() {
        let sys = validate(&base()).unwrap();
        let mut sys2 = sys.clone();
        sys2.drive.photons = PhotonSpec::Amplitude(sys.eta());
        assert!(((sys2.n_bar() - sys.n_bar()) / sys.n_bar()).abs() < 1e-12);
    }
}
