//! Physical constants (CODATA 2018, exact where defined).

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
