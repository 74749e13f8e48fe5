//! Physical constants (CODATA 2018) and simulation defaults.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Default medium temperature, K (standard reference temperature).
pub const DEFAULT_TEMPERATURE: f64 = 296.0;

/// Default ULA element spacing, m: half a wavelength at 10 THz.
pub const DEFAULT_ELEMENT_SPACING: f64 = 15e-6;

/// Default number of ULA elements.
pub const DEFAULT_ELEMENT_COUNT: usize = 8;

/// Default observation window, s.
pub const DEFAULT_OBSERVATION_INTERVAL: f64 = 10e-12;

/// Default band start, Hz.
pub const DEFAULT_BAND_START: f64 = 1e12;

/// Default bandwidth, Hz.
pub const DEFAULT_BANDWIDTH: f64 = 9e12;
