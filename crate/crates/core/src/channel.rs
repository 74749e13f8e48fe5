//! Terahertz channel response and molecular absorption noise.
//!
//! The channel gain is the product of a spreading loss fixed by the antenna
//! center frequency and a molecular absorption loss driven by the medium's
//! k(f). The absorption noise has a background term (saturated with distance
//! by default) and a self-induced term proportional to the transmitted PSD;
//! per-bin noise variances integrate the total PSD over each sub-band.

use std::sync::Arc;

use num_complex::Complex64;

use crate::constants::{BOLTZMANN, DEFAULT_TEMPERATURE, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::medium::AbsorptionProfile;
use crate::spectrum::{FrequencyGrid, PulseSpec};

/// Distance behavior of the background noise factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackgroundModel {
    /// Long-distance limit: the factor is 1 wherever k(f) > 0 and 0 where
    /// k(f) = 0.
    #[default]
    Saturated,
    /// Finite-distance factor `1 - exp(-k(f) d)`, available for sensitivity
    /// studies.
    FiniteDistance,
}

/// Propagation geometry and noise environment for one link.
#[derive(Debug, Clone)]
pub struct ChannelParams {
    pub distance: f64,
    pub antenna_center: f64,
    pub temperature: f64,
    pub medium: Arc<AbsorptionProfile>,
    pub background: BackgroundModel,
}

impl ChannelParams {
    pub fn new(distance: f64, antenna_center: f64, medium: Arc<AbsorptionProfile>) -> Result<Self> {
        if !crate::error::positive(distance) {
            return Err(Error::domain("channel distance must be positive"));
        }
        if !crate::error::positive(antenna_center) {
            return Err(Error::domain("antenna center frequency must be positive"));
        }
        Ok(Self {
            distance,
            antenna_center,
            temperature: DEFAULT_TEMPERATURE,
            medium,
            background: BackgroundModel::Saturated,
        })
    }

    fn spreading_magnitude(&self) -> f64 {
        SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * self.distance * self.antenna_center)
    }
}

/// Spreading loss: magnitude set by distance and antenna center frequency,
/// phase advancing with the propagation delay.
pub fn spreading_loss(f: f64, p: &ChannelParams) -> Complex64 {
    let mag = p.spreading_magnitude();
    let phase = -2.0 * std::f64::consts::PI * f * p.distance / SPEED_OF_LIGHT;
    Complex64::from_polar(mag, phase)
}

/// Molecular absorption loss `exp(-0.5 k(f) d)`, in (0, 1].
pub fn absorption_loss(f: f64, p: &ChannelParams) -> Result<f64> {
    let k = p.medium.value_at(f)?;
    Ok((-0.5 * k * p.distance).exp())
}

/// Full channel frequency response: spreading times absorption.
pub fn channel_response(f: f64, p: &ChannelParams) -> Result<Complex64> {
    Ok(spreading_loss(f, p) * absorption_loss(f, p)?)
}

/// Background atmospheric noise PSD.
pub fn background_noise_psd(f: f64, p: &ChannelParams) -> Result<f64> {
    let k = p.medium.value_at(f)?;
    let factor = match p.background {
        BackgroundModel::Saturated => {
            if k > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        BackgroundModel::FiniteDistance => 1.0 - (-k * p.distance).exp(),
    };
    let aperture = SPEED_OF_LIGHT / ((4.0 * std::f64::consts::PI).sqrt() * p.antenna_center);
    Ok(BOLTZMANN * p.temperature * factor * aperture * aperture)
}

/// Self-induced noise PSD for a transmitted PSD value `s_p` at `f`.
pub fn self_noise_psd(f: f64, p: &ChannelParams, s_p: f64) -> Result<f64> {
    if s_p < 0.0 {
        return Err(Error::domain("transmitted PSD must be >= 0"));
    }
    let k = p.medium.value_at(f)?;
    let mag = p.spreading_magnitude();
    Ok(s_p * (1.0 - (-k * p.distance).exp()) * mag * mag)
}

/// Total molecular absorption noise PSD: background plus self-induced.
pub fn total_noise_psd(f: f64, p: &ChannelParams, s_p: f64) -> Result<f64> {
    Ok(background_noise_psd(f, p)? + self_noise_psd(f, p, s_p)?)
}

/// Noise variance of bin `l`: the total noise PSD integrated over the
/// sub-band of width one bin centered on the bin frequency.
///
/// The background part is piecewise constant along the profile's linear
/// segments and is integrated exactly; the self-induced part is smooth per
/// segment and uses adaptive quadrature.
pub fn bin_noise_variance(
    grid: &FrequencyGrid,
    l: usize,
    p: &ChannelParams,
    pulse: &PulseSpec,
) -> Result<f64> {
    let bins = grid.bins();
    let fl = *bins
        .get(l)
        .ok_or_else(|| Error::domain(format!("bin index {l} out of range")))?;
    let a = fl - 0.5 * grid.bin_width();
    let b = fl + 0.5 * grid.bin_width();
    let (lo, hi) = p.medium.range();
    if a < lo || b > hi {
        return Err(Error::OutOfRange {
            frequency_hz: if a < lo { a } else { b },
            min_hz: lo,
            max_hz: hi,
        });
    }

    let aperture = SPEED_OF_LIGHT / ((4.0 * std::f64::consts::PI).sqrt() * p.antenna_center);
    let s_b = BOLTZMANN * p.temperature * aperture * aperture;
    let mag = p.spreading_magnitude();
    let cs = mag * mag;
    let d = p.distance;

    let mut background = 0.0;
    let mut self_induced = 0.0;
    for (x0, x1, k0, k1) in segments_within(&p.medium, a, b) {
        let width = x1 - x0;
        if width <= 0.0 {
            continue;
        }
        match p.background {
            BackgroundModel::Saturated => {
                if k0 > 0.0 || k1 > 0.0 {
                    background += s_b * width;
                }
            }
            BackgroundModel::FiniteDistance => {
                background += s_b * integral_one_minus_exp(x0, x1, k0, k1, d);
            }
        }
        if k0 > 0.0 || k1 > 0.0 {
            let slope = (k1 - k0) / width;
            let integrand = |f: f64| {
                let k = k0 + slope * (f - x0);
                pulse.psd_at(f) * (1.0 - (-k * d).exp())
            };
            self_induced += crate::spectrum::adaptive_simpson(&integrand, x0, x1, 1e-9);
        }
    }
    Ok(background + cs * self_induced.max(0.0))
}

/// Profile segments clipped to `[a, b]`, with interpolated endpoint values.
fn segments_within(profile: &AbsorptionProfile, a: f64, b: f64) -> Vec<(f64, f64, f64, f64)> {
    let samples = profile.samples();
    let mut out = Vec::new();
    for w in samples.windows(2) {
        let (f0, k0) = w[0];
        let (f1, k1) = w[1];
        if f1 <= a || f0 >= b {
            continue;
        }
        let x0 = f0.max(a);
        let x1 = f1.min(b);
        let slope = (k1 - k0) / (f1 - f0);
        out.push((x0, x1, k0 + slope * (x0 - f0), k0 + slope * (x1 - f0)));
    }
    out
}

/// Exact integral of `1 - exp(-k(f) d)` over a segment with linear k.
fn integral_one_minus_exp(x0: f64, x1: f64, k0: f64, k1: f64, d: f64) -> f64 {
    let width = x1 - x0;
    let slope = (k1 - k0) / width;
    if slope.abs() * d * width < 1e-12 {
        return width * (1.0 - (-0.5 * (k0 + k1) * d).exp());
    }
    width - ((-k0 * d).exp() - (-k1 * d).exp()) / (slope * d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{summer_air, SpectralLine, SyntheticProfile};
    use approx::assert_relative_eq;

    fn vacuum() -> Arc<AbsorptionProfile> {
        Arc::new(SyntheticProfile::Vacuum.build(0.5e12, 10.5e12, "v").unwrap())
    }

    fn constant(k: f64) -> Arc<AbsorptionProfile> {
        Arc::new(SyntheticProfile::Constant(k).build(0.5e12, 10.5e12, "c").unwrap())
    }

    #[test]
    fn spreading_loss_examples() {
        let p = ChannelParams::new(0.5, 6e12, vacuum()).unwrap();
        assert_relative_eq!(
            spreading_loss(4e12, &p).norm(),
            7.95224193206157e-6,
            max_relative = 1e-12
        );
        let p2 = ChannelParams::new(1.0, 6e12, vacuum()).unwrap();
        assert_relative_eq!(
            spreading_loss(4e12, &p2).norm(),
            0.5 * spreading_loss(4e12, &p).norm(),
            max_relative = 1e-12
        );
        let at_dc = spreading_loss(0.0, &p);
        assert!(at_dc.im == 0.0 && at_dc.re > 0.0);
        // magnitude independent of f
        assert_relative_eq!(
            spreading_loss(1e12, &p).norm(),
            spreading_loss(9e12, &p).norm(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn absorption_loss_examples() {
        let p = ChannelParams::new(1.0, 6e12, vacuum()).unwrap();
        assert_eq!(absorption_loss(3e12, &p).unwrap(), 1.0);

        let kd_half = 2.0 * std::f64::consts::LN_2;
        let p = ChannelParams::new(1.0, 6e12, constant(kd_half)).unwrap();
        assert_relative_eq!(absorption_loss(3e12, &p).unwrap(), 0.5, max_relative = 1e-12);

        let p = ChannelParams::new(10.0, 6e12, constant(0.1)).unwrap();
        assert_relative_eq!(
            absorption_loss(3e12, &p).unwrap(),
            0.6065306597126334,
            max_relative = 1e-12
        );
        assert!(absorption_loss(99e12, &p).is_err());
    }

    #[test]
    fn response_is_product_and_bounded() {
        let p = ChannelParams::new(0.7, 6e12, vacuum()).unwrap();
        let h = channel_response(4e12, &p).unwrap();
        assert!((h - spreading_loss(4e12, &p)).norm() <= 1e-18);

        let pk = ChannelParams::new(0.7, 6e12, constant(1.7)).unwrap();
        for f in [1.3e12, 4.8e12, 9.2e12] {
            let h = channel_response(f, &pk).unwrap();
            assert!(h.norm() <= spreading_loss(f, &pk).norm());
            let oracle = spreading_loss(f, &pk) * absorption_loss(f, &pk).unwrap();
            assert!((h - oracle).norm() <= 1e-15 * oracle.norm());
        }
    }

    #[test]
    fn background_noise_examples() {
        let pv = ChannelParams::new(1.0, 6e12, vacuum()).unwrap();
        assert_eq!(background_noise_psd(4e12, &pv).unwrap(), 0.0);

        let pk = ChannelParams::new(1.0, 6e12, constant(0.3)).unwrap();
        assert_relative_eq!(
            background_noise_psd(4e12, &pk).unwrap(),
            8.119027918662491e-31,
            max_relative = 1e-12
        );
        // saturated form is distance independent wherever k > 0
        let far = ChannelParams::new(250.0, 6e12, constant(0.3)).unwrap();
        assert_eq!(
            background_noise_psd(4e12, &pk).unwrap(),
            background_noise_psd(4e12, &far).unwrap()
        );
    }

    #[test]
    fn finite_distance_background_is_smaller() {
        let mut p = ChannelParams::new(0.1, 6e12, constant(0.3)).unwrap();
        let saturated = background_noise_psd(4e12, &p).unwrap();
        p.background = BackgroundModel::FiniteDistance;
        let finite = background_noise_psd(4e12, &p).unwrap();
        assert!(finite < saturated);
        assert_relative_eq!(
            finite,
            saturated * (1.0 - (-0.03f64).exp()),
            max_relative = 1e-12
        );
    }

    #[test]
    fn self_noise_examples() {
        let pv = ChannelParams::new(1.0, 6e12, vacuum()).unwrap();
        assert_eq!(self_noise_psd(4e12, &pv, 1e-19).unwrap(), 0.0);

        let pk = ChannelParams::new(2.0, 6e12, constant(0.4)).unwrap();
        assert_eq!(self_noise_psd(4e12, &pk, 0.0).unwrap(), 0.0);
        let got = self_noise_psd(4e12, &pk, 3e-19).unwrap();
        let mag = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * 2.0 * 6e12);
        let oracle = 3e-19 * (1.0 - (-0.8f64).exp()) * mag * mag;
        assert_relative_eq!(got, oracle, max_relative = 1e-15);
        assert!(self_noise_psd(4e12, &pk, -1.0).is_err());
    }

    #[test]
    fn total_noise_is_sum() {
        let pk = ChannelParams::new(0.5, 6e12, constant(0.9)).unwrap();
        let s_p = 2.1e-19;
        let total = total_noise_psd(4e12, &pk, s_p).unwrap();
        let oracle =
            background_noise_psd(4e12, &pk).unwrap() + self_noise_psd(4e12, &pk, s_p).unwrap();
        assert_relative_eq!(total, oracle, max_relative = 1e-15);
        let pv = ChannelParams::new(0.5, 6e12, vacuum()).unwrap();
        assert_eq!(total_noise_psd(4e12, &pv, s_p).unwrap(), 0.0);
    }

    #[test]
    fn bin_variance_vacuum_is_exactly_zero() {
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let pulse = PulseSpec::new(1, 6e12, 1e-18).unwrap();
        let p = ChannelParams::new(1.0, 6e12, vacuum()).unwrap();
        for l in [0, 45, 90] {
            assert_eq!(bin_noise_variance(&grid, l, &p, &pulse).unwrap(), 0.0);
        }
    }

    #[test]
    fn bin_variance_constant_k_has_full_background() {
        // with constant k > 0 the background contributes exactly s_B * bin width;
        // a vanishing pulse energy makes the self term negligible
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let pulse = PulseSpec::new(1, 6e12, 1e-40).unwrap();
        let p = ChannelParams::new(1.0, 6e12, constant(0.2)).unwrap();
        let got = bin_noise_variance(&grid, 50, &p, &pulse).unwrap();
        let s_b = background_noise_psd(6e12, &p).unwrap();
        assert_relative_eq!(got, s_b * grid.bin_width(), max_relative = 1e-9);
    }

    #[test]
    fn bin_variance_matches_riemann_oracle() {
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let pulse = PulseSpec::new(1, 6e12, 1e-18).unwrap();
        let medium = Arc::new(summer_air());
        let p = ChannelParams::new(0.5, 6e12, medium.clone()).unwrap();
        for l in [10, 30, 50, 70, 89] {
            let got = bin_noise_variance(&grid, l, &p, &pulse).unwrap();
            // midpoint Riemann sum over the sub-band, splitting at the
            // profile breakpoints so the k>0 indicator is resolved
            let fl = grid.bins()[l];
            let (a, b) = (fl - grid.bin_width() / 2.0, fl + grid.bin_width() / 2.0);
            let mut oracle = 0.0;
            for (x0, x1, _, _) in super::segments_within(&medium, a, b) {
                let steps = 4000;
                let h = (x1 - x0) / steps as f64;
                for i in 0..steps {
                    let f = x0 + (i as f64 + 0.5) * h;
                    oracle += total_noise_psd(f, &p, pulse.psd_at(f)).unwrap() * h;
                }
            }
            let rel = (got - oracle).abs() / oracle.max(1e-300);
            assert!(rel < 1e-6, "bin {l}: got {got} oracle {oracle} rel {rel}");
        }
    }

    #[test]
    fn bin_variance_rejects_out_of_range_bins() {
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let pulse = PulseSpec::new(1, 6e12, 1e-18).unwrap();
        let narrow = Arc::new(
            AbsorptionProfile::new(vec![(2e12, 0.1), (8e12, 0.1)], "narrow").unwrap(),
        );
        let p = ChannelParams::new(1.0, 6e12, narrow).unwrap();
        assert!(bin_noise_variance(&grid, 0, &p, &pulse).is_err());
        assert!(bin_noise_variance(&grid, 200, &p, &pulse).is_err());
        assert!(bin_noise_variance(&grid, 40, &p, &pulse).is_ok());
    }

    #[test]
    fn magnitudes_decrease_with_distance_and_noise_dominates_background() {
        let medium = Arc::new(summer_air());
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let pulse = PulseSpec::new(1, 6e12, 1e-18).unwrap();
        let mut prev_mag = f64::INFINITY;
        for d in [0.01, 0.1, 1.0, 5.0] {
            let p = ChannelParams::new(d, 6e12, medium.clone()).unwrap();
            let mag = channel_response(5.2e12, &p).unwrap().norm();
            assert!(mag < prev_mag);
            prev_mag = mag;
            for l in [20, 50, 80] {
                let total = bin_noise_variance(&grid, l, &p, &pulse).unwrap();
                let tiny = PulseSpec::new(1, 6e12, 1e-60).unwrap();
                let background_only = bin_noise_variance(&grid, l, &p, &tiny).unwrap();
                assert!(total >= background_only);
                assert!(total >= 0.0);
            }
        }
    }

    #[test]
    fn summer_air_gives_positive_noise_in_every_default_bin() {
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let pulse = PulseSpec::new(1, 6e12, 1e-18).unwrap();
        let p = ChannelParams::new(1.0, 6e12, Arc::new(summer_air())).unwrap();
        for l in 0..grid.bin_count() {
            let v = bin_noise_variance(&grid, l, &p, &pulse).unwrap();
            assert!(v > 0.0, "bin {l} has zero noise variance");
        }
    }

    #[test]
    fn psd_positivity_scan() {
        let medium = Arc::new(summer_air());
        let p = ChannelParams::new(0.3, 4e12, medium).unwrap();
        let pulse = PulseSpec::new(3, 4e12, 1e-18).unwrap();
        for i in 0..400 {
            let f = 1e12 + i as f64 * 2.2e10;
            assert!(background_noise_psd(f, &p).unwrap() >= 0.0);
            assert!(self_noise_psd(f, &p, pulse.psd_at(f)).unwrap() >= 0.0);
        }
    }

    #[test]
    fn lorentzian_line_bin_variance_consistency() {
        // a single narrow line inside one bin: background contribution is
        // exactly s_B times the line support measure
        let line = SpectralLine {
            center: 6.02e12,
            hwhm: 1e9,
            peak: 10.0,
            wing_cutoff: Some(3e9),
        };
        let prof = Arc::new(
            SyntheticProfile::LorentzianLines(vec![line])
                .build(0.5e12, 10.5e12, "one-line")
                .unwrap(),
        );
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let pulse = PulseSpec::new(1, 6e12, 1e-60).unwrap();
        let p = ChannelParams::new(1.0, 6e12, prof).unwrap();
        let got = bin_noise_variance(&grid, 50, &p, &pulse).unwrap();
        let s_b = BOLTZMANN * p.temperature
            * (SPEED_OF_LIGHT / ((4.0 * std::f64::consts::PI).sqrt() * 6e12)).powi(2);
        assert_relative_eq!(got, s_b * 6e9, max_relative = 1e-9);
    }
}
