//! Frequency-domain model of nth-order time-derivative Gaussian pulses and of
//! the bi-phase pulse trains built from them.
//!
//! A pulse of derivative order `n` has the spectrum
//! `G_n(f) = a_n (j 2 pi f)^n exp(-0.5 (2 pi sigma f)^2)`, whose magnitude
//! peaks at `f_c = sqrt(n) / (2 pi sigma)`. The normalization `a_n` is chosen
//! in closed form so the two-sided spectral energy equals the requested pulse
//! energy.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Uniform frequency sampling of an observation window.
///
/// `bin_count = floor(bandwidth * observation_interval) + 1` and the bin
/// spacing is the reciprocal of the observation interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    f_start: f64,
    bandwidth: f64,
    observation_interval: f64,
    bin_width: f64,
    bins: Vec<f64>,
}

impl FrequencyGrid {
    /// Build a grid anchored at `f_start` spanning `bandwidth`, observed for
    /// `observation_interval` seconds.
    pub fn new(f_start: f64, bandwidth: f64, observation_interval: f64) -> Result<Self> {
        if !crate::error::positive(f_start) {
            return Err(Error::domain("grid f_start must be positive and finite"));
        }
        if !crate::error::positive(bandwidth) {
            return Err(Error::domain("grid bandwidth must be positive and finite"));
        }
        if !crate::error::positive(observation_interval) {
            return Err(Error::domain(
                "grid observation interval must be positive and finite",
            ));
        }
        let bin_count = (bandwidth * observation_interval).floor() as usize + 1;
        let bin_width = 1.0 / observation_interval;
        let f_end = f_start + bandwidth;
        let bins: Vec<f64> = (0..bin_count)
            .map(|l| (f_start + l as f64 * bin_width).min(f_end))
            .collect();
        Ok(Self {
            f_start,
            bandwidth,
            observation_interval,
            bin_width,
            bins,
        })
    }

    pub fn f_start(&self) -> f64 {
        self.f_start
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn observation_interval(&self) -> f64 {
        self.observation_interval
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    /// Highest sampled frequency.
    pub fn f_max(&self) -> f64 {
        *self.bins.last().expect("grid is never empty")
    }
}

/// An nth-order derivative Gaussian pulse with fixed center frequency and
/// total (two-sided) spectral energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    order: u32,
    center_frequency: f64,
    energy: f64,
    sigma: f64,
    duration: f64,
    amplitude: f64,
}

impl PulseSpec {
    pub fn new(order: u32, center_frequency: f64, energy: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::domain("pulse derivative order must be >= 1"));
        }
        if !crate::error::positive(center_frequency) {
            return Err(Error::domain("pulse center frequency must be positive"));
        }
        if !crate::error::positive(energy) {
            return Err(Error::domain("pulse energy must be positive"));
        }
        let n = order as f64;
        let sigma = n.sqrt() / (2.0 * std::f64::consts::PI * center_frequency);
        let duration = 10.0 * sigma;
        // Two-sided energy of a_n (2 pi f)^n exp(-0.5 (2 pi sigma f)^2) is
        // a_n^2 * Gamma(n + 1/2) / (2 pi sigma^(2n + 1)).
        let amplitude = (energy * 2.0 * std::f64::consts::PI * sigma.powi(2 * order as i32 + 1)
            / gamma_half_integer(order))
        .sqrt();
        Ok(Self {
            order,
            center_frequency,
            energy,
            sigma,
            duration,
            amplitude,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn center_frequency(&self) -> f64 {
        self.center_frequency
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Standard deviation of the underlying Gaussian, s.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Effective pulse duration (ten standard deviations), s.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Energy normalization constant.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Complex spectral amplitude `G_n(f)`.
    pub fn spectrum_at(&self, f: f64) -> Complex64 {
        let jw = Complex64::new(0.0, 2.0 * std::f64::consts::PI * f);
        let x = 2.0 * std::f64::consts::PI * self.sigma * f;
        jw.powu(self.order) * self.amplitude * (-0.5 * x * x).exp()
    }

    /// Squared spectral magnitude `|G_n(f)|^2`, avoiding complex round trips.
    pub fn energy_density_at(&self, f: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * f;
        let x = self.sigma * w;
        self.amplitude * self.amplitude * w.powi(2 * self.order as i32) * (-x * x).exp()
    }

    /// Power spectral density of the bi-phase pulse train, `|G_n(f)|^2 / T_p`.
    pub fn psd_at(&self, f: f64) -> f64 {
        self.energy_density_at(f) / self.duration
    }

    /// Half-power band of the pulse: frequencies below and above the peak at
    /// which the spectral power falls to half its maximum, plus the width.
    pub fn half_power_band(&self) -> HalfPowerBand {
        // In u = f / f_c the normalized power is u^(2n) exp(n (1 - u^2)),
        // so the two half-power points bracket u = 1.
        let n = self.order as f64;
        let g = |u: f64| 2.0 * n * u.ln() + n * (1.0 - u * u) + std::f64::consts::LN_2;
        let lower = bisect(g, 1e-12, 1.0);
        let upper = bisect(g, 1.0, 16.0);
        let f_lower = lower * self.center_frequency;
        let f_upper = upper * self.center_frequency;
        HalfPowerBand {
            f_lower,
            f_upper,
            width: f_upper - f_lower,
        }
    }
}

/// Half-power (3 dB) band of a pulse spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPowerBand {
    pub f_lower: f64,
    pub f_upper: f64,
    pub width: f64,
}

/// A bi-phase information symbol sequence with its pulse spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSequence {
    symbols: Vec<i8>,
    spacing: f64,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<i8>, spacing: f64) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::domain("symbol sequence must be non-empty"));
        }
        if symbols.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::domain("symbols must be +1 or -1"));
        }
        if !crate::error::positive(spacing) {
            return Err(Error::domain("symbol spacing must be positive"));
        }
        Ok(Self { symbols, spacing })
    }

    /// Draw `count` equiprobable +/-1 symbols from `rng`.
    pub fn random<R: Rng>(count: usize, spacing: f64, rng: &mut R) -> Result<Self> {
        if count == 0 {
            return Err(Error::domain("symbol sequence must be non-empty"));
        }
        let symbols = (0..count)
            .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
            .collect();
        Self::new(symbols, spacing)
    }

    pub fn symbols(&self) -> &[i8] {
        &self.symbols
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Fourier coefficient of the finite pulse train inside one observation
/// window: `G_n(f) * sum_r a_r exp(-j 2 pi f r T_p)`.
pub fn train_coefficient(spec: &PulseSpec, seq: &SymbolSequence, f: f64) -> Complex64 {
    let step = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * seq.spacing());
    let mut phase = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for &a in seq.symbols() {
        sum += phase * a as f64;
        phase *= step;
    }
    spec.spectrum_at(f) * sum
}

/// Gamma(n + 1/2) for integer n >= 0.
fn gamma_half_integer(n: u32) -> f64 {
    let mut g = std::f64::consts::PI.sqrt();
    for i in 0..n {
        g *= i as f64 + 0.5;
    }
    g
}

/// Bisection on a bracketing interval; 200 halvings push the interval to
/// machine precision for the ranges used here.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    debug_assert!(f_lo.signum() != f(hi).signum());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Adaptive Simpson quadrature with the error scale taken from a coarse
/// composite pass, so sharply peaked integrands do not defeat the tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        fm: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(f, a, fa, m, fm);
        let (right, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        // rounding noise floor: no further split can improve the estimate
        let noise = 4.0 * f64::EPSILON * (left.abs() + right.abs());
        if depth == 0 || delta.abs() <= 15.0 * eps || delta.abs() <= noise {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, flm, 0.5 * eps, depth - 1)
                + recurse(f, m, fm, b, fb, right, frm, 0.5 * eps, depth - 1)
        }
    }
    // coarse composite pass fixes the magnitude scale for the tolerance
    let panels = 32;
    let h = (b - a) / panels as f64;
    let mut coarse = 0.0;
    let mut evals: Vec<(f64, f64)> = Vec::with_capacity(panels + 1);
    for i in 0..=panels {
        let x = a + i as f64 * h;
        evals.push((x, f(x)));
    }
    for i in 0..panels {
        let (x0, f0) = evals[i];
        let (x1, f1) = evals[i + 1];
        let (s, _) = simpson(f, x0, f0, x1, f1);
        coarse += s;
    }
    let eps = rel_tol * coarse.abs().max(1e-300);
    let mut total = 0.0;
    for i in 0..panels {
        let (x0, f0) = evals[i];
        let (x1, f1) = evals[i + 1];
        let (whole, fm) = simpson(f, x0, f0, x1, f1);
        total += recurse(f, x0, f0, x1, f1, whole, fm, eps / panels as f64, 24);
    }
    total
}
