//! Uniform linear array geometry and stochastic synthesis of per-bin
//! frequency-domain snapshots (signal plus molecular absorption noise).
//!
//! Snapshot coefficients follow the windowed Fourier-series convention: the
//! per-window pulse-train coefficient is divided by the observation interval,
//! which makes it commensurate with noise coefficients whose variance is the
//! noise PSD integrated over one bin.

use ndarray::{Array3, ArrayView2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{bin_noise_variance, channel_response, ChannelParams};
use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::spectrum::{train_coefficient, FrequencyGrid, PulseSpec, SymbolSequence};

/// A uniform linear array of isotropic elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaGeometry {
    elements: usize,
    spacing: f64,
}

impl UlaGeometry {
    pub fn new(elements: usize, spacing: f64) -> Result<Self> {
        if elements < 2 {
            return Err(Error::domain("array needs at least 2 elements"));
        }
        if !crate::error::positive(spacing) {
            return Err(Error::domain("element spacing must be positive"));
        }
        Ok(Self { elements, spacing })
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Array aperture `(N - 1) d_s`.
    pub fn aperture(&self) -> f64 {
        (self.elements - 1) as f64 * self.spacing
    }
}

/// Propagation delay of element `i` (1-based) relative to element 1 for a
/// plane wave from `theta_deg`.
pub fn element_delay(geom: &UlaGeometry, element: usize, theta_deg: f64) -> Result<f64> {
    if element == 0 || element > geom.elements {
        return Err(Error::domain(format!(
            "element index {element} outside 1..={}",
            geom.elements
        )));
    }
    Ok((element - 1) as f64 * geom.spacing * theta_deg.to_radians().sin() / SPEED_OF_LIGHT)
}

/// Array manifold vector at frequency `f` and direction `theta_deg`; every
/// entry has unit magnitude and the first entry is 1.
pub fn steering_vector(f: f64, theta_deg: f64, geom: &UlaGeometry) -> Vec<Complex64> {
    let tau_step = geom.spacing * theta_deg.to_radians().sin() / SPEED_OF_LIGHT;
    let step = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * tau_step);
    let mut v = Vec::with_capacity(geom.elements);
    let mut cur = Complex64::new(1.0, 0.0);
    for _ in 0..geom.elements {
        v.push(cur);
        cur *= step;
    }
    v
}

/// Minimum distance for plane-wave (far-field) modeling: `2 D^2 / lambda`.
pub fn far_field_min_distance(geom: &UlaGeometry, lambda_min: f64) -> f64 {
    let d = geom.aperture();
    2.0 * d * d / lambda_min
}

/// A single far-field source: direction of arrival, transmit pulse, and the
/// channel (which carries the source distance and the medium).
#[derive(Debug, Clone)]
pub struct SourceScenario {
    pub theta_deg: f64,
    pub pulse: PulseSpec,
    pub channel: ChannelParams,
}

impl SourceScenario {
    pub fn new(theta_deg: f64, pulse: PulseSpec, channel: ChannelParams) -> Result<Self> {
        if !(theta_deg.is_finite() && theta_deg > -90.0 && theta_deg < 90.0) {
            return Err(Error::domain(format!(
                "direction {theta_deg} deg outside the open interval (-90, 90)"
            )));
        }
        Ok(Self {
            theta_deg,
            pulse,
            channel,
        })
    }

    pub fn distance(&self) -> f64 {
        self.channel.distance
    }
}

/// Complex Fourier coefficients indexed by (element, snapshot, bin).
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotTensor {
    data: Array3<Complex64>,
    f_start: f64,
    bin_width: f64,
}

impl SnapshotTensor {
    pub fn elements(&self) -> usize {
        self.data.shape()[0]
    }

    pub fn snapshots(&self) -> usize {
        self.data.shape()[1]
    }

    pub fn bins(&self) -> usize {
        self.data.shape()[2]
    }

    pub fn get(&self, element: usize, snapshot: usize, bin: usize) -> Complex64 {
        self.data[(element, snapshot, bin)]
    }

    /// N x K matrix of one bin's coefficients.
    pub fn per_bin(&self, bin: usize) -> ArrayView2<'_, Complex64> {
        self.data.index_axis(ndarray::Axis(2), bin)
    }

    /// Text dump: a `N K L f_start delta_f` header then one
    /// `i k l re im` row per entry (1-based indices).
    pub fn dump<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        let (n, k, l) = (self.elements(), self.snapshots(), self.bins());
        writeln!(w, "{} {} {} {} {}", n, k, l, self.f_start, self.bin_width)?;
        for i in 0..n {
            for s in 0..k {
                for b in 0..l {
                    let v = self.data[(i, s, b)];
                    writeln!(w, "{} {} {} {} {}", i + 1, s + 1, b + 1, v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

/// Synthesize `snapshots` observation windows of array output.
///
/// Per window a fresh bi-phase symbol sequence is drawn; per bin the signal
/// coefficient is the normalized pulse-train coefficient through the channel,
/// delayed per element, plus circular complex Gaussian noise with the bin's
/// integrated noise variance. Deterministic given the RNG state.
pub fn synthesize_snapshots<R: Rng>(
    scenario: &SourceScenario,
    geom: &UlaGeometry,
    grid: &FrequencyGrid,
    snapshots: usize,
    rng: &mut R,
) -> Result<SnapshotTensor> {
    if snapshots == 0 {
        return Err(Error::domain("snapshot count must be >= 1"));
    }
    let lambda_min = SPEED_OF_LIGHT / grid.f_max();
    let bound = far_field_min_distance(geom, lambda_min);
    if scenario.distance() <= bound {
        return Err(Error::domain(format!(
            "distance {} m violates the far-field bound 2 D^2 / lambda_min = {bound} m",
            scenario.distance()
        )));
    }
    let pulses_per_window = (grid.observation_interval() / scenario.pulse.duration()) as usize;
    if pulses_per_window == 0 {
        return Err(Error::domain(
            "pulse duration exceeds the observation interval",
        ));
    }

    let n = geom.elements();
    let l_count = grid.bin_count();
    let bins = grid.bins();

    let mut response = Vec::with_capacity(l_count);
    let mut sigma2 = Vec::with_capacity(l_count);
    for (l, &f) in bins.iter().enumerate() {
        response.push(channel_response(f, &scenario.channel)?);
        sigma2.push(bin_noise_variance(grid, l, &scenario.channel, &scenario.pulse)?);
    }
    let steering: Vec<Vec<Complex64>> = bins
        .iter()
        .map(|&f| steering_vector(f, scenario.theta_deg, geom))
        .collect();

    let window = grid.observation_interval();
    let mut data = Array3::zeros((n, snapshots, l_count));
    for k in 0..snapshots {
        let seq = SymbolSequence::random(pulses_per_window, scenario.pulse.duration(), rng)?;
        for l in 0..l_count {
            let coeff = train_coefficient(&scenario.pulse, &seq, bins[l]) / window * response[l];
            for i in 0..n {
                data[(i, k, l)] = coeff * steering[l][i];
            }
        }
    }
    // independent circular complex Gaussian noise per (element, snapshot, bin)
    for l in 0..l_count {
        let std = (sigma2[l] / 2.0).sqrt();
        for k in 0..snapshots {
            for i in 0..n {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                data[(i, k, l)] += Complex64::new(re * std, im * std);
            }
        }
    }
    Ok(SnapshotTensor {
        data,
        f_start: grid.f_start(),
        bin_width: grid.bin_width(),
    })
}

/// Noise-only synthesis with explicit per-bin variances; used to validate the
/// noise statistics independently of any signal.
pub fn synthesize_noise<R: Rng>(
    geom: &UlaGeometry,
    grid: &FrequencyGrid,
    snapshots: usize,
    sigma2: &[f64],
    rng: &mut R,
) -> Result<SnapshotTensor> {
    if snapshots == 0 {
        return Err(Error::domain("snapshot count must be >= 1"));
    }
    if sigma2.len() != grid.bin_count() {
        return Err(Error::Dimension(format!(
            "got {} variances for {} bins",
            sigma2.len(),
            grid.bin_count()
        )));
    }
    let n = geom.elements();
    let mut data = Array3::zeros((n, snapshots, grid.bin_count()));
    for (l, &s2) in sigma2.iter().enumerate() {
        let std = (s2 / 2.0).sqrt();
        for k in 0..snapshots {
            for i in 0..n {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                data[(i, k, l)] = Complex64::new(re * std, im * std);
            }
        }
    }
    Ok(SnapshotTensor {
        data,
        f_start: grid.f_start(),
        bin_width: grid.bin_width(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::SyntheticProfile;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn vacuum_channel(d: f64) -> ChannelParams {
        let medium = Arc::new(SyntheticProfile::Vacuum.build(0.5e12, 10.5e12, "v").unwrap());
        ChannelParams::new(d, 6e12, medium).unwrap()
    }

    fn default_geom() -> UlaGeometry {
        UlaGeometry::new(8, 15e-6).unwrap()
    }

    #[test]
    fn delay_examples() {
        let g = default_geom();
        assert_eq!(element_delay(&g, 1, 37.0).unwrap(), 0.0);
        assert_relative_eq!(
            element_delay(&g, 2, 30.0).unwrap(),
            2.5017307139861403e-14,
            max_relative = 1e-12
        );
        for i in 1..=8 {
            assert_eq!(element_delay(&g, i, 0.0).unwrap(), 0.0);
        }
        assert!(element_delay(&g, 0, 10.0).is_err());
        assert!(element_delay(&g, 9, 10.0).is_err());
    }

    #[test]
    fn steering_examples() {
        let g = default_geom();
        for v in steering_vector(5e12, 0.0, &g) {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
        // half-wavelength spacing at f: adjacent phase pi at endfire
        let f = 10e12;
        let ds = SPEED_OF_LIGHT / (2.0 * f);
        let g2 = UlaGeometry::new(4, ds).unwrap();
        let v = steering_vector(f, 90.0, &g2);
        for w in v.windows(2) {
            let ratio = w[1] / w[0];
            assert!((ratio - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
        }
        // unit modulus entries: squared norm equals N
        let v = steering_vector(7.3e12, -41.7, &g);
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(norm2, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn far_field_examples() {
        let g = default_geom();
        assert_relative_eq!(
            far_field_min_distance(&g, 30e-6),
            7.35e-4,
            max_relative = 1e-12
        );
        let g2 = UlaGeometry::new(2, 10e-6).unwrap();
        assert_relative_eq!(
            far_field_min_distance(&g2, 30e-6),
            2.0 * 1e-10 / 30e-6,
            max_relative = 1e-12
        );
        let g3 = UlaGeometry::new(2, 20e-6).unwrap();
        assert_relative_eq!(
            far_field_min_distance(&g3, 30e-6),
            4.0 * far_field_min_distance(&g2, 30e-6),
            max_relative = 1e-12
        );
    }

    #[test]
    fn scenario_validation() {
        let pulse = PulseSpec::new(1, 6e12, 1e-18).unwrap();
        assert!(SourceScenario::new(95.0, pulse.clone(), vacuum_channel(1.0)).is_err());
        assert!(SourceScenario::new(-90.0, pulse.clone(), vacuum_channel(1.0)).is_err());
        assert!(SourceScenario::new(10.25, pulse, vacuum_channel(1.0)).is_ok());
    }

    #[test]
    fn far_field_violation_names_bound() {
        let pulse = PulseSpec::new(1, 6e12, 1e-18).unwrap();
        let scenario = SourceScenario::new(10.25, pulse, vacuum_channel(1e-4)).unwrap();
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = synthesize_snapshots(&scenario, &default_geom(), &grid, 1, &mut rng).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("far-field"), "message: {msg}");
        assert!(msg.contains("0.000735"), "message: {msg}");
    }

    #[test]
    fn noiseless_synthesis_matches_direct_formula() {
        let pulse = PulseSpec::new(1, 6e12, 1e-18).unwrap();
        let scenario = SourceScenario::new(10.25, pulse.clone(), vacuum_channel(0.5)).unwrap();
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let geom = default_geom();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let tensor = synthesize_snapshots(&scenario, &geom, &grid, 3, &mut rng).unwrap();

        // oracle: replay the symbol stream and evaluate the model directly
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let r = (grid.observation_interval() / pulse.duration()) as usize;
        assert_eq!(r, 37);
        for k in 0..3 {
            let seq = SymbolSequence::random(r, pulse.duration(), &mut rng).unwrap();
            for (l, &f) in grid.bins().iter().enumerate() {
                let c = train_coefficient(&pulse, &seq, f) / grid.observation_interval()
                    * channel_response(f, &scenario.channel).unwrap();
                for i in 0..8 {
                    let tau = element_delay(&geom, i + 1, 10.25).unwrap();
                    let expected =
                        c * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * tau);
                    let got = tensor.get(i, k, l);
                    assert!(
                        (got - expected).norm() <= 1e-12 * expected.norm().max(1e-300),
                        "mismatch at i={i} k={k} l={l}"
                    );
                }
            }
        }
    }

    #[test]
    fn same_seed_gives_identical_tensor() {
        let pulse = PulseSpec::new(2, 4e12, 1e-18).unwrap();
        let medium = Arc::new(crate::medium::summer_air());
        let channel = ChannelParams::new(0.5, 4e12, medium).unwrap();
        let scenario = SourceScenario::new(-20.0, pulse, channel).unwrap();
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let geom = default_geom();
        let a = synthesize_snapshots(
            &scenario,
            &geom,
            &grid,
            4,
            &mut ChaCha8Rng::seed_from_u64(7),
        )
        .unwrap();
        let b = synthesize_snapshots(
            &scenario,
            &geom,
            &grid,
            4,
            &mut ChaCha8Rng::seed_from_u64(7),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn signal_rank_one_and_phase_structure() {
        let pulse = PulseSpec::new(1, 6e12, 1e-18).unwrap();
        let scenario = SourceScenario::new(25.0, pulse, vacuum_channel(1.0)).unwrap();
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let geom = default_geom();
        let tensor = synthesize_snapshots(
            &scenario,
            &geom,
            &grid,
            5,
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        for l in [0, 44, 90] {
            let y = tensor.per_bin(l);
            // every 2x2 minor of a rank-1 matrix vanishes
            let scale = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for k in 1..5 {
                for i in 1..8 {
                    let det = y[(0, 0)] * y[(i, k)] - y[(i, 0)] * y[(0, k)];
                    assert!(det.norm() <= 1e-10 * scale * scale);
                }
            }
            // adjacent-element phase difference
            let f = grid.bins()[l];
            let expected =
                -2.0 * std::f64::consts::PI * f * geom.spacing() * (25.0f64).to_radians().sin()
                    / SPEED_OF_LIGHT;
            let ratio = y[(4, 2)] / y[(3, 2)];
            let mut diff = ratio.arg() - expected;
            while diff > std::f64::consts::PI {
                diff -= 2.0 * std::f64::consts::PI;
            }
            while diff < -std::f64::consts::PI {
                diff += 2.0 * std::f64::consts::PI;
            }
            assert!(diff.abs() < 1e-9);
            // element 1 carries no direction information
            let alt = SourceScenario::new(-60.0, scenario.pulse.clone(), vacuum_channel(1.0)).unwrap();
            let t2 = synthesize_snapshots(&alt, &geom, &grid, 5, &mut ChaCha8Rng::seed_from_u64(3))
                .unwrap();
            for k in 0..5 {
                assert!((tensor.get(0, k, l) - t2.get(0, k, l)).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn noise_only_statistics() {
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let geom = default_geom();
        let sigma2: Vec<f64> = (0..grid.bin_count())
            .map(|l| 1e-20 * (1.0 + l as f64 / 10.0))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k_snap = 600; // K*N = 4800 draws per bin
        let t = synthesize_noise(&geom, &grid, k_snap, &sigma2, &mut rng).unwrap();
        for l in [0, 30, 60, 90] {
            let y = t.per_bin(l);
            let mean_sq: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>() / (8 * k_snap) as f64;
            let rel = (mean_sq - sigma2[l]).abs() / sigma2[l];
            assert!(rel < 0.05, "bin {l} sample variance off by {rel}");
            // circularity: pseudo-variance E[v^2] stays near zero
            let pseudo: Complex64 = y.iter().map(|z| z * z).sum::<Complex64>() / (8 * k_snap) as f64;
            assert!(pseudo.norm() < 0.05 * sigma2[l]);
        }
    }

    #[test]
    fn noise_circularity_at_large_draw_count() {
        // 8 elements x 12500 snapshots = 1e5 draws on a two-bin grid
        let grid = FrequencyGrid::new(1e12, 1e12, 1e-12).unwrap();
        let geom = default_geom();
        let sigma2 = vec![3e-20, 7e-21];
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let t = synthesize_noise(&geom, &grid, 12_500, &sigma2, &mut rng).unwrap();
        for (l, &s2) in sigma2.iter().enumerate() {
            let y = t.per_bin(l);
            let draws = (8 * 12_500) as f64;
            let pseudo: Complex64 = y.iter().map(|z| z * z).sum::<Complex64>() / draws;
            assert!(
                pseudo.norm() < 0.05 * s2,
                "bin {l} pseudo-covariance {} vs variance {s2}",
                pseudo.norm()
            );
        }
    }

    #[test]
    fn dump_format() {
        let pulse = PulseSpec::new(1, 6e12, 1e-18).unwrap();
        let scenario = SourceScenario::new(10.25, pulse, vacuum_channel(0.5)).unwrap();
        let grid = FrequencyGrid::new(1e12, 9e12, 10e-12).unwrap();
        let tensor = synthesize_snapshots(
            &scenario,
            &default_geom(),
            &grid,
            2,
            &mut ChaCha8Rng::seed_from_u64(5),
        )
        .unwrap();
        let mut buf = Vec::new();
        tensor.dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "8 2 91 1000000000000 100000000000");
        assert_eq!(text.lines().count(), 1 + 8 * 2 * 91);
        let first = lines.next().unwrap();
        assert!(first.starts_with("1 1 1 "));
    }
}
