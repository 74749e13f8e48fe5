//! Monte Carlo harness: scenario sweeps, RMSE aggregation, reproducible
//! seeding, and validation of the covariance cross-term approximation.
//!
//! Each trial is seeded by mixing (base seed, sweep index, trial index), so
//! trials are independent streams that can run in parallel in any order and
//! still reproduce bit-for-bit.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::array::{synthesize_snapshots, SourceScenario, UlaGeometry};
use crate::channel::{BackgroundModel, ChannelParams};
use crate::constants::{
    DEFAULT_BAND_START, DEFAULT_BANDWIDTH, DEFAULT_ELEMENT_COUNT, DEFAULT_ELEMENT_SPACING,
    DEFAULT_OBSERVATION_INTERVAL, DEFAULT_TEMPERATURE, SPEED_OF_LIGHT,
};
use crate::error::{Error, Result};
use crate::medium::AbsorptionProfile;
use crate::spectrum::{FrequencyGrid, PulseSpec};
use crate::subspace::{
    estimate_doa, imusic_spectrum_with_basis, sample_covariance, AngleGrid, HermitianMatrix,
    MusicSpectrum, SteeringBasis,
};

/// Quantity stepped by a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    None,
    /// Source distance, m.
    Distance(Vec<f64>),
    /// Pulse energy, aJ.
    EnergyAttojoules(Vec<f64>),
    /// Frequency snapshot count K.
    Snapshots(Vec<usize>),
    /// Pulse derivative order.
    Order(Vec<u32>),
    /// Pulse center frequency, Hz.
    CenterFrequency(Vec<f64>),
}

impl SweepAxis {
    /// Swept values as plain numbers for reporting (single NaN-free value 0
    /// for `None`, meaning "the baseline scenario").
    pub fn values(&self) -> Vec<f64> {
        match self {
            SweepAxis::None => vec![0.0],
            SweepAxis::Distance(v) => v.clone(),
            SweepAxis::EnergyAttojoules(v) => v.clone(),
            SweepAxis::Snapshots(v) => v.iter().map(|&k| k as f64).collect(),
            SweepAxis::Order(v) => v.iter().map(|&n| n as f64).collect(),
            SweepAxis::CenterFrequency(v) => v.clone(),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            SweepAxis::None => false,
            SweepAxis::Distance(v) | SweepAxis::EnergyAttojoules(v) | SweepAxis::CenterFrequency(v) => {
                v.is_empty()
            }
            SweepAxis::Snapshots(v) => v.is_empty(),
            SweepAxis::Order(v) => v.is_empty(),
        }
    }
}

/// Full description of one Monte Carlo experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub geometry: UlaGeometry,
    pub grid: FrequencyGrid,
    pub pulse_order: u32,
    pub center_frequency: f64,
    /// Pulse energy in joules.
    pub pulse_energy: f64,
    pub theta_deg: f64,
    pub distance: f64,
    pub medium: Arc<AbsorptionProfile>,
    /// Antenna center frequency; defaults to the pulse center frequency.
    pub antenna_center: Option<f64>,
    pub temperature: f64,
    pub background: BackgroundModel,
    pub snapshots: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub angles: AngleGrid,
    pub refine: bool,
    pub source_count: usize,
    pub sweep: SweepAxis,
}

impl ExperimentConfig {
    /// Baseline configuration: 8-element ULA at 15 um spacing, 1-10 THz grid
    /// over a 10 ps window, first-order 6 THz pulse of 1 aJ, source at
    /// 10.25 degrees, K = 50 snapshots, 100 runs.
    pub fn baseline(medium: Arc<AbsorptionProfile>) -> Self {
        Self {
            geometry: UlaGeometry::new(DEFAULT_ELEMENT_COUNT, DEFAULT_ELEMENT_SPACING)
                .expect("default geometry is valid"),
            grid: FrequencyGrid::new(
                DEFAULT_BAND_START,
                DEFAULT_BANDWIDTH,
                DEFAULT_OBSERVATION_INTERVAL,
            )
            .expect("default grid is valid"),
            pulse_order: 1,
            center_frequency: 6e12,
            pulse_energy: 1e-18,
            theta_deg: 10.25,
            distance: 1.0,
            medium,
            antenna_center: None,
            temperature: DEFAULT_TEMPERATURE,
            background: BackgroundModel::Saturated,
            snapshots: 50,
            runs: 100,
            base_seed: 123_456_789,
            angles: AngleGrid::default_search(),
            refine: true,
            source_count: 1,
            sweep: SweepAxis::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::domain("run count must be >= 1"));
        }
        if self.snapshots == 0 {
            return Err(Error::domain("snapshot count must be >= 1"));
        }
        if self.sweep.is_empty() {
            return Err(Error::domain("sweep values must be non-empty"));
        }
        if self
            .sweep
            .values()
            .iter()
            .any(|v| !v.is_finite())
        {
            return Err(Error::domain("sweep values must be finite"));
        }
        // constructing the scenario validates pulse, channel, and direction
        for idx in 0..self.sweep.values().len() {
            self.scenario_at(idx)?;
        }
        Ok(())
    }

    /// Scenario (and snapshot count) with the sweep value at `index` applied.
    pub fn scenario_at(&self, index: usize) -> Result<(SourceScenario, usize)> {
        let mut order = self.pulse_order;
        let mut fc = self.center_frequency;
        let mut energy = self.pulse_energy;
        let mut distance = self.distance;
        let mut snapshots = self.snapshots;
        match &self.sweep {
            SweepAxis::None => {}
            SweepAxis::Distance(v) => distance = *pick(v, index)?,
            SweepAxis::EnergyAttojoules(v) => energy = *pick(v, index)? * 1e-18,
            SweepAxis::Snapshots(v) => snapshots = *pick(v, index)?,
            SweepAxis::Order(v) => order = *pick(v, index)?,
            SweepAxis::CenterFrequency(v) => fc = *pick(v, index)?,
        }
        let pulse = PulseSpec::new(order, fc, energy)?;
        let mut channel = ChannelParams::new(
            distance,
            self.antenna_center.unwrap_or(fc),
            self.medium.clone(),
        )?;
        channel.temperature = self.temperature;
        channel.background = self.background;
        let scenario = SourceScenario::new(self.theta_deg, pulse, channel)?;
        Ok((scenario, snapshots))
    }
}

fn pick<T>(values: &[T], index: usize) -> Result<&T> {
    values
        .get(index)
        .ok_or_else(|| Error::domain(format!("sweep index {index} out of range")))
}

/// RMSE of one sweep value, with the per-run estimates it was computed from.
#[derive(Debug, Clone)]
pub struct RmseReport {
    pub sweep_value: f64,
    pub rmse_deg: f64,
    pub stderr_deg: f64,
    pub estimates_deg: Vec<f64>,
    pub seed: u64,
    pub wall_time: Duration,
}

/// splitmix64 step; the standard 64-bit finalizer.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial stream seed from (base seed, sweep index, trial index).
pub fn derive_seed(base: u64, sweep_index: u64, trial_index: u64) -> u64 {
    let mut s = splitmix64(base);
    s = splitmix64(s ^ sweep_index.wrapping_mul(0xA24B_AED4_963E_E407));
    splitmix64(s ^ trial_index.wrapping_mul(0x9FB2_1C65_1E98_DF25))
}

/// One synthesize -> covariance -> spectrum -> estimate pass.
pub fn run_trial(config: &ExperimentConfig, sweep_index: usize, trial_index: usize) -> Result<f64> {
    let (scenario, snapshots) = config.scenario_at(sweep_index)?;
    let basis = SteeringBasis::new(config.grid.bins(), &config.geometry, &config.angles);
    trial_with_basis(config, &scenario, snapshots, &basis, sweep_index, trial_index)
}

fn trial_with_basis(
    config: &ExperimentConfig,
    scenario: &SourceScenario,
    snapshots: usize,
    basis: &SteeringBasis,
    sweep_index: usize,
    trial_index: usize,
) -> Result<f64> {
    let spectrum = trial_spectrum(config, scenario, snapshots, basis, sweep_index, trial_index)?;
    Ok(estimate_doa(&spectrum, config.refine))
}

/// The IMUSIC spectrum of a single trial; also backs the spectrum export.
pub fn trial_spectrum(
    config: &ExperimentConfig,
    scenario: &SourceScenario,
    snapshots: usize,
    basis: &SteeringBasis,
    sweep_index: usize,
    trial_index: usize,
) -> Result<MusicSpectrum> {
    let seed = derive_seed(config.base_seed, sweep_index as u64, trial_index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tensor = synthesize_snapshots(scenario, &config.geometry, &config.grid, snapshots, &mut rng)?;
    let mut per_bin: Vec<(HermitianMatrix, f64)> = Vec::with_capacity(config.grid.bin_count());
    for (l, &f) in config.grid.bins().iter().enumerate() {
        per_bin.push((sample_covariance(tensor.per_bin(l))?, f));
    }
    imusic_spectrum_with_basis(&per_bin, basis, config.source_count)
}

/// Root mean square error of DOA estimates against the true angle, degrees.
pub fn rmse(estimates: &[f64], truth_deg: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::domain("RMSE needs at least one estimate"));
    }
    let mean_sq = estimates
        .iter()
        .map(|e| (e - truth_deg) * (e - truth_deg))
        .sum::<f64>()
        / estimates.len() as f64;
    Ok(mean_sq.sqrt())
}

/// RMSE plus its Monte Carlo standard error (delta method on the mean of
/// squared errors).
pub fn rmse_with_stderr(estimates: &[f64], truth_deg: f64) -> Result<(f64, f64)> {
    let r = rmse(estimates, truth_deg)?;
    let n = estimates.len();
    if n < 2 || r == 0.0 {
        return Ok((r, 0.0));
    }
    let sq: Vec<f64> = estimates
        .iter()
        .map(|e| (e - truth_deg) * (e - truth_deg))
        .collect();
    let mean = sq.iter().sum::<f64>() / n as f64;
    let var = sq.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1) as f64;
    Ok((r, (var / n as f64).sqrt() / (2.0 * r)))
}

/// Run every sweep value for the configured number of trials.
///
/// Trials are parallelized; aggregation is keyed by trial index, so results
/// do not depend on the thread count.
pub fn sweep(config: &ExperimentConfig) -> Result<Vec<RmseReport>> {
    config.validate()?;
    let values = config.sweep.values();
    let basis = SteeringBasis::new(config.grid.bins(), &config.geometry, &config.angles);
    let mut reports = Vec::with_capacity(values.len());
    for (idx, &value) in values.iter().enumerate() {
        let start = Instant::now();
        let (scenario, snapshots) = config.scenario_at(idx)?;
        let estimates: Result<Vec<f64>> = (0..config.runs)
            .into_par_iter()
            .map(|trial| trial_with_basis(config, &scenario, snapshots, &basis, idx, trial))
            .collect();
        let estimates = estimates?;
        let (rmse_deg, stderr_deg) = rmse_with_stderr(&estimates, config.theta_deg)?;
        reports.push(RmseReport {
            sweep_value: value,
            rmse_deg,
            stderr_deg,
            estimates_deg: estimates,
            seed: config.base_seed,
            wall_time: start.elapsed(),
        });
    }
    Ok(reports)
}

/// Scalar envelope of the signal/self-noise covariance cross term:
/// `(c / (4 pi d f_o))^2 sqrt(1 - exp(-k d)) / exp(0.5 k d)`.
pub fn cross_term_magnitude(f_o: f64, d_r: f64, k: f64) -> f64 {
    let mag = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * d_r * f_o);
    let x = k * d_r;
    mag * mag * (1.0 - (-x).exp()).sqrt() / (0.5 * x).exp()
}

/// RMSE summary CSV: `sweep_value,rmse_deg,stderr_deg,n_run,seed`.
pub fn write_rmse_csv<W: Write>(reports: &[RmseReport], w: &mut W) -> Result<()> {
    writeln!(w, "sweep_value,rmse_deg,stderr_deg,n_run,seed")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.sweep_value,
            r.rmse_deg,
            r.stderr_deg,
            r.estimates_deg.len(),
            r.seed
        )?;
    }
    Ok(())
}

/// Long-format per-run CSV: `sweep_value,run_index,estimate_deg`.
pub fn write_estimates_csv<W: Write>(reports: &[RmseReport], w: &mut W) -> Result<()> {
    writeln!(w, "sweep_value,run_index,estimate_deg")?;
    for r in reports {
        for (i, est) in r.estimates_deg.iter().enumerate() {
            writeln!(w, "{},{},{}", r.sweep_value, i, est)?;
        }
    }
    Ok(())
}
