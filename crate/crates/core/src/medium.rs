//! Medium absorption coefficients k(f): file ingestion, mole-fraction mixing,
//! linear interpolation, and synthetic profiles for tests and demos.
//!
//! Profiles are piecewise-linear samples of k(f) in 1/m over a frequency
//! range; no extrapolation is performed outside the sampled band.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Default band covered by synthetic profiles, Hz. Wide enough that every
/// default-grid noise sub-band [0.95, 10.05] THz lies strictly inside.
pub const DEFAULT_PROFILE_BAND: (f64, f64) = (0.5e12, 10.5e12);

/// A sampled medium absorption coefficient k(f).
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionProfile {
    samples: Vec<(f64, f64)>,
    name: String,
}

impl AbsorptionProfile {
    /// Build a profile from `(frequency_hz, k_per_m)` samples.
    pub fn new(samples: Vec<(f64, f64)>, name: impl Into<String>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::domain("profile needs at least 2 samples"));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 || w[1].0.is_nan() {
                return Err(Error::domain("profile frequencies must strictly increase"));
            }
        }
        if samples.iter().any(|&(f, k)| !f.is_finite() || !k.is_finite() || k < 0.0) {
            return Err(Error::domain("profile samples must be finite with k >= 0"));
        }
        Ok(Self {
            samples,
            name: name.into(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Sampled frequency range (lowest, highest), Hz.
    pub fn range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Linear interpolation of k at `f`; querying outside the sampled range
    /// is an error rather than an extrapolation.
    pub fn value_at(&self, f: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if f.is_nan() || f < lo || f > hi {
            return Err(Error::OutOfRange {
                frequency_hz: f,
                min_hz: lo,
                max_hz: hi,
            });
        }
        let idx = match self
            .samples
            .binary_search_by(|&(sf, _)| sf.partial_cmp(&f).expect("finite"))
        {
            Ok(i) => return Ok(self.samples[i].1),
            Err(i) => i,
        };
        let (f0, k0) = self.samples[idx - 1];
        let (f1, k1) = self.samples[idx];
        Ok(k0 + (k1 - k0) * (f - f0) / (f1 - f0))
    }

    /// Parse a profile from a `frequency_hz,k_per_m` text file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "profile".to_string());
        Self::from_reader(BufReader::new(file), path, name)
    }

    fn from_reader<R: Read>(reader: BufReader<R>, path: &Path, name: String) -> Result<Self> {
        let mut samples = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split(',');
            let parse = |field: Option<&str>, what: &str| -> Result<f64> {
                field
                    .ok_or_else(|| Error::Parse {
                        path: path.to_path_buf(),
                        line: lineno,
                        message: format!("missing {what}"),
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse {
                        path: path.to_path_buf(),
                        line: lineno,
                        message: format!("bad {what}: {e}"),
                    })
            };
            let f = parse(parts.next(), "frequency")?;
            let k = parse(parts.next(), "absorption coefficient")?;
            if k < 0.0 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    message: format!("negative absorption coefficient {k}"),
                });
            }
            if let Some(&(prev, _)) = samples.last() {
                if f <= prev {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: lineno,
                        message: format!("frequency {f} not above previous {prev}"),
                    });
                }
            }
            samples.push((f, k));
        }
        if samples.len() < 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: "profile needs at least 2 samples".into(),
            });
        }
        Self::new(samples, name)
    }

    /// Write the profile in the same format accepted by [`AbsorptionProfile::load`].
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = File::create(path)?;
        self.write_to(&mut file)
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# absorption profile: {}", self.name)?;
        writeln!(w, "# frequency_hz,k_per_m")?;
        for &(f, k) in &self.samples {
            writeln!(w, "{f},{k}")?;
        }
        Ok(())
    }
}

/// Mole-fraction weighted mix of absorption profiles on a common grid.
///
/// The common grid is the union of all sample frequencies restricted to the
/// intersection of the profiles' ranges, so piecewise-linear interpolation of
/// the inputs is exact and the mix is exactly linear.
pub fn mix_profiles(parts: &[(&AbsorptionProfile, f64)]) -> Result<AbsorptionProfile> {
    if parts.is_empty() {
        return Err(Error::domain("mix requires at least one profile"));
    }
    if parts.iter().any(|&(_, x)| x < 0.0 || !x.is_finite()) {
        return Err(Error::domain("mole fractions must be non-negative"));
    }
    let total: f64 = parts.iter().map(|&(_, x)| x).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "mole fractions sum to {total}, expected 1 within 1e-9"
        )));
    }
    let lo = parts
        .iter()
        .map(|(p, _)| p.range().0)
        .fold(f64::MIN, f64::max);
    let hi = parts
        .iter()
        .map(|(p, _)| p.range().1)
        .fold(f64::MAX, f64::min);
    if hi <= lo || hi.is_nan() || lo.is_nan() {
        return Err(Error::domain("profiles have no common frequency range"));
    }
    let mut grid: Vec<f64> = parts
        .iter()
        .flat_map(|(p, _)| p.samples().iter().map(|&(f, _)| f))
        .filter(|&f| f >= lo && f <= hi)
        .chain([lo, hi])
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    grid.dedup();
    let samples = grid
        .into_iter()
        .map(|f| {
            let k = parts
                .iter()
                .map(|&(p, x)| x * p.value_at(f).expect("f within common range"))
                .sum::<f64>();
            (f, k.max(0.0))
        })
        .collect();
    AbsorptionProfile::new(samples, "mix")
}

/// One absorption line: a Lorentzian of the given half-width at half maximum
/// and peak value, optionally truncated at `wing_cutoff` from the center with
/// the pedestal subtracted so the line reaches exactly zero there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub center: f64,
    pub hwhm: f64,
    pub peak: f64,
    pub wing_cutoff: Option<f64>,
}

impl SpectralLine {
    pub fn value_at(&self, f: f64) -> f64 {
        let d = (f - self.center) / self.hwhm;
        let lor = 1.0 / (1.0 + d * d);
        match self.wing_cutoff {
            None => self.peak * lor,
            Some(cut) => {
                if (f - self.center).abs() >= cut {
                    0.0
                } else {
                    let dc = cut / self.hwhm;
                    let floor = 1.0 / (1.0 + dc * dc);
                    (self.peak * (lor - floor) / (1.0 - floor)).max(0.0)
                }
            }
        }
    }

    fn support(&self) -> f64 {
        self.wing_cutoff.unwrap_or(40.0 * self.hwhm)
    }
}

/// Synthetic profile families.
#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticProfile {
    /// k identically zero.
    Vacuum,
    /// k identically equal to the given constant.
    Constant(f64),
    /// Sum of peaked absorption lines.
    LorentzianLines(Vec<SpectralLine>),
}

impl SyntheticProfile {
    /// Sample the synthetic profile over `[f_lo, f_hi]`.
    pub fn build(&self, f_lo: f64, f_hi: f64, name: impl Into<String>) -> Result<AbsorptionProfile> {
        if !(crate::error::positive(f_lo) && f_hi > f_lo) {
            return Err(Error::domain("profile band must satisfy 0 < f_lo < f_hi"));
        }
        match self {
            SyntheticProfile::Vacuum => {
                AbsorptionProfile::new(vec![(f_lo, 0.0), (f_hi, 0.0)], name)
            }
            SyntheticProfile::Constant(k0) => {
                if *k0 < 0.0 || !k0.is_finite() {
                    return Err(Error::domain("constant k must be finite and >= 0"));
                }
                AbsorptionProfile::new(vec![(f_lo, *k0), (f_hi, *k0)], name)
            }
            SyntheticProfile::LorentzianLines(lines) => {
                if lines
                    .iter()
                    .any(|l| l.peak < 0.0 || !crate::error::positive(l.hwhm) || !l.center.is_finite())
                {
                    return Err(Error::domain(
                        "line strengths must be >= 0 and widths positive",
                    ));
                }
                if let Some(l) = lines.iter().find(|l| matches!(l.wing_cutoff, Some(c) if !crate::error::positive(c))) {
                    return Err(Error::domain(format!(
                        "line at {} Hz has a non-positive wing cutoff",
                        l.center
                    )));
                }
                let mut grid: Vec<f64> = vec![f_lo, f_hi];
                for line in lines {
                    let span = line.support();
                    // cubically clustered points resolve the peak tightly
                    for i in 0..=80 {
                        let m = -1.0 + i as f64 * 0.025;
                        let f = line.center + m * m * m * span;
                        if f > f_lo && f < f_hi {
                            grid.push(f);
                        }
                    }
                    for edge in [line.center - span, line.center + span] {
                        if edge > f_lo && edge < f_hi {
                            grid.push(edge);
                        }
                    }
                }
                grid.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                grid.dedup();
                let samples = grid
                    .into_iter()
                    .map(|f| (f, lines.iter().map(|l| l.value_at(f)).sum::<f64>()))
                    .collect();
                AbsorptionProfile::new(samples, name)
            }
        }
    }
}

/// Bundled synthetic "summer air" style profile.
///
/// This is NOT measured data: it is a hand-built stand-in with a water-vapor
/// flavored layout (a strong congested cluster at the low end of the band,
/// moderate lines mid-band, and a forest of narrow lines above 4.5 THz, all
/// wing-truncated). Every 100 GHz sub-band of the default grid contains some
/// absorption, so molecular noise is present in every bin.
pub fn summer_air() -> AbsorptionProfile {
    let mut lines: Vec<SpectralLine> = Vec::new();
    let low: [(f64, f64, f64); 19] = [
        (1.10, 35.0, 8.0),
        (1.16, 30.0, 6.0),
        (1.21, 28.0, 5.0),
        (1.41, 30.0, 6.5),
        (1.60, 35.0, 7.5),
        (1.67, 30.0, 9.0),
        (1.72, 30.0, 8.0),
        (1.76, 28.0, 6.0),
        (1.87, 35.0, 10.0),
        (1.92, 30.0, 9.0),
        (2.04, 40.0, 12.0),
        (2.16, 35.0, 11.0),
        (2.20, 35.0, 12.0),
        (2.26, 30.0, 10.0),
        (2.34, 30.0, 9.0),
        (2.39, 28.0, 8.0),
        (2.45, 28.0, 7.0),
        (2.55, 25.0, 5.0),
        (2.64, 25.0, 4.0),
    ];
    for (c_thz, hwhm_ghz, peak) in low {
        lines.push(SpectralLine {
            center: c_thz * 1e12,
            hwhm: hwhm_ghz * 1e9,
            peak,
            wing_cutoff: Some(0.45e12),
        });
    }
    let mid: [(f64, f64, f64); 16] = [
        (2.77, 12.0, 2.8),
        (2.88, 12.0, 2.4),
        (2.97, 10.0, 2.0),
        (3.06, 12.0, 1.8),
        (3.17, 10.0, 1.6),
        (3.33, 12.0, 1.4),
        (3.45, 10.0, 1.2),
        (3.54, 10.0, 1.1),
        (3.65, 10.0, 1.0),
        (3.81, 10.0, 0.9),
        (3.94, 10.0, 0.8),
        (4.08, 10.0, 0.7),
        (4.17, 8.0, 0.65),
        (4.25, 8.0, 0.6),
        (4.33, 8.0, 0.55),
        (4.47, 8.0, 0.5),
    ];
    for (c_thz, hwhm_ghz, peak) in mid {
        lines.push(SpectralLine {
            center: c_thz * 1e12,
            hwhm: hwhm_ghz * 1e9,
            peak,
            wing_cutoff: Some(0.12e12),
        });
    }
    // Narrow-line forest: one line per 100 GHz, offset from the sub-band
    // centers so the band centers themselves stay transparent.
    let mut edge = 4.55;
    let mut j = 0u32;
    while edge < 10.01 {
        let offset = if j.is_multiple_of(2) { 0.032 } else { 0.063 };
        lines.push(SpectralLine {
            center: (edge + offset) * 1e12,
            hwhm: 1.0e9,
            peak: 20.0,
            wing_cutoff: Some(3.0e9),
        });
        edge += 0.10;
        j += 1;
    }
    SyntheticProfile::LorentzianLines(lines)
        .build(
            DEFAULT_PROFILE_BAND.0,
            DEFAULT_PROFILE_BAND.1,
            "synthetic-summer-air",
        )
        .expect("bundled profile is valid")
}
