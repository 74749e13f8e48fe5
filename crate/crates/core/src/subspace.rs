//! Per-bin sample covariance, complex Hermitian eigendecomposition, and the
//! incoherent wideband MUSIC pseudo-spectrum with peak estimation.
//!
//! The eigensolver is a cyclic Jacobi iteration on the complex Hermitian
//! matrix: rotations are exactly unitary, so eigenvector orthonormality holds
//! to rounding error regardless of eigenvalue clustering, which matters for
//! the rank-deficient covariances produced by single-snapshot operation.

use ndarray::{Array2, ArrayView2, Axis};
use num_complex::Complex64;

use crate::array::UlaGeometry;
use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};

/// Floor applied to the MUSIC denominator so exact steering/noise-subspace
/// orthogonality yields a finite spectrum value while preserving the argmax.
pub const DENOMINATOR_FLOOR: f64 = 1e-18;

/// A validated complex Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(Array2<Complex64>);

impl HermitianMatrix {
    /// Validate conjugate symmetry (to 1e-12 relative to the largest entry).
    pub fn new(m: Array2<Complex64>) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c {
            return Err(Error::Dimension(format!("matrix is {r} x {c}, not square")));
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
        for i in 0..r {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                    return Err(Error::domain(format!(
                        "matrix is not Hermitian at ({i}, {j})"
                    )));
                }
            }
            if m[(i, i)].im.abs() > tol {
                return Err(Error::domain(format!("diagonal entry {i} is not real")));
            }
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_array(&self) -> &Array2<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }
}

/// Eigenvalues (descending) and matching orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Array2<Complex64>,
}

/// Sample covariance `(1/K) Y Y^H` of an N x K coefficient matrix.
pub fn sample_covariance(y: ArrayView2<'_, Complex64>) -> Result<HermitianMatrix> {
    let (n, k) = y.dim();
    if k == 0 {
        return Err(Error::domain("covariance needs at least one snapshot"));
    }
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut acc = Complex64::new(0.0, 0.0);
            for s in 0..k {
                acc += y[(i, s)] * y[(j, s)].conj();
            }
            acc /= k as f64;
            m[(i, j)] = acc;
            if i == j {
                m[(i, j)] = Complex64::new(acc.re, 0.0);
            } else {
                m[(j, i)] = acc.conj();
            }
        }
    }
    HermitianMatrix::new(m)
}

/// Cyclic Jacobi eigendecomposition of a complex Hermitian matrix.
pub fn hermitian_evd(a: &HermitianMatrix) -> Result<EigenPairs> {
    let n = a.dim();
    let mut m = a.as_array().clone();
    let mut v: Array2<Complex64> = Array2::eye(n);
    let fro = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if fro > 0.0 {
        let stop = 5e-16 * fro;
        let skip = 1e-18 * fro;
        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += m[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= stop {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let gamma = m[(p, q)];
                    let g = gamma.norm();
                    if g <= skip {
                        continue;
                    }
                    let w = gamma / g;
                    let alpha = m[(p, p)].re;
                    let beta = m[(q, q)].re;
                    let tau = (beta - alpha) / (2.0 * g);
                    let t = if tau >= 0.0 {
                        -1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;

                    let new_pp = c * c * alpha + 2.0 * c * s * g + s * s * beta;
                    let new_qq = alpha + beta - new_pp;
                    m[(p, p)] = Complex64::new(new_pp, 0.0);
                    m[(q, q)] = Complex64::new(new_qq, 0.0);
                    m[(p, q)] = Complex64::new(0.0, 0.0);
                    m[(q, p)] = Complex64::new(0.0, 0.0);
                    for r in 0..n {
                        if r == p || r == q {
                            continue;
                        }
                        let mrp = m[(r, p)];
                        let mrq = m[(r, q)];
                        let new_rp = mrp * c + mrq * s * w.conj();
                        let new_rq = -mrp * s * w + mrq * c;
                        m[(r, p)] = new_rp;
                        m[(p, r)] = new_rp.conj();
                        m[(r, q)] = new_rq;
                        m[(q, r)] = new_rq.conj();
                    }
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = vrp * c + vrq * s * w.conj();
                        v[(r, q)] = -vrp * s * w + vrq * c;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(j, j)]
            .re
            .partial_cmp(&m[(i, i)].re)
            .expect("eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = v[(r, src)];
        }
    }
    Ok(EigenPairs { values, vectors })
}

/// Eigenvectors spanning the noise subspace: the `N - m` smallest-eigenvalue
/// columns, orthonormal.
pub fn noise_subspace(pairs: &EigenPairs, source_count: usize) -> Result<Array2<Complex64>> {
    let n = pairs.values.len();
    if source_count == 0 || source_count >= n {
        return Err(Error::domain(format!(
            "source count {source_count} must lie in 1..{n}"
        )));
    }
    Ok(pairs
        .vectors
        .slice_axis(Axis(1), ndarray::Slice::from(source_count..n))
        .to_owned())
}

/// A uniformly spaced search grid of candidate directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleGrid {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl AngleGrid {
    pub fn new(start_deg: f64, stop_deg: f64, step_deg: f64) -> Result<Self> {
        if stop_deg <= start_deg || !crate::error::positive(step_deg) || !start_deg.is_finite() {
            return Err(Error::domain("angle grid requires start < stop and step > 0"));
        }
        Ok(Self {
            start_deg,
            stop_deg,
            step_deg,
        })
    }

    /// Default search grid: -90 to 90 degrees in 0.01-degree steps.
    pub fn default_search() -> Self {
        Self {
            start_deg: -90.0,
            stop_deg: 90.0,
            step_deg: 0.01,
        }
    }

    pub fn len(&self) -> usize {
        ((self.stop_deg - self.start_deg) / self.step_deg * (1.0 + 1e-12)).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.len())
            .map(|j| self.start_deg + j as f64 * self.step_deg)
            .collect()
    }
}

/// Per-angle, per-frequency steering phase factors shared across trials.
///
/// Element `m` of the manifold at (f, theta) is `z^m` with
/// `z = exp(-j 2 pi f d_s sin(theta) / c)`; only `z` is stored.
#[derive(Debug, Clone)]
pub struct SteeringBasis {
    z: Array2<Complex64>, // (bin, angle)
    angles: Vec<f64>,
    elements: usize,
    step_deg: f64,
}

impl SteeringBasis {
    pub fn new(frequencies: &[f64], geom: &UlaGeometry, grid: &AngleGrid) -> Self {
        let angles = grid.angles();
        let mut z = Array2::zeros((frequencies.len(), angles.len()));
        for (l, &f) in frequencies.iter().enumerate() {
            let scale = -2.0 * std::f64::consts::PI * f * geom.spacing() / SPEED_OF_LIGHT;
            for (j, &th) in angles.iter().enumerate() {
                z[(l, j)] = Complex64::from_polar(1.0, scale * th.to_radians().sin());
            }
        }
        Self {
            z,
            angles,
            elements: geom.elements(),
            step_deg: grid.step_deg,
        }
    }

    pub fn bin_count(&self) -> usize {
        self.z.nrows()
    }
}

/// Incoherent wideband MUSIC pseudo-spectrum over an angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MusicSpectrum {
    angles: Vec<f64>,
    values: Vec<f64>,
    resolution_deg: f64,
}

impl MusicSpectrum {
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn resolution_deg(&self) -> f64 {
        self.resolution_deg
    }

    /// `theta_deg,value` text export.
    pub fn export<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "theta_deg,value")?;
        for (th, v) in self.angles.iter().zip(&self.values) {
            writeln!(w, "{th},{v}")?;
        }
        Ok(())
    }
}

/// Sum of per-bin narrowband MUSIC spectra, each evaluated from the bin's
/// covariance via its noise subspace.
pub fn imusic_spectrum(
    per_bin: &[(HermitianMatrix, f64)],
    geom: &UlaGeometry,
    grid: &AngleGrid,
    source_count: usize,
) -> Result<MusicSpectrum> {
    let freqs: Vec<f64> = per_bin.iter().map(|&(_, f)| f).collect();
    let basis = SteeringBasis::new(&freqs, geom, grid);
    imusic_spectrum_with_basis(per_bin, &basis, source_count)
}

/// As [`imusic_spectrum`], with a precomputed steering basis (the basis must
/// match the per-bin frequencies in order).
pub fn imusic_spectrum_with_basis(
    per_bin: &[(HermitianMatrix, f64)],
    basis: &SteeringBasis,
    source_count: usize,
) -> Result<MusicSpectrum> {
    if per_bin.is_empty() {
        return Err(Error::domain("spectrum needs at least one bin"));
    }
    if per_bin.len() != basis.bin_count() {
        return Err(Error::Dimension(format!(
            "{} covariances vs {} basis bins",
            per_bin.len(),
            basis.bin_count()
        )));
    }
    let n = basis.elements;
    if per_bin.iter().any(|(m, _)| m.dim() != n) {
        return Err(Error::Dimension(format!(
            "covariance dimension does not match the {n}-element array"
        )));
    }
    if source_count == 0 || source_count >= n {
        return Err(Error::domain(format!(
            "source count {source_count} must lie in 1..{n}"
        )));
    }

    let n_f = n as f64;
    let mut values = vec![0.0f64; basis.angles.len()];
    for (l, (cov, _)) in per_bin.iter().enumerate() {
        let pairs = hermitian_evd(cov)?;
        // With orthonormal eigenvectors, a^H E_n E_n^H a = ||a||^2 - ||E_s^H a||^2,
        // so only the signal columns need to be projected out.
        let signal = pairs.vectors.slice_axis(
            Axis(1),
            ndarray::Slice::from(0..source_count),
        );
        let sig_cols: Vec<Vec<Complex64>> = (0..source_count)
            .map(|c| (0..n).map(|r| signal[(r, c)].conj()).collect())
            .collect();
        let row = basis.z.row(l);
        let mut acc = vec![Complex64::new(0.0, 0.0); source_count];
        for (j, &z) in row.iter().enumerate() {
            acc.fill(Complex64::new(0.0, 0.0));
            let mut power = Complex64::new(1.0, 0.0);
            for m in 0..n {
                for (a, col) in acc.iter_mut().zip(&sig_cols) {
                    *a += col[m] * power;
                }
                power *= z;
            }
            let projected: f64 = acc.iter().map(|a| a.norm_sqr()).sum();
            let denom = (n_f - projected).max(DENOMINATOR_FLOOR);
            values[j] += n_f / denom;
        }
    }
    Ok(MusicSpectrum {
        angles: basis.angles.clone(),
        values,
        resolution_deg: basis.step_deg,
    })
}

/// Location of the spectrum's highest peak, optionally refined by a
/// three-point parabolic fit clamped to the neighboring grid cells.
/// Ties break toward the smallest angle.
pub fn estimate_doa(spectrum: &MusicSpectrum, refine: bool) -> f64 {
    let values = spectrum.values();
    let mut best = 0;
    for (j, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = j;
        }
    }
    let mut theta = spectrum.angles()[best];
    if refine && best > 0 && best + 1 < values.len() {
        let (pm, p0, pp) = (values[best - 1], values[best], values[best + 1]);
        let denom = pm - 2.0 * p0 + pp;
        if denom < 0.0 && denom.is_finite() {
            let delta = (0.5 * (pm - pp) / denom).clamp(-0.5, 0.5);
            theta += delta * spectrum.resolution_deg();
        }
    }
    theta
}
