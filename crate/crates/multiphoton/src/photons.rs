//! Photon internal states and distinguishability descriptions.
//!
//! Two descriptions feed the interference models: pairwise overlap matrices
//! `x_{jk}` (Gram matrices of the photons' internal states at the circuit
//! input) and the three-index tensor `W_{j,k,l}` that additionally captures
//! distinguishability introduced *by the circuit itself* — frequency-dependent
//! splitting ratios or internal path-length mismatches correlate a photon's
//! path with its spectrum, degrading interference even for identical inputs.
//!
//! `W_{j,k,l}` is the inner product, taken at output mode `l`, of the
//! circuit-propagated internal states of photons `j` and `k`. Its diagonal
//! `W_{j,j,l}` is the single-photon transition probability `j → l`; the
//! off-diagonal coherences obey `W_{j,k,l} = W*_{k,j,l}` and the
//! Cauchy-Schwarz bound `|W_{j,k,l}| ≤ √(W_{j,j,l} W_{k,k,l})`, saturated
//! exactly when the circuit is frequency-flat and the photons identical.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::TransferMatrix;
use crate::mesh::{mesh_to_matrix, MeshParams};

/// Hermitian Gram matrix of pairwise photon overlaps; unit diagonal,
/// positive semidefinite, entries bounded by one in modulus.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapMatrix {
    x: Array2<Complex64>,
}

/// Eigenvalue tolerance for the positive-semidefiniteness check.
const PSD_TOL: f64 = -1e-10;

impl OverlapMatrix {
    /// Validate and canonicalize a Gram matrix.
    ///
    /// The input must be Hermitian within `1e-12`, have diagonal entries
    /// within `1e-12` of one, entries of modulus at most `1 + 1e-12`, and be
    /// positive semidefinite within eigenvalue tolerance `-1e-10`. The stored
    /// matrix is exactly Hermitian with diagonal exactly one.
    pub fn new(mut x: Array2<Complex64>) -> Result<Self> {
        let n = x.nrows();
        if n == 0 || n != x.ncols() {
            return Err(Error::invalid(
                "overlap matrix must be square and non-empty",
            ));
        }
        for j in 0..n {
            let d = x[[j, j]];
            if (d - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(Error::invalid(format!(
                    "overlap diagonal entry {j} is {d}, expected 1"
                )));
            }
            x[[j, j]] = Complex64::new(1.0, 0.0);
            for k in (j + 1)..n {
                let up = x[[j, k]];
                let lo = x[[k, j]];
                if (up - lo.conj()).norm() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "overlap matrix is not Hermitian at ({j},{k})"
                    )));
                }
                if up.norm() > 1.0 + 1e-12 {
                    return Err(Error::invalid(format!(
                        "overlap |x_{{{j},{k}}}| = {} exceeds 1",
                        up.norm()
                    )));
                }
                let clipped = if up.norm() > 1.0 { up / up.norm() } else { up };
                x[[j, k]] = clipped;
                x[[k, j]] = clipped.conj();
            }
        }
        let min_eig = linalg::hermitian_eigenvalues(&x)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(Error::invalid(format!(
                "overlap matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { x })
    }

    pub fn photons(&self) -> usize {
        self.x.nrows()
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.x[[j, k]]
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.x
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.x)
    }
}

/// JSON wire form: `{photons, entries: [[re, im], ...]}` row-major.
#[derive(Serialize, Deserialize)]
struct OverlapJson {
    photons: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for OverlapMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        OverlapJson {
            photons: self.photons(),
            entries: self.x.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for OverlapMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let wire = OverlapJson::deserialize(de)?;
        if wire.entries.len() != wire.photons * wire.photons {
            return Err(D::Error::custom(
                "overlap entry count does not match photon count",
            ));
        }
        let data: Vec<Complex64> = wire
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let x = Array2::from_shape_vec((wire.photons, wire.photons), data)
            .map_err(|e| D::Error::custom(e.to_string()))?;
        OverlapMatrix::new(x).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// All pairs of distinct photons share the same overlap `x`.
///
/// For real `x` this is positive semidefinite exactly for
/// `x ∈ [-1/(N-1), 1]`; values outside are rejected.
pub fn uniform_overlap(photons: usize, x: Complex64) -> Result<OverlapMatrix> {
    if x.norm() > 1.0 + 1e-12 {
        return Err(Error::invalid("uniform overlap requires |x| <= 1"));
    }
    let mut m = Array2::from_elem((photons, photons), x);
    for j in 0..photons {
        m[[j, j]] = Complex64::new(1.0, 0.0);
        for k in 0..j {
            m[[j, k]] = x.conj();
        }
    }
    OverlapMatrix::new(m)
}

/// One photon is completely distinguishable from the rest, which interfere
/// perfectly. `marked` is the 0-based photon label.
pub fn marked_photon_overlap(photons: usize, marked: usize) -> Result<OverlapMatrix> {
    if marked >= photons {
        return Err(Error::invalid(format!(
            "marked photon {marked} out of range for {photons} photons"
        )));
    }
    let mut m = Array2::from_elem((photons, photons), Complex64::new(1.0, 0.0));
    for j in 0..photons {
        if j != marked {
            m[[j, marked]] = Complex64::new(0.0, 0.0);
            m[[marked, j]] = Complex64::new(0.0, 0.0);
        }
    }
    OverlapMatrix::new(m)
}

// ---------------------------------------------------------------------------
// Spectral envelopes and quadrature grids.
// ---------------------------------------------------------------------------

/// Gaussian amplitude envelope `f(ω) ∝ exp(-(ω-c)²/4w²) · e^{i q (ω-c)²}`.
///
/// `width` is the standard deviation of the *intensity* profile `|f|²`;
/// `chirp` is the quadratic phase coefficient `q` (zero for transform-limited
/// pulses). Envelopes are L2-normalized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpectrum {
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub chirp: f64,
}

impl GaussianSpectrum {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        Self::with_chirp(center, width, 0.0)
    }

    pub fn with_chirp(center: f64, width: f64, chirp: f64) -> Result<Self> {
        if width.is_nan() || width <= 0.0 {
            return Err(Error::invalid("spectrum width must be positive"));
        }
        Ok(Self {
            center,
            width,
            chirp,
        })
    }

    /// Amplitude at frequency `omega` (continuum normalization).
    pub fn amplitude(&self, omega: f64) -> Complex64 {
        let d = omega - self.center;
        let mag = (std::f64::consts::TAU * self.width * self.width).powf(-0.25)
            * (-d * d / (4.0 * self.width * self.width)).exp();
        Complex64::from_polar(mag, self.chirp * d * d)
    }
}

/// Quadrature rule over a frequency axis: strictly increasing points with
/// positive weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

/// Default number of quadrature points used by [`FrequencyGrid::spanning`].
pub const DEFAULT_GRID_POINTS: usize = 257;

impl FrequencyGrid {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.len() < 2 || points.len() != weights.len() {
            return Err(Error::invalid(
                "grid needs at least two points with matching weights",
            ));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("grid points must be strictly increasing"));
        }
        if weights.iter().any(|&w| w.is_nan() || w <= 0.0) {
            return Err(Error::invalid("grid weights must be positive"));
        }
        Ok(Self { points, weights })
    }

    /// Uniform grid with trapezoidal weights.
    pub fn uniform(min: f64, max: f64, n_points: usize) -> Result<Self> {
        if max.is_nan() || min.is_nan() || max <= min || n_points < 2 {
            return Err(Error::invalid(
                "uniform grid requires max > min and >= 2 points",
            ));
        }
        let h = (max - min) / (n_points - 1) as f64;
        let points: Vec<f64> = (0..n_points).map(|i| min + i as f64 * h).collect();
        let mut weights = vec![h; n_points];
        weights[0] = 0.5 * h;
        weights[n_points - 1] = 0.5 * h;
        Self::new(points, weights)
    }

    /// Trapezoidal grid spanning all given spectra to ±6 maximum widths,
    /// with [`DEFAULT_GRID_POINTS`] points.
    pub fn spanning(spectra: &[GaussianSpectrum]) -> Result<Self> {
        if spectra.is_empty() {
            return Err(Error::invalid("need at least one spectrum"));
        }
        let lo = spectra
            .iter()
            .map(|s| s.center)
            .fold(f64::INFINITY, f64::min);
        let hi = spectra
            .iter()
            .map(|s| s.center)
            .fold(f64::NEG_INFINITY, f64::max);
        let w = spectra.iter().map(|s| s.width).fold(0.0, f64::max);
        Self::uniform(lo - 6.0 * w, hi + 6.0 * w, DEFAULT_GRID_POINTS)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn min(&self) -> f64 {
        self.points[0]
    }

    fn max(&self) -> f64 {
        *self.points.last().unwrap()
    }
}

/// Samples of a spectrum on a grid, L2-normalized under the grid's
/// quadrature so that discretization never leaks into probability scales.
fn sampled_amplitudes(spectrum: &GaussianSpectrum, grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    // A 5-width margin keeps the neglected intensity tail below 1e-6.
    if grid.min() > spectrum.center - 5.0 * spectrum.width
        || grid.max() < spectrum.center + 5.0 * spectrum.width
    {
        return Err(Error::Precision(format!(
            "grid [{}, {}] does not cover spectrum at {} ± 5·{}",
            grid.min(),
            grid.max(),
            spectrum.center,
            spectrum.width
        )));
    }
    let raw: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&w| spectrum.amplitude(w))
        .collect();
    let norm_sq: f64 = raw
        .iter()
        .zip(grid.weights())
        .map(|(a, &wt)| wt * a.norm_sqr())
        .sum();
    if (norm_sq - 1.0).abs() > 1e-8 {
        return Err(Error::Precision(format!(
            "quadrature norm {norm_sq} deviates from 1 by more than 1e-8; refine the grid"
        )));
    }
    let scale = norm_sq.sqrt().recip();
    Ok(raw.into_iter().map(|a| a * scale).collect())
}

/// Gram matrix of spectral envelopes: `x_{jk} = ∫ f_j(ω) f*_k(ω) dω` under
/// the grid's quadrature rule.
pub fn overlap_from_spectra(
    spectra: &[GaussianSpectrum],
    grid: &FrequencyGrid,
) -> Result<OverlapMatrix> {
    if spectra.is_empty() {
        return Err(Error::invalid("need at least one spectrum"));
    }
    let sampled: Vec<Vec<Complex64>> = spectra
        .iter()
        .map(|s| sampled_amplitudes(s, grid))
        .collect::<Result<_>>()?;
    let n = spectra.len();
    let mut x = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    for j in 0..n {
        x[[j, j]] = Complex64::new(1.0, 0.0);
        for k in (j + 1)..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &wt) in grid.weights().iter().enumerate() {
                acc += wt * sampled[j][i] * sampled[k][i].conj();
            }
            x[[j, k]] = acc;
            x[[k, j]] = acc.conj();
        }
    }
    OverlapMatrix::new(x)
}

// ---------------------------------------------------------------------------
// Frequency-resolved circuits and the W tensor.
// ---------------------------------------------------------------------------

/// A transfer matrix resolved over an internal frequency degree of freedom.
///
/// The general kernel `M^{ω,Ω}` maps input frequency bins to output frequency
/// bins. All physical imperfections modeled here (dispersive couplers, path
/// delays) conserve frequency, so constructors only produce the diagonal
/// form; the dense form exists for completeness and represents
/// `M^{ω,Ω} = K[ω][Ω]` with the quadrature measure applied on `ω`.
#[derive(Clone, Debug)]
pub struct FrequencyResolvedTransfer {
    grid: FrequencyGrid,
    kernel: TransferKernel,
}

#[derive(Clone, Debug)]
enum TransferKernel {
    /// `M^{ω,Ω} = M(ω) δ(ω-Ω)`: one matrix per grid point.
    Diagonal(Vec<Array2<Complex64>>),
    /// Dense bins indexed `[ω][Ω]`.
    General(Vec<Vec<Array2<Complex64>>>),
}

impl FrequencyResolvedTransfer {
    /// Frequency-conserving circuit: one matrix per grid point.
    pub fn diagonal(grid: FrequencyGrid, bins: Vec<Array2<Complex64>>) -> Result<Self> {
        if bins.len() != grid.len() {
            return Err(Error::invalid("need exactly one matrix per grid point"));
        }
        let dim = bins[0].dim();
        if bins.iter().any(|m| m.dim() != dim) {
            return Err(Error::invalid("all frequency bins must share dimensions"));
        }
        Ok(Self {
            grid,
            kernel: TransferKernel::Diagonal(bins),
        })
    }

    /// Fully general kernel, indexed `[input bin][output bin]`.
    pub fn general(grid: FrequencyGrid, bins: Vec<Vec<Array2<Complex64>>>) -> Result<Self> {
        if bins.len() != grid.len() || bins.iter().any(|row| row.len() != grid.len()) {
            return Err(Error::invalid("kernel must be square in the grid bins"));
        }
        let dim = bins[0][0].dim();
        if bins.iter().flatten().any(|m| m.dim() != dim) {
            return Err(Error::invalid("all frequency bins must share dimensions"));
        }
        Ok(Self {
            grid,
            kernel: TransferKernel::General(bins),
        })
    }

    /// A frequency-flat circuit: the same matrix at every grid point.
    pub fn flat(grid: FrequencyGrid, matrix: &TransferMatrix) -> Result<Self> {
        let bins = vec![matrix.entries().clone(); grid.len()];
        Self::diagonal(grid, bins)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn outputs(&self) -> usize {
        match &self.kernel {
            TransferKernel::Diagonal(b) => b[0].nrows(),
            TransferKernel::General(b) => b[0][0].nrows(),
        }
    }

    pub fn inputs(&self) -> usize {
        match &self.kernel {
            TransferKernel::Diagonal(b) => b[0].ncols(),
            TransferKernel::General(b) => b[0][0].ncols(),
        }
    }

    /// The matrix acting within frequency bin `i`, if the kernel is diagonal.
    pub fn diagonal_bin(&self, i: usize) -> Option<&Array2<Complex64>> {
        match &self.kernel {
            TransferKernel::Diagonal(b) => b.get(i),
            TransferKernel::General(_) => None,
        }
    }

    /// Worst per-bin unitarity defect (diagonal kernels only).
    pub fn max_unitarity_defect(&self) -> Option<f64> {
        match &self.kernel {
            TransferKernel::Diagonal(b) => {
                Some(b.iter().map(linalg::unitarity_defect).fold(0.0, f64::max))
            }
            TransferKernel::General(_) => None,
        }
    }
}

/// Circuit-distinguishability tensor `W_{j,k,l}`; see the module docs.
#[derive(Clone, Debug, PartialEq)]
pub struct WTensor {
    photons: usize,
    outputs: usize,
    /// Row-major `[j][k][l]`.
    w: Vec<Complex64>,
}

impl WTensor {
    /// Validate conjugate symmetry, non-negative real diagonal, and the
    /// Cauchy-Schwarz bound.
    pub fn new(photons: usize, outputs: usize, w: Vec<Complex64>) -> Result<Self> {
        if photons == 0 || outputs == 0 || w.len() != photons * photons * outputs {
            return Err(Error::invalid(
                "W tensor dimensions do not match entry count",
            ));
        }
        let t = Self {
            photons,
            outputs,
            w,
        };
        for l in 0..outputs {
            for j in 0..photons {
                let d = t.get(j, j, l);
                if d.im.abs() > 1e-10 || d.re < -1e-12 {
                    return Err(Error::invalid(format!(
                        "W diagonal ({j},{j},{l}) = {d} must be real non-negative"
                    )));
                }
                for k in (j + 1)..photons {
                    let up = t.get(j, k, l);
                    let lo = t.get(k, j, l);
                    if (up - lo.conj()).norm() > 1e-10 {
                        return Err(Error::invalid(format!(
                            "W tensor not conjugate-symmetric at ({j},{k},{l})"
                        )));
                    }
                    let bound = (t.get(j, j, l).re.max(0.0) * t.get(k, k, l).re.max(0.0)).sqrt();
                    if up.norm() > bound + 1e-10 {
                        return Err(Error::invalid(format!(
                            "W tensor violates Cauchy-Schwarz at ({j},{k},{l}): |{}| > {bound}",
                            up.norm()
                        )));
                    }
                }
            }
        }
        Ok(t)
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize, l: usize) -> Complex64 {
        self.w[(j * self.photons + k) * self.outputs + l]
    }
}

/// JSON wire form of a W tensor: nested arrays `entries[j][k][l] = [re, im]`.
#[derive(Serialize, Deserialize)]
struct WTensorJson {
    photons: usize,
    outputs: usize,
    entries: Vec<Vec<Vec<[f64; 2]>>>,
}

impl Serialize for WTensor {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = (0..self.photons)
            .map(|j| {
                (0..self.photons)
                    .map(|k| {
                        (0..self.outputs)
                            .map(|l| {
                                let z = self.get(j, k, l);
                                [z.re, z.im]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        WTensorJson {
            photons: self.photons,
            outputs: self.outputs,
            entries,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for WTensor {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let wire = WTensorJson::deserialize(de)?;
        let mut w = Vec::with_capacity(wire.photons * wire.photons * wire.outputs);
        if wire.entries.len() != wire.photons {
            return Err(D::Error::custom(
                "W tensor entries do not match photon count",
            ));
        }
        for row in &wire.entries {
            if row.len() != wire.photons {
                return Err(D::Error::custom(
                    "W tensor entries do not match photon count",
                ));
            }
            for col in row {
                if col.len() != wire.outputs {
                    return Err(D::Error::custom(
                        "W tensor entries do not match output count",
                    ));
                }
                for &[re, im] in col {
                    w.push(Complex64::new(re, im));
                }
            }
        }
        WTensor::new(wire.photons, wire.outputs, w).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Build the W tensor for photons with the given spectra entering the given
/// input modes of a frequency-resolved circuit.
///
/// `V^Ω_{j,k}`, the amplitude for photon `j` to reach output `k` at frequency
/// `Ω`, is the quadrature of `M^{ω,Ω}_{k,inputs[j]} f_j(ω)` over `ω`; then
/// `W_{j,k,l}` is the quadrature of `V^Ω_{j,l} V^{Ω*}_{k,l}` over `Ω`.
pub fn build_w_tensor(
    transfer: &FrequencyResolvedTransfer,
    spectra: &[GaussianSpectrum],
    inputs: &[usize],
) -> Result<WTensor> {
    let n = spectra.len();
    if n == 0 || inputs.len() != n {
        return Err(Error::invalid("need one input mode per photon spectrum"));
    }
    if inputs.iter().any(|&m| m >= transfer.inputs()) {
        return Err(Error::invalid("input mode out of range for the circuit"));
    }
    let grid = &transfer.grid;
    let outputs = transfer.outputs();
    let bins = grid.len();
    let sampled: Vec<Vec<Complex64>> = spectra
        .iter()
        .map(|s| sampled_amplitudes(s, grid))
        .collect::<Result<_>>()?;

    // v[j][k][Ω]
    let mut v = vec![Complex64::new(0.0, 0.0); n * outputs * bins];
    let vidx = |j: usize, k: usize, om: usize| (j * outputs + k) * bins + om;
    match &transfer.kernel {
        TransferKernel::Diagonal(mats) => {
            for j in 0..n {
                for om in 0..bins {
                    let amp = sampled[j][om];
                    let m = &mats[om];
                    for k in 0..outputs {
                        v[vidx(j, k, om)] = m[[k, inputs[j]]] * amp;
                    }
                }
            }
        }
        TransferKernel::General(kernel) => {
            for j in 0..n {
                for (win, &wt) in grid.weights().iter().enumerate() {
                    let amp = sampled[j][win] * wt;
                    for om in 0..bins {
                        let m = &kernel[win][om];
                        for k in 0..outputs {
                            v[vidx(j, k, om)] += m[[k, inputs[j]]] * amp;
                        }
                    }
                }
            }
        }
    }

    let mut w = vec![Complex64::new(0.0, 0.0); n * n * outputs];
    let widx = |j: usize, k: usize, l: usize| (j * n + k) * outputs + l;
    for j in 0..n {
        for k in j..n {
            for l in 0..outputs {
                let mut acc = Complex64::new(0.0, 0.0);
                for (om, &wt) in grid.weights().iter().enumerate() {
                    acc += wt * v[vidx(j, l, om)] * v[vidx(k, l, om)].conj();
                }
                w[widx(j, k, l)] = acc;
                w[widx(k, j, l)] = acc.conj();
            }
        }
    }
    // Roundoff can push |W_jkl| a hair past the Cauchy-Schwarz bound; nudge
    // diagonals to stay within the validated invariant.
    for l in 0..outputs {
        for j in 0..n {
            let d = w[widx(j, j, l)];
            w[widx(j, j, l)] = Complex64::new(d.re.max(0.0), 0.0);
        }
    }
    WTensor::new(n, outputs, w)
}

// ---------------------------------------------------------------------------
// Frequency-dependent meshes.
// ---------------------------------------------------------------------------

/// Circuit imperfections applied across the photon bandwidth.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DispersionConfig {
    /// `dt/dω` per coupler, index-matched to `MeshParams::couplers`.
    /// Empty means no dispersive couplers.
    #[serde(default)]
    pub transmissivity_slopes: Vec<f64>,
    /// Extra path delay per `[layer][mode]`; a delay `τ` contributes a phase
    /// `e^{iωτ}` ahead of that layer. Empty means no delays.
    #[serde(default)]
    pub layer_delays: Vec<Vec<f64>>,
    /// Frequency around which transmissivity slopes are expanded.
    #[serde(default)]
    pub reference_frequency: f64,
}

/// Result of [`frequency_dependent_mesh`]; carries a warning when
/// transmissivity clamping affected more than 1% of (coupler, bin) pairs.
#[derive(Clone, Debug)]
pub struct DispersedMesh {
    pub transfer: FrequencyResolvedTransfer,
    pub clamped_fraction: f64,
    pub warning: Option<String>,
}

/// Evaluate a coupler mesh across a frequency grid with per-coupler
/// transmissivity slopes and per-layer path delays.
///
/// Each bin's matrix is built like [`mesh_to_matrix`], with coupler
/// transmissivities `t + (dt/dω)(ω - ω_ref)` clamped to `[0, 1]` and delay
/// phases applied ahead of each layer; every bin is unitary.
pub fn frequency_dependent_mesh(
    params: &MeshParams,
    dispersion: &DispersionConfig,
    grid: &FrequencyGrid,
) -> Result<DispersedMesh> {
    let n = params.n_modes;
    if !dispersion.transmissivity_slopes.is_empty()
        && dispersion.transmissivity_slopes.len() != params.couplers.len()
    {
        return Err(Error::invalid("need one transmissivity slope per coupler"));
    }
    let n_layers = params
        .couplers
        .iter()
        .map(|c| c.position.layer + 1)
        .max()
        .unwrap_or(0);
    if !dispersion.layer_delays.is_empty() {
        if dispersion.layer_delays.len() > n_layers {
            return Err(Error::invalid(format!(
                "delays given for {} layers but the mesh has {}",
                dispersion.layer_delays.len(),
                n_layers
            )));
        }
        if dispersion.layer_delays.iter().any(|d| d.len() != n) {
            return Err(Error::invalid(
                "each delay layer must list one delay per mode",
            ));
        }
    }

    // Validates coupler placement once; per-bin evaluation below reuses it.
    mesh_to_matrix(params)?;

    let mut clamped = 0usize;
    let mut total = 0usize;
    let mut bins = Vec::with_capacity(grid.len());
    for &omega in grid.points() {
        let delta = omega - dispersion.reference_frequency;
        let mut shifted = params.clone();
        for (i, c) in shifted.couplers.iter_mut().enumerate() {
            let slope = dispersion
                .transmissivity_slopes
                .get(i)
                .copied()
                .unwrap_or(0.0);
            let t = c.transmissivity + slope * delta;
            total += 1;
            if !(0.0..=1.0).contains(&t) {
                clamped += 1;
            }
            c.transmissivity = t.clamp(0.0, 1.0);
        }
        bins.push(mesh_with_delays(&shifted, &dispersion.layer_delays, omega)?);
    }
    let clamped_fraction = if total == 0 {
        0.0
    } else {
        clamped as f64 / total as f64
    };
    let warning = (clamped_fraction > 0.01).then(|| {
        format!(
            "transmissivity clamped on {:.1}% of (coupler, bin) pairs; slopes too steep for this bandwidth",
            100.0 * clamped_fraction
        )
    });
    Ok(DispersedMesh {
        transfer: FrequencyResolvedTransfer::diagonal(grid.clone(), bins)?,
        clamped_fraction,
        warning,
    })
}

/// Mesh evaluation with a delay diagonal `e^{iωτ[ℓ][m]}` inserted ahead of
/// each layer.
fn mesh_with_delays(
    params: &MeshParams,
    delays: &[Vec<f64>],
    omega: f64,
) -> Result<Array2<Complex64>> {
    let n = params.n_modes;
    let n_layers = params
        .couplers
        .iter()
        .map(|c| c.position.layer + 1)
        .max()
        .unwrap_or(0);
    let mut by_layer: Vec<Vec<&crate::mesh::Coupler>> = vec![Vec::new(); n_layers];
    for c in &params.couplers {
        by_layer[c.position.layer].push(c);
    }
    let mut u = Array2::<Complex64>::eye(n);
    for (layer, cs) in by_layer.iter().enumerate() {
        if let Some(d) = delays.get(layer) {
            for (m, &tau) in d.iter().enumerate() {
                let ph = Complex64::from_polar(1.0, omega * tau);
                for col in 0..n {
                    u[[m, col]] *= ph;
                }
            }
        }
        for c in cs {
            let t = c.transmissivity;
            let tr = t.sqrt();
            let refl = (1.0 - t).max(0.0).sqrt();
            let e = Complex64::from_polar(1.0, c.phase);
            let p = c.position.offset;
            for col in 0..n {
                let top = u[[p, col]];
                let bot = u[[p + 1, col]];
                u[[p, col]] = e * tr * top + Complex64::new(0.0, refl) * bot;
                u[[p + 1, col]] = e * Complex64::new(0.0, refl) * top + tr * bot;
            }
        }
    }
    for (m, &theta) in params.output_phases.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, theta);
        for col in 0..n {
            u[[m, col]] *= ph;
        }
    }
    Ok(u)
}
