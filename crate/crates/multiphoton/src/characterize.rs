//! Transfer-matrix reconstruction from single-photon counts and two-photon
//! interference.
//!
//! The procedure mirrors the standard two-stage circuit characterization
//! (cf. Laing & O'Brien, arXiv:1208.2868): entry magnitudes come from
//! single-photon count rates taken input by input; the complex phases come
//! from Hong-Ou-Mandel visibilities measured for pairs of inputs and pairs
//! of outputs, combined in a weighted least-squares (Gaussian maximum
//! likelihood) optimization over the free phases. External input/output
//! phases are unobservable, so the first row and column are pinned to zero
//! and reconstruction is possible only up to complex conjugation of the
//! whole matrix; [`crate::matrix::canonical_conjugation`] picks the reported
//! representative.
//!
//! Visibility convention: `V = (C - Q)/C`, the dip depth relative to the
//! distinguishable-photon coincidence level `C`. Anti-dips give negative `V`;
//! for the overlap model used here `V ∈ [-x², x²]`, so `V ∈ [-1, 1]`.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::matrix::{canonical_conjugation, fix_gauge, TransferMatrix};

/// Single-photon count rates, indexed `counts[input][output]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    counts: Vec<Vec<f64>>,
}

impl CountTable {
    pub fn new(counts: Vec<Vec<f64>>) -> Result<Self> {
        if counts.is_empty() || counts[0].is_empty() {
            return Err(Error::invalid("count table must be non-empty"));
        }
        let outputs = counts[0].len();
        if counts.iter().any(|row| row.len() != outputs) {
            return Err(Error::invalid("count table rows must have equal length"));
        }
        if counts.iter().flatten().any(|&c| !c.is_finite() || c < 0.0) {
            return Err(Error::invalid("counts must be finite and non-negative"));
        }
        if counts.iter().any(|row| row.iter().sum::<f64>() <= 0.0) {
            return Err(Error::invalid(
                "every input needs at least one nonzero count",
            ));
        }
        Ok(Self { counts })
    }

    pub fn inputs(&self) -> usize {
        self.counts.len()
    }

    pub fn outputs(&self) -> usize {
        self.counts[0].len()
    }

    pub fn get(&self, input: usize, output: usize) -> f64 {
        self.counts[input][output]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.counts
    }
}

/// Entry magnitudes from count rates: `|T[k,j]| = √(c[j][k] / Σ_k c[j][k])`.
///
/// Counts are normalized per input, which gauges away the unobservable input
/// coupling efficiencies. Returned matrix is indexed `[output, input]`.
pub fn magnitudes_from_counts(counts: &CountTable) -> Result<Array2<f64>> {
    let (n_in, n_out) = (counts.inputs(), counts.outputs());
    let mut mags = Array2::zeros((n_out, n_in));
    for j in 0..n_in {
        let total: f64 = (0..n_out).map(|k| counts.get(j, k)).sum();
        for k in 0..n_out {
            mags[[k, j]] = (counts.get(j, k) / total).sqrt();
        }
    }
    Ok(mags)
}

/// One measured (or synthesized) Hong-Ou-Mandel visibility.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityRecord {
    /// Input mode pair `(i, j)` with `i < j`, 0-based.
    pub inputs: (usize, usize),
    /// Output mode pair `(k, l)` with `k < l`, 0-based.
    pub outputs: (usize, usize),
    pub visibility: f64,
    /// Statistical uncertainty; strictly positive.
    pub sigma: f64,
}

impl VisibilityRecord {
    pub fn new(
        inputs: (usize, usize),
        outputs: (usize, usize),
        visibility: f64,
        sigma: f64,
    ) -> Result<Self> {
        if inputs.0 >= inputs.1 || outputs.0 >= outputs.1 {
            return Err(Error::invalid(
                "record indices must satisfy i < j and k < l",
            ));
        }
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::invalid("record sigma must be positive"));
        }
        if !visibility.is_finite() || visibility.abs() > 2.0 {
            // The model bounds |V| by 1; noise can push a record slightly
            // past that, but anything far outside is malformed data.
            return Err(Error::invalid(format!(
                "visibility {visibility} far outside [-1, 1]"
            )));
        }
        Ok(Self {
            inputs,
            outputs,
            visibility,
            sigma,
        })
    }
}

/// HOM dip visibility for photons in `inputs = (i, j)` observed as a
/// coincidence across `outputs = (k, l)`, at source overlap `x`.
///
/// `V = (C - Q)/C` with `C = |T_ki T_lj|² + |T_li T_kj|²` the
/// distinguishable coincidence level and `Q` the overlap-model coincidence,
/// which gives `V = -2x² Re(T_ki T_lj T*_kj T*_li) / C`.
pub fn hom_visibility(
    t: &TransferMatrix,
    inputs: (usize, usize),
    outputs: (usize, usize),
    x: f64,
) -> Result<f64> {
    let (i, j) = inputs;
    let (k, l) = outputs;
    if i == j || k == l {
        return Err(Error::invalid(
            "visibility needs distinct inputs and distinct outputs",
        ));
    }
    if j.max(i) >= t.inputs() || l.max(k) >= t.outputs() {
        return Err(Error::invalid("visibility indices out of range"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid("source overlap x must lie in [0, 1]"));
    }
    let a = t.get(k, i) * t.get(l, j);
    let b = t.get(l, i) * t.get(k, j);
    let c = a.norm_sqr() + b.norm_sqr();
    if c == 0.0 {
        return Err(Error::UndefinedVisibility {
            in_a: i,
            in_b: j,
            out_a: k,
            out_b: l,
        });
    }
    Ok(-2.0 * x * x * (a * b.conj()).re / c)
}

/// A batch of visibility records plus the number of pairs skipped because
/// their visibility is undefined (no coincidences in either limit).
#[derive(Clone, Debug)]
pub struct VisibilitySet {
    pub records: Vec<VisibilityRecord>,
    pub undefined_count: usize,
}

/// Synthesize the full visibility data set for the given input modes: one
/// record per (input pair, output pair), with Gaussian noise of width
/// `noise_sigma` added.
///
/// Records carry `sigma = noise_sigma`; for a noiseless synthesis
/// (`noise_sigma = 0`) they carry unit sigma, since a zero uncertainty is
/// not representable in the weighted objective.
pub fn synth_visibility_set(
    t: &TransferMatrix,
    input_modes: &[usize],
    x: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<VisibilitySet> {
    if input_modes.len() < 2 {
        return Err(Error::invalid(
            "need at least two inputs for two-photon interference",
        ));
    }
    if noise_sigma.is_nan() || noise_sigma < 0.0 {
        return Err(Error::invalid("noise sigma must be non-negative"));
    }
    let mut rng = crate::rng::seeded(seed);
    let noise = if noise_sigma > 0.0 {
        Some(Normal::new(0.0, noise_sigma).map_err(|e| Error::invalid(e.to_string()))?)
    } else {
        None
    };
    let recorded_sigma = if noise_sigma > 0.0 { noise_sigma } else { 1.0 };
    let mut records = Vec::new();
    let mut undefined_count = 0usize;
    for a in 0..input_modes.len() {
        for b in (a + 1)..input_modes.len() {
            let (i, j) = (
                input_modes[a].min(input_modes[b]),
                input_modes[a].max(input_modes[b]),
            );
            for k in 0..t.outputs() {
                for l in (k + 1)..t.outputs() {
                    match hom_visibility(t, (i, j), (k, l), x) {
                        Ok(v) => {
                            let noisy = match &noise {
                                Some(n) => v + n.sample(&mut rng),
                                None => v,
                            };
                            records.push(VisibilityRecord {
                                inputs: (i, j),
                                outputs: (k, l),
                                visibility: noisy,
                                sigma: recorded_sigma,
                            });
                        }
                        Err(Error::UndefinedVisibility { .. }) => undefined_count += 1,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    Ok(VisibilitySet {
        records,
        undefined_count,
    })
}

/// Result of a phase-retrieval run.
#[derive(Clone, Debug)]
pub struct CharacterizationResult {
    /// Gauge-fixed matrix, canonical under the conjugation ambiguity.
    pub matrix: TransferMatrix,
    /// Final weighted least-squares objective.
    pub residual: f64,
    pub n_restarts_used: usize,
    /// Gradient norm fell below `1e-8` (relative to the objective's
    /// curvature scale) for the winning restart.
    pub converged: bool,
}

/// One visibility constraint compiled against the free-phase layout.
struct CompiledRecord {
    /// `(flat parameter index, ±1)` for each free phase in the phase sum.
    terms: Vec<(usize, f64)>,
    /// Model amplitude `a_r`: the model predicts `a_r · cos(Σ ± θ)`.
    amplitude: f64,
    weight: f64,
    target: f64,
}

struct Objective {
    records: Vec<CompiledRecord>,
    n_params: usize,
}

impl Objective {
    /// Curvature scale of the weighted objective; gradient thresholds are
    /// taken relative to it so convergence reporting does not depend on the
    /// units of the record uncertainties.
    fn gradient_scale(&self) -> f64 {
        1.0f64.max(
            self.records
                .iter()
                .map(|r| r.weight * r.amplitude * r.amplitude)
                .sum(),
        )
    }
}

impl Objective {
    fn value_and_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut chi2 = 0.0;
        for rec in &self.records {
            let delta: f64 = rec.terms.iter().map(|&(p, s)| s * theta[p]).sum();
            let model = rec.amplitude * delta.cos();
            let diff = model - rec.target;
            chi2 += rec.weight * diff * diff;
            let dmodel = -rec.amplitude * delta.sin();
            let factor = 2.0 * rec.weight * diff * dmodel;
            for &(p, s) in &rec.terms {
                grad[p] += factor * s;
            }
        }
        chi2
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let mut chi2 = 0.0;
        for rec in &self.records {
            let delta: f64 = rec.terms.iter().map(|&(p, s)| s * theta[p]).sum();
            let diff = rec.amplitude * delta.cos() - rec.target;
            chi2 += rec.weight * diff * diff;
        }
        chi2
    }
}

/// Retrieve the phases of a transfer matrix from measured magnitudes and a
/// visibility set; weighted least squares over the free phases with
/// multi-start BFGS (restart 0 is a data-driven initializer, the rest are
/// random). The best restart by objective wins, ties broken by index.
pub fn retrieve_phases(
    magnitudes: &Array2<f64>,
    records: &[VisibilityRecord],
    x_assumed: f64,
    restarts: usize,
    seed: u64,
) -> Result<CharacterizationResult> {
    let (n_out, n_in) = magnitudes.dim();
    if n_out < 2 || n_in < 2 {
        return Err(Error::invalid(
            "need at least a 2x2 matrix to retrieve phases",
        ));
    }
    if magnitudes.iter().any(|&m| !m.is_finite() || m < 0.0) {
        return Err(Error::invalid("magnitudes must be finite and non-negative"));
    }
    if !(0.0 < x_assumed && x_assumed <= 1.0) {
        return Err(Error::invalid("assumed overlap must lie in (0, 1]"));
    }
    if restarts == 0 {
        return Err(Error::invalid("need at least one restart"));
    }
    let n_params = (n_out - 1) * (n_in - 1);
    let param_index = |k: usize, j: usize| (k - 1) * (n_in - 1) + (j - 1);
    if records.len() < n_params {
        return Err(Error::UnderDetermined(format!(
            "{} visibility records cannot constrain {} free phases",
            records.len(),
            n_params
        )));
    }

    // Compile records against the free-phase layout.
    let mut compiled = Vec::with_capacity(records.len());
    for r in records {
        let (i, j) = r.inputs;
        let (k, l) = r.outputs;
        if j >= n_in || l >= n_out {
            return Err(Error::invalid(format!(
                "record ({i},{j})x({k},{l}) outside a {n_out}x{n_in} matrix"
            )));
        }
        if r.sigma.is_nan() || r.sigma <= 0.0 {
            return Err(Error::invalid("record sigma must be positive"));
        }
        let prod_a = magnitudes[[k, i]] * magnitudes[[l, j]];
        let prod_b = magnitudes[[l, i]] * magnitudes[[k, j]];
        let c = prod_a * prod_a + prod_b * prod_b;
        if c == 0.0 {
            // No coincidences in either limit: the record carries no phase
            // information for these magnitudes.
            continue;
        }
        let amplitude = -2.0 * x_assumed * x_assumed * prod_a * prod_b / c;
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(4);
        // Δθ = θ_ki + θ_lj - θ_kj - θ_li with first-row/column phases fixed 0.
        for (row, col, sign) in [(k, i, 1.0), (l, j, 1.0), (k, j, -1.0), (l, i, -1.0)] {
            if row >= 1 && col >= 1 {
                terms.push((param_index(row, col), sign));
            }
        }
        compiled.push(CompiledRecord {
            terms,
            amplitude,
            weight: 1.0 / (r.sigma * r.sigma),
            target: r.visibility,
        });
    }
    if compiled.len() < n_params {
        return Err(Error::UnderDetermined(format!(
            "only {} informative records for {} free phases",
            compiled.len(),
            n_params
        )));
    }
    let objective = Objective {
        records: compiled,
        n_params,
    };

    let smart = smart_initial_phases(magnitudes, records, x_assumed);
    let runs: Vec<(f64, Vec<f64>, bool)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let theta0 = if r == 0 {
                smart.clone()
            } else {
                let mut rng = crate::rng::seeded(crate::rng::derive(seed, r as u64));
                (0..n_params).map(|_| rng.random_range(0.0..TAU)).collect()
            };
            bfgs_minimize(&objective, theta0)
        })
        .collect();

    let mut best = 0usize;
    for idx in 1..runs.len() {
        if runs[idx].0 < runs[best].0 {
            best = idx;
        }
    }
    let (residual, theta, converged) = runs[best].clone();

    let mut entries = Array2::zeros((n_out, n_in));
    for k in 0..n_out {
        for j in 0..n_in {
            let phase = if k >= 1 && j >= 1 {
                theta[param_index(k, j)]
            } else {
                0.0
            };
            entries[[k, j]] = Complex64::from_polar(magnitudes[[k, j]], phase);
        }
    }
    // Visibilities never fix the global conjugation; report the canonical
    // representative of the gauge-fixed matrix.
    let raw = TransferMatrix::new(entries, "retrieved")?;
    let fixed = fix_gauge(&raw).matrix;
    let matrix = canonical_conjugation(&fixed, 1e-9);
    Ok(CharacterizationResult {
        matrix,
        residual,
        n_restarts_used: restarts,
        converged,
    })
}

/// Direct phase estimate used as the first optimizer start.
///
/// Records pairing input 0 with input `j` and output 0 with output `k`
/// constrain `cos θ_kj` alone, giving each phase up to sign; the signs are
/// then voted on within and across columns from difference records. With
/// noiseless data this lands next to the global optimum.
fn smart_initial_phases(
    magnitudes: &Array2<f64>,
    records: &[VisibilityRecord],
    x_assumed: f64,
) -> Vec<f64> {
    let (n_out, n_in) = magnitudes.dim();
    let n_params = (n_out - 1) * (n_in - 1);
    let param_index = |k: usize, j: usize| (k - 1) * (n_in - 1) + (j - 1);
    let mut theta = vec![0.0f64; n_params];

    let amp = |r: &VisibilityRecord| -> Option<f64> {
        let (i, j) = r.inputs;
        let (k, l) = r.outputs;
        let prod_a = magnitudes[[k, i]] * magnitudes[[l, j]];
        let prod_b = magnitudes[[l, i]] * magnitudes[[k, j]];
        let c = prod_a * prod_a + prod_b * prod_b;
        if c <= 0.0 || prod_a * prod_b <= 0.0 {
            return None;
        }
        Some(-2.0 * x_assumed * x_assumed * prod_a * prod_b / c)
    };
    let cos_of = |r: &VisibilityRecord| -> Option<f64> {
        amp(r).map(|a| (r.visibility / a).clamp(-1.0, 1.0))
    };

    // Base magnitudes |θ_kj| from (0, j) x (0, k) records.
    for r in records {
        if r.inputs.0 == 0 && r.outputs.0 == 0 && r.inputs.1 >= 1 && r.outputs.1 >= 1 {
            if let Some(c) = cos_of(r) {
                theta[param_index(r.outputs.1, r.inputs.1)] = c.acos();
            }
        }
    }
    if n_out <= 2 && n_in <= 2 {
        return theta;
    }

    // Row-sign vote within each column from (0, j) x (k, l) records (both
    // outputs free): Δθ = θ_lj - θ_kj. Row 1 anchors each column.
    for j in 1..n_in {
        for l in 2..n_out {
            let mut score = [0.0f64; 2];
            for r in records {
                if r.inputs == (0, j) && r.outputs.1 == l && r.outputs.0 >= 1 {
                    let k = r.outputs.0;
                    if let Some(c) = cos_of(r) {
                        let anchor = theta[param_index(k, j)];
                        let t_l = theta[param_index(l, j)];
                        score[0] += ((t_l - anchor).cos() - c).abs();
                        score[1] += ((-t_l - anchor).cos() - c).abs();
                    }
                }
            }
            if score[1] < score[0] {
                let idx = param_index(l, j);
                theta[idx] = -theta[idx];
            }
        }
    }

    // Column-sign vote relative to column 1 from (1, j) x (0, l) records:
    // Δθ = θ_lj - θ_l1.
    for j in 2..n_in {
        let mut score = [0.0f64; 2];
        for r in records {
            if r.inputs == (1, j) && r.outputs.0 == 0 && r.outputs.1 >= 1 {
                let l = r.outputs.1;
                if let Some(c) = cos_of(r) {
                    let t_lj = theta[param_index(l, j)];
                    let t_l1 = theta[param_index(l, 1)];
                    score[0] += ((t_lj - t_l1).cos() - c).abs();
                    score[1] += ((-t_lj - t_l1).cos() - c).abs();
                }
            }
        }
        if score[1] < score[0] {
            for l in 1..n_out {
                let idx = param_index(l, j);
                theta[idx] = -theta[idx];
            }
        }
    }
    theta
}

/// Dense BFGS with Armijo backtracking; the objective decreases at every
/// accepted step. Returns `(objective, theta, converged)` where convergence
/// means the gradient norm fell below `1e-8` relative to the objective's
/// curvature scale.
fn bfgs_minimize(objective: &Objective, mut theta: Vec<f64>) -> (f64, Vec<f64>, bool) {
    let p = objective.n_params;
    let max_iters = 2000;
    let grad_tol = 1e-10 * objective.gradient_scale();

    let mut h = vec![0.0f64; p * p];
    for i in 0..p {
        h[i * p + i] = 1.0;
    }
    let mut grad = vec![0.0f64; p];
    let mut value = objective.value_and_grad(&theta, &mut grad);

    for _ in 0..max_iters {
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < grad_tol {
            break;
        }
        // d = -H g
        let mut dir = vec![0.0f64; p];
        for i in 0..p {
            let mut acc = 0.0;
            for j in 0..p {
                acc += h[i * p + j] * grad[j];
            }
            dir[i] = -acc;
        }
        let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if slope >= 0.0 {
            // Stale curvature; reset to steepest descent.
            for i in 0..p {
                for j in 0..p {
                    h[i * p + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
            for i in 0..p {
                dir[i] = -grad[i];
            }
        }
        let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();

        let mut alpha = 1.0f64;
        let mut accepted = false;
        let mut new_theta = theta.clone();
        let mut new_value = value;
        for _ in 0..50 {
            for i in 0..p {
                new_theta[i] = theta[i] + alpha * dir[i];
            }
            new_value = objective.value(&new_theta);
            if new_value <= value + 1e-4 * alpha * slope {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        let mut new_grad = vec![0.0f64; p];
        let check = objective.value_and_grad(&new_theta, &mut new_grad);
        debug_assert!((check - new_value).abs() <= 1e-9 * new_value.abs().max(1.0));

        // BFGS update of the inverse Hessian.
        let s: Vec<f64> = (0..p).map(|i| new_theta[i] - theta[i]).collect();
        let y: Vec<f64> = (0..p).map(|i| new_grad[i] - grad[i]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            // H <- (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ
            let mut hy = vec![0.0f64; p];
            for i in 0..p {
                let mut acc = 0.0;
                for j in 0..p {
                    acc += h[i * p + j] * y[j];
                }
                hy[i] = acc;
            }
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..p {
                for j in 0..p {
                    h[i * p + j] += -rho * (s[i] * hy[j] + hy[i] * s[j])
                        + rho * rho * yhy * s[i] * s[j]
                        + rho * s[i] * s[j];
                }
            }
        }
        theta = new_theta;
        grad = new_grad;
        value = new_value;
    }
    let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    (value, theta, gnorm < 1e-8 * objective.gradient_scale())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::mesh::haar_random;
    use approx::assert_abs_diff_eq;
    use rand_distr::Poisson;

    fn beamsplitter() -> TransferMatrix {
        let s = 0.5f64.sqrt();
        let m = ndarray::array![
            [Complex64::new(s, 0.0), Complex64::new(0.0, s)],
            [Complex64::new(0.0, s), Complex64::new(s, 0.0)]
        ];
        TransferMatrix::new_unitary(m, "bs").unwrap()
    }

    /// Gauge-fix and conjugation-canonicalize both, then compare.
    fn recovery_error(truth: &TransferMatrix, recovered: &TransferMatrix) -> f64 {
        let a = canonical_conjugation(&fix_gauge(truth).matrix, 1e-9);
        let b = canonical_conjugation(&fix_gauge(recovered).matrix, 1e-9);
        max_abs_diff(a.entries(), b.entries())
    }

    #[test]
    fn magnitudes_from_uniform_counts() {
        let counts = CountTable::new(vec![vec![1.0, 1.0]]).unwrap();
        let m = magnitudes_from_counts(&counts).unwrap();
        let s = 0.5f64.sqrt();
        assert_abs_diff_eq!(m[[0, 0]], s, epsilon = 1e-15);
        assert_abs_diff_eq!(m[[1, 0]], s, epsilon = 1e-15);
    }

    #[test]
    fn magnitudes_invert_forward_model_exactly() {
        let u = haar_random(6, 31).unwrap();
        let counts = CountTable::new(
            (0..6)
                .map(|j| (0..6).map(|k| 1e7 * u.get(k, j).norm_sqr()).collect())
                .collect(),
        )
        .unwrap();
        let m = magnitudes_from_counts(&counts).unwrap();
        for k in 0..6 {
            for j in 0..6 {
                assert_abs_diff_eq!(m[[k, j]], u.get(k, j).norm(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn magnitudes_reject_dead_input() {
        assert!(CountTable::new(vec![vec![0.0, 0.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn poisson_counts_recover_magnitudes_to_three_percent() {
        let u = haar_random(5, 37).unwrap();
        let mut successes = 0;
        for trial in 0..100u64 {
            let mut rng = crate::rng::seeded(crate::rng::derive(4242, trial));
            let counts = CountTable::new(
                (0..5)
                    .map(|j| {
                        (0..5)
                            .map(|k| {
                                let lambda = 1e4 * u.get(k, j).norm_sqr();
                                if lambda > 0.0 {
                                    Poisson::new(lambda).unwrap().sample(&mut rng)
                                } else {
                                    0.0
                                }
                            })
                            .collect()
                    })
                    .collect(),
            )
            .unwrap();
            let m = magnitudes_from_counts(&counts).unwrap();
            let worst = (0..5)
                .flat_map(|k| (0..5).map(move |j| (k, j)))
                .map(|(k, j)| (m[[k, j]] - u.get(k, j).norm()).abs())
                .fold(0.0, f64::max);
            if worst < 0.03 {
                successes += 1;
            }
        }
        assert!(successes >= 95, "only {successes}/100 trials within 0.03");
    }

    #[test]
    fn beamsplitter_visibility_is_x_squared() {
        let t = beamsplitter();
        assert_abs_diff_eq!(
            hom_visibility(&t, (0, 1), (0, 1), 1.0).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        for &x in &[0.0f64, 0.25, 0.5, 0.9] {
            assert_abs_diff_eq!(
                hom_visibility(&t, (0, 1), (0, 1), x).unwrap(),
                x * x,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn diagonal_circuit_has_zero_visibility() {
        let t = TransferMatrix::new_unitary(ndarray::Array2::eye(2), "id").unwrap();
        assert_abs_diff_eq!(hom_visibility(&t, (0, 1), (0, 1), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn undefined_visibility_when_no_coincidences() {
        let t = TransferMatrix::new_unitary(ndarray::Array2::eye(3), "id").unwrap();
        match hom_visibility(&t, (0, 1), (0, 2), 1.0) {
            Err(Error::UndefinedVisibility { .. }) => {}
            other => panic!("expected undefined visibility, got {other:?}"),
        }
    }

    #[test]
    fn synthesized_set_sizes_match_output_pairs() {
        let u13 = haar_random(13, 41).unwrap();
        let set = synth_visibility_set(&u13, &[0, 1, 2, 3], 1.0, 0.0, 1).unwrap();
        assert_eq!(set.records.len() + set.undefined_count, 468);
        assert_eq!(set.undefined_count, 0);

        let u15 = haar_random(15, 43).unwrap();
        let set = synth_visibility_set(&u15, &[0, 1, 2, 3], 1.0, 0.0, 1).unwrap();
        assert_eq!(set.records.len(), 630);
    }

    #[test]
    fn noiseless_synthesis_reproduces_visibilities_exactly() {
        let u = haar_random(5, 47).unwrap();
        let set = synth_visibility_set(&u, &[0, 1, 2], 0.8, 0.0, 9).unwrap();
        for r in &set.records {
            let v = hom_visibility(&u, r.inputs, r.outputs, 0.8).unwrap();
            assert_eq!(r.visibility, v);
            assert_eq!(r.sigma, 1.0);
        }
    }

    #[test]
    fn beamsplitter_phase_retrieval_from_single_record() {
        let t = beamsplitter();
        let mags = t.magnitudes();
        let set = synth_visibility_set(&t, &[0, 1], 1.0, 0.0, 3).unwrap();
        let result = retrieve_phases(&mags, &set.records, 1.0, 4, 7).unwrap();
        assert!(result.residual < 1e-12, "residual {}", result.residual);
        assert!(result.converged);
        assert!(recovery_error(&t, &result.matrix) < 1e-6);
    }

    #[test]
    fn noiseless_retrieval_recovers_gauge_fixed_matrix() {
        let u = haar_random(8, 53).unwrap();
        let slice = u.select_inputs(&[0, 1, 2, 3]).unwrap();
        let mags = slice.magnitudes();
        let set = synth_visibility_set(&slice, &[0, 1, 2, 3], 1.0, 0.0, 5).unwrap();
        let result = retrieve_phases(&mags, &set.records, 1.0, 8, 11).unwrap();
        assert!(result.residual < 1e-10, "residual {}", result.residual);
        let err = recovery_error(&slice, &result.matrix);
        assert!(err < 1e-6, "recovery error {err}");
    }

    #[test]
    fn retrieval_is_gauge_invariant() {
        let u = haar_random(6, 59).unwrap();
        let slice = u.select_inputs(&[0, 1, 2]).unwrap();
        // External phases on inputs and outputs.
        let mut rotated = slice.entries().clone();
        for (r, mut row) in rotated.rows_mut().into_iter().enumerate() {
            let ph = Complex64::from_polar(1.0, 0.37 * r as f64 + 0.2);
            row.iter_mut().for_each(|z| *z *= ph);
        }
        for (c, mut col) in rotated.columns_mut().into_iter().enumerate() {
            let ph = Complex64::from_polar(1.0, 1.1 * c as f64 - 0.4);
            col.iter_mut().for_each(|z| *z *= ph);
        }
        let rotated = TransferMatrix::new(rotated, "rotated").unwrap();

        let set_a = synth_visibility_set(&slice, &[0, 1, 2], 1.0, 0.0, 2).unwrap();
        let set_b = synth_visibility_set(&rotated, &[0, 1, 2], 1.0, 0.0, 2).unwrap();
        for (a, b) in set_a.records.iter().zip(&set_b.records) {
            assert_abs_diff_eq!(a.visibility, b.visibility, epsilon = 1e-12);
        }
        let ra = retrieve_phases(&slice.magnitudes(), &set_a.records, 1.0, 6, 3).unwrap();
        let rb = retrieve_phases(&rotated.magnitudes(), &set_b.records, 1.0, 6, 3).unwrap();
        assert!(max_abs_diff(ra.matrix.entries(), rb.matrix.entries()) < 1e-6);
    }

    #[test]
    fn conjugate_truths_give_identical_records_and_canonical_result() {
        let u = haar_random(5, 61).unwrap();
        let conj = TransferMatrix::new(u.entries().mapv(|z| z.conj()), "conj").unwrap();
        let set_a = synth_visibility_set(&u, &[0, 1, 2], 1.0, 0.0, 4).unwrap();
        let set_b = synth_visibility_set(&conj, &[0, 1, 2], 1.0, 0.0, 4).unwrap();
        for (a, b) in set_a.records.iter().zip(&set_b.records) {
            assert_abs_diff_eq!(a.visibility, b.visibility, epsilon = 1e-12);
        }
        let slice = u.select_inputs(&[0, 1, 2]).unwrap();
        let result = retrieve_phases(&slice.magnitudes(), &set_a.records, 1.0, 6, 5).unwrap();
        assert!(recovery_error(&slice, &result.matrix) < 1e-6);
        let conj_slice = conj.select_inputs(&[0, 1, 2]).unwrap();
        assert!(recovery_error(&conj_slice, &result.matrix) < 1e-6);
    }

    #[test]
    fn under_determined_record_sets_are_rejected() {
        let u = haar_random(4, 67).unwrap();
        let set = synth_visibility_set(&u, &[0, 1, 2, 3], 1.0, 0.0, 6).unwrap();
        let few = &set.records[..4];
        match retrieve_phases(&u.magnitudes(), few, 1.0, 2, 1) {
            Err(Error::UnderDetermined(_)) => {}
            other => panic!("expected under-determined, got {other:?}"),
        }
    }

    #[test]
    fn noisy_retrieval_stays_close() {
        let u = haar_random(8, 71).unwrap();
        let slice = u.select_inputs(&[0, 1, 2, 3]).unwrap();
        let mags = slice.magnitudes();
        let mut ok = 0;
        for seed in 0..5u64 {
            let set = synth_visibility_set(&slice, &[0, 1, 2, 3], 1.0, 0.01, 100 + seed).unwrap();
            let result = retrieve_phases(&mags, &set.records, 1.0, 10, seed).unwrap();
            if recovery_error(&slice, &result.matrix) < 0.05 {
                ok += 1;
            }
        }
        assert!(ok >= 4, "only {ok}/5 noisy retrievals within 0.05");
    }
}
