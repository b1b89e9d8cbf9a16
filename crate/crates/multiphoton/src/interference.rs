//! N-photon event probabilities and outcome distributions.
//!
//! For photons entering a linear circuit with transfer matrix `T`, the
//! probability of a collision-free detection pattern is governed by the
//! `N×N` submatrix `M` picked out by the occupied inputs and outputs. With
//! photon `j` carrying an internal state that overlaps photon `k`'s as
//! `x_{jk}`, the event probability is the tensor permanent (Tichy, PRA 91,
//! 022316 (2015))
//!
//! ```text
//! P = Σ_{σ,ρ ∈ S_N}  Π_a  M[a, σ(a)] · M*[a, ρ(a)] · x[σ(a), ρ(a)]
//! ```
//!
//! normalized by the input multiplicity factorials. Degenerate limits:
//! all-ones `x` recovers `|perm M|²` (ideal bosons), identity `x` the
//! classical permanent of `|M|²` (fully distinguishable photons). Grouping
//! the double sum by the number of positions where `σ` and `ρ` disagree
//! expands `P` in powers of a uniform overlap `x`, `P = Σ_k x^k P^(k)`, whose
//! order-`k` term is the contribution of genuine k-photon interference;
//! truncating the series yields the reduced models evaluated here. The
//! `CircuitW` variant replaces `M M* x` with the per-output tensor
//! `W_{σ(a),ρ(a),o_a}`, covering circuits that themselves degrade
//! distinguishability.
//!
//! Double sums run over `(N!)²` permutation pairs with compensated
//! accumulation; the documented ceiling is `N ≤ 6` for tensor-permanent
//! models and `N ≤ 10` for the ideal model, which needs one permanent only.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::KahanSum;
use crate::matrix::TransferMatrix;
use crate::patterns::{collision_free_patterns, InputMixture, OccupationPattern};
use crate::permanent::permanent;
use crate::photons::{OverlapMatrix, WTensor};

/// Photon-number ceiling for tensor-permanent models (`(N!)²` pair sums).
pub const MAX_PHOTONS_TENSOR: usize = 6;
/// Photon-number ceiling for the ideal model (single permanent per outcome).
pub const MAX_PHOTONS_IDEAL: usize = 10;
/// Largest collision-free support a distribution may enumerate.
pub const MAX_SUPPORT: usize = 10_000_000;

/// Interference model under which event probabilities are evaluated.
#[derive(Clone, Debug)]
pub enum InterferenceModel {
    /// Perfectly indistinguishable photons.
    Ideal,
    /// Pairwise overlaps given by a Gram matrix over photon labels.
    Overlap(OverlapMatrix),
    /// Uniform pairwise overlap `x`, keeping interference orders up to
    /// `k_max` only. Truncation can produce slightly negative event values;
    /// distributions clamp them to zero.
    TruncatedUniform { x: f64, k_max: usize },
    /// Circuit-induced distinguishability via a W tensor.
    CircuitW(WTensor),
}

impl InterferenceModel {
    fn ceiling(&self) -> usize {
        match self {
            InterferenceModel::Ideal => MAX_PHOTONS_IDEAL,
            _ => MAX_PHOTONS_TENSOR,
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match self {
            InterferenceModel::Ideal => "ideal".into(),
            InterferenceModel::Overlap(x) => format!("overlap({} photons)", x.photons()),
            InterferenceModel::TruncatedUniform { x, k_max } => {
                format!("truncated(x={x}, k<={k_max})")
            }
            InterferenceModel::CircuitW(w) => format!("circuit-w({} photons)", w.photons()),
        }
    }
}

/// The `N×N` interference submatrix for an event: row `a` is output slot `a`
/// (outputs expanded by multiplicity, ascending), column `b` is photon `b`
/// (inputs expanded by multiplicity, ascending).
pub fn build_submatrix(
    t: &TransferMatrix,
    input: &OccupationPattern,
    output: &OccupationPattern,
) -> Result<Array2<Complex64>> {
    let n = input.photons();
    if output.photons() != n {
        return Err(Error::invalid(format!(
            "input carries {} photons but output {}",
            n,
            output.photons()
        )));
    }
    if input.max_mode() >= t.inputs() {
        return Err(Error::invalid(format!(
            "input mode {} out of range for {} input modes",
            input.max_mode() + 1,
            t.inputs()
        )));
    }
    if output.max_mode() >= t.outputs() {
        return Err(Error::invalid(format!(
            "output mode {} out of range for {} output modes",
            output.max_mode() + 1,
            t.outputs()
        )));
    }
    let in_modes = input.expand();
    let out_modes = output.expand();
    let mut m = Array2::zeros((n, n));
    for (a, &om) in out_modes.iter().enumerate() {
        for (b, &im) in in_modes.iter().enumerate() {
            m[[a, b]] = t.get(om, im);
        }
    }
    Ok(m)
}

/// All permutations of `0..n` in a flat table, generated in lexicographic
/// order.
struct PermTable {
    n: usize,
    perms: Vec<u8>,
}

impl PermTable {
    fn new(n: usize) -> Self {
        assert!(n <= MAX_PHOTONS_TENSOR + 2);
        let mut perms = Vec::new();
        let mut current: Vec<u8> = (0..n as u8).collect();
        loop {
            perms.extend_from_slice(&current);
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1))
                .rev()
                .find(|&i| current[i] < current[i + 1])
            else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
            current.swap(i, j);
            current[i + 1..].reverse();
        }
        Self { n, perms }
    }

    fn len(&self) -> usize {
        self.perms.len().checked_div(self.n).unwrap_or(0)
    }

    #[inline]
    fn get(&self, idx: usize) -> &[u8] {
        &self.perms[idx * self.n..(idx + 1) * self.n]
    }
}

/// Per-permutation amplitude products `Π_a M[a, σ(a)]`.
fn amplitude_products(m: &Array2<Complex64>, table: &PermTable) -> Vec<Complex64> {
    (0..table.len())
        .map(|p| {
            let perm = table.get(p);
            let mut prod = Complex64::new(1.0, 0.0);
            for (a, &col) in perm.iter().enumerate() {
                prod *= m[[a, col as usize]];
            }
            prod
        })
        .collect()
}

/// Check that a probability's imaginary residue is numerical dust, then
/// drop it and clamp tiny negatives to zero.
fn realize(p: Complex64) -> f64 {
    let scale = p.re.abs().max(1.0);
    debug_assert!(
        p.im.abs() <= 1e-10 * scale,
        "imaginary residue {} on probability {}",
        p.im,
        p.re
    );
    if p.re < 0.0 && p.re > -1e-10 {
        0.0
    } else {
        p.re
    }
}

fn tensor_permanent_overlap(m: &Array2<Complex64>, x: &OverlapMatrix, table: &PermTable) -> f64 {
    let n = m.nrows();
    let amps = amplitude_products(m, table);
    let mut acc = KahanSum::new();
    for p in 0..table.len() {
        let sigma = table.get(p);
        for q in 0..table.len() {
            let rho = table.get(q);
            let mut xprod = Complex64::new(1.0, 0.0);
            for a in 0..n {
                xprod *= x.get(sigma[a] as usize, rho[a] as usize);
            }
            acc.add(amps[p] * amps[q].conj() * xprod);
        }
    }
    realize(acc.value())
}

fn tensor_permanent_w(w: &WTensor, out_modes: &[usize], table: &PermTable) -> f64 {
    let n = out_modes.len();
    let mut acc = KahanSum::new();
    for p in 0..table.len() {
        let sigma = table.get(p);
        for q in 0..table.len() {
            let rho = table.get(q);
            let mut prod = Complex64::new(1.0, 0.0);
            for a in 0..n {
                prod *= w.get(sigma[a] as usize, rho[a] as usize, out_modes[a]);
            }
            acc.add(prod);
        }
    }
    realize(acc.value())
}

/// Series coefficients over a submatrix; index `k` holds the contribution of
/// permutation pairs disagreeing in exactly `k` positions, normalized by the
/// input multiplicity factorial.
fn series_over_submatrix(m: &Array2<Complex64>, s_fact: f64, table: &PermTable) -> Vec<f64> {
    let n = m.nrows();
    let amps = amplitude_products(m, table);
    let mut acc = vec![KahanSum::new(); n + 1];
    for p in 0..table.len() {
        let sigma = table.get(p);
        for q in 0..table.len() {
            let rho = table.get(q);
            let mut k = 0usize;
            for a in 0..n {
                if sigma[a] != rho[a] {
                    k += 1;
                }
            }
            acc[k].add(amps[p] * amps[q].conj());
        }
    }
    acc.into_iter()
        .map(|a| {
            let v = a.value();
            debug_assert!(v.im.abs() <= 1e-10 * v.re.abs().max(1.0));
            v.re / s_fact
        })
        .collect()
}

fn validate_event(
    input: &OccupationPattern,
    output: &OccupationPattern,
    model: &InterferenceModel,
) -> Result<()> {
    if !output.collision_free() {
        return Err(Error::UnsupportedOutcome(format!(
            "threshold detectors cannot resolve pattern {:?}; collision-free outputs only",
            output.occupations()
        )));
    }
    let n = input.photons();
    match model {
        InterferenceModel::Ideal => {}
        InterferenceModel::Overlap(x) => {
            if x.photons() != n {
                return Err(Error::invalid(format!(
                    "overlap matrix covers {} photons, event has {}",
                    x.photons(),
                    n
                )));
            }
        }
        InterferenceModel::TruncatedUniform { x, k_max } => {
            if !(0.0..=1.0).contains(x) {
                return Err(Error::invalid("uniform overlap x must lie in [0, 1]"));
            }
            if *k_max > n {
                return Err(Error::invalid(format!(
                    "truncation order {k_max} exceeds photon number {n}"
                )));
            }
        }
        InterferenceModel::CircuitW(w) => {
            if w.photons() != n {
                return Err(Error::invalid(format!(
                    "W tensor covers {} photons, event has {}",
                    w.photons(),
                    n
                )));
            }
            if output.max_mode() >= w.outputs() {
                return Err(Error::invalid(format!(
                    "W tensor covers {} output modes, event needs mode {}",
                    w.outputs(),
                    output.max_mode() + 1
                )));
            }
        }
    }
    if n > model.ceiling() {
        return Err(Error::invalid(format!(
            "{} photons exceed the ceiling of {} for this model",
            n,
            model.ceiling()
        )));
    }
    Ok(())
}

fn event_prob_with_table(
    t: &TransferMatrix,
    input: &OccupationPattern,
    output: &OccupationPattern,
    model: &InterferenceModel,
    table: &PermTable,
) -> Result<f64> {
    validate_event(input, output, model)?;
    let s_fact = input.multiplicity_factorial();
    match model {
        InterferenceModel::Ideal => {
            let m = build_submatrix(t, input, output)?;
            Ok(permanent(&m)?.norm_sqr() / s_fact)
        }
        InterferenceModel::Overlap(x) => {
            let m = build_submatrix(t, input, output)?;
            Ok(tensor_permanent_overlap(&m, x, table) / s_fact)
        }
        InterferenceModel::TruncatedUniform { x, k_max } => {
            let m = build_submatrix(t, input, output)?;
            let coeffs = series_over_submatrix(&m, s_fact, table);
            Ok(coeffs
                .iter()
                .take(k_max + 1)
                .enumerate()
                .map(|(k, &c)| x.powi(k as i32) * c)
                .sum())
        }
        InterferenceModel::CircuitW(w) => {
            // Bounds on the input side still come from the transfer matrix.
            build_submatrix(t, input, output)?;
            let out_modes = output.expand();
            Ok(tensor_permanent_w(w, &out_modes, table) / s_fact)
        }
    }
}

/// Probability of detecting `output` given `input` photons through `t`.
///
/// Outputs must be collision-free (threshold-detector regime); inputs may
/// carry multiplicities. For `TruncatedUniform` the value is the raw
/// truncated series, which can be slightly negative.
pub fn event_prob(
    t: &TransferMatrix,
    input: &OccupationPattern,
    output: &OccupationPattern,
    model: &InterferenceModel,
) -> Result<f64> {
    let table = PermTable::new(input.photons());
    event_prob_with_table(t, input, output, model, &table)
}

/// Interference-order decomposition of an event probability under uniform
/// overlap: entry `k` is `P^(k)`, with `Σ_k x^k P^(k)` equal to the full
/// overlap-model probability at uniform `x`. `P^(1)` is identically zero
/// (no permutation pair disagrees in exactly one position).
pub fn series_coefficients(
    t: &TransferMatrix,
    input: &OccupationPattern,
    output: &OccupationPattern,
) -> Result<Vec<f64>> {
    validate_event(
        input,
        output,
        &InterferenceModel::TruncatedUniform { x: 1.0, k_max: 0 },
    )?;
    let m = build_submatrix(t, input, output)?;
    let table = PermTable::new(input.photons());
    Ok(series_over_submatrix(
        &m,
        input.multiplicity_factorial(),
        &table,
    ))
}

/// How a distribution's probabilities are scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Raw event probabilities; they sum to the collision-free fraction.
    Physical,
    /// Divided by their sum; they sum to one.
    Renormalized,
}

/// Probabilities over every collision-free pattern of `photons` photons in
/// `modes` output modes, in lexicographic pattern order.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    modes: usize,
    photons: usize,
    patterns: Vec<OccupationPattern>,
    probs: Vec<f64>,
    normalization: Normalization,
}

impl OutcomeDistribution {
    pub fn from_parts(
        modes: usize,
        photons: usize,
        patterns: Vec<OccupationPattern>,
        probs: Vec<f64>,
        normalization: Normalization,
    ) -> Result<Self> {
        if patterns.len() != probs.len() {
            return Err(Error::invalid("pattern and probability counts differ"));
        }
        if patterns.len() != crate::patterns::binomial(modes, photons) as usize {
            return Err(Error::invalid(format!(
                "expected {} collision-free patterns for {photons} photons in {modes} modes, got {}",
                crate::patterns::binomial(modes, photons),
                patterns.len()
            )));
        }
        if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::invalid("probabilities must be non-negative"));
        }
        if patterns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "patterns must be in strictly increasing order",
            ));
        }
        if let Some(p) = patterns
            .iter()
            .find(|p| !p.collision_free() || p.photons() != photons)
        {
            return Err(Error::invalid(format!(
                "pattern {:?} is not a collision-free {photons}-photon pattern",
                p.occupations()
            )));
        }
        Ok(Self {
            modes,
            photons,
            patterns,
            probs,
            normalization,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[OccupationPattern] {
        &self.patterns
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Index of a pattern in the lexicographic support.
    pub fn index_of(&self, pattern: &OccupationPattern) -> Option<usize> {
        self.patterns.binary_search(pattern).ok()
    }

    /// Scale probabilities to sum to one.
    pub fn renormalized(&self) -> Result<Self> {
        let total = self.sum();
        if total <= 0.0 {
            return Err(Error::invalid(
                "cannot renormalize an all-zero distribution",
            ));
        }
        Ok(Self {
            modes: self.modes,
            photons: self.photons,
            patterns: self.patterns.clone(),
            probs: self.probs.iter().map(|p| p / total).collect(),
            normalization: Normalization::Renormalized,
        })
    }
}

/// JSON wire form: patterns as 1-based mode lists in lexicographic order,
/// matching the CSV convention.
#[derive(Serialize, Deserialize)]
struct DistributionJson {
    modes: usize,
    photons: usize,
    normalization: Normalization,
    patterns: Vec<Vec<usize>>,
    probs: Vec<f64>,
}

impl Serialize for OutcomeDistribution {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        DistributionJson {
            modes: self.modes,
            photons: self.photons,
            normalization: self.normalization,
            patterns: self
                .patterns
                .iter()
                .map(|p| p.expand().iter().map(|m| m + 1).collect())
                .collect(),
            probs: self.probs.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for OutcomeDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let wire = DistributionJson::deserialize(de)?;
        let patterns = wire
            .patterns
            .iter()
            .map(|modes| {
                if modes.contains(&0) {
                    return Err(D::Error::custom("pattern mode indices are 1-based"));
                }
                let zero_based: Vec<usize> = modes.iter().map(|&m| m - 1).collect();
                OccupationPattern::from_modes(&zero_based)
                    .map_err(|e| D::Error::custom(e.to_string()))
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        OutcomeDistribution::from_parts(
            wire.modes,
            wire.photons,
            patterns,
            wire.probs,
            wire.normalization,
        )
        .map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Full collision-free outcome distribution of an input (mixture) under a
/// model, with `Physical` normalization.
///
/// Patterns are evaluated independently and in parallel; each probability is
/// computed by a single worker, so results are identical for any thread
/// count.
pub fn output_distribution(
    t: &TransferMatrix,
    input: &InputMixture,
    model: &InterferenceModel,
) -> Result<OutcomeDistribution> {
    let n = input.photons();
    let m = t.outputs();
    if n > m {
        return Err(Error::invalid(format!(
            "{n} photons cannot exit {m} modes without collisions"
        )));
    }
    if input.max_mode() >= t.inputs() {
        return Err(Error::invalid("input mode out of range for the circuit"));
    }
    let support = crate::patterns::binomial(m, n);
    if support > MAX_SUPPORT as f64 {
        return Err(Error::invalid(format!(
            "support of {support:.3e} patterns exceeds the enumeration limit of {MAX_SUPPORT}"
        )));
    }
    let patterns = collision_free_patterns(m, n);
    let table = PermTable::new(n);
    let probs: Vec<f64> = patterns
        .par_iter()
        .map(|out| {
            let mut p = 0.0;
            for (weight, component) in input.components() {
                p += weight * event_prob_with_table(t, component, out, model, &table)?;
            }
            // Truncated-series values may be slightly negative; the
            // distribution clamps them so downstream statistics see a valid
            // (sub-)probability vector.
            Ok(p.max(0.0))
        })
        .collect::<Result<_>>()?;
    OutcomeDistribution::from_parts(m, n, patterns, probs, Normalization::Physical)
}

/// Total physical probability of all collision-free outcomes.
pub fn collision_free_fraction(
    t: &TransferMatrix,
    input: &InputMixture,
    model: &InterferenceModel,
) -> Result<f64> {
    Ok(output_distribution(t, input, model)?.sum())
}
