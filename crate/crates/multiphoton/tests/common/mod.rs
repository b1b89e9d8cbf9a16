//! Shared oracles for the integration suites.
//!
//! Everything here is deliberately independent of the library's evaluation
//! paths: permanents are expanded as explicit permutation sums, outcome sets
//! are enumerated directly, and probabilities follow the textbook Fock-state
//! expressions. Agreement between these oracles and the library is what the
//! acceptance suite certifies, so nothing below may call into the
//! interference evaluators it checks.

// Each test binary compiles this module separately and uses its own subset.
#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;

use multiphoton::matrix::TransferMatrix;
use multiphoton::patterns::OccupationPattern;

/// Permanent as a sum over all permutations, expanded recursively.
pub fn permanent_by_permutations(a: &Array2<Complex64>) -> Complex64 {
    fn recurse(
        a: &Array2<Complex64>,
        row: usize,
        used: &mut Vec<bool>,
        partial: Complex64,
        total: &mut Complex64,
    ) {
        let n = a.nrows();
        if row == n {
            *total += partial;
            return;
        }
        for col in 0..n {
            if !used[col] {
                used[col] = true;
                recurse(a, row + 1, used, partial * a[[row, col]], total);
                used[col] = false;
            }
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    recurse(
        a,
        0,
        &mut vec![false; a.nrows()],
        Complex64::new(1.0, 0.0),
        &mut total,
    );
    total
}

/// All occupation patterns (collisions included) of `photons` photons over
/// `modes` modes, as multiplicity vectors.
pub fn all_outcomes(modes: usize, photons: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; modes];
    fn fill(current: &mut Vec<usize>, mode: usize, remaining: usize, out: &mut Vec<Vec<usize>>) {
        if mode + 1 == current.len() {
            current[mode] = remaining;
            out.push(current.clone());
            return;
        }
        for here in 0..=remaining {
            current[mode] = here;
            fill(current, mode + 1, remaining - here, out);
        }
    }
    if modes == 0 {
        return out;
    }
    fill(&mut current, 0, photons, &mut out);
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Expand a multiplicity vector into one mode index per photon, ascending.
fn expand(occupations: &[usize]) -> Vec<usize> {
    let mut modes = Vec::new();
    for (mode, &mult) in occupations.iter().enumerate() {
        modes.extend(std::iter::repeat_n(mode, mult));
    }
    modes
}

/// Ideal-boson probability of one outcome (any multiplicities):
/// `|perm(M)|² / (Π s_j! Π t_k!)` with the submatrix built from scratch.
pub fn ideal_outcome_probability(
    t: &TransferMatrix,
    input: &OccupationPattern,
    outcome: &[usize],
) -> f64 {
    let in_modes = input.expand();
    let out_modes = expand(outcome);
    assert_eq!(in_modes.len(), out_modes.len());
    let n = in_modes.len();
    let mut m = Array2::zeros((n, n));
    for (a, &om) in out_modes.iter().enumerate() {
        for (b, &im) in in_modes.iter().enumerate() {
            m[[a, b]] = t.get(om, im);
        }
    }
    let s_fact: f64 = input
        .occupations()
        .iter()
        .map(|&(_, mult)| factorial(mult))
        .product();
    let t_fact: f64 = outcome.iter().map(|&mult| factorial(mult)).product();
    permanent_by_permutations(&m).norm_sqr() / (s_fact * t_fact)
}

/// Full ideal-boson outcome distribution over all outcomes, collisions
/// included. Returns `(outcomes, probabilities)`.
pub fn ideal_enumeration(
    t: &TransferMatrix,
    input: &OccupationPattern,
) -> (Vec<Vec<usize>>, Vec<f64>) {
    let outcomes = all_outcomes(t.outputs(), input.photons());
    let probs = outcomes
        .iter()
        .map(|o| ideal_outcome_probability(t, input, o))
        .collect();
    (outcomes, probs)
}

/// Fully distinguishable photons routed independently: probability of a
/// collision-free outcome is a sum over photon-to-mode assignments of
/// products of single-photon transmissions.
pub fn classical_outcome_probability(
    t: &TransferMatrix,
    input: &OccupationPattern,
    out_modes: &[usize],
) -> f64 {
    let in_modes = input.expand();
    let n = in_modes.len();
    assert_eq!(out_modes.len(), n);
    // Sum over assignments (bijections photons -> outcome slots).
    fn recurse(
        trans: &[Vec<f64>],
        photon: usize,
        used: &mut Vec<bool>,
        partial: f64,
        total: &mut f64,
    ) {
        let n = trans.len();
        if photon == n {
            *total += partial;
            return;
        }
        for slot in 0..n {
            if !used[slot] {
                used[slot] = true;
                recurse(
                    trans,
                    photon + 1,
                    used,
                    partial * trans[photon][slot],
                    total,
                );
                used[slot] = false;
            }
        }
    }
    let trans: Vec<Vec<f64>> = in_modes
        .iter()
        .map(|&im| {
            out_modes
                .iter()
                .map(|&om| t.get(om, im).norm_sqr())
                .collect()
        })
        .collect();
    let mut total = 0.0;
    recurse(&trans, 0, &mut vec![false; n], 1.0, &mut total);
    // Photons sharing an input mode are interchangeable; dividing by s!
    // matches the per-event normalization used for labeled photons.
    let s_fact: f64 = input
        .occupations()
        .iter()
        .map(|&(_, mult)| factorial(mult))
        .product();
    total / s_fact
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < n1 && j < n2 {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let f1 = i as f64 / n1 as f64;
        let f2 = j as f64 / n2 as f64;
        d = d.max((f1 - f2).abs());
    }
    d
}

/// Two-sample KS critical distance at significance `alpha`.
pub fn ks_critical(alpha: f64, n1: usize, n2: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n1 + n2) as f64 / (n1 * n2) as f64).sqrt()
}
