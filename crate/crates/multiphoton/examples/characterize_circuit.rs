//! Reconstruct a transfer matrix the way a chip is characterized on the
//! bench: single-photon counts give the entry magnitudes, two-photon
//! interference visibilities give the phases.
//!
//! Run with: cargo run --release --example characterize_circuit

use multiphoton::characterize::{
    magnitudes_from_counts, retrieve_phases, synth_visibility_set, CountTable,
};
use multiphoton::linalg::max_abs_diff;
use multiphoton::matrix::{canonical_conjugation, fix_gauge};
use multiphoton::mesh::haar_random;

fn main() {
    // The chip: a 13-mode Haar-random interferometer probed through its
    // first four inputs.
    let chip = haar_random(13, 2718).unwrap();
    let truth = chip.select_inputs(&[0, 1, 2, 3]).unwrap();

    // Stage 1: magnitudes from per-input count rates.
    let counts = CountTable::new(
        (0..4)
            .map(|j| (0..13).map(|k| 1e6 * truth.get(k, j).norm_sqr()).collect())
            .collect(),
    )
    .unwrap();
    let magnitudes = magnitudes_from_counts(&counts).unwrap();

    // Stage 2: one visibility per input pair and output pair, with
    // measurement noise.
    let noise = 0.01;
    let set = synth_visibility_set(&truth, &[0, 1, 2, 3], 1.0, noise, 99).unwrap();
    println!(
        "{} visibility records ({} undefined pairs skipped), noise sigma = {noise}",
        set.records.len(),
        set.undefined_count
    );

    let result = retrieve_phases(&magnitudes, &set.records, 1.0, 20, 7).unwrap();
    println!(
        "weighted residual = {:.3e}, converged = {}, restarts used = {}",
        result.residual, result.converged, result.n_restarts_used
    );

    let reference = canonical_conjugation(&fix_gauge(&truth).matrix, 1e-9);
    let err = max_abs_diff(result.matrix.entries(), reference.entries());
    println!("max entry error against the gauge-fixed truth: {err:.2e}");
}
