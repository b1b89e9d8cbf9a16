//! Hong-Ou-Mandel interference on a balanced beamsplitter: visibility
//! against source overlap, and the dip traced out by a relative delay
//! between Gaussian photons.
//!
//! Run with: cargo run --release --example hom_dip

use multiphoton::characterize::hom_visibility;
use multiphoton::interference::{event_prob, InterferenceModel};
use multiphoton::matrix::TransferMatrix;
use multiphoton::patterns::OccupationPattern;
use multiphoton::photons::{FrequencyGrid, GaussianSpectrum};
use ndarray::array;
use num_complex::Complex64;

fn main() {
    let s = 0.5f64.sqrt();
    let bs = TransferMatrix::new_unitary(
        array![
            [Complex64::new(s, 0.0), Complex64::new(0.0, s)],
            [Complex64::new(0.0, s), Complex64::new(s, 0.0)]
        ],
        "balanced beamsplitter",
    )
    .unwrap();

    println!("visibility vs source overlap (V = x^2 on a balanced splitter):");
    for i in 0..=5 {
        let x = i as f64 / 5.0;
        let v = hom_visibility(&bs, (0, 1), (0, 1), x).unwrap();
        println!("  x = {x:.1}: V = {v:.4}");
    }

    // Delay scan: the overlap of a delayed Gaussian against itself decays as
    // exp(-sigma^2 tau^2 / 2), so the coincidence dip fills back in.
    let sigma = 1.0;
    let input = OccupationPattern::from_modes(&[0, 1]).unwrap();
    let output = input.clone();
    println!("\ncoincidence probability vs delay (sigma = {sigma}):");
    for step in 0..=6 {
        let tau = step as f64 * 0.5;
        let a = GaussianSpectrum::new(0.0, sigma).unwrap();
        // A delay is a linear spectral phase; fold it into a chirp-free
        // envelope by computing the overlap on a grid directly.
        let grid = FrequencyGrid::uniform(-8.0, 8.0, 257).unwrap();
        let x = delayed_overlap(&a, tau, &grid);
        let model = InterferenceModel::Overlap(
            multiphoton::photons::uniform_overlap(2, Complex64::new(x, 0.0)).unwrap(),
        );
        let p = event_prob(&bs, &input, &output, &model).unwrap();
        println!("  tau = {tau:.1}: |x| = {x:.4}, P(coincidence) = {p:.4}");
    }
}

/// |<f | f delayed by tau>| for a Gaussian envelope, by quadrature.
fn delayed_overlap(spectrum: &GaussianSpectrum, tau: f64, grid: &FrequencyGrid) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut norm = 0.0;
    for (&w, &wt) in grid.points().iter().zip(grid.weights()) {
        let amp = spectrum.amplitude(w);
        acc += wt * amp * (amp * Complex64::from_polar(1.0, w * tau)).conj();
        norm += wt * amp.norm_sqr();
    }
    (acc / norm).norm()
}
