//! Three photons in a 13-mode Haar-random interferometer: the full
//! collision-free outcome distribution under different interference models,
//! and how far each model sits from the ideal one.
//!
//! Run with: cargo run --release --example three_photon_distribution

use multiphoton::interference::{collision_free_fraction, output_distribution, InterferenceModel};
use multiphoton::mesh::haar_random;
use multiphoton::patterns::{InputMixture, OccupationPattern};
use multiphoton::photons::uniform_overlap;
use multiphoton::validate::{fidelity, tvd};
use num_complex::Complex64;

fn main() {
    let u = haar_random(13, 42).unwrap();
    let input = InputMixture::pure(OccupationPattern::from_modes(&[0, 1, 2]).unwrap());

    let ideal = output_distribution(&u, &input, &InterferenceModel::Ideal).unwrap();
    println!(
        "{} collision-free outcomes; collision-free fraction = {:.3}",
        ideal.len(),
        collision_free_fraction(&u, &input, &InterferenceModel::Ideal).unwrap()
    );
    let ideal = ideal.renormalized().unwrap();

    let mut top: Vec<(usize, f64)> = ideal.probs().iter().copied().enumerate().collect();
    top.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    println!("\nfive most likely patterns (ideal photons):");
    for &(idx, p) in top.iter().take(5) {
        println!(
            "  outputs {}: p = {:.5}",
            ideal.patterns()[idx].format_one_based(),
            p
        );
    }

    println!("\ndistance and fidelity to the ideal distribution:");
    for x in [1.0, 0.9, 0.5, 0.0] {
        let model = InterferenceModel::Overlap(uniform_overlap(3, Complex64::new(x, 0.0)).unwrap());
        let dist = output_distribution(&u, &input, &model)
            .unwrap()
            .renormalized()
            .unwrap();
        println!(
            "  uniform overlap x = {x:.1}: D = {:.4}, F = {:.4}",
            tvd(&ideal, &dist).unwrap(),
            fidelity(&ideal, &dist).unwrap()
        );
    }
}
