//! Four photons from two pair sources entering a 13-mode circuit: either
//! source can fire twice, so the input is an incoherent mixture of three
//! four-photon configurations. Truncating the interference series at
//! successively lower orders moves the model away from the full one.
//!
//! Run with: cargo run --release --example four_photon_mixture

use multiphoton::interference::{output_distribution, InterferenceModel};
use multiphoton::mesh::haar_random;
use multiphoton::patterns::{InputMixture, OccupationPattern};
use multiphoton::photons::uniform_overlap;
use multiphoton::validate::tvd;
use num_complex::Complex64;

fn main() {
    let u = haar_random(13, 4).unwrap();
    let third = 1.0 / 3.0;
    let input = InputMixture::new(vec![
        (third, OccupationPattern::from_modes(&[0, 1, 2, 3]).unwrap()),
        (third, OccupationPattern::from_modes(&[0, 0, 1, 1]).unwrap()),
        (third, OccupationPattern::from_modes(&[2, 2, 3, 3]).unwrap()),
    ])
    .unwrap();

    let x = 0.92;
    let full = output_distribution(
        &u,
        &input,
        &InterferenceModel::Overlap(uniform_overlap(4, Complex64::new(x, 0.0)).unwrap()),
    )
    .unwrap()
    .renormalized()
    .unwrap();
    println!(
        "{} outcome patterns for the four-photon mixture",
        full.len()
    );

    println!("\ndistance to the full model (uniform overlap x = {x}):");
    let ideal = output_distribution(&u, &input, &InterferenceModel::Ideal)
        .unwrap()
        .renormalized()
        .unwrap();
    println!(
        "  ideal photons:        D = {:.4}",
        tvd(&full, &ideal).unwrap()
    );
    for k_max in (0..=4).rev() {
        let dist = output_distribution(
            &u,
            &input,
            &InterferenceModel::TruncatedUniform { x, k_max },
        )
        .unwrap()
        .renormalized()
        .unwrap();
        println!(
            "  series kept to k <= {k_max}: D = {:.4}",
            tvd(&full, &dist).unwrap()
        );
    }
}
