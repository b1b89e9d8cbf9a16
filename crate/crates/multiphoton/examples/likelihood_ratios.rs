//! Five photons in a 15-mode circuit, two of them doubled up in the first
//! two inputs: with only a handful of detected events, cumulative likelihood
//! ratios already separate the ideal model from alternatives lacking
//! five-photon interference.
//!
//! Run with: cargo run --release --example likelihood_ratios

use multiphoton::interference::{output_distribution, InterferenceModel, OutcomeDistribution};
use multiphoton::mesh::haar_random;
use multiphoton::patterns::{InputMixture, OccupationPattern};
use multiphoton::photons::{marked_photon_overlap, uniform_overlap};
use multiphoton::validate::{draw_samples, likelihood_ratio_curve};
use num_complex::Complex64;

fn main() {
    let u = haar_random(15, 5).unwrap();
    // Two photons in each of inputs 1 and 2, one in input 4.
    let input = InputMixture::pure(OccupationPattern::from_modes(&[0, 0, 1, 1, 3]).unwrap());

    println!("computing five-photon distributions over 3003 outcomes...");
    let renorm = |m: &InterferenceModel| -> OutcomeDistribution {
        output_distribution(&u, &input, m)
            .unwrap()
            .renormalized()
            .unwrap()
    };
    let ideal = renorm(&InterferenceModel::Ideal);
    let alternatives: Vec<(&str, OutcomeDistribution)> = vec![
        (
            "fully distinguishable",
            renorm(&InterferenceModel::Overlap(
                uniform_overlap(5, Complex64::new(0.0, 0.0)).unwrap(),
            )),
        ),
        (
            "truncated at k=2",
            renorm(&InterferenceModel::TruncatedUniform { x: 1.0, k_max: 2 }),
        ),
        (
            "truncated at k=3",
            renorm(&InterferenceModel::TruncatedUniform { x: 1.0, k_max: 3 }),
        ),
        (
            "truncated at k=4",
            renorm(&InterferenceModel::TruncatedUniform { x: 1.0, k_max: 4 }),
        ),
        (
            "photon 1 distinguishable",
            renorm(&InterferenceModel::Overlap(
                marked_photon_overlap(5, 0).unwrap(),
            )),
        ),
        (
            "photon in input 4 distinguishable",
            renorm(&InterferenceModel::Overlap(
                marked_photon_overlap(5, 4).unwrap(),
            )),
        ),
    ];

    let samples = draw_samples(&ideal, 30, 11).unwrap();
    println!("30 samples drawn from the ideal model; L_t = P(samples|model)/P(samples|ideal)\n");
    println!(
        "{:<36} {:>10} {:>10} {:>10}",
        "model", "L_5", "L_15", "L_30"
    );
    for (name, dist) in &alternatives {
        let curve = likelihood_ratio_curve(&samples, dist, &ideal).unwrap();
        println!(
            "{name:<36} {:>10.2e} {:>10.2e} {:>10.2e}",
            curve.values[4], curve.values[14], curve.values[29]
        );
    }
}
