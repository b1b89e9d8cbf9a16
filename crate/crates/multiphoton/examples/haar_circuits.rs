//! Two routes to a Haar-random interferometer: direct QR sampling and
//! dialing the coupler mesh from position-dependent transmissivity laws.
//!
//! Run with: cargo run --release --example haar_circuits

use multiphoton::mesh::{haar_beta_map, haar_random, mesh_to_matrix, sample_haar_mesh};

fn main() {
    let n = 8;
    let draws = 4000;

    println!("transmissivity-law exponents for the {n}-mode mesh:");
    for (pos, beta) in haar_beta_map(n) {
        if pos.layer <= 2 {
            println!("  layer {} offset {}: beta = {beta}", pos.layer, pos.offset);
        }
    }
    println!("  ... ({} couplers total)\n", haar_beta_map(n).len());

    // |U_00|^2 should follow the same law for both generators: mean 1/n.
    let mut direct = 0.0;
    let mut dialed = 0.0;
    for seed in 0..draws {
        direct += haar_random(n, seed).unwrap().get(0, 0).norm_sqr();
        let params = sample_haar_mesh(n, 100_000 + seed).unwrap();
        dialed += mesh_to_matrix(&params).unwrap().get(0, 0).norm_sqr();
    }
    println!(
        "mean |U_00|^2 over {draws} draws (expected {:.5}):",
        1.0 / n as f64
    );
    println!("  direct QR sampling: {:.5}", direct / draws as f64);
    println!("  dialed coupler mesh: {:.5}", dialed / draws as f64);
}
