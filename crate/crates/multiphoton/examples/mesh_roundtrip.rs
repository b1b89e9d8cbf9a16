//! Decompose a unitary into a rectangular coupler mesh and rebuild it.
//!
//! Run with: cargo run --release --example mesh_roundtrip

use multiphoton::linalg::max_abs_diff;
use multiphoton::mesh::{clements_decompose, haar_random, mesh_to_matrix, MeshParams};

fn main() {
    for n in [4usize, 8, 15] {
        let u = haar_random(n, 2024).unwrap();
        let params = clements_decompose(&u).unwrap();
        let rebuilt = mesh_to_matrix(&params).unwrap();
        let depth = params
            .couplers
            .iter()
            .map(|c| c.position.layer + 1)
            .max()
            .unwrap();
        println!(
            "n = {n:2}: {} couplers (expected {}), {} layers, round-trip error {:.2e}",
            params.couplers.len(),
            MeshParams::full_mesh_size(n),
            depth,
            max_abs_diff(rebuilt.entries(), u.entries()),
        );
    }

    // The mesh JSON is the exchange format for circuits.
    let params = clements_decompose(&haar_random(4, 7).unwrap()).unwrap();
    println!(
        "\nmesh JSON for a 4-mode circuit:\n{}",
        serde_json::to_string_pretty(&params).unwrap()
    );
}
