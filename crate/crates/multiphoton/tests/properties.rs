//! Property tests over randomized inputs.

mod common;

use multiphoton::interference::{Normalization, OutcomeDistribution};
use multiphoton::linalg::max_abs_diff;
use multiphoton::matrix::{fix_gauge, TransferMatrix};
use multiphoton::patterns::{collision_free_patterns, OccupationPattern};
use multiphoton::permanent::{permanent, permanent_naive};
use multiphoton::photons::uniform_overlap;
use multiphoton::validate::tvd;
use ndarray::Array2;
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_matrix(n: usize) -> impl Strategy<Value = Array2<Complex64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |entries| {
        Array2::from_shape_vec(
            (n, n),
            entries
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gray_code_permanent_matches_permutation_sum(m in complex_matrix(5)) {
        let fast = permanent(&m).unwrap();
        let slow = permanent_naive(&m).unwrap();
        let scale = slow.norm().max(1.0);
        prop_assert!((fast - slow).norm() <= 1e-12 * scale);
    }

    #[test]
    fn permanent_is_transpose_invariant(m in complex_matrix(4)) {
        let a = permanent(&m).unwrap();
        let b = permanent(&m.t().to_owned()).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn gauge_fixing_preserves_magnitudes_and_is_idempotent(
        rows in 2usize..6,
        cols in 2usize..8,
        seed in 0u64..10_000,
    ) {
        use rand::Rng;
        let mut rng = multiphoton::rng::seeded(seed);
        let mut m = Array2::zeros((rows, cols));
        for z in m.iter_mut() {
            *z = Complex64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
        }
        let t = TransferMatrix::new(m, "prop").unwrap();
        let once = fix_gauge(&t);
        let twice = fix_gauge(&once.matrix);
        prop_assert!(max_abs_diff(once.matrix.entries(), twice.matrix.entries()) < 1e-13);
        for (a, b) in t.entries().iter().zip(once.matrix.entries().iter()) {
            prop_assert!((a.norm() - b.norm()).abs() < 1e-13);
        }
        for r in 0..rows {
            prop_assert!(once.matrix.get(r, 0).im.abs() < 1e-13);
            prop_assert!(once.matrix.get(r, 0).re >= -1e-15);
        }
        for c in 0..cols {
            prop_assert!(once.matrix.get(0, c).im.abs() < 1e-13);
            prop_assert!(once.matrix.get(0, c).re >= -1e-15);
        }
    }

    #[test]
    fn tvd_is_symmetric_bounded_and_triangular(
        raw_p in proptest::collection::vec(0.0f64..1.0, 10),
        raw_q in proptest::collection::vec(0.0f64..1.0, 10),
        raw_r in proptest::collection::vec(0.0f64..1.0, 10),
    ) {
        let make = |raw: Vec<f64>| {
            let total: f64 = raw.iter().sum::<f64>() + 1e-9;
            let probs: Vec<f64> = raw.iter().map(|v| (v + 1e-10) / total).collect();
            let total: f64 = probs.iter().sum();
            OutcomeDistribution::from_parts(
                5,
                2,
                collision_free_patterns(5, 2),
                probs.into_iter().map(|p| p / total).collect(),
                Normalization::Renormalized,
            )
            .unwrap()
        };
        let (p, q, r) = (make(raw_p), make(raw_q), make(raw_r));
        let pq = tvd(&p, &q).unwrap();
        prop_assert!((tvd(&q, &p).unwrap() - pq).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!(pq <= tvd(&p, &r).unwrap() + tvd(&r, &q).unwrap() + 1e-12);
    }

    #[test]
    fn uniform_overlap_is_psd_on_valid_range(n in 2usize..6, t in 0.0f64..1.0) {
        // Valid real range is [-1/(n-1), 1].
        let x = -1.0 / (n as f64 - 1.0) + t * (1.0 + 1.0 / (n as f64 - 1.0));
        let m = uniform_overlap(n, Complex64::new(x, 0.0)).unwrap();
        let min_eig = m.eigenvalues()[0];
        prop_assert!(min_eig > -1e-10);
        prop_assert!(m.entries().iter().all(|z| z.norm() <= 1.0 + 1e-12));
    }

    #[test]
    fn pattern_text_round_trip(modes in proptest::collection::vec(0usize..20, 1..8)) {
        let p = OccupationPattern::from_modes(&modes).unwrap();
        let text = p.format_one_based();
        let back = OccupationPattern::parse_one_based(&text).unwrap();
        prop_assert_eq!(p, back);
    }
}
