//! Statistical comparison of sampled outcomes against candidate models.
//!
//! All comparisons act on renormalized collision-free distributions. The
//! measures are the fidelity `F = (Σ √(p q))²`, the total variation distance
//! `D = ½ Σ |p - q|`, Poisson-bootstrap error bars on `D`, scalar overlap
//! fits, and cumulative likelihood ratios `L_t = Π P(s|A)/P(s|B)` between two
//! candidate models, evaluated in the log domain.

use rayon::prelude::*;
use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::interference::{
    output_distribution, InterferenceModel, Normalization, OutcomeDistribution,
};
use crate::matrix::TransferMatrix;
use crate::patterns::{InputMixture, OccupationPattern};
use crate::photons::uniform_overlap;

/// An ordered list of detected collision-free patterns.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    modes: usize,
    photons: usize,
    samples: Vec<OccupationPattern>,
}

impl SampleSet {
    pub fn new(modes: usize, samples: Vec<OccupationPattern>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("sample set must not be empty"));
        }
        let photons = samples[0].photons();
        for s in &samples {
            if !s.collision_free() {
                return Err(Error::invalid("samples must be collision-free"));
            }
            if s.max_mode() >= modes {
                return Err(Error::invalid(format!(
                    "sample occupies mode {} outside {} modes",
                    s.max_mode() + 1,
                    modes
                )));
            }
            if s.photons() != photons {
                return Err(Error::invalid("samples must share a photon number"));
            }
        }
        Ok(Self {
            modes,
            photons,
            samples,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[OccupationPattern] {
        &self.samples
    }

    /// Counts aggregated per pattern.
    pub fn aggregated(&self) -> BTreeMap<&OccupationPattern, u64> {
        let mut map = BTreeMap::new();
        for s in &self.samples {
            *map.entry(s).or_insert(0) += 1;
        }
        map
    }

    /// Counts aligned to a distribution's lexicographic support.
    pub fn counts_on_support(&self, dist: &OutcomeDistribution) -> Result<Vec<f64>> {
        if dist.modes() != self.modes || dist.photons() != self.photons {
            return Err(Error::invalid(
                "sample set does not match distribution support",
            ));
        }
        let mut counts = vec![0.0; dist.len()];
        for s in &self.samples {
            let idx = dist
                .index_of(s)
                .ok_or_else(|| Error::invalid("sample outside distribution support"))?;
            counts[idx] += 1.0;
        }
        Ok(counts)
    }

    /// Empirical renormalized distribution over the full collision-free
    /// support.
    pub fn empirical(&self) -> Result<OutcomeDistribution> {
        let patterns = crate::patterns::collision_free_patterns(self.modes, self.photons);
        let mut counts = vec![0.0f64; patterns.len()];
        for s in &self.samples {
            let idx = patterns
                .binary_search(s)
                .map_err(|_| Error::invalid("sample outside collision-free support"))?;
            counts[idx] += 1.0;
        }
        let total: f64 = counts.iter().sum();
        let probs = counts.into_iter().map(|c| c / total).collect();
        OutcomeDistribution::from_parts(
            self.modes,
            self.photons,
            patterns,
            probs,
            Normalization::Renormalized,
        )
    }
}

fn check_comparable(p: &OutcomeDistribution, q: &OutcomeDistribution) -> Result<()> {
    if p.len() != q.len() || p.modes() != q.modes() || p.photons() != q.photons() {
        return Err(Error::invalid(format!(
            "distributions not comparable: {} patterns vs {}",
            p.len(),
            q.len()
        )));
    }
    if p.normalization() != Normalization::Renormalized
        || q.normalization() != Normalization::Renormalized
    {
        return Err(Error::invalid(
            "comparisons require renormalized distributions",
        ));
    }
    Ok(())
}

/// Classical fidelity `F = (Σ_j √(p_j q_j))²` between renormalized
/// distributions on the same support.
pub fn fidelity(p: &OutcomeDistribution, q: &OutcomeDistribution) -> Result<f64> {
    check_comparable(p, q)?;
    let s: f64 = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(&a, &b)| (a * b).sqrt())
        .sum();
    Ok(s * s)
}

/// Total variation distance `D = ½ Σ_j |p_j - q_j|`; zero for identical
/// distributions, one for disjoint supports.
pub fn tvd(p: &OutcomeDistribution, q: &OutcomeDistribution) -> Result<f64> {
    check_comparable(p, q)?;
    Ok(0.5
        * p.probs()
            .iter()
            .zip(q.probs())
            .map(|(&a, &b)| (a - b).abs())
            .sum::<f64>())
}

/// Draw `n` independent samples from a renormalized distribution,
/// deterministically per seed.
pub fn draw_samples(dist: &OutcomeDistribution, n: usize, seed: u64) -> Result<SampleSet> {
    if dist.normalization() != Normalization::Renormalized {
        return Err(Error::invalid(
            "sampling requires a renormalized distribution",
        ));
    }
    if n == 0 {
        return Err(Error::invalid("cannot draw zero samples"));
    }
    let mut cumulative = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &p in dist.probs() {
        acc += p;
        cumulative.push(acc);
    }
    let total = *cumulative.last().unwrap();
    let mut rng = crate::rng::seeded(seed);
    let samples = (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(0.0..total);
            let idx = cumulative.partition_point(|&c| c <= u).min(dist.len() - 1);
            dist.patterns()[idx].clone()
        })
        .collect();
    SampleSet::new(dist.modes(), samples)
}

/// Poisson parametric bootstrap of the total variation distance.
///
/// Each trial resamples every pattern count from a Poisson law at the
/// observed count, renormalizes, and recomputes `D` against the model;
/// returns the mean and (sample) standard deviation over trials. The
/// resampling noise typically biases the mean above the plug-in distance.
pub fn poisson_bootstrap_distance(
    counts: &[f64],
    model: &OutcomeDistribution,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if counts.len() != model.len() {
        return Err(Error::invalid("counts must align with the model support"));
    }
    if model.normalization() != Normalization::Renormalized {
        return Err(Error::invalid("bootstrap requires a renormalized model"));
    }
    if trials < 2 {
        return Err(Error::invalid("bootstrap needs at least two trials"));
    }
    if counts.iter().any(|&c| c.is_nan() || c < 0.0) {
        return Err(Error::invalid("counts must be non-negative"));
    }
    if counts.iter().sum::<f64>() <= 0.0 {
        return Err(Error::invalid("all counts are zero"));
    }

    let distances: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = crate::rng::seeded(crate::rng::derive(seed, trial as u64));
            let mut resampled = Vec::with_capacity(counts.len());
            let mut total = 0.0;
            for &c in counts {
                let v = if c > 0.0 {
                    Poisson::new(c).expect("positive mean").sample(&mut rng)
                } else {
                    0.0
                };
                total += v;
                resampled.push(v);
            }
            if total <= 0.0 {
                // Vanishingly unlikely unless the observed counts are tiny.
                return 1.0;
            }
            0.5 * resampled
                .iter()
                .zip(model.probs())
                .map(|(&c, &q)| (c / total - q).abs())
                .sum::<f64>()
        })
        .collect();

    let mean = distances.iter().sum::<f64>() / trials as f64;
    let var = distances
        .iter()
        .map(|d| (d - mean) * (d - mean))
        .sum::<f64>()
        / (trials as f64 - 1.0);
    Ok((mean, var.sqrt()))
}

/// Scalar model family for overlap fitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarFamily {
    /// Uniform pairwise overlap, all interference orders.
    UniformOverlap,
    /// Uniform overlap with the interference series truncated at `k_max`.
    Truncated { k_max: usize },
}

impl ScalarFamily {
    fn model(&self, photons: usize, x: f64) -> Result<InterferenceModel> {
        Ok(match self {
            ScalarFamily::UniformOverlap => {
                InterferenceModel::Overlap(uniform_overlap(photons, x.into())?)
            }
            ScalarFamily::Truncated { k_max } => {
                InterferenceModel::TruncatedUniform { x, k_max: *k_max }
            }
        })
    }
}

/// Minimize the total variation distance between an empirical distribution
/// and a scalar-overlap model family by golden-section search over
/// `x ∈ [0, 1]`, refined until the bracket is narrower than `1e-4`.
/// Returns `(x*, D*)`.
pub fn fit_overlap(
    empirical: &OutcomeDistribution,
    t: &TransferMatrix,
    input: &InputMixture,
    family: ScalarFamily,
) -> Result<(f64, f64)> {
    if empirical.normalization() != Normalization::Renormalized {
        return Err(Error::invalid(
            "fit requires a renormalized empirical distribution",
        ));
    }
    let eval = |x: f64| -> Result<f64> {
        let model = family.model(input.photons(), x)?;
        let dist = output_distribution(t, input, &model)?.renormalized()?;
        tvd(empirical, &dist)
    };

    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut a = 0.0f64;
    let mut b = 1.0f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while (b - a) > 1e-4 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let x_star = 0.5 * (a + b);
    let d_star = eval(x_star)?;
    Ok((x_star, d_star))
}

/// Cumulative likelihood-ratio curve between two candidate models.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodCurve {
    /// `L_t` after `t+1` samples.
    pub values: Vec<f64>,
    /// First sample index (0-based) at which model B assigned probability
    /// zero to an observed pattern while A did not; from there the ratio is
    /// infinite.
    pub divergent_at: Option<usize>,
}

impl LikelihoodCurve {
    pub fn terminal(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// `L_t = Π_{s ≤ t} A(s)/B(s)`, accumulated in the log domain from
/// per-pattern counts so the terminal value is exactly independent of sample
/// order.
///
/// A sample with `A(s) = 0` pins the curve to exactly zero from then on; a
/// sample with `B(s) = 0` flags the curve divergent. A pattern with zero
/// probability under both models is an error.
pub fn likelihood_ratio_curve(
    samples: &SampleSet,
    model_a: &OutcomeDistribution,
    model_b: &OutcomeDistribution,
) -> Result<LikelihoodCurve> {
    check_comparable(model_a, model_b)?;
    if model_a.modes() != samples.modes() || model_a.photons() != samples.photons() {
        return Err(Error::invalid("samples do not match the models' support"));
    }

    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let mut zero_a = false;
    let mut zero_b = false;
    let mut values = Vec::with_capacity(samples.len());
    let mut divergent_at = None;

    for (t, s) in samples.samples().iter().enumerate() {
        let idx = model_a
            .index_of(s)
            .ok_or_else(|| Error::invalid("sample outside the models' support"))?;
        let pa = model_a.probs()[idx];
        let pb = model_b.probs()[idx];
        if pa == 0.0 && pb == 0.0 {
            return Err(Error::invalid(format!(
                "pattern {} has zero probability under both models",
                s.format_one_based()
            )));
        }
        if pa == 0.0 {
            zero_a = true;
        }
        if pb == 0.0 {
            zero_b = true;
            if divergent_at.is_none() {
                divergent_at = Some(t);
            }
        }
        *counts.entry(idx).or_insert(0) += 1;

        let value = if zero_a && zero_b {
            f64::NAN
        } else if zero_a {
            0.0
        } else if zero_b {
            f64::INFINITY
        } else {
            // Recomputing from aggregated counts in index order makes every
            // prefix, and in particular the terminal value, independent of
            // the order samples arrived in.
            let log_l: f64 = counts
                .iter()
                .map(|(&i, &c)| c as f64 * (model_a.probs()[i].ln() - model_b.probs()[i].ln()))
                .sum();
            log_l.exp()
        };
        values.push(value);
    }
    Ok(LikelihoodCurve {
        values,
        divergent_at,
    })
}

/// Distance summary of one model against observed counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelComparison {
    pub model: String,
    /// Plug-in total variation distance.
    pub distance: f64,
    /// Poisson-bootstrap mean of the distance.
    pub distance_mean: f64,
    /// Poisson-bootstrap standard deviation of the distance.
    pub distance_std: f64,
    /// Fitted scalar overlap, for families with a free `x`.
    pub x_fit: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interference::output_distribution;
    use crate::mesh::haar_random;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn pattern(modes: &[usize]) -> OccupationPattern {
        OccupationPattern::from_modes(modes).unwrap()
    }

    fn two_point(p0: f64, p1: f64) -> OutcomeDistribution {
        OutcomeDistribution::from_parts(
            2,
            1,
            vec![pattern(&[0]), pattern(&[1])],
            vec![p0, p1],
            Normalization::Renormalized,
        )
        .unwrap()
    }

    #[test]
    fn fidelity_and_tvd_basics() {
        let p = two_point(1.0, 0.0);
        let q = two_point(0.5, 0.5);
        let r = two_point(0.0, 1.0);
        assert_abs_diff_eq!(fidelity(&p, &p).unwrap(), 1.0);
        assert_abs_diff_eq!(fidelity(&p, &r).unwrap(), 0.0);
        assert_abs_diff_eq!(fidelity(&p, &q).unwrap(), 0.5);
        assert_abs_diff_eq!(tvd(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(tvd(&p, &r).unwrap(), 1.0);
        assert_abs_diff_eq!(tvd(&p, &q).unwrap(), 0.5);
    }

    #[test]
    fn comparisons_reject_mismatched_supports() {
        let p = two_point(1.0, 0.0);
        let q = OutcomeDistribution::from_parts(
            3,
            1,
            vec![pattern(&[0]), pattern(&[1]), pattern(&[2])],
            vec![0.5, 0.25, 0.25],
            Normalization::Renormalized,
        )
        .unwrap();
        assert!(tvd(&p, &q).is_err());
        assert!(fidelity(&p, &q).is_err());
    }

    #[test]
    fn tvd_is_a_metric_on_random_triples() {
        let mut rng = crate::rng::seeded(5);
        for _ in 0..50 {
            let mut make = || {
                let raw: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
                let total: f64 = raw.iter().sum();
                OutcomeDistribution::from_parts(
                    4,
                    2,
                    crate::patterns::collision_free_patterns(4, 2),
                    raw.into_iter().map(|v| v / total).collect(),
                    Normalization::Renormalized,
                )
                .unwrap()
            };
            let (p, q, r) = (make(), make(), make());
            let pq = tvd(&p, &q).unwrap();
            let qp = tvd(&q, &p).unwrap();
            assert_abs_diff_eq!(pq, qp, epsilon = 1e-15);
            assert!(pq <= tvd(&p, &r).unwrap() + tvd(&r, &q).unwrap() + 1e-12);
            assert!((0.0..=1.0).contains(&pq));
        }
    }

    #[test]
    fn draw_samples_point_mass_and_determinism() {
        let point = two_point(0.0, 1.0);
        let s = draw_samples(&point, 100, 3).unwrap();
        assert!(s.samples().iter().all(|p| *p == pattern(&[1])));

        let u = haar_random(5, 2).unwrap();
        let dist = output_distribution(
            &u,
            &InputMixture::pure(pattern(&[0, 1])),
            &InterferenceModel::Ideal,
        )
        .unwrap()
        .renormalized()
        .unwrap();
        let a = draw_samples(&dist, 500, 77).unwrap();
        let b = draw_samples(&dist, 500, 77).unwrap();
        assert_eq!(a, b);
        let c = draw_samples(&dist, 500, 78).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn draw_samples_requires_renormalized() {
        let u = haar_random(5, 2).unwrap();
        let physical = output_distribution(
            &u,
            &InputMixture::pure(pattern(&[0, 1])),
            &InterferenceModel::Ideal,
        )
        .unwrap();
        assert!(draw_samples(&physical, 10, 1).is_err());
    }

    #[test]
    fn empirical_frequencies_concentrate() {
        // 10-pattern distribution: 2 photons in 5 modes.
        let u = haar_random(5, 11).unwrap();
        let dist = output_distribution(
            &u,
            &InputMixture::pure(pattern(&[0, 1])),
            &InterferenceModel::Ideal,
        )
        .unwrap()
        .renormalized()
        .unwrap();
        let n = 100_000;
        let samples = draw_samples(&dist, n, 13).unwrap();
        let emp = samples.empirical().unwrap();
        for (e, p) in emp.probs().iter().zip(dist.probs()) {
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (e - p).abs() <= 3.0 * sigma + 1e-9,
                "empirical {e} vs {p} (3σ = {})",
                3.0 * sigma
            );
        }
    }

    #[test]
    fn bootstrap_of_model_counts_is_small_and_reproducible() {
        let u = haar_random(13, 3).unwrap();
        let dist = output_distribution(
            &u,
            &InputMixture::pure(pattern(&[0, 1, 2])),
            &InterferenceModel::Ideal,
        )
        .unwrap()
        .renormalized()
        .unwrap();
        let counts: Vec<f64> = dist.probs().iter().map(|p| p * 1e5).collect();
        let (mean, std) = poisson_bootstrap_distance(&counts, &dist, 50, 1).unwrap();
        assert!(mean < 0.05, "bootstrap mean {mean}");
        assert!(std > 0.0);
        let again = poisson_bootstrap_distance(&counts, &dist, 50, 1).unwrap();
        assert_eq!((mean, std), again);

        let pair_a = poisson_bootstrap_distance(&counts, &dist, 2, 9).unwrap();
        let pair_b = poisson_bootstrap_distance(&counts, &dist, 2, 9).unwrap();
        assert_eq!(pair_a, pair_b);
    }

    #[test]
    fn bootstrap_bias_is_nonnegative_on_average() {
        let u = haar_random(8, 5).unwrap();
        let dist = output_distribution(
            &u,
            &InputMixture::pure(pattern(&[0, 1, 2])),
            &InterferenceModel::Ideal,
        )
        .unwrap()
        .renormalized()
        .unwrap();
        let mut bias_sum = 0.0;
        for rep in 0..100u64 {
            let samples = draw_samples(&dist, 2000, 900 + rep).unwrap();
            let counts = samples.counts_on_support(&dist).unwrap();
            let raw = tvd(&samples.empirical().unwrap(), &dist).unwrap();
            let (mean, _) = poisson_bootstrap_distance(&counts, &dist, 20, rep).unwrap();
            bias_sum += mean - raw;
        }
        assert!(bias_sum / 100.0 >= 0.0, "mean bias {}", bias_sum / 100.0);
    }

    #[test]
    fn bootstrap_rejects_zero_counts() {
        let dist = two_point(0.5, 0.5);
        assert!(poisson_bootstrap_distance(&[0.0, 0.0], &dist, 10, 1).is_err());
    }

    #[test]
    fn fit_overlap_recovers_generating_x() {
        let u = haar_random(8, 19).unwrap();
        let input = InputMixture::pure(pattern(&[0, 1, 2]));
        let truth = output_distribution(
            &u,
            &input,
            &InterferenceModel::Overlap(uniform_overlap(3, Complex64::new(0.9, 0.0)).unwrap()),
        )
        .unwrap()
        .renormalized()
        .unwrap();
        let samples = draw_samples(&truth, 1_000_000, 23).unwrap();
        let emp = samples.empirical().unwrap();
        let (x_star, d_star) = fit_overlap(&emp, &u, &input, ScalarFamily::UniformOverlap).unwrap();
        assert!((x_star - 0.9).abs() < 0.02, "fitted x = {x_star}");
        assert!(d_star < 0.05);
    }

    #[test]
    fn fit_overlap_boundary_recovery() {
        let u = haar_random(8, 29).unwrap();
        let input = InputMixture::pure(pattern(&[0, 1, 2]));
        let ideal = output_distribution(&u, &input, &InterferenceModel::Ideal)
            .unwrap()
            .renormalized()
            .unwrap();
        let (x_ideal, _) = fit_overlap(&ideal, &u, &input, ScalarFamily::UniformOverlap).unwrap();
        assert!(x_ideal > 0.98, "x for ideal data = {x_ideal}");

        let dist = output_distribution(
            &u,
            &input,
            &InterferenceModel::Overlap(uniform_overlap(3, Complex64::new(0.0, 0.0)).unwrap()),
        )
        .unwrap()
        .renormalized()
        .unwrap();
        let (x_dist, _) = fit_overlap(&dist, &u, &input, ScalarFamily::UniformOverlap).unwrap();
        assert!(x_dist < 0.1, "x for distinguishable data = {x_dist}");
    }

    #[test]
    fn likelihood_curve_identical_models_is_all_ones() {
        let u = haar_random(6, 31).unwrap();
        let dist = output_distribution(
            &u,
            &InputMixture::pure(pattern(&[0, 1])),
            &InterferenceModel::Ideal,
        )
        .unwrap()
        .renormalized()
        .unwrap();
        let samples = draw_samples(&dist, 40, 3).unwrap();
        let curve = likelihood_ratio_curve(&samples, &dist, &dist).unwrap();
        assert!(curve.values.iter().all(|&v| v == 1.0));
        assert_eq!(curve.divergent_at, None);
    }

    #[test]
    fn zero_probability_under_a_latches_zero() {
        let b = two_point(0.5, 0.5);
        let a = two_point(1.0, 0.0);
        let samples = SampleSet::new(2, vec![pattern(&[0]), pattern(&[1]), pattern(&[0])]).unwrap();
        let curve = likelihood_ratio_curve(&samples, &a, &b).unwrap();
        assert!(curve.values[0] > 0.0);
        assert_eq!(curve.values[1], 0.0);
        assert_eq!(curve.values[2], 0.0);
        assert_eq!(curve.terminal(), 0.0);

        // Reversed roles: B assigns zero, the curve is divergent.
        let curve = likelihood_ratio_curve(&samples, &b, &a).unwrap();
        assert_eq!(curve.divergent_at, Some(1));
        assert!(curve.values[1].is_infinite());
    }

    #[test]
    fn terminal_value_is_exactly_order_invariant() {
        let u = haar_random(7, 37).unwrap();
        let input = InputMixture::pure(pattern(&[0, 1, 2]));
        let b = output_distribution(&u, &input, &InterferenceModel::Ideal)
            .unwrap()
            .renormalized()
            .unwrap();
        let a = output_distribution(
            &u,
            &input,
            &InterferenceModel::Overlap(uniform_overlap(3, Complex64::new(0.0, 0.0)).unwrap()),
        )
        .unwrap()
        .renormalized()
        .unwrap();
        let samples = draw_samples(&b, 60, 41).unwrap();
        let mut reversed: Vec<OccupationPattern> = samples.samples().to_vec();
        reversed.reverse();
        let shuffled = SampleSet::new(7, reversed).unwrap();
        let c1 = likelihood_ratio_curve(&samples, &a, &b).unwrap();
        let c2 = likelihood_ratio_curve(&shuffled, &a, &b).unwrap();
        assert_eq!(c1.terminal(), c2.terminal());
    }

    #[test]
    fn likelihood_decays_at_kl_rate_for_wrong_model() {
        let u = haar_random(7, 43).unwrap();
        let input = InputMixture::pure(pattern(&[0, 1, 2]));
        let b = output_distribution(&u, &input, &InterferenceModel::Ideal)
            .unwrap()
            .renormalized()
            .unwrap();
        let a = output_distribution(
            &u,
            &input,
            &InterferenceModel::Overlap(uniform_overlap(3, Complex64::new(0.0, 0.0)).unwrap()),
        )
        .unwrap()
        .renormalized()
        .unwrap();
        // KL(B ‖ A): expected per-sample log ratio when sampling from B.
        let kl: f64 = b
            .probs()
            .iter()
            .zip(a.probs())
            .filter(|(&pb, _)| pb > 0.0)
            .map(|(&pb, &pa)| pb * (pb.ln() - pa.ln()))
            .sum();
        assert!(kl > 0.0);

        let mut negative_slopes = 0;
        let mut slope_sum = 0.0;
        for rep in 0..100u64 {
            let samples = draw_samples(&b, 30, 5000 + rep).unwrap();
            let curve = likelihood_ratio_curve(&samples, &a, &b).unwrap();
            // Least-squares slope of log L_t against t.
            let logs: Vec<f64> = curve.values.iter().map(|v| v.ln()).collect();
            let n = logs.len() as f64;
            let t_mean = (n - 1.0) / 2.0;
            let l_mean = logs.iter().sum::<f64>() / n;
            let mut num = 0.0;
            let mut den = 0.0;
            for (t, &l) in logs.iter().enumerate() {
                num += (t as f64 - t_mean) * (l - l_mean);
                den += (t as f64 - t_mean) * (t as f64 - t_mean);
            }
            let slope = num / den;
            slope_sum += slope;
            if slope < 0.0 {
                negative_slopes += 1;
            }
        }
        assert!(
            negative_slopes >= 95,
            "negative slope in {negative_slopes}/100 runs"
        );
        let mean_slope = slope_sum / 100.0;
        assert!(
            (mean_slope + kl).abs() < 0.5 * kl,
            "mean slope {mean_slope} vs -KL {}",
            -kl
        );
    }
}
