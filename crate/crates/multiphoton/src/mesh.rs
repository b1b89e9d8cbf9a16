//! Unitary interferometers as square meshes of directional couplers.
//!
//! The mesh follows the rectangular geometry of Clements et al., Optica 3,
//! 1460 (2016): `n` layers of two-mode couplers, even layers coupling mode
//! pairs (0,1), (2,3), ... and odd layers coupling (1,2), (3,4), ...
//! (0-based), for `n(n-1)/2` couplers in total.
//!
//! Coupler convention (all models in this crate are covariant under external
//! phases, so the choice is free but must be used consistently): a coupler
//! with transmissivity `t` and phase `φ` acting on modes `(p, p+1)` applies
//!
//! ```text
//! | √t·e^{iφ}        i√(1-t) |
//! | i√(1-t)·e^{iφ}   √t      |
//! ```
//!
//! that is, a phase shift `φ` on the upper input followed by a symmetric
//! beamsplitter with transmission amplitude `√t` and cross-coupling
//! `i√(1-t)`. Output phase shifters close the mesh.
//!
//! Haar-random unitaries are available two ways: directly, by QR
//! orthonormalization of a complex Ginibre matrix (Mezzadri, Notices AMS 54,
//! 592 (2007)), and by dialing the mesh couplers from position-dependent
//! `Beta(1, β)` transmissivity laws with uniform phases (Russell et al., New
//! J. Phys. 19, 033007 (2017)). The two ensembles are checked against each
//! other statistically in the test suite.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::matrix::TransferMatrix;

/// Location of a coupler in the mesh: `layer` in propagation order, coupling
/// modes `(offset, offset+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CouplerPosition {
    pub layer: usize,
    pub offset: usize,
}

/// One directional coupler: position, power transmissivity and input phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupler {
    pub position: CouplerPosition,
    pub transmissivity: f64,
    pub phase: f64,
}

/// Parameters of a coupler mesh plus output phase shifters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    pub n_modes: usize,
    pub couplers: Vec<Coupler>,
    pub output_phases: Vec<f64>,
}

impl MeshParams {
    /// Validate ranges; phases are folded into `[0, 2π)`.
    pub fn new(
        n_modes: usize,
        mut couplers: Vec<Coupler>,
        output_phases: Vec<f64>,
    ) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("mesh needs at least one mode"));
        }
        if output_phases.len() != n_modes {
            return Err(Error::invalid(format!(
                "expected {} output phases, got {}",
                n_modes,
                output_phases.len()
            )));
        }
        for c in couplers.iter_mut() {
            if c.position.offset + 1 >= n_modes {
                return Err(Error::invalid(format!(
                    "coupler at layer {} offset {} exceeds {} modes",
                    c.position.layer, c.position.offset, n_modes
                )));
            }
            if !(-1e-12..=1.0 + 1e-12).contains(&c.transmissivity) {
                return Err(Error::invalid(format!(
                    "transmissivity {} outside [0, 1]",
                    c.transmissivity
                )));
            }
            c.transmissivity = c.transmissivity.clamp(0.0, 1.0);
            c.phase = fold_phase(c.phase);
        }
        let output_phases = output_phases.into_iter().map(fold_phase).collect();
        Ok(Self {
            n_modes,
            couplers,
            output_phases,
        })
    }

    /// Number of couplers in a full square mesh over `n` modes.
    pub fn full_mesh_size(n: usize) -> usize {
        n * (n - 1) / 2
    }
}

fn fold_phase(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Canonical positions of the full rectangular mesh, ordered by
/// `(layer, offset)`. Even layers host even offsets, odd layers odd offsets.
pub fn full_mesh_positions(n: usize) -> Vec<CouplerPosition> {
    let mut out = Vec::with_capacity(MeshParams::full_mesh_size(n));
    for layer in 0..n {
        let start = layer % 2;
        let mut offset = start;
        while offset + 1 < n {
            out.push(CouplerPosition { layer, offset });
            offset += 2;
        }
    }
    out
}

#[inline]
fn coupler_block(t: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let tr = t.sqrt();
    let refl = (1.0 - t).max(0.0).sqrt();
    let ph = Complex64::from_polar(1.0, phi);
    [
        [ph * tr, Complex64::new(0.0, refl)],
        [ph * Complex64::new(0.0, refl), Complex64::new(tr, 0.0)],
    ]
}

/// Multiply the coupler block into rows `(p, p+1)` of `u` from the left.
fn apply_coupler(u: &mut Array2<Complex64>, p: usize, t: f64, phi: f64) {
    let g = coupler_block(t, phi);
    let n = u.ncols();
    for col in 0..n {
        let top = u[[p, col]];
        let bot = u[[p + 1, col]];
        u[[p, col]] = g[0][0] * top + g[0][1] * bot;
        u[[p + 1, col]] = g[1][0] * top + g[1][1] * bot;
    }
}

/// Evaluate the transfer matrix of a coupler mesh.
///
/// Layers act in ascending order, then the output phase diagonal. Couplers
/// within one layer must act on disjoint mode pairs.
pub fn mesh_to_matrix(params: &MeshParams) -> Result<TransferMatrix> {
    let n = params.n_modes;
    let mut by_layer: Vec<Vec<&Coupler>> = Vec::new();
    for c in &params.couplers {
        if c.position.layer >= by_layer.len() {
            by_layer.resize_with(c.position.layer + 1, Vec::new);
        }
        by_layer[c.position.layer].push(c);
    }
    for (layer, cs) in by_layer.iter().enumerate() {
        let mut used = vec![false; n];
        for c in cs {
            let p = c.position.offset;
            if used[p] || used[p + 1] {
                return Err(Error::invalid(format!(
                    "overlapping couplers in layer {layer} around mode {p}"
                )));
            }
            used[p] = true;
            used[p + 1] = true;
        }
    }

    let mut u = Array2::<Complex64>::eye(n);
    for cs in &by_layer {
        for c in cs {
            apply_coupler(&mut u, c.position.offset, c.transmissivity, c.phase);
        }
    }
    for (m, &theta) in params.output_phases.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, theta);
        for col in 0..n {
            u[[m, col]] *= ph;
        }
    }
    TransferMatrix::new_unitary(u, "mesh")
}

/// Draw an `n x n` unitary from the Haar measure, deterministically per seed.
///
/// A matrix of independent standard complex Gaussians is orthonormalized
/// column by column (modified Gram-Schmidt, with one reorthogonalization
/// pass). The triangular factor of this factorization has a real positive
/// diagonal, which is exactly the phase convention that makes the resulting
/// `Q` Haar-distributed.
pub fn haar_random(n: usize, seed: u64) -> Result<TransferMatrix> {
    if n == 0 {
        return Err(Error::invalid("haar_random requires n >= 1"));
    }
    let mut rng = crate::rng::seeded(seed);
    let dist = rand_distr::StandardNormal;
    let mut g = Array2::<Complex64>::zeros((n, n));
    for z in g.iter_mut() {
        let re: f64 = rng.sample(dist);
        let im: f64 = rng.sample(dist);
        *z = Complex64::new(re, im);
    }

    let mut q = Array2::<Complex64>::zeros((n, n));
    for j in 0..n {
        let mut v: Vec<Complex64> = (0..n).map(|r| g[[r, j]]).collect();
        // Two projection passes keep orthogonality near machine precision.
        for _ in 0..2 {
            for i in 0..j {
                let mut proj = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    proj += q[[r, i]].conj() * v[r];
                }
                for r in 0..n {
                    v[r] -= proj * q[[r, i]];
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-100 {
            return Err(Error::Precision("degenerate Gaussian draw in QR".into()));
        }
        for r in 0..n {
            q[[r, j]] = v[r] / norm;
        }
    }
    TransferMatrix::new_unitary(q, format!("haar(n={n}, seed={seed})"))
}

// ---------------------------------------------------------------------------
// Clements-style decomposition.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    /// Gate multiplies from the left (mixes rows); nulls the lower element of
    /// its mode pair.
    Left,
    /// Inverse gate multiplies from the right (mixes columns); nulls the
    /// element in the left column of its pair.
    Right,
}

#[derive(Clone, Copy, Debug)]
struct PlanStep {
    side: Side,
    /// Low mode of the coupled pair.
    pair: usize,
    /// Element of the working matrix this step nulls (row, col), 0-based.
    nulled: (usize, usize),
    /// Sweep index, 1-based.
    sweep: usize,
    /// Step index within the sweep, 0-based.
    step: usize,
}

/// The element-nulling schedule of the rectangular decomposition. Purely
/// combinatorial: depends only on `n`.
fn nulling_plan(n: usize) -> Vec<PlanStep> {
    let mut plan = Vec::with_capacity(MeshParams::full_mesh_size(n));
    for sweep in 1..n {
        if sweep % 2 == 1 {
            for j in 0..sweep {
                plan.push(PlanStep {
                    side: Side::Right,
                    pair: sweep - 1 - j,
                    nulled: (n - 1 - j, sweep - 1 - j),
                    sweep,
                    step: j,
                });
            }
        } else {
            for j in 1..=sweep {
                plan.push(PlanStep {
                    side: Side::Left,
                    pair: n + j - sweep - 2,
                    nulled: (n + j - sweep - 1, j - 1),
                    sweep,
                    step: j - 1,
                });
            }
        }
    }
    plan
}

/// Transmissivity-law exponent for the coupler realizing step `q` (0-based)
/// of the nulling sweep of length `s`.
///
/// Along a sweep the exponents run through the odd numbers ascending and then
/// the even numbers descending, `1, 3, 5, ..., 6, 4, 2`, so every sweep uses
/// each `β` in `1..=s` once. Measured by decomposing Haar-random unitaries
/// and estimating the per-position transmissivity laws (see
/// `beta_map_matches_decomposed_haar_statistics`).
fn beta_for_step(s: usize, q: usize) -> usize {
    if 2 * q < s {
        2 * q + 1
    } else {
        2 * (s - q)
    }
}

/// Elements already below this magnitude are "nulled" by a bar-state coupler
/// with zero phase (deterministic tie-break).
const NULL_TIE_BREAK: f64 = 1e-14;

/// Decompose a unitary into full-mesh parameters such that
/// [`mesh_to_matrix`] reproduces it.
///
/// The input must be square and unitary within `1e-8` per entry. The result
/// always contains the full `n(n-1)/2` couplers; couplers whose rotation is
/// not needed sit at the bar state `t = 1, φ = 0`.
pub fn clements_decompose(u: &TransferMatrix) -> Result<MeshParams> {
    if u.outputs() != u.inputs() {
        return Err(Error::invalid("decomposition requires a square matrix"));
    }
    let n = u.outputs();
    if crate::linalg::unitarity_defect(u.entries()) > 1e-8 {
        return Err(Error::invalid(
            "decomposition requires a unitary matrix (tol 1e-8)",
        ));
    }
    if n == 1 {
        return MeshParams::new(1, Vec::new(), vec![u.get(0, 0).arg()]);
    }

    let mut w = u.entries().clone();
    let plan = nulling_plan(n);
    // (plan index, pair, t, phi) for each side, in application order.
    let mut rights: Vec<(usize, usize, f64, f64)> = Vec::new();
    let mut lefts: Vec<(usize, usize, f64, f64)> = Vec::new();

    for (idx, step) in plan.iter().enumerate() {
        let p = step.pair;
        let (r, c) = step.nulled;
        match step.side {
            Side::Right => {
                let a = w[[r, p]];
                let b = w[[r, p + 1]];
                debug_assert_eq!(c, p);
                let (t, phi) = if a.norm() < NULL_TIE_BREAK {
                    (1.0, 0.0)
                } else if b.norm() < NULL_TIE_BREAK {
                    (0.0, 0.0)
                } else {
                    let t = b.norm_sqr() / (a.norm_sqr() + b.norm_sqr());
                    let phi = -(Complex64::new(0.0, 1.0) * b / a).arg();
                    (t, phi)
                };
                // w <- w · G(p; t, phi)†
                let tr = t.sqrt();
                let refl = (1.0 - t).sqrt();
                let e = Complex64::from_polar(1.0, -phi);
                for row in 0..n {
                    let x = w[[row, p]];
                    let y = w[[row, p + 1]];
                    w[[row, p]] = e * tr * x - Complex64::new(0.0, refl) * y;
                    w[[row, p + 1]] = -Complex64::new(0.0, refl) * e * x + tr * y;
                }
                debug_assert!(w[[r, p]].norm() < 1e-9);
                rights.push((idx, p, t, phi));
            }
            Side::Left => {
                let a = w[[p, c]];
                let b = w[[p + 1, c]];
                debug_assert_eq!(r, p + 1);
                let (t, phi) = if b.norm() < NULL_TIE_BREAK {
                    (1.0, 0.0)
                } else if a.norm() < NULL_TIE_BREAK {
                    (0.0, 0.0)
                } else {
                    let t = a.norm_sqr() / (a.norm_sqr() + b.norm_sqr());
                    let phi = (Complex64::new(0.0, 1.0) * b / a).arg();
                    (t, phi)
                };
                apply_coupler(&mut w, p, t, phi);
                debug_assert!(w[[p + 1, c]].norm() < 1e-9);
                lefts.push((idx, p, t, phi));
            }
        }
    }

    // w is now diagonal: lefts · u · rights† = diag. Rewrite as
    // u = diag' · lefts' · reversed(rights) by commuting the diagonal through
    // the conjugated left gates: G(p;t,φ)† · diag(a,b) = diag(-b·e^{-iφ}, b)
    // · G(p;t,arg(-a/b)).
    let mut diag: Vec<Complex64> = (0..n).map(|i| w[[i, i]]).collect();
    let mut lefts_primed: Vec<(usize, usize, f64, f64)> = Vec::with_capacity(lefts.len());
    for &(idx, p, t, phi) in lefts.iter().rev() {
        let a = diag[p];
        let b = diag[p + 1];
        if t >= 1.0 {
            // Bar-state gate: diagonal already commutes; keep the phase at 0
            // so an identity input decomposes into an all-trivial mesh.
            diag[p] = a * Complex64::from_polar(1.0, -phi);
            lefts_primed.push((idx, p, t, 0.0));
        } else {
            let phi_new = (-a / b).arg();
            diag[p] = -b * Complex64::from_polar(1.0, -phi);
            lefts_primed.push((idx, p, t, phi_new));
        }
    }
    // Application order: all right gates as applied, then the commuted left
    // gates from last-applied to first.
    let mut applied: Vec<(usize, usize, f64, f64)> = rights;
    applied.extend(lefts_primed);

    let couplers = schedule(n, &applied)
        .into_iter()
        .map(|(position, _, t, phi)| Coupler {
            position,
            transmissivity: t,
            phase: phi,
        })
        .collect();
    let output_phases = diag.iter().map(|z| z.arg()).collect();
    MeshParams::new(n, couplers, output_phases)
}

/// Assign mesh layers to a gate sequence given in application order: each
/// gate lands in the earliest layer after every earlier gate touching one of
/// its modes. Returns `(position, plan index, t, phi)` per gate.
fn schedule(
    n: usize,
    applied: &[(usize, usize, f64, f64)],
) -> Vec<(CouplerPosition, usize, f64, f64)> {
    let mut next_free = vec![0usize; n];
    let mut out = Vec::with_capacity(applied.len());
    for &(idx, p, t, phi) in applied {
        let layer = next_free[p].max(next_free[p + 1]);
        next_free[p] = layer + 1;
        next_free[p + 1] = layer + 1;
        out.push((CouplerPosition { layer, offset: p }, idx, t, phi));
    }
    out.sort_by_key(|&(pos, _, _, _)| pos);
    out
}

// ---------------------------------------------------------------------------
// Haar dialing.
// ---------------------------------------------------------------------------

/// Transmissivity-law exponent for every coupler position of the full mesh:
/// the coupler realizing step `q` of sweep `s` of the decomposition draws its
/// transmissivity from density `β(1-t)^{β-1}` with `β` from [`beta_for_step`].
///
/// The assignment is validated statistically against [`haar_random`] in the
/// test suite rather than taken on trust.
pub fn haar_beta_map(n: usize) -> Vec<(CouplerPosition, usize)> {
    let plan = nulling_plan(n);
    let mut rights: Vec<(usize, usize, f64, f64)> = Vec::new();
    let mut lefts: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (idx, step) in plan.iter().enumerate() {
        match step.side {
            Side::Right => rights.push((idx, step.pair, 0.0, 0.0)),
            Side::Left => lefts.push((idx, step.pair, 0.0, 0.0)),
        }
    }
    let mut applied = rights;
    applied.extend(lefts.iter().rev().copied());
    schedule(n, &applied)
        .into_iter()
        .map(|(pos, idx, _, _)| (pos, beta_for_step(plan[idx].sweep, plan[idx].step)))
        .collect()
}

/// Dial a Haar-random unitary directly on the mesh.
///
/// Transmissivities are drawn per position as `t = 1 - u^{1/β}` (density
/// `β(1-t)^{β-1}`) with `β` from [`haar_beta_map`]; coupler and output
/// phases are uniform on `[0, 2π)`. Draws happen in canonical
/// `(layer, offset)` order, so the result is deterministic per seed.
pub fn sample_haar_mesh(n: usize, seed: u64) -> Result<MeshParams> {
    if n < 2 {
        return Err(Error::invalid("sample_haar_mesh requires n >= 2"));
    }
    let mut rng = crate::rng::seeded(seed);
    let mut couplers = Vec::with_capacity(MeshParams::full_mesh_size(n));
    for (position, beta) in haar_beta_map(n) {
        let u: f64 = rng.random_range(0.0..1.0);
        let t = 1.0 - u.powf(1.0 / beta as f64);
        let phase = rng.random_range(0.0..TAU);
        couplers.push(Coupler {
            position,
            transmissivity: t,
            phase,
        });
    }
    let output_phases = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
    MeshParams::new(n, couplers, output_phases)
}
