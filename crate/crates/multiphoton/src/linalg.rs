//! Small dense linear-algebra helpers for complex matrices.
//!
//! Everything here targets the matrix sizes of multiport interferometry
//! (tens of modes at most), so plain loops beat any external solver.

use ndarray::Array2;
use num_complex::Complex64;

/// Max-norm of the difference between two equally shaped matrices.
pub fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest deviation of `u†u` from the identity.
pub fn unitarity_defect(u: &Array2<Complex64>) -> f64 {
    let (rows, cols) = u.dim();
    let mut worst = 0.0f64;
    for i in 0..cols {
        for j in 0..cols {
            let mut dot = Complex64::new(0.0, 0.0);
            for r in 0..rows {
                dot += u[[r, i]].conj() * u[[r, j]];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// The complex Hermitian problem is embedded as the real symmetric matrix
/// `[[Re A, -Im A], [Im A, Re A]]`, whose spectrum is that of `A` doubled;
/// the doubled system is solved by cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(a: &Array2<Complex64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    if n == 0 {
        return Vec::new();
    }
    let m = 2 * n;
    let mut s = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[[i, j]];
            s[i * m + j] = z.re;
            s[i * m + (n + j)] = -z.im;
            s[(n + i) * m + j] = z.im;
            s[(n + i) * m + (n + j)] = z.re;
        }
    }
    let mut eigs = symmetric_jacobi(&mut s, m);
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // Each eigenvalue of A appears twice in the doubling; keep one per pair.
    (0..n)
        .map(|k| 0.5 * (eigs[2 * k] + eigs[2 * k + 1]))
        .collect()
}

/// Cyclic Jacobi eigenvalue iteration for a dense real symmetric matrix
/// stored row-major in `s`. Returns the (unsorted) diagonal after convergence.
fn symmetric_jacobi(s: &mut [f64], n: usize) -> Vec<f64> {
    let idx = |i: usize, j: usize| i * n + j;
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += s[idx(i, j)] * s[idx(i, j)];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = s[idx(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = s[idx(p, p)];
                let aqq = s[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let skp = s[idx(k, p)];
                    let skq = s[idx(k, q)];
                    s[idx(k, p)] = c * skp - sn * skq;
                    s[idx(k, q)] = sn * skp + c * skq;
                }
                for k in 0..n {
                    let spk = s[idx(p, k)];
                    let sqk = s[idx(q, k)];
                    s[idx(p, k)] = c * spk - sn * sqk;
                    s[idx(q, k)] = sn * spk + c * sqk;
                }
            }
        }
    }
    (0..n).map(|i| s[idx(i, i)]).collect()
}

/// Compensated accumulator for complex sums with heavy cancellation
/// (Kahan-Babuška / Neumaier variant, applied per component).
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    re: NeumaierF64,
    im: NeumaierF64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, term: Complex64) {
        self.re.add(term.re);
        self.im.add(term.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct NeumaierF64 {
    sum: f64,
    comp: f64,
}

impl NeumaierF64 {
    #[inline]
    fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn identity_is_unitary() {
        let eye = Array2::<Complex64>::eye(4);
        assert!(unitarity_defect(&eye) < 1e-15);
    }

    #[test]
    fn eigenvalues_of_real_symmetric() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let a = array![
            [Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]
        ];
        let e = hermitian_eigenvalues(&a);
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_of_complex_hermitian() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let a = array![
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
            [Complex64::new(0.0, -1.0), Complex64::new(1.0, 0.0)]
        ];
        let e = hermitian_eigenvalues(&a);
        assert_abs_diff_eq!(e[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn kahan_handles_cancellation() {
        let mut acc = KahanSum::new();
        acc.add(Complex64::new(1e16, 0.0));
        acc.add(Complex64::new(1.0, 0.0));
        acc.add(Complex64::new(-1e16, 0.0));
        assert_abs_diff_eq!(acc.value().re, 1.0, epsilon = 1e-12);
    }
}
