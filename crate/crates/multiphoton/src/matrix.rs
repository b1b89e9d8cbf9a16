//! Complex transfer matrices of linear-optical circuits.
//!
//! A [`TransferMatrix`] maps input-mode amplitudes to output-mode amplitudes;
//! rows index output modes, columns index input modes. Matrices may be
//! rectangular slices of a larger unitary (a partially characterized chip) and
//! are then sub-unitary: column norms never exceed one.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Per-entry tolerance for declaring a square matrix unitary.
pub const UNITARY_TOL: f64 = 1e-10;

/// Transfer matrix of a linear circuit; entries indexed `[output, input]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    entries: Array2<Complex64>,
    label: String,
}

impl TransferMatrix {
    /// Wrap a complex matrix, validating finiteness and physicality
    /// (column norms at most one, up to roundoff).
    pub fn new(entries: Array2<Complex64>, label: impl Into<String>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::invalid("transfer matrix must be non-empty"));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::invalid("transfer matrix entries must be finite"));
        }
        for c in 0..entries.ncols() {
            let norm_sq: f64 = entries.column(c).iter().map(|z| z.norm_sqr()).sum();
            if norm_sq > 1.0 + 1e-10 {
                return Err(Error::invalid(format!(
                    "column {} has norm {} > 1; not a physical transfer matrix",
                    c + 1,
                    norm_sq.sqrt()
                )));
            }
        }
        Ok(Self {
            entries,
            label: label.into(),
        })
    }

    /// Wrap a matrix that must be square and unitary within [`UNITARY_TOL`].
    pub fn new_unitary(entries: Array2<Complex64>, label: impl Into<String>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::invalid("unitary transfer matrix must be square"));
        }
        let defect = linalg::unitarity_defect(&entries);
        if defect > UNITARY_TOL {
            return Err(Error::invalid(format!(
                "matrix is not unitary: max |u†u - 1| = {defect:.3e}"
            )));
        }
        Self::new(entries, label)
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    /// Number of output modes (rows).
    pub fn outputs(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of input modes (columns).
    pub fn inputs(&self) -> usize {
        self.entries.ncols()
    }

    pub fn get(&self, output: usize, input: usize) -> Complex64 {
        self.entries[[output, input]]
    }

    /// True when square and unitary within [`UNITARY_TOL`].
    pub fn is_unitary(&self) -> bool {
        self.entries.nrows() == self.entries.ncols()
            && linalg::unitarity_defect(&self.entries) <= UNITARY_TOL
    }

    /// Keep only the given input columns (0-based), preserving order.
    pub fn select_inputs(&self, inputs: &[usize]) -> Result<Self> {
        for &j in inputs {
            if j >= self.inputs() {
                return Err(Error::invalid(format!(
                    "input column {} out of range",
                    j + 1
                )));
            }
        }
        let mut sel = Array2::zeros((self.outputs(), inputs.len()));
        for (c, &j) in inputs.iter().enumerate() {
            for r in 0..self.outputs() {
                sel[[r, c]] = self.entries[[r, j]];
            }
        }
        Self::new(sel, format!("{}[inputs {:?}]", self.label, inputs))
    }

    /// Entrywise magnitudes.
    pub fn magnitudes(&self) -> Array2<f64> {
        self.entries.mapv(|z| z.norm())
    }
}

/// Outcome of [`fix_gauge`]: the transformed matrix plus a flag telling
/// whether every first-row/first-column phase was actually constrained.
#[derive(Clone, Debug)]
pub struct GaugeFixed {
    pub matrix: TransferMatrix,
    /// False when a zero entry in the first row or column left the
    /// corresponding external phase unconstrained (set to zero by convention).
    pub fully_fixed: bool,
}

/// Remove the unobservable external phases of a transfer matrix.
///
/// Returns `D_out · T · D_in` with unit-modulus diagonal matrices chosen so
/// that every entry of the first row and first column is real and
/// non-negative. Entry magnitudes are unchanged. A zero entry leaves its
/// phase unconstrained; the corresponding diagonal element is set to one and
/// the result is flagged as partially fixed.
pub fn fix_gauge(t: &TransferMatrix) -> GaugeFixed {
    let (rows, cols) = t.entries.dim();
    let scale = t.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let zero_tol = scale * 1e-14;
    let mut fully_fixed = true;

    // Output phases: make the first column real non-negative.
    let mut d_out = vec![Complex64::new(1.0, 0.0); rows];
    for (r, d) in d_out.iter_mut().enumerate() {
        let z = t.entries[[r, 0]];
        if z.norm() > zero_tol {
            *d = (z / z.norm()).conj();
        } else {
            fully_fixed = false;
        }
    }
    // Input phases: make the first row real non-negative. Column 0 keeps
    // d_in = 1 so the column fixed above is untouched.
    let mut d_in = vec![Complex64::new(1.0, 0.0); cols];
    for (c, d) in d_in.iter_mut().enumerate().skip(1) {
        let z = d_out[0] * t.entries[[0, c]];
        if z.norm() > zero_tol {
            *d = (z / z.norm()).conj();
        } else {
            fully_fixed = false;
        }
    }

    let mut out = Array2::zeros((rows, cols));
    for r in 0..rows {
        for c in 0..cols {
            out[[r, c]] = d_out[r] * t.entries[[r, c]] * d_in[c];
        }
    }
    // Constrained entries are real non-negative by construction; zero the
    // residual imaginary dust so gauge fixing is exactly idempotent.
    for r in 0..rows {
        if t.entries[[r, 0]].norm() > zero_tol {
            out[[r, 0]] = Complex64::new(out[[r, 0]].norm(), 0.0);
        }
    }
    for c in 0..cols {
        if out[[0, c]].im.abs() <= zero_tol && out[[0, c]].re >= 0.0 {
            out[[0, c]] = Complex64::new(out[[0, c]].norm(), 0.0);
        }
    }

    GaugeFixed {
        matrix: TransferMatrix {
            entries: out,
            label: t.label.clone(),
        },
        fully_fixed,
    }
}

/// Canonical representative of the complex-conjugation ambiguity.
///
/// Two-photon visibilities cannot distinguish `T` from `T*`. Scanning the
/// entries in row-major order, the first one with an imaginary part larger
/// than `tol` decides: if it is negative the whole matrix is conjugated, so
/// that `T` and `T*` map to the same representative.
pub fn canonical_conjugation(t: &TransferMatrix, tol: f64) -> TransferMatrix {
    for z in t.entries.iter() {
        if z.im.abs() > tol {
            if z.im < 0.0 {
                return TransferMatrix {
                    entries: t.entries.mapv(|w| w.conj()),
                    label: t.label.clone(),
                };
            }
            break;
        }
    }
    t.clone()
}

/// JSON wire form: `{rows, cols, entries: [[re, im], ...]}` row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
    #[serde(default)]
    label: String,
}

impl Serialize for TransferMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = MatrixJson {
            rows: self.outputs(),
            cols: self.inputs(),
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
            label: self.label.clone(),
        };
        wire.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for TransferMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let wire = MatrixJson::deserialize(de)?;
        if wire.entries.len() != wire.rows * wire.cols {
            return Err(D::Error::custom(format!(
                "expected {} entries, found {}",
                wire.rows * wire.cols,
                wire.entries.len()
            )));
        }
        let data: Vec<Complex64> = wire
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let entries = Array2::from_shape_vec((wire.rows, wire.cols), data)
            .map_err(|e| D::Error::custom(e.to_string()))?;
        TransferMatrix::new(entries, wire.label).map_err(|e| D::Error::custom(e.to_string()))
    }
}
