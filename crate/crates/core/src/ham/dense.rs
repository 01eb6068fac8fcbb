//! Dense Hermitian matrices: validation, file I/O, Pauli-basis conversion
//! and exact eigendecomposition.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ham::pauli::{PauliSum, PauliTerm, PauliWord};
use crate::ham::spectrum::Spectrum;

/// Largest dimension accepted for dense-matrix work.
pub const MAX_DENSE_DIM: usize = 4096;

/// Largest dimension accepted by [`DenseHermitian::to_pauli`], which scans
/// all `4^n` words and is therefore much costlier than other dense ops.
pub const MAX_PAULI_DECOMP_DIM: usize = 256;

/// Hermiticity tolerance used by [`DenseHermitian::new`].
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Default gap below which eigenvalues are reported as one degenerate line.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// A square complex matrix validated to be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHermitian {
    mat: DMatrix<Complex64>,
}

impl DenseHermitian {
    /// Validate and wrap a matrix. Fails unless the matrix is square with
    /// `1 <= dim <= MAX_DENSE_DIM` and `max_ij |H_ij - conj(H_ji)| <= 1e-12`.
    pub fn new(mat: DMatrix<Complex64>) -> Result<DenseHermitian> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Validation(format!(
                "matrix must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let dim = mat.nrows();
        if dim == 0 {
            return Err(Error::Validation("matrix must be non-empty".to_string()));
        }
        if dim > MAX_DENSE_DIM {
            return Err(Error::ResourceLimit(format!(
                "dense dimension {dim} exceeds limit {MAX_DENSE_DIM}"
            )));
        }
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                if !mat[(r, c)].re.is_finite() || !mat[(r, c)].im.is_finite() {
                    return Err(Error::Validation(format!(
                        "non-finite entry at ({r}, {c})"
                    )));
                }
                let dev = (mat[(r, c)] - mat[(c, r)].conj()).norm();
                worst = worst.max(dev);
            }
        }
        if worst > HERMITICITY_TOL {
            return Err(Error::Validation(format!(
                "matrix is not Hermitian: max |H - H^dagger| entry = {worst:.3e}"
            )));
        }
        Ok(DenseHermitian { mat })
    }

    /// Real diagonal matrix. Handy for synthetic spectra.
    pub fn from_diagonal(diag: &[f64]) -> Result<DenseHermitian> {
        let dim = diag.len();
        let mat = DMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                Complex64::new(diag[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        DenseHermitian::new(mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// Number of qubits if the dimension is a power of two.
    pub fn qubit_count(&self) -> Option<usize> {
        let dim = self.dim();
        if dim.is_power_of_two() {
            Some(dim.trailing_zeros() as usize)
        } else {
            None
        }
    }

    /// Embed into the first `2^qubits` dimensions, padding with zero rows and
    /// columns. Padding introduces `2^qubits - dim` extra zero eigenvalues.
    pub fn pad_to_qubits(&self, qubits: usize) -> Result<DenseHermitian> {
        let target = 1usize
            .checked_shl(qubits as u32)
            .filter(|&t| t <= MAX_DENSE_DIM)
            .ok_or_else(|| {
                Error::ResourceLimit(format!("padded dimension 2^{qubits} exceeds limit"))
            })?;
        if target < self.dim() {
            return Err(Error::invalid(format!(
                "cannot pad dimension {} down to {target}",
                self.dim()
            )));
        }
        let mut mat = DMatrix::from_element(target, target, Complex64::new(0.0, 0.0));
        mat.view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.mat);
        DenseHermitian::new(mat)
    }

    /// Expand a Pauli sum into its dense matrix. Index bit `q` is qubit `q`.
    pub fn from_pauli(h: &PauliSum) -> Result<DenseHermitian> {
        let n = h.qubit_count();
        let dim = 1usize
            .checked_shl(n as u32)
            .filter(|&d| d <= MAX_DENSE_DIM)
            .ok_or_else(|| {
                Error::ResourceLimit(format!("2^{n} exceeds dense dimension limit {MAX_DENSE_DIM}"))
            })?;
        let mut mat = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for term in h.terms() {
            let m = term.word.masks();
            // P|c> = phase(c) |c ^ flip>, so column c feeds row c ^ flip;
            // phase(c) = i^{y_count} * (-1)^{popcount(c & (y|z))} = i^k below.
            for c in 0..dim {
                let k = (m.y_count + 2 * (c as u64 & (m.y | m.z)).count_ones()) % 4;
                let phase = match k {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
                mat[(c ^ m.flip as usize, c)] += term.coefficient * phase;
            }
        }
        DenseHermitian::new(mat)
    }

    /// Decompose into the Pauli basis: `c_w = Tr(P_w H) / 2^n`. Requires a
    /// power-of-two dimension. Coefficients with `|c| <= drop_tol` are
    /// omitted; imaginary parts above `1e-10` are rejected (non-Hermitian).
    pub fn to_pauli(&self, drop_tol: f64) -> Result<PauliSum> {
        let n = self.qubit_count().ok_or_else(|| {
            Error::invalid(format!(
                "dimension {} is not a power of two",
                self.dim()
            ))
        })?;
        if self.dim() > MAX_PAULI_DECOMP_DIM {
            return Err(Error::ResourceLimit(format!(
                "Pauli decomposition limited to dimension {MAX_PAULI_DECOMP_DIM}, got {}",
                self.dim()
            )));
        }
        let dim = self.dim();
        let mut terms = Vec::new();
        // A word is a pair of masks: flip (X or Y) and zy (Z or Y).
        for flip in 0..dim as u64 {
            for zy in 0..dim as u64 {
                let y = flip & zy;
                let z = zy & !flip;
                let y_count = y.count_ones();
                let mut trace = Complex64::new(0.0, 0.0);
                for c in 0..dim {
                    // Tr(P H) = sum_c P[c][c^flip] H[c^flip][c]; the P entry
                    // is phase(c^flip) from column c^flip feeding row c.
                    let src = c ^ flip as usize;
                    let k = (y_count + 2 * (src as u64 & (y | z)).count_ones()) % 4;
                    let phase = match k {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    };
                    trace += phase * self.mat[(src, c)];
                }
                let coeff = trace / dim as f64;
                if coeff.im.abs() > 1e-10 {
                    return Err(Error::Numerical(format!(
                        "Pauli coefficient has imaginary part {:.3e}",
                        coeff.im
                    )));
                }
                if coeff.re.abs() > drop_tol {
                    let letters = (0..n)
                        .map(|q| {
                            let f = flip >> q & 1 == 1;
                            let s = zy >> q & 1 == 1;
                            match (f, s) {
                                (false, false) => crate::ham::pauli::Pauli::I,
                                (true, false) => crate::ham::pauli::Pauli::X,
                                (true, true) => crate::ham::pauli::Pauli::Y,
                                (false, true) => crate::ham::pauli::Pauli::Z,
                            }
                        })
                        .collect();
                    terms.push(PauliTerm {
                        coefficient: coeff.re,
                        word: PauliWord::from_letters(letters),
                    });
                }
            }
        }
        PauliSum::new(n, terms)
    }

    /// Full eigendecomposition with eigenvalues sorted ascending.
    pub fn eigendecomposition(&self) -> Result<EigenDecomposition> {
        let sym = nalgebra::SymmetricEigen::new(self.mat.clone());
        let dim = self.dim();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| sym.eigenvalues[a].partial_cmp(&sym.eigenvalues[b]).unwrap());
        let values: Vec<f64> = order.iter().map(|&i| sym.eigenvalues[i]).collect();
        for v in &values {
            if !v.is_finite() {
                return Err(Error::Numerical("eigendecomposition produced a non-finite eigenvalue".into()));
            }
        }
        let mut vectors = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for (new_col, &old_col) in order.iter().enumerate() {
            vectors
                .column_mut(new_col)
                .copy_from(&sym.eigenvectors.column(old_col));
        }
        Ok(EigenDecomposition { values, vectors })
    }

    /// Eigenvalues grouped into distinct lines with multiplicities.
    pub fn exact_spectrum(&self, degeneracy_tol: f64) -> Result<Spectrum> {
        let eig = self.eigendecomposition()?;
        Spectrum::group(&eig.values, degeneracy_tol)
    }

    /// Parse the text matrix format: optional `#` comment lines, then a
    /// `dim d` header, then `d` rows of `d` whitespace-separated entries of
    /// the form `a+bi` (signs and exponents allowed in `a` and `b`).
    pub fn load<R: BufRead>(reader: R) -> Result<DenseHermitian> {
        let mut dim: Option<usize> = None;
        let mut entries: Vec<Complex64> = Vec::new();
        let mut rows_seen = 0usize;
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let body = match line.split_once('#') {
                Some((before, _)) => before,
                None => line.as_str(),
            };
            let body = body.trim();
            if body.is_empty() {
                continue;
            }
            match dim {
                None => {
                    let rest = body.strip_prefix("dim").ok_or_else(|| Error::Format {
                        line: lineno,
                        message: format!("expected `dim d` header, got {body:?}"),
                    })?;
                    let d: usize = rest.trim().parse().map_err(|_| Error::Format {
                        line: lineno,
                        message: format!("invalid dimension {:?}", rest.trim()),
                    })?;
                    if d == 0 || d > MAX_DENSE_DIM {
                        return Err(Error::Format {
                            line: lineno,
                            message: format!("dimension {d} out of range 1..={MAX_DENSE_DIM}"),
                        });
                    }
                    dim = Some(d);
                }
                Some(d) => {
                    if rows_seen == d {
                        return Err(Error::Format {
                            line: lineno,
                            message: format!("unexpected extra row after {d} rows"),
                        });
                    }
                    let row: Result<Vec<Complex64>> = body
                        .split_whitespace()
                        .map(|tok| parse_complex(tok, lineno))
                        .collect();
                    let row = row?;
                    if row.len() != d {
                        return Err(Error::Format {
                            line: lineno,
                            message: format!("expected {d} entries in row, got {}", row.len()),
                        });
                    }
                    entries.extend(row);
                    rows_seen += 1;
                }
            }
        }
        let dim = dim.ok_or(Error::Format {
            line: 1,
            message: "missing `dim d` header".to_string(),
        })?;
        if rows_seen != dim {
            return Err(Error::Format {
                line: 1,
                message: format!("expected {dim} rows, got {rows_seen}"),
            });
        }
        let mat = DMatrix::from_fn(dim, dim, |r, c| entries[r * dim + c]);
        DenseHermitian::new(mat)
    }

    /// Write the format accepted by [`DenseHermitian::load`] with 17
    /// significant digits, enough for an exact `f64` round trip.
    pub fn save<W: Write>(&self, mut writer: W) -> Result<()> {
        let dim = self.dim();
        writeln!(writer, "dim {dim}")?;
        for r in 0..dim {
            let mut row = String::new();
            for c in 0..dim {
                if c > 0 {
                    row.push(' ');
                }
                let v = self.mat[(r, c)];
                row.push_str(&format!("{:.16e}{:+.16e}i", v.re, v.im));
            }
            writeln!(writer, "{row}")?;
        }
        Ok(())
    }
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues in ascending
/// order and the matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

fn parse_complex(tok: &str, lineno: usize) -> Result<Complex64> {
    let fail = || Error::Format {
        line: lineno,
        message: format!("invalid complex entry {tok:?}, expected a+bi"),
    };
    let body = tok.strip_suffix(['i', 'I']).ok_or_else(fail)?;
    // Split at the sign of the imaginary part: the last '+'/'-' that is not
    // the leading sign and not part of an exponent.
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i];
        if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let split = split.ok_or_else(fail)?;
    let re: f64 = body[..split].parse().map_err(|_| fail())?;
    let im: f64 = body[split..].parse().map_err(|_| fail())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(fail());
    }
    Ok(Complex64::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_hermitian() {
        let mat = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        assert!(matches!(DenseHermitian::new(mat), Err(Error::Validation(_))));
    }

    #[test]
    fn eigendecomposition_matches_hand_solution() {
        // Pauli X: eigenvalues -1, +1 with eigenvectors (1, ∓1)/sqrt(2).
        let mat = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let h = DenseHermitian::new(mat).unwrap();
        let eig = h.eigendecomposition().unwrap();
        assert_abs_diff_eq!(eig.values[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-12);
        // Columns reconstruct H.
        let mut recon = DMatrix::from_element(2, 2, c(0.0, 0.0));
        for k in 0..2 {
            let v = eig.vectors.column(k);
            recon += (&v * v.adjoint()) * c(eig.values[k], 0.0);
        }
        assert!((recon - h.matrix()).norm() < 1e-12);
    }

    #[test]
    fn eigendecomposition_reconstructs_random_hermitian() {
        // Fixed pseudo-random Hermitian built from a deterministic sequence.
        let dim = 6;
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = DMatrix::from_fn(dim, dim, |_, _| c(next(), next()));
        let h = DenseHermitian::new(&a * a.adjoint()).unwrap();
        let eig = h.eigendecomposition().unwrap();
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let mut recon = DMatrix::from_element(dim, dim, c(0.0, 0.0));
        for k in 0..dim {
            let v = eig.vectors.column(k);
            recon += (&v * v.adjoint()) * c(eig.values[k], 0.0);
        }
        assert!((recon - h.matrix()).norm() < 1e-10);
        // Orthonormality.
        let gram = eig.vectors.adjoint() * &eig.vectors;
        assert!((gram - DMatrix::identity(dim, dim)).norm() < 1e-10);
    }

    #[test]
    fn pauli_expansion_matches_kronecker_by_hand() {
        // H = 0.5 ZI + 2 XX on 2 qubits (letter q acts on qubit q, bit q of
        // the index). Spot-check a few entries against the direct formula.
        let h = PauliSum::parse("0.5 ZI\n2.0 XX\n".as_bytes()).unwrap();
        let dense = DenseHermitian::from_pauli(&h).unwrap();
        // ZI: diagonal (+.5, -.5, +.5, -.5) since Z acts on bit 0.
        assert_abs_diff_eq!(dense.matrix()[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(dense.matrix()[(1, 1)].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(dense.matrix()[(2, 2)].re, 0.5, epsilon = 1e-15);
        // XX: antidiagonal ones.
        assert_abs_diff_eq!(dense.matrix()[(0, 3)].re, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dense.matrix()[(3, 0)].re, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dense.matrix()[(1, 2)].re, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn single_y_expansion() {
        let h = PauliSum::parse("1.0 Y\n".as_bytes()).unwrap();
        let dense = DenseHermitian::from_pauli(&h).unwrap();
        assert_abs_diff_eq!(dense.matrix()[(1, 0)].im, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dense.matrix()[(0, 1)].im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn to_pauli_round_trips_from_pauli() {
        let h = PauliSum::parse(
            "0.5 ZII\n-0.25 XXI\n0.125 YZY\n0.75 IIZ\n-1.5 III\n".as_bytes(),
        )
        .unwrap();
        let dense = DenseHermitian::from_pauli(&h).unwrap();
        let back = dense.to_pauli(1e-12).unwrap();
        assert_eq!(back.terms().len(), h.terms().len());
        for (a, b) in back.terms().iter().zip(h.terms()) {
            assert_eq!(a.word, b.word);
            assert_abs_diff_eq!(a.coefficient, b.coefficient, epsilon = 1e-12);
        }
    }

    #[test]
    fn to_pauli_of_diagonal_z() {
        let dense = DenseHermitian::from_diagonal(&[1.0, -1.0]).unwrap();
        let p = dense.to_pauli(1e-12).unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].word.to_string(), "Z");
        assert_abs_diff_eq!(p.terms()[0].coefficient, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn matrix_file_round_trip() {
        let mat = DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.5, -0.25), c(0.5, 0.25), c(-2.0 / 3.0, 0.0)],
        );
        let h = DenseHermitian::new(mat).unwrap();
        let mut out = Vec::new();
        h.save(&mut out).unwrap();
        let back = DenseHermitian::load(out.as_slice()).unwrap();
        assert_eq!(back.matrix(), h.matrix());
    }

    #[test]
    fn load_accepts_comments_and_exponents() {
        let text = "# test matrix\ndim 2\n1.0e0+0.0e0i 2.5e-1-1.25e-1i\n2.5e-1+1.25e-1i -1.0+0.0i # trailing\n";
        let h = DenseHermitian::load(text.as_bytes()).unwrap();
        assert_eq!(h.dim(), 2);
        assert_eq!(h.matrix()[(0, 1)], c(0.25, -0.125));
    }

    #[test]
    fn load_reports_line_numbers() {
        let text = "dim 2\n1.0+0.0i 0.0+0.0i\n0.0+0.0i bogus\n";
        match DenseHermitian::load(text.as_bytes()) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_row_count_mismatch() {
        let text = "dim 2\n1.0+0.0i 0.0+0.0i\n";
        assert!(DenseHermitian::load(text.as_bytes()).is_err());
    }

    #[test]
    fn padding_adds_zero_modes() {
        let h = DenseHermitian::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let padded = h.pad_to_qubits(2).unwrap();
        assert_eq!(padded.dim(), 4);
        let spec = padded.exact_spectrum(1e-9).unwrap();
        let phases: Vec<f64> = spec.entries().iter().map(|e| e.phase).collect();
        assert_eq!(phases, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn exact_spectrum_groups_degenerate_values() {
        let h = DenseHermitian::from_diagonal(&[0.5, 0.5, -0.5]).unwrap();
        let s = h.exact_spectrum(1e-9).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.entries()[1].degeneracy, 2);
    }
}
