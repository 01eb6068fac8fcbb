//! Jordan-Wigner images of fermionic operators and the Fermi-Hubbard model.
//!
//! Mode `p` maps to qubit `p` with occupied = bit set, and
//! `a_p = Z_0 ... Z_{p-1} (X_p + i Y_p)/2`. Products of ladder operators are
//! evaluated symbolically in a small complex Pauli algebra; only the final
//! (Hermitian) combinations are exported as real [`PauliSum`]s.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ham::pauli::{Pauli, PauliSum, PauliTerm, PauliWord};

/// Complex linear combination of Pauli words; internal scratch algebra.
#[derive(Debug, Clone)]
struct ComplexOperator {
    qubit_count: usize,
    terms: BTreeMap<PauliWord, Complex64>,
}

impl ComplexOperator {
    fn zero(qubit_count: usize) -> ComplexOperator {
        ComplexOperator {
            qubit_count,
            terms: BTreeMap::new(),
        }
    }

    fn from_word(qubit_count: usize, word: PauliWord, coeff: Complex64) -> ComplexOperator {
        let mut op = ComplexOperator::zero(qubit_count);
        op.terms.insert(word, coeff);
        op
    }

    fn add_assign(&mut self, other: &ComplexOperator) {
        for (w, c) in &other.terms {
            *self
                .terms
                .entry(w.clone())
                .or_insert(Complex64::new(0.0, 0.0)) += c;
        }
    }

    fn mul(&self, other: &ComplexOperator) -> ComplexOperator {
        let mut out = ComplexOperator::zero(self.qubit_count);
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                let (word, k) = wa.mul(wb);
                let phase = match k {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
                *out.terms.entry(word).or_insert(Complex64::new(0.0, 0.0)) += ca * cb * phase;
            }
        }
        out
    }

    fn scale(&mut self, factor: Complex64) {
        for c in self.terms.values_mut() {
            *c *= factor;
        }
    }

    /// Export as a real Pauli sum. Residual imaginary parts signal a
    /// non-Hermitian combination and are treated as an internal error.
    fn into_real(self) -> Result<PauliSum> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (word, c) in self.terms {
            if c.im.abs() > 1e-12 {
                return Err(Error::Numerical(format!(
                    "non-Hermitian combination: word {word} has imaginary coefficient {:.3e}",
                    c.im
                )));
            }
            terms.push(PauliTerm {
                coefficient: c.re,
                word,
            });
        }
        PauliSum::new(self.qubit_count, terms)
    }
}

/// Jordan-Wigner ladder operator `a_p` (or `a_p^dagger`) on `n` qubits.
fn ladder(n: usize, p: usize, dagger: bool) -> Result<ComplexOperator> {
    if p >= n {
        return Err(Error::invalid(format!(
            "mode index {p} out of range for {n} modes"
        )));
    }
    let string_then = |tail: Pauli| -> PauliWord {
        let mut letters = vec![Pauli::I; n];
        for letter in letters.iter_mut().take(p) {
            *letter = Pauli::Z;
        }
        letters[p] = tail;
        PauliWord::from_letters(letters)
    };
    // a = Z...Z (X + iY)/2, a^dagger = Z...Z (X - iY)/2.
    let sign = if dagger { -0.5 } else { 0.5 };
    let mut op = ComplexOperator::from_word(n, string_then(Pauli::X), Complex64::new(0.5, 0.0));
    op.add_assign(&ComplexOperator::from_word(
        n,
        string_then(Pauli::Y),
        Complex64::new(0.0, sign),
    ));
    Ok(op)
}

/// `a_p^dagger a_q + a_q^dagger a_p` under Jordan-Wigner, on `n` qubits.
///
/// For `p < q` this is the familiar
/// `(X_p Z_{p+1} ... Z_{q-1} X_q + Y_p Z_{p+1} ... Z_{q-1} Y_q) / 2`.
pub fn jordan_wigner_hop(p: usize, q: usize, n: usize) -> Result<PauliSum> {
    if p == q {
        return Err(Error::invalid(format!(
            "hopping requires distinct modes, got p = q = {p}"
        )));
    }
    let mut op = ladder(n, p, true)?.mul(&ladder(n, q, false)?);
    op.add_assign(&ladder(n, q, true)?.mul(&ladder(n, p, false)?));
    op.into_real()
}

/// Number operator `n_p = a_p^dagger a_p = (I - Z_p)/2` on `n` qubits.
pub fn jordan_wigner_number(p: usize, n: usize) -> Result<PauliSum> {
    ladder(n, p, true)?.mul(&ladder(n, p, false)?).into_real()
}

/// Total number operator `sum_p n_p`.
pub fn total_number_operator(n: usize) -> Result<PauliSum> {
    let mut acc = PauliSum::zero(n)?;
    for p in 0..n {
        acc = acc.add(&jordan_wigner_number(p, n)?)?;
    }
    Ok(acc)
}

/// Fermi-Hubbard chain under Jordan-Wigner:
/// `H = -t sum_{<i,j>, s} (a†_{is} a_{js} + h.c.) + U sum_i n_{i up} n_{i down}`
/// on `2 * sites` qubits with qubit index `2 * site + spin`, spin up = 0.
///
/// Bonds are `(i, i+1)` for consecutive sites; `periodic` adds `(sites-1, 0)`
/// except at `sites = 2`, where that bond would duplicate the existing one
/// and is skipped rather than double-counted.
pub fn build_fermi_hubbard(sites: usize, t: f64, u: f64, periodic: bool) -> Result<PauliSum> {
    if sites < 2 {
        return Err(Error::invalid(format!(
            "Fermi-Hubbard needs at least 2 sites, got {sites}"
        )));
    }
    if !(t.is_finite() && u.is_finite()) {
        return Err(Error::invalid("t and U must be finite"));
    }
    let n = 2 * sites;
    let qubit = |site: usize, spin: usize| 2 * site + spin;

    let mut bonds: Vec<(usize, usize)> = (0..sites - 1).map(|i| (i, i + 1)).collect();
    if periodic && sites > 2 {
        bonds.push((sites - 1, 0));
    }

    let mut h = PauliSum::zero(n)?;
    for &(i, j) in &bonds {
        for spin in 0..2 {
            let hop = jordan_wigner_hop(qubit(i, spin), qubit(j, spin), n)?;
            h = h.add(&hop.scale(-t)?)?;
        }
    }
    for i in 0..sites {
        // n_up n_down = (I - Z_up)(I - Z_down)/4, built symbolically.
        let n_up = ladder(n, qubit(i, 0), true)?.mul(&ladder(n, qubit(i, 0), false)?);
        let n_down = ladder(n, qubit(i, 1), true)?.mul(&ladder(n, qubit(i, 1), false)?);
        let mut repulsion = n_up.mul(&n_down);
        repulsion.scale(Complex64::new(u, 0.0));
        h = h.add(&repulsion.into_real()?)?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    use crate::ham::dense::DenseHermitian;

    #[test]
    fn number_operator_is_half_one_minus_z() {
        let n1 = jordan_wigner_number(1, 3).unwrap();
        let mut terms: Vec<(String, f64)> = n1
            .terms()
            .iter()
            .map(|t| (t.word.to_string(), t.coefficient))
            .collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(terms, vec![("III".into(), 0.5), ("IZI".into(), -0.5)]);
    }

    #[test]
    fn adjacent_hop_is_xx_plus_yy_over_two() {
        let hop = jordan_wigner_hop(0, 1, 2).unwrap();
        let mut terms: Vec<(String, f64)> = hop
            .terms()
            .iter()
            .map(|t| (t.word.to_string(), t.coefficient))
            .collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(terms, vec![("XX".into(), 0.5), ("YY".into(), 0.5)]);
    }

    #[test]
    fn distant_hop_carries_z_string() {
        let hop = jordan_wigner_hop(0, 2, 3).unwrap();
        let words: Vec<String> = hop.terms().iter().map(|t| t.word.to_string()).collect();
        assert_eq!(words, vec!["XZX", "YZY"]);
        for t in hop.terms() {
            assert_abs_diff_eq!(t.coefficient, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn ladder_operators_anticommute_correctly() {
        // {a_p, a_q^dagger} = delta_pq I, {a_p, a_q} = 0, checked densely.
        let n = 3;
        let dense_of = |op: &ComplexOperator| -> DMatrix<Complex64> {
            let dim = 1 << n;
            let mut mat = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
            for (word, coeff) in &op.terms {
                let m = word.masks();
                for c in 0..dim {
                    let k = (m.y_count + 2 * (c as u64 & (m.y | m.z)).count_ones()) % 4;
                    let phase = Complex64::new(0.0, 1.0).powu(k);
                    mat[(c ^ m.flip as usize, c)] += coeff * phase;
                }
            }
            mat
        };
        for p in 0..n {
            for q in 0..n {
                let ap = dense_of(&ladder(n, p, false).unwrap());
                let aq = dense_of(&ladder(n, q, false).unwrap());
                let aq_dag = dense_of(&ladder(n, q, true).unwrap());
                let anti = &ap * &aq_dag + &aq_dag * &ap;
                let expected = if p == q {
                    DMatrix::identity(1 << n, 1 << n)
                } else {
                    DMatrix::from_element(1 << n, 1 << n, Complex64::new(0.0, 0.0))
                };
                assert!((anti - expected).norm() < 1e-12, "{{a_{p}, a!_{q}}}");
                let anti2 = &ap * &aq + &aq * &ap;
                assert!(anti2.norm() < 1e-12, "{{a_{p}, a_{q}}}");
            }
        }
    }

    #[test]
    fn hubbard_zero_couplings_is_zero_operator() {
        let h = build_fermi_hubbard(2, 0.0, 0.0, false).unwrap();
        assert_eq!(h.qubit_count(), 4);
        assert!(h.terms().is_empty());
    }

    #[test]
    fn hubbard_term_inventory_two_sites() {
        let h = build_fermi_hubbard(2, 1.0, 4.0, false).unwrap();
        // 2 spins x 2 words (XZX-type, YZY-type) + per-site (Z up, Z down,
        // ZZ) x 2 sites + identity.
        assert_eq!(h.terms().len(), 4 + 2 * 3 + 1);
        assert_abs_diff_eq!(h.identity_coefficient(), 2.0 * 4.0 / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn hubbard_three_sites_has_six_qubits() {
        let h = build_fermi_hubbard(3, 1.0, 4.0, false).unwrap();
        assert_eq!(h.qubit_count(), 6);
        // Spin-up bond (0,1) hops between qubits 0 and 2 with a Z string.
        assert!(h.terms().iter().any(|t| t.word.to_string() == "XZXIII"));
        assert!(h.terms().iter().any(|t| t.word.to_string() == "IIIYZY"));
    }

    #[test]
    fn periodic_two_sites_does_not_double_bond() {
        let open = build_fermi_hubbard(2, 1.0, 0.0, false).unwrap();
        let periodic = build_fermi_hubbard(2, 1.0, 0.0, true).unwrap();
        assert_eq!(open, periodic);
    }

    #[test]
    fn periodic_ring_adds_wrap_bond() {
        let open = build_fermi_hubbard(3, 1.0, 0.0, false).unwrap();
        let ring = build_fermi_hubbard(3, 1.0, 0.0, true).unwrap();
        assert!(ring.terms().len() > open.terms().len());
        // Wrap hop between site 2 and site 0, spin up: qubits 4 and 0.
        assert!(ring.terms().iter().any(|t| t.word.to_string() == "XZZZXI"));
    }

    #[test]
    fn hubbard_commutes_with_total_number() {
        let h = build_fermi_hubbard(2, 1.0, 4.0, true).unwrap();
        let n_op = total_number_operator(4).unwrap();
        let hd = DenseHermitian::from_pauli(&h).unwrap();
        let nd = DenseHermitian::from_pauli(&n_op).unwrap();
        let comm = hd.matrix() * nd.matrix() - nd.matrix() * hd.matrix();
        assert!(comm.norm() < 1e-10);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_fermi_hubbard(1, 1.0, 1.0, false).is_err());
        assert!(jordan_wigner_hop(2, 2, 4).is_err());
        assert!(jordan_wigner_number(5, 4).is_err());
    }
}
