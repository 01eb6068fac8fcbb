//! Real-coefficient Pauli-sum Hamiltonians.
//!
//! A Hamiltonian is stored as `H = sum_w c_w P_w` where every `P_w` is a word
//! of single-qubit Paulis and every `c_w` is real (Hermiticity is structural).
//! Words use the convention that letter `q` of the string acts on qubit `q`,
//! i.e. `XY` means `X` on qubit 0 and `Y` on qubit 1.

use std::fmt;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// 2x2 matrix of this Pauli, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Product of two single-qubit Paulis as `(result, k)` with phase `i^k`.
    fn mul(self, rhs: Pauli) -> (Pauli, u8) {
        use Pauli::*;
        match (self, rhs) {
            (I, p) | (p, I) => (p, 0),
            (X, X) | (Y, Y) | (Z, Z) => (I, 0),
            (X, Y) => (Z, 1),
            (Y, X) => (Z, 3),
            (Y, Z) => (X, 1),
            (Z, Y) => (X, 3),
            (Z, X) => (Y, 1),
            (X, Z) => (Y, 3),
        }
    }
}

/// A word of single-qubit Paulis, one letter per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliWord(Vec<Pauli>);

impl PauliWord {
    /// All-identity word on `qubit_count` qubits.
    pub fn identity(qubit_count: usize) -> PauliWord {
        PauliWord(vec![Pauli::I; qubit_count])
    }

    /// Word with `pauli` on `qubit` and identity elsewhere.
    pub fn single(qubit_count: usize, qubit: usize, pauli: Pauli) -> Result<PauliWord> {
        if qubit >= qubit_count {
            return Err(Error::invalid(format!(
                "qubit index {qubit} out of range for {qubit_count} qubits"
            )));
        }
        let mut letters = vec![Pauli::I; qubit_count];
        letters[qubit] = pauli;
        Ok(PauliWord(letters))
    }

    pub fn from_letters(letters: Vec<Pauli>) -> PauliWord {
        PauliWord(letters)
    }

    pub fn parse(s: &str) -> Result<PauliWord> {
        let letters: Option<Vec<Pauli>> = s.chars().map(Pauli::from_char).collect();
        match letters {
            Some(v) if !v.is_empty() => Ok(PauliWord(v)),
            _ => Err(Error::invalid(format!(
                "invalid Pauli word {s:?}: expected a non-empty string over I,X,Y,Z"
            ))),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks (bit `q` = qubit `q`) describing the word's action:
    /// positions flipped (`X` or `Y`), `Y` positions, and `Z` positions.
    ///
    /// In the computational basis `P|x> = phase(x) |x XOR flip>` with
    /// `phase(x) = i^{#Y} * (-1)^{popcount(x & y)} * (-1)^{popcount(x & z)}`.
    pub fn masks(&self) -> PauliMasks {
        let mut flip = 0u64;
        let mut y = 0u64;
        let mut z = 0u64;
        let mut y_count = 0u32;
        for (q, &p) in self.0.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => flip |= 1 << q,
                Pauli::Y => {
                    flip |= 1 << q;
                    y |= 1 << q;
                    y_count += 1;
                }
                Pauli::Z => z |= 1 << q,
            }
        }
        PauliMasks {
            flip,
            y,
            z,
            y_count,
        }
    }

    /// Word product `self * rhs` as `(word, k)` with overall phase `i^k`.
    pub fn mul(&self, rhs: &PauliWord) -> (PauliWord, u8) {
        assert_eq!(self.len(), rhs.len(), "word lengths must match");
        let mut phase = 0u8;
        let letters = self
            .0
            .iter()
            .zip(&rhs.0)
            .map(|(&a, &b)| {
                let (p, k) = a.mul(b);
                phase = (phase + k) % 4;
                p
            })
            .collect();
        (PauliWord(letters), phase)
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &p in &self.0 {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

/// Basis-action masks of a [`PauliWord`]; see [`PauliWord::masks`].
#[derive(Debug, Clone, Copy)]
pub struct PauliMasks {
    pub flip: u64,
    pub y: u64,
    pub z: u64,
    pub y_count: u32,
}

/// One weighted word of a [`PauliSum`].
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub word: PauliWord,
}

/// A Hermitian operator given as a real linear combination of Pauli words.
///
/// Terms are kept canonical: sorted by word, duplicate words merged, and
/// exactly-zero coefficients dropped. The all-identity word is an ordinary
/// term; it contributes a uniform energy shift (and, under controlled time
/// evolution, a relative phase that must not be discarded).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    qubit_count: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    /// Build a canonical sum from raw terms. Every word must have length
    /// `qubit_count` and every coefficient must be finite.
    pub fn new(qubit_count: usize, terms: Vec<PauliTerm>) -> Result<PauliSum> {
        if qubit_count == 0 || qubit_count > 63 {
            return Err(Error::invalid(format!(
                "qubit count must be in 1..=63, got {qubit_count}"
            )));
        }
        for t in &terms {
            if t.word.len() != qubit_count {
                return Err(Error::invalid(format!(
                    "word {} has length {}, expected {qubit_count}",
                    t.word,
                    t.word.len()
                )));
            }
            if !t.coefficient.is_finite() {
                return Err(Error::invalid(format!(
                    "non-finite coefficient {} on word {}",
                    t.coefficient, t.word
                )));
            }
        }
        let mut sum = PauliSum { qubit_count, terms };
        sum.canonicalize();
        Ok(sum)
    }

    /// The zero operator on `qubit_count` qubits.
    pub fn zero(qubit_count: usize) -> Result<PauliSum> {
        PauliSum::new(qubit_count, Vec::new())
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    /// Canonically ordered terms (no duplicates, no zero coefficients).
    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Coefficient of the all-identity word (0 if absent).
    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.word.is_identity())
            .map_or(0.0, |t| t.coefficient)
    }

    /// `self + other`, merged canonically.
    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.qubit_count != other.qubit_count {
            return Err(Error::invalid(format!(
                "cannot add operators on {} and {} qubits",
                self.qubit_count, other.qubit_count
            )));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        PauliSum::new(self.qubit_count, terms)
    }

    /// `factor * self`.
    pub fn scale(&self, factor: f64) -> Result<PauliSum> {
        if !factor.is_finite() {
            return Err(Error::invalid(format!("non-finite scale factor {factor}")));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| PauliTerm {
                coefficient: factor * t.coefficient,
                word: t.word.clone(),
            })
            .collect();
        PauliSum::new(self.qubit_count, terms)
    }

    /// `self + shift * identity`.
    pub fn add_identity(&self, shift: f64) -> Result<PauliSum> {
        let mut terms = self.terms.clone();
        terms.push(PauliTerm {
            coefficient: shift,
            word: PauliWord::identity(self.qubit_count),
        });
        PauliSum::new(self.qubit_count, terms)
    }

    /// Sum of absolute coefficients; an upper bound on the spectral range
    /// half-width around the identity shift.
    pub fn one_norm(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| !t.word.is_identity())
            .map(|t| t.coefficient.abs())
            .sum()
    }

    fn canonicalize(&mut self) {
        self.terms.sort_by(|a, b| a.word.cmp(&b.word));
        let mut merged: Vec<PauliTerm> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.word == t.word => last.coefficient += t.coefficient,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coefficient != 0.0);
        self.terms = merged;
    }

    /// Parse the line-oriented text format: one `coefficient WORD` pair per
    /// line, `#` starts a comment, blank lines ignored. All words must have
    /// equal length, which becomes the qubit count.
    pub fn parse<R: BufRead>(reader: R) -> Result<PauliSum> {
        let mut terms: Vec<PauliTerm> = Vec::new();
        let mut qubit_count: Option<usize> = None;
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
            let mut parts = body.split_whitespace();
            let coeff_str = parts.next().unwrap();
            let word_str = parts.next().ok_or_else(|| Error::Format {
                line: lineno,
                message: format!("expected `coefficient WORD`, got {body:?}"),
            })?;
            if let Some(extra) = parts.next() {
                return Err(Error::Format {
                    line: lineno,
                    message: format!("unexpected trailing token {extra:?}"),
                });
            }
            let coefficient: f64 = coeff_str.parse().map_err(|_| Error::Format {
                line: lineno,
                message: format!("invalid coefficient {coeff_str:?}"),
            })?;
            if !coefficient.is_finite() {
                return Err(Error::Format {
                    line: lineno,
                    message: format!("non-finite coefficient {coeff_str:?}"),
                });
            }
            let word = PauliWord::parse(word_str).map_err(|_| Error::Format {
                line: lineno,
                message: format!("invalid Pauli word {word_str:?}"),
            })?;
            match qubit_count {
                None => qubit_count = Some(word.len()),
                Some(n) if n != word.len() => {
                    return Err(Error::Format {
                        line: lineno,
                        message: format!("word length {} differs from earlier length {n}", word.len()),
                    });
                }
                Some(_) => {}
            }
            terms.push(PauliTerm { coefficient, word });
        }
        let qubit_count = qubit_count.ok_or(Error::Format {
            line: 1,
            message: "no terms found".to_string(),
        })?;
        PauliSum::new(qubit_count, terms)
    }

    /// Write the text format accepted by [`PauliSum::parse`]. The zero
    /// operator is written as a single explicit zero identity term so the
    /// file stays parseable.
    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        if self.terms.is_empty() {
            writeln!(writer, "0.0 {}", PauliWord::identity(self.qubit_count))?;
            return Ok(());
        }
        for t in &self.terms {
            writeln!(writer, "{:.17e} {}", t.coefficient, t.word)?;
        }
        Ok(())
    }
}
