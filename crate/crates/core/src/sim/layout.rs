//! Register layout of the three-register phase-estimation circuit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the total qubit count; override with the
/// `DOSQPE_MAX_QUBITS` environment variable.
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Current total-qubit guard: `DOSQPE_MAX_QUBITS` if set and parseable,
/// otherwise [`DEFAULT_MAX_QUBITS`].
pub fn max_total_qubits() -> usize {
    std::env::var("DOSQPE_MAX_QUBITS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_QUBITS)
}

/// Sizes of the three registers. A basis index packs, from least to most
/// significant bits: the time-frequency register (`m` bits), the state
/// register (`n` bits), and — when `purified` — the purification register
/// (another `n` bits). Bits are little-endian within each register: qubit
/// `j` of a register is bit `j` of that register's slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    pub m: usize,
    pub n: usize,
    pub purified: bool,
}

impl QubitLayout {
    /// Layout for a full circuit; `m >= 1`, `n >= 1`, total under the guard.
    pub fn new(m: usize, n: usize, purified: bool) -> Result<QubitLayout> {
        if m == 0 {
            return Err(Error::invalid("time-frequency register needs m >= 1"));
        }
        QubitLayout { m, n, purified }.validated()
    }

    /// Layout of a bare probe: just the state register (`m = 0`). Used for
    /// preparing probe states before embedding them into a full circuit.
    pub fn probe_only(n: usize) -> Result<QubitLayout> {
        QubitLayout {
            m: 0,
            n,
            purified: false,
        }
        .validated()
    }

    fn validated(self) -> Result<QubitLayout> {
        if self.n == 0 {
            return Err(Error::invalid("state register needs n >= 1"));
        }
        let guard = max_total_qubits();
        let total = self.total_qubits();
        if total > guard {
            return Err(Error::ResourceLimit(format!(
                "{total} qubits exceed the guard of {guard} (set DOSQPE_MAX_QUBITS to raise)"
            )));
        }
        Ok(self)
    }

    pub fn total_qubits(&self) -> usize {
        self.m + self.n * (1 + self.purified as usize)
    }

    pub fn dim(&self) -> usize {
        1usize << self.total_qubits()
    }

    /// Global bit position of time-frequency qubit `j`.
    pub fn timefreq_bit(&self, j: usize) -> usize {
        debug_assert!(j < self.m);
        j
    }

    /// Global bit position of state qubit `q`.
    pub fn state_bit(&self, q: usize) -> usize {
        debug_assert!(q < self.n);
        self.m + q
    }

    /// Global bit position of purification qubit `q`.
    pub fn purification_bit(&self, q: usize) -> usize {
        debug_assert!(self.purified && q < self.n);
        self.m + self.n + q
    }

    /// Split a global basis index into (timefreq, state, purification) parts.
    pub fn split(&self, index: usize) -> (usize, usize, usize) {
        let y = index & ((1 << self.m) - 1);
        let s = (index >> self.m) & ((1 << self.n) - 1);
        let p = index >> (self.m + self.n);
        (y, s, p)
    }

    /// Inverse of [`QubitLayout::split`].
    pub fn pack(&self, y: usize, s: usize, p: usize) -> usize {
        y | (s << self.m) | (p << (self.m + self.n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_and_bit_positions() {
        let l = QubitLayout::new(3, 2, true).unwrap();
        assert_eq!(l.total_qubits(), 7);
        assert_eq!(l.dim(), 128);
        assert_eq!(l.timefreq_bit(2), 2);
        assert_eq!(l.state_bit(0), 3);
        assert_eq!(l.purification_bit(1), 6);
        let (y, s, p) = l.split(0b1_01_110);
        assert_eq!((y, s, p), (0b110, 0b01, 0b1));
        assert_eq!(l.pack(y, s, p), 0b1_01_110);
    }

    #[test]
    fn guard_rejects_oversized_layouts() {
        assert!(QubitLayout::new(20, 10, true).is_err());
        assert!(QubitLayout::new(0, 2, false).is_err());
        assert!(QubitLayout::new(2, 0, false).is_err());
    }

    #[test]
    fn probe_layout_has_no_timefreq_register() {
        let l = QubitLayout::probe_only(4).unwrap();
        assert_eq!(l.total_qubits(), 4);
        assert_eq!(l.m, 0);
    }
}
