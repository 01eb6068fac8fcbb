//! Phase histograms over the `2^m` time-frequency bins, plus reproducible
//! multinomial sampling and the `bin,phase,value` CSV format.

use std::io::{BufRead, Write};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether histogram values are probabilities or integer shot counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramKind {
    Probabilities,
    Counts,
}

/// Values over the `2^m` phase bins; bin `y` covers phase `y / 2^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseHistogram {
    m: usize,
    values: Vec<f64>,
    kind: HistogramKind,
}

impl PhaseHistogram {
    /// Wrap a probability vector; must have length `2^m`, entries >= 0 and
    /// total within `1e-9` of 1.
    pub fn from_probabilities(m: usize, values: Vec<f64>) -> Result<PhaseHistogram> {
        Self::check_len(m, &values)?;
        let mut total = 0.0;
        for &v in &values {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("invalid probability {v}")));
            }
            total += v;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "probabilities sum to {total}, expected 1 within 1e-9"
            )));
        }
        Ok(PhaseHistogram {
            m,
            values,
            kind: HistogramKind::Probabilities,
        })
    }

    /// Wrap shot counts; entries must be nonnegative integers (stored as
    /// `f64` for uniformity with probability histograms).
    pub fn from_counts(m: usize, values: Vec<f64>) -> Result<PhaseHistogram> {
        Self::check_len(m, &values)?;
        for &v in &values {
            if !(v >= 0.0 && v.is_finite() && v.fract() == 0.0) {
                return Err(Error::Validation(format!(
                    "count {v} is not a nonnegative integer"
                )));
            }
        }
        Ok(PhaseHistogram {
            m,
            values,
            kind: HistogramKind::Counts,
        })
    }

    fn check_len(m: usize, values: &[f64]) -> Result<()> {
        let expect = 1usize
            .checked_shl(m as u32)
            .ok_or_else(|| Error::invalid(format!("register size {m} too large")))?;
        if values.len() != expect {
            return Err(Error::invalid(format!(
                "expected 2^{m} = {expect} bins, got {}",
                values.len()
            )));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> HistogramKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bins(&self) -> usize {
        self.values.len()
    }

    /// Center phase of bin `y`.
    pub fn phase_of_bin(&self, y: usize) -> f64 {
        y as f64 / self.bins() as f64
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Values normalized to unit total (counts become frequencies).
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total();
        if total == 0.0 {
            return vec![0.0; self.values.len()];
        }
        self.values.iter().map(|v| v / total).collect()
    }

    /// `sum_y |p_y - q_y|` between the normalized distributions.
    pub fn l1_distance(&self, other: &PhaseHistogram) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .probabilities()
            .iter()
            .zip(other.probabilities())
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// Euclidean distance between the normalized distributions.
    pub fn l2_distance(&self, other: &PhaseHistogram) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .probabilities()
            .iter()
            .zip(other.probabilities())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    fn check_compatible(&self, other: &PhaseHistogram) -> Result<()> {
        if self.m != other.m {
            return Err(Error::invalid(format!(
                "histogram register sizes differ: {} vs {}",
                self.m, other.m
            )));
        }
        Ok(())
    }

    /// Multinomial sample of `shots` draws, reproducible from `seed`.
    ///
    /// The generator is ChaCha8 seeded via `seed_from_u64`. Each draw maps
    /// one 64-bit output to a uniform `f64` in `[0, 1)` (top 53 bits) and
    /// inverts the cumulative distribution by binary search, so identical
    /// seeds give identical counts on any platform.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<PhaseHistogram> {
        if self.kind != HistogramKind::Probabilities {
            return Err(Error::invalid("can only sample from a probability histogram"));
        }
        if shots == 0 {
            return Err(Error::invalid("shots must be positive"));
        }
        let probs = self.probabilities();
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cumulative.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0.0; probs.len()];
        let last = counts.len() - 1;
        for _ in 0..shots {
            let u = (rng.next_u64() >> 11) as f64 * 2f64.powi(-53);
            let bin = cumulative.partition_point(|&c| c <= u).min(last);
            counts[bin] += 1.0;
        }
        PhaseHistogram::from_counts(self.m, counts)
    }

    /// Write `bin,phase,value` CSV. Probabilities are written with 17
    /// significant digits; counts as integers.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "bin,phase,value")?;
        for (y, v) in self.values.iter().enumerate() {
            match self.kind {
                HistogramKind::Probabilities => {
                    writeln!(writer, "{y},{},{:.17e}", self.phase_of_bin(y), v)?
                }
                HistogramKind::Counts => {
                    writeln!(writer, "{y},{},{}", self.phase_of_bin(y), *v as u64)?
                }
            }
        }
        Ok(())
    }

    /// Read the CSV written by [`PhaseHistogram::write_csv`]. The caller
    /// states the expected kind (the format itself does not distinguish a
    /// count of 1 from a probability of 1).
    pub fn read_csv<R: BufRead>(reader: R, kind: HistogramKind) -> Result<PhaseHistogram> {
        let mut values = Vec::new();
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, line)) => {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    break line;
                }
                None => {
                    return Err(Error::Format {
                        line: 1,
                        message: "empty histogram file".into(),
                    })
                }
            }
        };
        if header.trim() != "bin,phase,value" {
            return Err(Error::Format {
                line: 1,
                message: format!("expected header `bin,phase,value`, got {header:?}"),
            });
        }
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Format {
                    line: lineno,
                    message: format!("expected 3 comma-separated fields, got {}", fields.len()),
                });
            }
            let bin: usize = fields[0].parse().map_err(|_| Error::Format {
                line: lineno,
                message: format!("invalid bin index {:?}", fields[0]),
            })?;
            if bin != values.len() {
                return Err(Error::Format {
                    line: lineno,
                    message: format!("expected bin {}, got {bin}", values.len()),
                });
            }
            let value: f64 = fields[2].parse().map_err(|_| Error::Format {
                line: lineno,
                message: format!("invalid value {:?}", fields[2]),
            })?;
            values.push(value);
        }
        if !values.len().is_power_of_two() {
            return Err(Error::Format {
                line: 1,
                message: format!("bin count {} is not a power of two", values.len()),
            });
        }
        let m = values.len().trailing_zeros() as usize;
        match kind {
            HistogramKind::Probabilities => PhaseHistogram::from_probabilities(m, values),
            HistogramKind::Counts => PhaseHistogram::from_counts(m, values),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_shape_and_mass() {
        assert!(PhaseHistogram::from_probabilities(2, vec![0.25; 4]).is_ok());
        assert!(PhaseHistogram::from_probabilities(2, vec![0.25; 3]).is_err());
        assert!(PhaseHistogram::from_probabilities(2, vec![0.3; 4]).is_err());
        assert!(PhaseHistogram::from_counts(1, vec![3.0, 4.5]).is_err());
        assert!(PhaseHistogram::from_counts(1, vec![3.0, 4.0]).is_ok());
    }

    #[test]
    fn point_mass_sampling_is_deterministic() {
        let p = PhaseHistogram::from_probabilities(2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let counts = p.sample(100, 7).unwrap();
        assert_eq!(counts.values(), &[0.0, 100.0, 0.0, 0.0]);
    }

    #[test]
    fn same_seed_same_counts() {
        let p = PhaseHistogram::from_probabilities(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let a = p.sample(10_000, 123).unwrap();
        let b = p.sample(10_000, 123).unwrap();
        let c = p.sample(10_000, 124).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert_eq!(a.total(), 10_000.0);
    }

    #[test]
    fn sample_tracks_distribution() {
        let p = PhaseHistogram::from_probabilities(3, vec![0.5, 0.25, 0.125, 0.125, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let counts = p.sample(200_000, 99).unwrap();
        for (c, q) in counts.probabilities().iter().zip(p.values()) {
            assert!((c - q).abs() < 0.01, "{c} vs {q}");
        }
        assert_eq!(counts.values()[5], 0.0);
    }

    #[test]
    fn zero_shots_rejected() {
        let p = PhaseHistogram::from_probabilities(1, vec![0.5, 0.5]).unwrap();
        assert!(p.sample(0, 1).is_err());
    }

    #[test]
    fn csv_round_trip_probabilities() {
        let p = PhaseHistogram::from_probabilities(2, vec![0.125, 0.375, 0.5, 0.0]).unwrap();
        let mut out = Vec::new();
        p.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert!(text.starts_with("bin,phase,value\n0,0,"));
        let back = PhaseHistogram::read_csv(out.as_slice(), HistogramKind::Probabilities).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn csv_round_trip_counts() {
        let p = PhaseHistogram::from_counts(1, vec![3.0, 17.0]).unwrap();
        let mut out = Vec::new();
        p.write_csv(&mut out).unwrap();
        let back = PhaseHistogram::read_csv(out.as_slice(), HistogramKind::Counts).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn distances() {
        let p = PhaseHistogram::from_probabilities(1, vec![1.0, 0.0]).unwrap();
        let q = PhaseHistogram::from_probabilities(1, vec![0.0, 1.0]).unwrap();
        assert_eq!(p.l1_distance(&q).unwrap(), 2.0);
        assert!((p.l2_distance(&q).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        // Counts are normalized before comparison.
        let c = PhaseHistogram::from_counts(1, vec![50.0, 50.0]).unwrap();
        let u = PhaseHistogram::from_probabilities(1, vec![0.5, 0.5]).unwrap();
        assert_eq!(c.l1_distance(&u).unwrap(), 0.0);
    }
}
