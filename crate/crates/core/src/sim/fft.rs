//! Radix-2 transform used for the inverse QFT on contiguous slices.

use num_complex::Complex64;

/// In-place unitary inverse Fourier transform on a power-of-two buffer:
/// `out[y] = len^{-1/2} sum_k buf[k] exp(-2 pi i k y / len)`.
///
/// This is the map the inverse QFT performs on time-frequency basis labels,
/// with qubit `j` of the register holding bit `j` of the label.
pub fn inverse_fourier(buf: &mut [Complex64]) {
    let len = buf.len();
    debug_assert!(len.is_power_of_two());
    if len == 1 {
        return;
    }
    let bits = len.trailing_zeros();
    for i in 0..len {
        let j = (i.reverse_bits()) >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut span = 2;
    while span <= len {
        let step = -std::f64::consts::TAU / span as f64;
        let half = span / 2;
        for start in (0..len).step_by(span) {
            for k in 0..half {
                // sin_cos is exact enough here; spans are at most 2^m <= 2^24.
                let (s, c) = (step * k as f64).sin_cos();
                let w = Complex64::new(c, s);
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        span <<= 1;
    }
    let scale = 1.0 / (len as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= scale;
    }
}
