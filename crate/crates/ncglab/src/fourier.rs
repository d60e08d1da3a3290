//! Discrete Fourier transforms used by the circulant fast paths.
//!
//! Radix-2 Cooley-Tukey for power-of-two lengths, direct evaluation
//! otherwise. Everything here is deterministic and allocation-light;
//! lengths stay in the few-thousands range.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Forward DFT: `out[k] = sum_j x[j] * exp(-2*pi*i*j*k/n)`.
pub(crate) fn dft_forward(x: &[Complex64]) -> Vec<Complex64> {
    dft(x, -1.0)
}

/// Inverse DFT, normalized by `1/n`.
pub(crate) fn dft_inverse(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let mut out = dft(x, 1.0);
    let scale = 1.0 / n as f64;
    for v in &mut out {
        *v *= scale;
    }
    out
}

fn dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    if n.is_power_of_two() && n > 1 {
        let mut buf = x.to_vec();
        fft_in_place(&mut buf, sign);
        return buf;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &v) in x.iter().enumerate() {
            let angle = sign * 2.0 * PI * (j as f64) * (k as f64) / n as f64;
            acc += v * Complex64::new(angle.cos(), angle.sin());
        }
        *o = acc;
    }
    out
}

fn fft_in_place(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let angle = sign * 2.0 * PI / len as f64;
        let wlen = Complex64::new(angle.cos(), angle.sin());
        let mut start = 0;
        while start < n {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
                w *= wlen;
            }
            start += len;
        }
        len <<= 1;
    }
}
