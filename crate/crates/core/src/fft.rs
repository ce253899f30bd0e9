//! In-place iterative radix-2 FFT.

use crate::C64;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

/// Twiddle table `e^{-2 pi i m / n}` for `m < n/2`.
fn twiddles(n: usize) -> Vec<C64> {
    (0..n / 2)
        .map(|m| {
            let a = -2.0 * PI * m as f64 / n as f64;
            C64::new(a.cos(), a.sin())
        })
        .collect()
}

fn bit_reverse(buf: &mut [C64]) {
    let n = buf.len();
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
}

fn transform(buf: &mut [C64], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    if n <= 1 {
        return;
    }
    bit_reverse(buf);
    let tw = twiddles(n);
    let mut len = 2;
    while len <= n {
        let step = n / len;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let mut w = tw[k * step];
                if inverse {
                    w = w.conj();
                }
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Unnormalized forward DFT: `X_k = sum_j x_j e^{-2 pi i jk/n}`.
pub(crate) fn fft(buf: &mut [C64]) {
    transform(buf, false);
}

/// Unnormalized inverse DFT: `x_j = sum_k X_k e^{2 pi i jk/n}`.
pub(crate) fn ifft(buf: &mut [C64]) {
    transform(buf, true);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_dft() {
        let n = 16;
        let x: Vec<C64> = (0..n).map(|j| C64::new((j as f64).sin(), (j * j) as f64 * 0.1)).collect();
        let mut y = x.clone();
        fft(&mut y);
        for k in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                let a = -2.0 * PI * (j * k) as f64 / n as f64;
                s += x[j] * C64::new(a.cos(), a.sin());
            }
            assert!((s - y[k]).norm() < 1e-12);
        }
        ifft(&mut y);
        for j in 0..n {
            assert!((y[j] / n as f64 - x[j]).norm() < 1e-14);
        }
    }
}
