//! Radix-2 FFT over octuple-precision complex numbers.

use alloc::vec::Vec;

use crate::real::{int, Cx, Real};

/// Twiddles are recomputed from scratch this often to stop the recurrence
/// from drifting.
const ANCHOR: usize = 32;

fn twiddles(m: usize) -> Vec<Cx> {
    let half = m / 2;
    let mut out = Vec::with_capacity(half);
    let step = Cx::turn(-(Real::ONE / int(m as i64)));
    let mut w = Cx::ONE;
    for j in 0..half {
        if j % ANCHOR == 0 {
            w = Cx::turn(-(int(j as i64) / int(m as i64)));
        }
        out.push(w);
        w *= step;
    }
    out
}

fn bit_reverse(data: &mut [Cx]) {
    let n = data.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
}

/// Unnormalised DFT with kernel `e^{−2iπjk/M}` (`inverse = false`) or
/// `e^{+2iπjk/M}` (`inverse = true`). The length must be a power of two.
pub fn fft_in_place(data: &mut [Cx], inverse: bool) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    if n < 2 {
        return;
    }
    let tw = twiddles(n);
    bit_reverse(data);
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = tw[k * stride];
                let w = if inverse { w.conj() } else { w };
                let a = data[start + k];
                let b = data[start + k + len / 2] * w;
                data[start + k] = a + b;
                data[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Coefficients `c_k = (1/M) Σ_j f_j e^{−2iπjk/M}`, returned in FFT order.
pub fn forward(samples: &[Cx]) -> Vec<Cx> {
    let mut data = samples.to_vec();
    fft_in_place(&mut data, false);
    let inv = Real::ONE / int(data.len() as i64);
    for c in data.iter_mut() {
        *c = c.scale(inv);
    }
    data
}

/// Samples `f_j = Σ_k c_k e^{2iπjk/M}` from coefficients in FFT order.
pub fn inverse(coeffs: &[Cx]) -> Vec<Cx> {
    let mut data = coeffs.to_vec();
    fft_in_place(&mut data, true);
    data
}
