//! Small FFT wrappers over `rustfft`: multi-dimensional complex transforms on
//! uniform grids, used by the Dyson-inequality certifier and the radial
//! kernel construction.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place complex FFT along every axis of a d-dimensional array stored in
/// row-major order with shape `dims` (`dims.len()` in 1..=3).
pub fn fft_nd(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    let total: usize = dims.iter().product();
    assert_eq!(data.len(), total);
    let mut planner = FftPlanner::new();
    for axis in 0..dims.len() {
        let n = dims[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        // stride between consecutive elements along `axis`
        let stride: usize = dims[axis + 1..].iter().product();
        let lines = total / n;
        let mut buf = vec![Complex64::default(); n];
        for line in 0..lines {
            // map line index to the base offset of this 1D slice
            let inner = line % stride;
            let outer = line / stride;
            let base = outer * n * stride + inner;
            for (i, b) in buf.iter_mut().enumerate() {
                *b = data[base + i * stride];
            }
            fft.process(&mut buf);
            for (i, b) in buf.iter().enumerate() {
                data[base + i * stride] = *b;
            }
        }
    }
    if inverse {
        let scale = 1.0 / total as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Signed frequency index for bin `k` of an `n`-point transform.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
