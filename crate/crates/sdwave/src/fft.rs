//! Minimal n-dimensional complex FFT on top of `rustfft`.
//!
//! An n-d transform is performed as n rounds of (last-axis 1-d FFTs, then a
//! cyclic axis rotation), which returns the data to its original layout after
//! the final round. Last-axis lines are contiguous, so they parallelize as
//! disjoint chunks; the rotation is a gather that parallelizes over the
//! output.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::sync::Arc;

use crate::par;

/// Unnormalized in-place n-d DFT over a row-major array with extents `dims`.
///
/// `inverse = false` computes sums with `e^{-2πi jk/N}` per axis, `true` the
/// conjugate sums. No 1/N scaling is applied in either direction.
pub fn fft_nd(data: &mut Vec<Complex64>, dims: &[usize], inverse: bool) {
    debug_assert_eq!(data.len(), dims.iter().product::<usize>());
    let mut planner = FftPlanner::new();
    let mut cur_dims: Vec<usize> = dims.to_vec();
    for _ in 0..dims.len() {
        let len = *cur_dims.last().unwrap();
        let fft: Arc<dyn rustfft::Fft<f64>> = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        par::for_each_chunk(data, len, |_, line| {
            fft.process(line);
        });
        rotate_axes_left(data, &mut cur_dims);
    }
}

/// Rotate axes left: dims `[d0, d1, .., dk]` become `[d1, .., dk, d0]`, with
/// element `(i0, i1, .., ik)` moving to `(i1, .., ik, i0)`. For 1-d this is a
/// no-op. `dims` is updated in place.
fn rotate_axes_left(data: &mut Vec<Complex64>, dims: &mut Vec<usize>) {
    if dims.len() <= 1 {
        return;
    }
    let d0 = dims[0];
    let rest: usize = dims[1..].iter().product();
    let src = std::mem::take(data);
    // new linear index j = r * d0 + i0 where old index = i0 * rest + r
    *data = par::map_range(src.len(), |j| {
        let i0 = j % d0;
        let r = j / d0;
        src[i0 * rest + r]
    });
    dims.rotate_left(1);
}
