//! Multi-dimensional FFT over row-major grids.
//!
//! Transforms are applied axis by axis with `rustfft`. Lanes that are
//! identically zero are skipped, which matters for the square function:
//! every block piece is sparse in frequency, so most lanes of the first
//! passes carry no data.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `X[k] = sum_j x[j] e^{-2 pi i jk/n}`, unnormalized.
    Forward,
    /// `x[j] = sum_k X[k] e^{+2 pi i jk/n}`, unnormalized.
    Inverse,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(len),
            Direction::Inverse => p.plan_fft_inverse(len),
        }
    })
}

fn is_zero(lane: &[Complex64]) -> bool {
    lane.iter().all(|c| c.re == 0.0 && c.im == 0.0)
}

/// Number of partial sums in [`par_sum_sq`]. Fixed so that the floating
/// point summation order does not depend on the thread pool.
const SUM_CHUNKS: usize = 32;
/// Partial sums alive at once; bounds memory at `(WAVE + 1)` grids.
const WAVE: usize = 4;

/// `Σ_i |synth(i)|^2` pointwise over `n` synthesized grids of length
/// `total`, bitwise reproducible across runs and thread counts.
pub(crate) fn par_sum_sq(
    n: usize,
    total: usize,
    synth: impl Fn(usize) -> Vec<Complex64> + Sync,
) -> Vec<f64> {
    let chunk = n.div_ceil(SUM_CHUNKS).max(1);
    let starts: Vec<usize> = (0..n).step_by(chunk).collect();
    let mut out = vec![0.0f64; total];
    for wave in starts.chunks(WAVE) {
        let partial: Vec<Vec<f64>> = wave
            .par_iter()
            .map(|&s| {
                let mut acc = vec![0.0f64; total];
                for i in s..(s + chunk).min(n) {
                    for (a, v) in acc.iter_mut().zip(&synth(i)) {
                        *a += v.norm_sqr();
                    }
                }
                acc
            })
            .collect();
        for acc in partial {
            for (a, b) in out.iter_mut().zip(&acc) {
                *a += b;
            }
        }
    }
    out
}

/// In-place unnormalized transform of a row-major array with the given shape.
pub(crate) fn transform_nd(data: &mut [Complex64], shape: &[usize], dir: Direction) {
    debug_assert_eq!(data.len(), shape.iter().product::<usize>());
    for axis in (0..shape.len()).rev() {
        transform_axis(data, shape, axis, dir);
    }
}

fn transform_axis(data: &mut [Complex64], shape: &[usize], axis: usize, dir: Direction) {
    let len = shape[axis];
    if len <= 1 {
        return;
    }
    let stride: usize = shape[axis + 1..].iter().product();
    let fft = plan(len, dir);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    if stride == 1 {
        for lane in data.chunks_exact_mut(len) {
            if !is_zero(lane) {
                fft.process_with_scratch(lane, &mut scratch);
            }
        }
        return;
    }

    let block = len * stride;
    let mut lane = vec![Complex64::default(); len];
    for chunk in data.chunks_exact_mut(block) {
        for inner in 0..stride {
            for (j, v) in lane.iter_mut().enumerate() {
                *v = chunk[j * stride + inner];
            }
            if is_zero(&lane) {
                continue;
            }
            fft.process_with_scratch(&mut lane, &mut scratch);
            for (j, v) in lane.iter().enumerate() {
                chunk[j * stride + inner] = *v;
            }
        }
    }
}

/// Row-major flat index of a multi-index.
pub(crate) fn flat_index(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Inverse of [`flat_index`].
pub(crate) fn unravel(mut flat: usize, shape: &[usize], out: &mut [usize]) {
    for axis in (0..shape.len()).rev() {
        out[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
}

/// Signed frequency of DFT bin `j` on a grid of `n` points: bins above
/// `n/2` are negative, bin `n/2` itself is taken as positive.
pub(crate) fn signed_bin(j: usize, n: usize) -> i64 {
    if j > n / 2 {
        j as i64 - n as i64
    } else {
        j as i64
    }
}

/// DFT bin holding frequency `k` on a grid of `n` points.
pub(crate) fn wrap_bin(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}
