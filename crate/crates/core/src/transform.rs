//! 2D complex FFT over the torus grid.
//!
//! Plans and scratch live in a thread-local cache: one plan per worker
//! thread, never shared.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Plan {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    transpose: Vec<Complex64>,
}

impl Plan {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            transpose: vec![Complex64::default(); n * n],
        }
    }

    fn run(&mut self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let fft = if inverse { &self.inverse } else { &self.forward };
        // rows (x2 direction), then columns via transpose
        fft.process_with_scratch(data, &mut self.scratch);
        transpose(data, &mut self.transpose, n);
        fft.process_with_scratch(&mut self.transpose, &mut self.scratch);
        transpose(&self.transpose, data, n);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 16;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Plan>> = RefCell::new(HashMap::new());
}

fn with_plan<R>(n: usize, f: impl FnOnce(&mut Plan) -> R) -> R {
    PLANS.with(|plans| {
        let mut plans = plans.borrow_mut();
        let plan = plans.entry(n).or_insert_with(|| Plan::new(n));
        f(plan)
    })
}

/// Unnormalized inverse transform: mode amplitudes to point values.
pub(crate) fn inverse_2d(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n);
    with_plan(n, |p| p.run(data, true));
}

/// Forward transform normalized by `1/N^2`: point values to mode amplitudes.
pub(crate) fn forward_2d(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n);
    with_plan(n, |p| p.run(data, false));
    let scale = 1.0 / (n * n) as f64;
    for c in data.iter_mut() {
        *c *= scale;
    }
}
