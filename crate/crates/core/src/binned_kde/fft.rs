//! Separable multidimensional FFT over row-major tensors.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub(crate) struct NdFft {
    dims: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl NdFft {
    pub(crate) fn new(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        NdFft {
            dims: dims.to_vec(),
            forward: dims.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex<f64>]) {
        self.run(data, &self.forward);
    }

    /// Unnormalised inverse transform (scaled by the element count).
    pub(crate) fn inverse(&self, data: &mut [Complex<f64>]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex<f64>], plans: &[Arc<dyn Fft<f64>>]) {
        let total: usize = self.dims.iter().product();
        assert_eq!(data.len(), total);
        let ndim = self.dims.len();
        for axis in 0..ndim {
            let len = self.dims[axis];
            let plan = &plans[axis];
            let mut scratch = vec![Complex::default(); plan.get_inplace_scratch_len()];
            if axis == ndim - 1 {
                // Innermost axis is contiguous: transform all rows in one call.
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let stride: usize = self.dims[axis + 1..].iter().product();
            let mut line = vec![Complex::default(); len];
            let outer = total / (len * stride);
            for o in 0..outer {
                let base = o * len * stride;
                for s in 0..stride {
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = data[base + k * stride + s];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride + s] = *v;
                    }
                }
            }
        }
    }
}
