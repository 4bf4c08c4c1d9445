use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Below this many multiply-adds the direct sum is used.
const DIRECT_LIMIT: usize = 1 << 15;

/// `y[n] = Σ_{m=0}^{n} k[m] x[n-m]` for `n < n_out`, with a fixed kernel so
/// that its transform is reused across calls.
pub(crate) struct CausalConv {
    kernel: Vec<f64>,
    size: usize,
    k_hat: Option<Vec<Complex64>>,
    fwd: Option<Arc<dyn Fft<f64>>>,
    inv: Option<Arc<dyn Fft<f64>>>,
}

impl CausalConv {
    pub(crate) fn new(kernel: Vec<f64>, n_out: usize) -> Self {
        let direct = kernel.len().min(n_out) * n_out / 2 <= DIRECT_LIMIT;
        if direct {
            return CausalConv { kernel, size: 0, k_hat: None, fwd: None, inv: None };
        }
        let size = (kernel.len().min(n_out) + n_out).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let mut k_hat = vec![Complex64::new(0.0, 0.0); size];
        for (d, k) in k_hat.iter_mut().zip(kernel.iter().take(n_out)) {
            d.re = *k;
        }
        fwd.process(&mut k_hat);
        CausalConv { kernel, size, k_hat: Some(k_hat), fwd: Some(fwd), inv: Some(inv) }
    }

    pub(crate) fn apply(&self, x: &[f64], n_out: usize) -> Vec<f64> {
        match (&self.k_hat, &self.fwd, &self.inv) {
            (Some(k_hat), Some(fwd), Some(inv)) => {
                let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
                for (d, v) in buf.iter_mut().zip(x.iter().take(n_out)) {
                    d.re = *v;
                }
                fwd.process(&mut buf);
                for (b, k) in buf.iter_mut().zip(k_hat) {
                    *b *= k;
                }
                inv.process(&mut buf);
                let s = 1.0 / self.size as f64;
                buf[..n_out].iter().map(|z| z.re * s).collect()
            }
            _ => (0..n_out)
                .map(|n| {
                    let top = n.min(self.kernel.len() - 1);
                    (0..=top).filter(|&m| n - m < x.len()).map(|m| self.kernel[m] * x[n - m]).sum()
                })
                .collect(),
        }
    }
}
