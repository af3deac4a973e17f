//! Davies–Harte circulant embedding of fractional Gaussian noise.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

const MAX_EMBEDDING: usize = 1 << 24;

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub(super) fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

pub(super) struct Embedding {
    n: usize,
    /// `sqrt(lambda_k / m)` for the circulant eigenvalues `lambda_k`.
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl Embedding {
    /// Smallest power-of-two embedding of `n` increments whose circulant is
    /// nonnegative definite; `None` once the size cap is exceeded.
    pub(super) fn build(hurst: f64, n: usize) -> Option<Self> {
        let mut planner = FftPlanner::new();
        let mut half = n.next_power_of_two();
        while 2 * half <= MAX_EMBEDDING {
            let m = 2 * half;
            let mut row: Vec<Complex<f64>> = (0..m)
                .map(|j| {
                    let lag = if j <= half { j } else { m - j };
                    Complex::new(fgn_autocovariance(hurst, lag), 0.0)
                })
                .collect();
            let fft = planner.plan_fft_forward(m);
            fft.process(&mut row);
            let max = row.iter().map(|z| z.re).fold(0.0, f64::max);
            let floor = -1e-12 * max;
            if row.iter().all(|z| z.re >= floor) {
                let sqrt_eig = row
                    .iter()
                    .map(|z| (z.re.max(0.0) / m as f64).sqrt())
                    .collect();
                return Some(Self { n, sqrt_eig, fft });
            }
            half *= 2;
        }
        None
    }

    /// One draw of `n` unit-step fGn values.
    pub(super) fn sample_fgn<F: FnMut() -> f64>(&self, normal: &mut F) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = self
            .sqrt_eig
            .iter()
            .map(|&s| {
                let re = normal();
                let im = normal();
                Complex::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        buf.truncate(self.n);
        buf.into_iter().map(|z| z.re).collect()
    }

    #[cfg(test)]
    pub(super) fn size(&self) -> usize {
        self.sqrt_eig.len()
    }
}
