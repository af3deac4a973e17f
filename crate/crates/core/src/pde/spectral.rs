//! Periodic box, wavenumbers and FFTs for the spectral solver.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::PdeError;

/// Periodic box `[-L, L)^d` with `n` nodes per dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusGrid {
    pub d: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n: usize,
}

impl TorusGrid {
    pub fn new(d: usize, half_width: f64, n: usize) -> Result<Self, PdeError> {
        let g = Self { d, half_width, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), PdeError> {
        if !(self.d == 1 || self.d == 2) {
            return Err(PdeError::InvalidGrid(format!(
                "d must be 1 or 2, got {}",
                self.d
            )));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(PdeError::InvalidGrid(format!(
                "n must be a power of two >= 8, got {}",
                self.n
            )));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(PdeError::InvalidGrid(format!(
                "L must be positive, got {}",
                self.half_width
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Node coordinate along one axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    /// Position of flattened (row-major) node `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        match self.d {
            1 => vec![self.coordinate(idx)],
            _ => vec![self.coordinate(idx / self.n), self.coordinate(idx % self.n)],
        }
    }

    /// Signed mode number of FFT index `j`.
    fn mode(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Wavevector of flattened mode `idx`.
    pub fn wavevector(&self, idx: usize) -> Vec<f64> {
        let scale = PI / self.half_width;
        match self.d {
            1 => vec![scale * self.mode(idx) as f64],
            _ => vec![
                scale * self.mode(idx / self.n) as f64,
                scale * self.mode(idx % self.n) as f64,
            ],
        }
    }

    /// Two-thirds rule: keep modes with `|m| <= n / 3` in every direction.
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cut = (self.n / 3) as i64;
        (0..self.len())
            .map(|idx| match self.d {
                1 => self.mode(idx).abs() <= cut,
                _ => self.mode(idx / self.n).abs() <= cut && self.mode(idx % self.n).abs() <= cut,
            })
            .collect()
    }
}

/// Fourier multiplier of the fractional Laplacian: `-|k|^alpha`.
pub fn fractional_symbol(kvec: &[f64], alpha: f64) -> f64 {
    let norm = kvec.iter().map(|k| k * k).sum::<f64>().sqrt();
    if norm == 0.0 {
        0.0
    } else {
        -norm.powf(alpha)
    }
}

/// Forward and inverse transforms on flattened `n^d` arrays.
#[derive(Clone)]
pub struct Transform {
    n: usize,
    d: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform")
            .field("n", &self.n)
            .field("d", &self.d)
            .finish()
    }
}

impl Transform {
    pub fn new(grid: &TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n: grid.n,
            d: grid.d,
            forward: planner.plan_fft_forward(grid.n),
            inverse: planner.plan_fft_inverse(grid.n),
        }
    }

    fn apply(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        // rows (contiguous), then columns in 2-d
        fft.process(data);
        if self.d == 2 {
            let mut col = vec![Complex64::default(); n];
            for c in 0..n {
                for r in 0..n {
                    col[r] = data[r * n + c];
                }
                fft.process(&mut col);
                for r in 0..n {
                    data[r * n + c] = col[r];
                }
            }
        }
    }

    pub fn forward(&self, real: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = real.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.apply(&mut data, &self.forward);
        data
    }

    /// Inverse transform, normalised, real part.
    pub fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.apply(&mut spec, &self.inverse);
        let scale = 1.0 / spec.len() as f64;
        spec.into_iter().map(|z| z.re * scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_values() {
        assert_eq!(fractional_symbol(&[0.0], 1.3), 0.0);
        assert_eq!(fractional_symbol(&[3.0], 2.0), -9.0);
        assert_eq!(fractional_symbol(&[0.0, 2.0], 1.0), -2.0);
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(1, 10.0, 4).is_err());
        assert!(TorusGrid::new(1, 10.0, 24).is_err());
        assert!(TorusGrid::new(3, 10.0, 16).is_err());
        assert!(TorusGrid::new(2, 0.0, 16).is_err());
        let g = TorusGrid::new(2, 4.0, 16).unwrap();
        assert_eq!(g.len(), 256);
        assert_eq!(g.point(17), vec![-3.5, -3.5]);
    }

    #[test]
    fn round_trip_and_mode_placement() {
        for d in [1, 2] {
            let g = TorusGrid::new(d, PI, 16).unwrap();
            let t = Transform::new(&g);
            // cos(3x) (times cos(y) in 2-d) lands on the expected modes
            let f: Vec<f64> = (0..g.len())
                .map(|i| {
                    let x = g.point(i);
                    x.iter()
                        .enumerate()
                        .map(|(a, v)| if a == 0 { (3.0 * v).cos() } else { v.cos() })
                        .product()
                })
                .collect();
            let spec = t.forward(&f);
            let peak = spec
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .unwrap()
                .0;
            let k = g.wavevector(peak);
            assert!((k[0].abs() - 3.0).abs() < 1e-12);
            let back = t.inverse(spec);
            for (a, b) in f.iter().zip(&back) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn dealias_keeps_low_modes() {
        let g = TorusGrid::new(1, 1.0, 16).unwrap();
        let m = g.dealias_mask();
        assert!(m[0] && m[5] && !m[6] && !m[8] && m[11]);
    }
}
