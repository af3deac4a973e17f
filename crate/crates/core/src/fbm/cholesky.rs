//! Dense Cholesky sampler for fBm at the grid nodes `t_1..t_n`.

use super::{fbm_covariance, FbmError, TimeGrid};

pub(super) struct LowerFactor {
    n: usize,
    /// Row-major lower triangle, `l[i * n + j]` for `j <= i`.
    l: Vec<f64>,
}

impl LowerFactor {
    pub(super) fn for_fbm(hurst: f64, grid: TimeGrid) -> Result<Self, FbmError> {
        let n = grid.n_steps;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            let ti = grid.node(i + 1);
            for j in 0..=i {
                let tj = grid.node(j + 1);
                let mut s = fbm_covariance(hurst, ti, tj);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return Err(FbmError::CholeskyFailure { row: i, pivot: s });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    /// Path values including the leading `B(0) = 0`.
    pub(super) fn sample<F: FnMut() -> f64>(&self, normal: &mut F) -> Vec<f64> {
        let z: Vec<f64> = (0..self.n).map(|_| normal()).collect();
        let mut path = Vec::with_capacity(self.n + 1);
        path.push(0.0);
        for i in 0..self.n {
            let row = &self.l[i * self.n..i * self.n + i + 1];
            path.push(row.iter().zip(&z).map(|(a, b)| a * b).sum());
        }
        path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_covariance() {
        let g = TimeGrid::new(1.0, 6).unwrap();
        let f = LowerFactor::for_fbm(0.7, g).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let s: f64 = (0..6).map(|k| f.l[i * 6 + k] * f.l[j * 6 + k]).sum();
                let want = fbm_covariance(0.7, g.node(i + 1), g.node(j + 1));
                assert!((s - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn brownian_factor_is_cumulative_sum() {
        let g = TimeGrid::new(4.0, 4).unwrap();
        let f = LowerFactor::for_fbm(0.5, g).unwrap();
        for i in 0..4 {
            for j in 0..=i {
                assert!((f.l[i * 4 + j] - 1.0).abs() < 1e-14);
            }
        }
    }
}
