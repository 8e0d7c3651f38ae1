//! Dense square matrices stored row-major.
//!
//! Everything downstream (probability matrices, latent matrices, adjacency
//! matrices) is symmetric and small enough that a dense `Vec<f64>` is the
//! right representation; nalgebra is only pulled in at the decomposition
//! boundary.

use nalgebra::DMatrix;

use crate::error::Error;

/// Dense row-major square matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    n: usize,
    data: Vec<f64>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Dense { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Dense::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    /// Builds from a row-major slice; `data.len()` must be a perfect square.
    pub fn from_rows(n: usize, data: &[f64]) -> Result<Self, Error> {
        if data.len() != n * n {
            return Err(Error::Shape(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Dense { n, data: data.to_vec() })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn frobenius_distance(&self, other: &Dense) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Count of entries with magnitude above `tol`.
    pub fn nnz(&self, tol: f64) -> usize {
        self.data.iter().filter(|v| v.abs() > tol).count()
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        Dense::from_fn(n, |i, j| m[(i, j)])
    }
}

/// Returns `clip((X + Xᵀ)/2, 0, 1)` with the diagonal zeroed.
///
/// Idempotent, and the exact Euclidean projection onto the set of symmetric
/// matrices with entries in `[0, 1]` and zero diagonal.
pub fn symmetrize_and_clip(x: &Dense) -> Dense {
    let n = x.n();
    let mut r = Dense::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (0.5 * (x.get(i, j) + x.get(j, i))).clamp(0.0, 1.0);
            r.set_sym(i, j, v);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrize_averages_mirror_entries() {
        let x = Dense::from_rows(2, &[0.0, 0.4, 0.6, 0.0]).unwrap();
        let r = symmetrize_and_clip(&x);
        assert_eq!(r.get(0, 1), 0.5);
        assert_eq!(r.get(1, 0), 0.5);
    }

    #[test]
    fn symmetrize_clips_to_unit_interval() {
        let x = Dense::from_rows(2, &[0.0, 1.3, 1.3, 0.0]).unwrap();
        let r = symmetrize_and_clip(&x);
        assert_eq!(r.get(0, 1), 1.0);
        let x = Dense::from_rows(2, &[0.0, -0.2, -0.2, 0.0]).unwrap();
        assert_eq!(symmetrize_and_clip(&x).get(0, 1), 0.0);
    }

    #[test]
    fn symmetrize_zeroes_diagonal() {
        let x = Dense::from_rows(2, &[0.9, 0.2, 0.2, 0.9]).unwrap();
        let r = symmetrize_and_clip(&x);
        assert_eq!(r.get(0, 0), 0.0);
        assert_eq!(r.get(1, 1), 0.0);
        assert_eq!(r.get(0, 1), 0.2);
    }

    #[test]
    fn symmetrize_is_idempotent() {
        let x = Dense::from_fn(5, |i, j| (i as f64 - j as f64) * 0.37 + 0.4);
        let once = symmetrize_and_clip(&x);
        let twice = symmetrize_and_clip(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn from_rows_rejects_wrong_length() {
        assert!(matches!(Dense::from_rows(2, &[1.0, 2.0, 3.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn nalgebra_round_trip() {
        let x = Dense::from_fn(3, |i, j| (i * 3 + j) as f64);
        assert_eq!(Dense::from_nalgebra(&x.to_nalgebra()), x);
    }
}
