//! Small dense linear-algebra helpers shared by the network and recovery code.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// LU factorization of a square complex matrix, computed once and reused
/// for every right-hand side.
#[derive(Clone, Debug)]
pub struct ComplexFactor {
    lu: LU<Complex64, Dyn, Dyn>,
    dim: usize,
    /// 1-norm condition estimate, `‖A‖₁ · ‖A⁻¹‖₁`.
    pub condition: f64,
}

impl ComplexFactor {
    /// Factorizes `a`, failing when it is singular or its 1-norm condition
    /// number exceeds `max_condition`.
    pub fn new(a: &CMatrix, max_condition: f64) -> std::result::Result<Self, f64> {
        let dim = a.nrows();
        let lu = a.clone().lu();
        let inv = match lu.try_inverse() {
            Some(inv) => inv,
            None => return Err(f64::INFINITY),
        };
        let condition = norm1(a) * norm1(&inv);
        if !condition.is_finite() || condition > max_condition {
            return Err(condition);
        }
        Ok(Self { lu, dim, condition })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, rhs: &CVector) -> CVector {
        self.lu
            .solve(rhs)
            .expect("factorization verified non-singular at construction")
    }

    pub fn solve_matrix(&self, rhs: &CMatrix) -> CMatrix {
        self.lu
            .solve(rhs)
            .expect("factorization verified non-singular at construction")
    }
}

fn norm1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Banded symmetric positive-definite Cholesky factor, stored by rows of the
/// lower band. Used for the tridiagonal-plus-window systems in the recovery
/// solver, where the half bandwidth is at most one smart-meter interval.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    // l[i][k] holds L[i, i - bw + k] for k in 0..=bw
    l: Vec<f64>,
}

impl BandCholesky {
    /// `entry(i, j)` must return `A[i, j]` for `j <= i` and `i - j <= bw`.
    pub fn new(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut sum = entry(i, j);
                let k0 = i.saturating_sub(bw).max(j.saturating_sub(bw));
                for k in k0..j {
                    sum -= l[i * w + (k + bw - i)] * l[j * w + (k + bw - j)];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return Err(Error::Numerical(format!(
                            "banded system not positive definite at row {i}"
                        )));
                    }
                    l[i * w + bw] = sum.sqrt();
                } else {
                    l[i * w + (j + bw - i)] = sum / l[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        debug_assert_eq!(b.len(), n);
        for i in 0..n {
            let mut sum = b[i];
            for k in i.saturating_sub(bw)..i {
                sum -= self.l[i * w + (k + bw - i)] * b[k];
            }
            b[i] = sum / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut sum = b[i];
            for k in (i + 1)..(i + bw + 1).min(n) {
                sum -= self.l[k * w + (i + bw - k)] * b[k];
            }
            b[i] = sum / self.l[i * w + bw];
        }
    }
}

/// Pearson correlation of two equally long series.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (da, db) = (a[i] - ma, b[i] - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa.sqrt() * sbb.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_cholesky_matches_dense_solve() {
        let n = 12;
        let bw = 3;
        let a = Matrix::from_fn(n, n, |i, j| {
            let d = i.abs_diff(j);
            if d == 0 {
                6.0 + i as f64 * 0.1
            } else if d <= bw {
                -1.0 / d as f64
            } else {
                0.0
            }
        });
        let chol = BandCholesky::new(n, bw, |i, j| a[(i, j)]).unwrap();
        let b = Vector::from_fn(n, |i, _| (i as f64).sin());
        let mut x = b.as_slice().to_vec();
        chol.solve_in_place(&mut x);
        let expected = a.clone().lu().solve(&b).unwrap();
        for i in 0..n {
            assert!((x[i] - expected[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn band_cholesky_rejects_indefinite() {
        assert!(BandCholesky::new(2, 1, |i, j| if i == j { 1.0 } else { 2.0 }).is_err());
    }

    #[test]
    fn complex_factor_reports_singularity() {
        let a = CMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(ComplexFactor::new(&a, 1e14).is_err());
    }

    #[test]
    fn correlation_of_affine_copy_is_one() {
        let a: Vec<f64> = (0..20).map(|i| (i as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = a.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((correlation(&a, &b) - 1.0).abs() < 1e-12);
    }
}
