use crate::linalg::Matrix;

/// The `T × T` upper-triangular all-ones matrix `U`, acting on the right of
/// row vectors: `(x·U)[t] = Σ_{s ≤ t} x[s]`. Never formed densely.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DifferenceOperator {
    pub t: usize,
}

impl DifferenceOperator {
    pub fn new(t: usize) -> Self {
        Self { t }
    }

    /// `x·U`: running sum.
    pub fn apply_u(&self, x: &mut [f64]) {
        let mut acc = 0.0;
        for v in x.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }

    /// `x·U⁻¹`: first differences, `x[0]` kept.
    pub fn apply_u_inv(&self, x: &mut [f64]) {
        for t in (1..x.len()).rev() {
            x[t] -= x[t - 1];
        }
    }

    /// `x·Uᵀ`: reverse running sum.
    pub fn apply_ut(&self, x: &mut [f64]) {
        let mut acc = 0.0;
        for v in x.iter_mut().rev() {
            acc += *v;
            *v = acc;
        }
    }

    /// `x·U⁻ᵀ`: forward differences `x[t] − x[t+1]`, last entry kept.
    pub fn apply_ut_inv(&self, x: &mut [f64]) {
        for t in 0..x.len().saturating_sub(1) {
            x[t] -= x[t + 1];
        }
    }

    fn rows(&self, m: &Matrix, f: impl Fn(&Self, &mut [f64])) -> Matrix {
        let mut out = m.transpose();
        for mut col in out.column_iter_mut() {
            f(self, col.as_mut_slice());
        }
        out.transpose()
    }

    /// Row-wise `M·U`.
    pub fn u(&self, m: &Matrix) -> Matrix {
        self.rows(m, Self::apply_u)
    }

    /// Row-wise `M·U⁻¹`.
    pub fn u_inv(&self, m: &Matrix) -> Matrix {
        self.rows(m, Self::apply_u_inv)
    }

    /// Row-wise `M·Uᵀ`.
    pub fn ut(&self, m: &Matrix) -> Matrix {
        self.rows(m, Self::apply_ut)
    }

    /// Row-wise `M·U⁻ᵀ`.
    pub fn ut_inv(&self, m: &Matrix) -> Matrix {
        self.rows(m, Self::apply_ut_inv)
    }

    pub fn dense(&self) -> Matrix {
        Matrix::from_fn(self.t, self.t, |i, j| if i <= j { 1.0 } else { 0.0 })
    }
}
