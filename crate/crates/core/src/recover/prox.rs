use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Sum of singular values.
pub fn nuclear_norm(k: &Matrix) -> f64 {
    if k.is_empty() {
        return 0.0;
    }
    k.singular_values().sum()
}

/// `Σₙₜ ‖[Dᴾₙₜ; Dᵠₙₜ]‖₂`.
pub fn group_l1_norm(dp: &Matrix, dq: &Matrix) -> Result<f64> {
    if dp.shape() != dq.shape() {
        return Err(Error::dim("active and reactive change matrices differ in shape"));
    }
    Ok(dp.iter().zip(dq.iter()).map(|(p, q)| p.hypot(*q)).sum())
}

/// Singular-value soft thresholding, the proximal map of `τ‖·‖∗`.
/// Also returns the thresholded singular values.
pub fn prox_nuclear_with_values(m: &Matrix, tau: f64) -> Result<(Matrix, Vec<f64>)> {
    if !(tau >= 0.0) {
        return Err(Error::config("threshold must be nonnegative"));
    }
    if m.is_empty() {
        return Ok((m.clone(), Vec::new()));
    }
    let svd = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Numerical("SVD returned no singular vectors".into())),
    };
    let s: Vec<f64> = svd.singular_values.iter().map(|&x| (x - tau).max(0.0)).collect();
    let mut out = Matrix::zeros(m.nrows(), m.ncols());
    for (i, &si) in s.iter().enumerate() {
        if si > 0.0 {
            out += (u.column(i) * si) * vt.row(i);
        }
    }
    Ok((out, s))
}

pub fn prox_nuclear(m: &Matrix, tau: f64) -> Result<Matrix> {
    prox_nuclear_with_values(m, tau).map(|(x, _)| x)
}

/// Block soft thresholding of every `(P, Q)` pair; pairs with norm at most
/// `τ` become exactly zero.
pub fn prox_group_l1(dp: &Matrix, dq: &Matrix, tau: f64) -> Result<(Matrix, Matrix)> {
    if dp.shape() != dq.shape() {
        return Err(Error::dim("active and reactive change matrices differ in shape"));
    }
    if !(tau >= 0.0) {
        return Err(Error::config("threshold must be nonnegative"));
    }
    let mut p = dp.clone();
    let mut q = dq.clone();
    for (a, b) in p.iter_mut().zip(q.iter_mut()) {
        let norm = a.hypot(*b);
        if norm <= tau {
            *a = 0.0;
            *b = 0.0;
        } else {
            let s = 1.0 - tau / norm;
            *a *= s;
            *b *= s;
        }
    }
    Ok((p, q))
}

/// Entrywise clamp of `r` into `[−b, b]`.
pub fn project_box(r: &Matrix, b: &Matrix) -> Matrix {
    r.zip_map(b, |x, lim| x.clamp(-lim, lim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(nuclear_norm(&Matrix::from_diagonal(&nalgebra::dvector![3.0, 4.0])), 7.0);
        let d = Matrix::from_row_slice(1, 1, &[3.0]);
        let e = Matrix::from_row_slice(1, 1, &[4.0]);
        assert_eq!(group_l1_norm(&d, &e).unwrap(), 5.0);
        let (p, q) = prox_group_l1(&d, &e, 5.0).unwrap();
        assert_eq!((p[(0, 0)], q[(0, 0)]), (0.0, 0.0));
        let (p, q) = prox_group_l1(&(d * 2.0), &(e * 2.0), 5.0).unwrap();
        assert!((p[(0, 0)] - 3.0).abs() < 1e-15 && (q[(0, 0)] - 4.0).abs() < 1e-15);
    }

    #[test]
    fn svt_of_diagonal() {
        let m = Matrix::from_diagonal(&nalgebra::dvector![5.0, 1.0]);
        let x = prox_nuclear(&m, 2.0).unwrap();
        let expect = Matrix::from_diagonal(&nalgebra::dvector![3.0, 0.0]);
        assert!((x - expect).abs().max() < 1e-14);
        assert!((prox_nuclear(&m, 0.0).unwrap() - &m).abs().max() < 1e-14);
    }

    #[test]
    fn box_projection() {
        let r = Matrix::from_row_slice(1, 3, &[5.0, -1.0, -9.0]);
        let b = Matrix::from_row_slice(1, 3, &[2.0, 2.0, 3.0]);
        let p = project_box(&r, &b);
        assert_eq!(p, Matrix::from_row_slice(1, 3, &[2.0, -1.0, -3.0]));
        assert_eq!(project_box(&p, &b), p);
    }
}
