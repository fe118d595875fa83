//! Test-side reference implementations for the proximal operators.

use gridedge::linalg::Matrix;
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

pub fn matrix(max_rows: usize, max_cols: usize, amp: f64) -> impl Strategy<Value = Matrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(move |(r, c)| {
        proptest::collection::vec(-amp..amp, r * c).prop_map(move |v| Matrix::from_vec(r, c, v))
    })
}

/// Largest singular value via the eigenvalues of `GᵀG`.
pub fn spectral_norm(g: &Matrix) -> f64 {
    let e = SymmetricEigen::new(g.transpose() * g);
    e.eigenvalues.iter().copied().fold(0.0, f64::max).max(0.0).sqrt()
}

/// Violation of `M − Y ∈ τ·∂‖Y‖∗`, with the singular structure of `Y`
/// rebuilt from an eigendecomposition of `YᵀY`.
pub fn nuclear_subgradient_residual(m: &Matrix, y: &Matrix, tau: f64) -> f64 {
    if tau == 0.0 {
        return (m - y).abs().max();
    }
    let e = SymmetricEigen::new(y.transpose() * y);
    let top = e.eigenvalues.iter().copied().fold(0.0, f64::max).max(0.0).sqrt();
    let g = (m - y) / tau;
    let mut g_perp = g.clone();
    let mut worst: f64 = 0.0;
    for (i, &lam) in e.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        if s <= 1e-7 * top.max(1.0) {
            continue;
        }
        let v = e.eigenvectors.column(i).into_owned();
        let u = (y * &v) / s;
        worst = worst.max((&g * &v - &u).norm());
        worst = worst.max((g.transpose() * &u - &v).norm());
        g_perp -= &u * v.transpose();
    }
    worst.max(spectral_norm(&g_perp) - 1.0)
}

/// Violation of the block soft-threshold optimality condition per group.
pub fn group_subgradient_residual(xp: &Matrix, xq: &Matrix, yp: &Matrix, yq: &Matrix, tau: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..xp.len() {
        let (a, b, c, d) = (xp[i], xq[i], yp[i], yq[i]);
        let ny = c.hypot(d);
        let r = if ny == 0.0 {
            (a.hypot(b) - tau).max(0.0)
        } else {
            ((a - c) - tau * c / ny).hypot((b - d) - tau * d / ny)
        };
        worst = worst.max(r);
    }
    worst
}

/// Minimizes `½‖y − x‖² + τ‖y‖` over a shrinking polar grid `(r, θ)`
/// around the incumbent. While the incumbent sits at the origin, where the
/// angle is undetermined, the angular grid is refined instead.
pub fn grid_group_prox(x: (f64, f64), tau: f64) -> (f64, f64) {
    use std::f64::consts::PI;
    let f = |r: f64, th: f64| {
        let (p, q) = (r * th.cos(), r * th.sin());
        0.5 * ((p - x.0).powi(2) + (q - x.1).powi(2)) + tau * r
    };
    let nr = 40;
    let mut nt = 40;
    let (mut r0, mut rw) = (0.0, x.0.hypot(x.1) + 1.0);
    let (mut t0, mut tw) = (0.0, PI);
    while rw > 1e-10 {
        let (hr, ht) = (2.0 * rw / nr as f64, 2.0 * tw / nt as f64);
        let mut best = (f64::INFINITY, r0, t0);
        for i in 0..=nr {
            let r = (r0 - rw + i as f64 * hr).max(0.0);
            for j in 0..=nt {
                let th = t0 - tw + j as f64 * ht;
                let v = f(r, th);
                if v < best.0 {
                    best = (v, r, th);
                }
            }
        }
        r0 = best.1;
        t0 = best.2;
        if r0 <= hr && nt < 4096 {
            nt *= 2;
            continue;
        }
        rw = 4.0 * hr;
        if r0 > hr {
            tw = (4.0 * ht).min(PI);
            nt = 40;
        }
    }
    (r0 * t0.cos(), r0 * t0.sin())
}
