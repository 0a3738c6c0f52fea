//! Oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Rank and residual sum of squares by modified Gram–Schmidt with
/// reorthogonalization; a column is dropped when less than `1e-10` of its
/// norm survives.
pub fn gs_rank_sse(a: &DMatrix<f64>, y: &DVector<f64>) -> (usize, f64) {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for j in 0..a.ncols() {
        let mut v = a.column(j).into_owned();
        let orig = v.norm();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&v);
                v -= q * c;
            }
        }
        if orig > 0.0 && v.norm() > 1e-10 * orig {
            let nv = v.norm();
            basis.push(v / nv);
        }
    }
    let mut r = y.clone();
    for q in &basis {
        let c = q.dot(&r);
        r -= q * c;
    }
    (basis.len(), r.norm_squared())
}

/// ln of the robust-prior Bayes factor by composite Simpson in `s`, where
/// `g = 1/s² - 1` maps the prior support onto `(0, √(κ1/(n+1)))` and the
/// integrand becomes `s^{κ1-κ0} (q + (1-q) s²)^{-(n-κ0)/2}`.
pub fn ln_robust_bf(q: f64, k0: usize, k1: usize, n: usize) -> f64 {
    if k1 == k0 {
        return 0.0;
    }
    let (nf, e0) = (n as f64, (n - k0) as f64 / 2.0);
    let smax = (k1 as f64 / (nf + 1.0)).sqrt();
    let ln_f = |s: f64| {
        if s == 0.0 {
            f64::NEG_INFINITY
        } else {
            (k1 - k0) as f64 * s.ln() - e0 * (q + (1.0 - q) * s * s).ln()
        }
    };
    let m = 200_000usize;
    let h = smax / m as f64;
    let vals: Vec<f64> = (0..=m).map(|i| ln_f(i as f64 * h)).collect();
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (i, v) in vals.iter().enumerate() {
        let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * (v - top).exp();
    }
    0.5 * ((nf + 1.0) / k1 as f64).ln() + top + (sum * h / 3.0).ln()
}
