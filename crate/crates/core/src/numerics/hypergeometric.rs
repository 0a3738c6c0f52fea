//! Gauss hypergeometric function ₂F₁(a, b; c; z) for real z < 1.
//!
//! Negative arguments go through a Pfaff transformation
//! `₂F₁(a,b;c;z) = (1-z)^{-b} ₂F₁(c-a, b; c; z/(z-1))` (or its mirror with
//! `a` and `b` exchanged) which maps z ≤ 0 into [0, 1). The variant whose
//! series has nonnegative terms is preferred so that the sum never cancels.
//! When the series would need more than [`SERIES_CAP`] terms (argument very
//! close to 1) the Euler integral is used instead.

use statrs::function::gamma::ln_gamma;

use super::quadrature::integrate_pieces;
use super::{log_add_exp, LogValue};
use crate::error::{Error, Result};

/// Maximum number of series terms.
pub const SERIES_CAP: usize = 10_000;

const SERIES_RTOL: f64 = 1e-16;
// digits we allow the partial sums to lose to cancellation
const MAX_CANCELLATION: f64 = 1e5;

enum Series {
    Converged(LogValue),
    Cancelled,
    Exhausted,
}

fn series(a: f64, b: f64, c: f64, x: f64) -> Series {
    let mut ln_term = 0.0_f64;
    let mut sign = 1.0_f64;
    let mut shift = 0.0_f64;
    let mut acc = 1.0_f64;
    let mut max_ln_term = 0.0_f64;
    let mut small = 0;
    for k in 0..SERIES_CAP {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * x;
        if ratio == 0.0 {
            // terminating polynomial
            return finish(acc, shift, max_ln_term);
        }
        ln_term += ratio.abs().ln();
        sign *= ratio.signum();
        if ln_term - shift > 600.0 {
            acc *= (shift - ln_term).exp();
            shift = ln_term;
        }
        acc += sign * (ln_term - shift).exp();
        max_ln_term = max_ln_term.max(ln_term);
        let rel = (ln_term - shift) - acc.abs().ln();
        if rel < SERIES_RTOL.ln() {
            small += 1;
            if small == 3 {
                return finish(acc, shift, max_ln_term);
            }
        } else {
            small = 0;
        }
    }
    Series::Exhausted
}

fn finish(acc: f64, shift: f64, max_ln_term: f64) -> Series {
    if acc == 0.0 {
        return Series::Cancelled;
    }
    let ln_abs = acc.abs().ln() + shift;
    if max_ln_term - ln_abs > MAX_CANCELLATION.ln() {
        return Series::Cancelled;
    }
    Series::Converged(LogValue {
        ln_abs,
        sign: if acc > 0.0 { 1 } else { -1 },
    })
}

fn check_domain(a: f64, b: f64, c: f64, z: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::Domain("2F1 parameters must be finite".into()));
    }
    if c <= 0.0 {
        return Err(Error::Domain(format!("2F1 requires c > 0, got c = {c}")));
    }
    if z >= 1.0 {
        return Err(Error::Domain(format!("2F1 requires z < 1, got z = {z}")));
    }
    Ok(())
}

/// Direct power series in `z`, |z| < 1. Fails on cancellation or when the
/// term cap is reached.
pub fn gauss_2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<LogValue> {
    check_domain(a, b, c, z)?;
    if z.abs() >= 1.0 {
        return Err(Error::Domain("power series needs |z| < 1".into()));
    }
    match series(a, b, c, z) {
        Series::Converged(v) => Ok(v),
        Series::Cancelled => Err(Error::Numeric(format!("2F1({a},{b};{c};{z}) series cancelled"))),
        Series::Exhausted => Err(Error::Numeric(format!(
            "2F1({a},{b};{c};{z}) series did not converge in {SERIES_CAP} terms"
        ))),
    }
}

/// ₂F₁(a, b; c; z) for c > 0 and z < 1.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<LogValue> {
    check_domain(a, b, c, z)?;
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(LogValue::positive(0.0));
    }

    let mut attempts: Vec<(f64, f64, f64, f64, f64)> = Vec::new(); // (ln prefactor, a', b', c', x)
    if z > 0.0 {
        attempts.push((0.0, a, b, c, z));
    } else {
        let w = z / (z - 1.0);
        let ln1mz = (-z).ln_1p();
        let keep_b = (-b * ln1mz, c - a, b, c, w);
        let keep_a = (-a * ln1mz, a, c - b, c, w);
        let nonneg = |p: f64, q: f64| p >= 0.0 && q >= 0.0;
        if nonneg(c - a, b) {
            attempts.push(keep_b);
        }
        if nonneg(a, c - b) {
            attempts.push(keep_a);
        }
        if z >= -0.5 {
            attempts.push((0.0, a, b, c, z));
        }
        attempts.push(keep_b);
        attempts.push(keep_a);
    }

    let mut exhausted = false;
    for (ln_pre, pa, pb, pc, x) in attempts {
        match series(pa, pb, pc, x) {
            Series::Converged(v) => return Ok(v.scale_ln(ln_pre)),
            Series::Exhausted => exhausted = true,
            Series::Cancelled => {}
        }
    }
    if (c > b && b > 0.0) || (c > a && a > 0.0) {
        return gauss_2f1_euler(a, b, c, z);
    }
    Err(Error::Numeric(format!(
        "2F1({a},{b};{c};{z}): {}",
        if exhausted { "series did not converge" } else { "series lost precision to cancellation" }
    )))
}

/// ₂F₁ through the Euler integral
/// `Γ(c)/(Γ(b)Γ(c-b)) ∫₀¹ t^{b-1}(1-t)^{c-b-1}(1-zt)^{-a} dt`,
/// valid when c > b > 0 (or c > a > 0, using the symmetry in a and b).
pub fn gauss_2f1_euler(a: f64, b: f64, c: f64, z: f64) -> Result<LogValue> {
    check_domain(a, b, c, z)?;
    let (a, b) = if c > b && b > 0.0 {
        (a, b)
    } else if c > a && a > 0.0 {
        (b, a)
    } else {
        return Err(Error::Domain(format!(
            "Euler integral needs c > b > 0 or c > a > 0 (a={a}, b={b}, c={c})"
        )));
    };
    let d = c - b;
    let ln_norm = ln_gamma(c) - ln_gamma(b) - ln_gamma(d);

    // t in [0, 1/2] via t = s^{1/b}: integrand (1-t)^{d-1}(1-zt)^{-a} / b
    let left = |s: f64| {
        let t = s.powf(1.0 / b);
        (d - 1.0) * (-t).ln_1p() - a * (-z * t).ln_1p()
    };
    // t in [1/2, 1] via 1-t = v^{1/d}: integrand t^{b-1}(1-zt)^{-a} / d
    let right = |v: f64| {
        let t = 1.0 - v.powf(1.0 / d);
        (b - 1.0) * t.ln() - a * (-z * t).ln_1p()
    };
    let ln_left = ln_integral(&left, 0.5f64.powf(b))? - b.ln();
    let ln_right = ln_integral(&right, 0.5f64.powf(d))? - d.ln();
    Ok(LogValue::positive(ln_norm + log_add_exp(ln_left, ln_right)))
}

/// `ln ∫₀^upper exp(log_f(x)) dx` with breakpoints on geometric grids
/// towards both ends, so mass concentrated at either endpoint is resolved.
fn ln_integral<F: Fn(f64) -> f64>(log_f: &F, upper: f64) -> Result<f64> {
    let half = 0.5 * upper;
    let mut low = Vec::new();
    let mut high = Vec::new();
    let mut x = half;
    while x > 1e-300 && low.len() < 320 {
        x *= 0.1;
        low.push(x);
        if x > upper * f64::EPSILON {
            high.push(upper - x);
        }
    }
    let mut points = vec![0.0];
    points.extend(low.iter().rev());
    points.push(half);
    points.extend(high);
    points.push(upper);
    let scale = points
        .windows(2)
        .flat_map(|w| [w[0], w[1], 0.5 * (w[0] + w[1])])
        .map(log_f)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !scale.is_finite() {
        return Err(Error::Numeric("Euler integrand is not finite".into()));
    }
    let f = |x: f64| {
        let v = log_f(x) - scale;
        if v.is_nan() {
            0.0
        } else {
            v.exp()
        }
    };
    let q = integrate_pieces(&f, &points, 1e-11, 0.0, 8000);
    if !(q.value > 0.0) || !q.converged {
        return Err(Error::Numeric(format!(
            "Euler integral did not converge (value {}, error {})",
            q.value, q.abs_error
        )));
    }
    Ok(scale + q.value.ln())
}
