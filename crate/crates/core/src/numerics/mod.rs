//! Special functions and mixing integrals, evaluated in log scale.

mod hypergeometric;
mod mixing;
pub mod quadrature;

pub use hypergeometric::{gauss_2f1, gauss_2f1_euler, gauss_2f1_series};
pub use mixing::{bcal, bcal_quadrature, robust_bf_closed, CustomHyperPrior, HyperGPrior, MixingContext};
pub(crate) use mixing::ln_integral_over;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonzero real stored as `sign * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub ln_abs: f64,
    pub sign: i8,
}

impl LogValue {
    pub fn positive(ln_abs: f64) -> Self {
        Self { ln_abs, sign: 1 }
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        if x == 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("{x} has no finite logarithm")));
        }
        Ok(Self {
            ln_abs: x.abs().ln(),
            sign: if x > 0.0 { 1 } else { -1 },
        })
    }

    pub fn value(self) -> f64 {
        self.sign as f64 * self.ln_abs.exp()
    }

    /// Natural log of a positive value.
    pub fn ln(self) -> f64 {
        debug_assert_eq!(self.sign, 1, "log of a negative LogValue");
        self.ln_abs
    }

    pub fn mul(self, other: Self) -> Self {
        Self {
            ln_abs: self.ln_abs + other.ln_abs,
            sign: self.sign * other.sign,
        }
    }

    pub fn scale_ln(self, ln_factor: f64) -> Self {
        Self {
            ln_abs: self.ln_abs + ln_factor,
            sign: self.sign,
        }
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ exp(x_i)` accumulated in the given order.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// `ln C(n, k)` by direct summation of logs.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}
