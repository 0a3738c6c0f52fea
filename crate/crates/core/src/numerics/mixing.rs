//! The conventional-prior mixing integral
//!
//! `𝓑(q, κ0, κ1) = ∫ (1 + q g)^{-(n-κ0)/2} (1 + g)^{(n-κ1)/2} h(g) dg`
//!
//! by quadrature for any mixing density `h`, and in closed form for the
//! robust density
//! `h(g) = ½ ((1+n)/κ1)^{1/2} (g+1)^{-3/2}` on `g > (n+1)/κ1 - 1`.

use std::fmt;
use std::sync::Arc;

use statrs::function::gamma::ln_gamma;

use super::hypergeometric::gauss_2f1;
use super::quadrature::integrate_pieces;
use super::LogValue;
use crate::error::{Error, Result};

/// Quantities a mixing density may depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingContext {
    pub n: usize,
    pub kappa0: usize,
    pub kappa1: usize,
}

type LogDensity = dyn Fn(f64, &MixingContext) -> f64 + Send + Sync;
type Support = dyn Fn(&MixingContext) -> (f64, f64) + Send + Sync;

/// A mixing density on `g` given by its log density and support `(lo, hi)`,
/// where `hi` may be infinite.
#[derive(Clone)]
pub struct CustomHyperPrior {
    name: String,
    log_density: Arc<LogDensity>,
    support: Arc<Support>,
}

impl fmt::Debug for CustomHyperPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomHyperPrior").field("name", &self.name).finish()
    }
}

impl CustomHyperPrior {
    pub fn new(
        name: impl Into<String>,
        log_density: impl Fn(f64, &MixingContext) -> f64 + Send + Sync + 'static,
        support: impl Fn(&MixingContext) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            log_density: Arc::new(log_density),
            support: Arc::new(support),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ln_density(&self, g: f64, ctx: &MixingContext) -> f64 {
        (self.log_density)(g, ctx)
    }

    pub fn support(&self, ctx: &MixingContext) -> (f64, f64) {
        (self.support)(ctx)
    }

    /// The robust density, evaluated by quadrature rather than in closed form.
    pub fn robust() -> Self {
        Self::new(
            "robust-quadrature",
            |g, ctx| robust_ln_density(g, ctx.n, ctx.kappa1),
            |ctx| (robust_lower(ctx.n, ctx.kappa1), f64::INFINITY),
        )
    }

    /// Hyper-g: `h(g) = (a-2)/2 (1+g)^{-a/2}`, `a > 2`.
    pub fn hyper_g(a: f64) -> Self {
        assert!(a > 2.0, "hyper-g needs a > 2");
        Self::new(
            format!("hyper-g(a={a})"),
            move |g, _| ((a - 2.0) / 2.0).ln() - 0.5 * a * g.ln_1p(),
            |_| (0.0, f64::INFINITY),
        )
    }

    /// Hyper-g/n: `h(g) = (a-2)/(2n) (1+g/n)^{-a/2}`, `a > 2`.
    pub fn hyper_g_n(a: f64) -> Self {
        assert!(a > 2.0, "hyper-g/n needs a > 2");
        Self::new(
            format!("hyper-g/n(a={a})"),
            move |g, ctx| {
                let n = ctx.n as f64;
                ((a - 2.0) / (2.0 * n)).ln() - 0.5 * a * (g / n).ln_1p()
            },
            |_| (0.0, f64::INFINITY),
        )
    }

    /// Zellner–Siow: `g ~ InvGamma(1/2, n/2)`.
    pub fn zellner_siow() -> Self {
        Self::new(
            "zellner-siow",
            |g, ctx| {
                let half_n = ctx.n as f64 / 2.0;
                0.5 * half_n.ln() - ln_gamma(0.5) - 1.5 * g.ln() - half_n / g
            },
            |_| (0.0, f64::INFINITY),
        )
    }

    /// `∫ h(g) dg` over the support, by quadrature.
    pub fn total_mass(&self, ctx: &MixingContext) -> Result<f64> {
        let (lo, hi) = self.support(ctx);
        let dmin = if hi.is_finite() { 1.0 / (1.0 + hi) } else { 0.0 };
        let dmax = 1.0 / (1.0 + lo);
        // g = (1-d)/d, dg = dd/d^2
        let log_f = |d: f64| self.ln_density((1.0 - d) / d, ctx) - 2.0 * d.ln();
        Ok(ln_integral_over(&log_f, dmin, dmax, 1e-12)?.exp())
    }
}

/// Mixing density family for the conventional prior.
#[derive(Debug, Clone)]
pub enum HyperGPrior {
    /// Robust density with the closed-form Bayes factor.
    Robust,
    Custom(CustomHyperPrior),
}

impl HyperGPrior {
    pub fn name(&self) -> &str {
        match self {
            HyperGPrior::Robust => "robust",
            HyperGPrior::Custom(c) => c.name(),
        }
    }

    /// Parses a CLI family name.
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "robust" => HyperGPrior::Robust,
            "robust-quadrature" => HyperGPrior::Custom(CustomHyperPrior::robust()),
            "hyper-g" => HyperGPrior::Custom(CustomHyperPrior::hyper_g(3.0)),
            "hyper-g-n" => HyperGPrior::Custom(CustomHyperPrior::hyper_g_n(3.0)),
            "zellner-siow" => HyperGPrior::Custom(CustomHyperPrior::zellner_siow()),
            other => {
                return Err(Error::Config(format!(
                    "unknown hyper prior `{other}` (expected robust, robust-quadrature, hyper-g, hyper-g-n, zellner-siow)"
                )))
            }
        })
    }
}

fn robust_lower(n: usize, kappa1: usize) -> f64 {
    ((n as f64 + 1.0) / kappa1 as f64 - 1.0).max(0.0)
}

fn robust_ln_density(g: f64, n: usize, kappa1: usize) -> f64 {
    if g <= robust_lower(n, kappa1) {
        return f64::NEG_INFINITY;
    }
    0.5f64.ln() + 0.5 * ((1.0 + n as f64) / kappa1 as f64).ln() - 1.5 * g.ln_1p()
}

fn check_args(q: f64, kappa0: usize, kappa1: usize, n: usize) -> Result<()> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Domain(format!("q must lie in (0, 1], got {q}")));
    }
    if kappa1 > n {
        return Err(Error::Domain(format!("κ1 = {kappa1} exceeds n = {n}; the integral diverges")));
    }
    if kappa0 >= kappa1 {
        return Err(Error::Domain(format!("need κ0 < κ1, got κ0 = {kappa0}, κ1 = {kappa1}")));
    }
    Ok(())
}

/// Closed-form robust-prior 𝓑 through ₂F₁:
/// `((n+1)/κ1)^{-(κ1-κ0)/2} q^{-(n-κ0)/2} / (κ1-κ0+1) ·
/// ₂F₁[(κ1-κ0+1)/2; (n-κ0)/2; (κ1-κ0+3)/2; κ1(1-1/q)/(n+1)]`.
/// Substituting `1 + g = ((n+1)/κ1)/s` turns the integral into Euler's
/// integral for ₂F₁ over `s ∈ (0, 1]`, which fixes the sign of the first
/// exponent and the `κ1-κ0+1` denominator.
pub fn robust_bf_closed(q: f64, kappa0: usize, kappa1: usize, n: usize) -> Result<LogValue> {
    check_args(q, kappa0, kappa1, n)?;
    let (n, k0, k1) = (n as f64, kappa0 as f64, kappa1 as f64);
    let a = (k1 - k0 + 1.0) / 2.0;
    let b = (n - k0) / 2.0;
    let c = (k1 - k0 + 3.0) / 2.0;
    let z = k1 * (1.0 - 1.0 / q) / (n + 1.0);
    let f = gauss_2f1(a, b, c, z)?;
    if f.sign != 1 {
        return Err(Error::Numeric("robust 2F1 factor is not positive".into()));
    }
    let ln_b = -(k1 - k0) / 2.0 * ((n + 1.0) / k1).ln() - b * q.ln() - (k1 - k0 + 1.0).ln() + f.ln();
    Ok(LogValue::positive(ln_b))
}

/// 𝓑 by adaptive quadrature in `d = 1/(1+g)` (that is, `1 - u` with
/// `u = g/(1+g)`), with the integrand kept in log scale.
pub fn bcal_quadrature(q: f64, kappa0: usize, kappa1: usize, n: usize, prior: &HyperGPrior) -> Result<LogValue> {
    check_args(q, kappa0, kappa1, n)?;
    let ctx = MixingContext { n, kappa0, kappa1 };
    let custom;
    let prior = match prior {
        HyperGPrior::Robust => {
            custom = CustomHyperPrior::robust();
            &custom
        }
        HyperGPrior::Custom(c) => c,
    };
    let (lo, hi) = prior.support(&ctx);
    let dmin = if hi.is_finite() { 1.0 / (1.0 + hi) } else { 0.0 };
    let dmax = 1.0 / (1.0 + lo);
    let e0 = (n - kappa0) as f64 / 2.0;
    let e1 = (n - kappa1) as f64 / 2.0;
    // 1 + q g = (q + (1-q) d)/d,  1 + g = 1/d,  dg = dd/d^2
    let log_f = |d: f64| {
        let g = (1.0 - d) / d;
        -e0 * (q + (1.0 - q) * d).ln() + (e0 - e1 - 2.0) * d.ln() + prior.ln_density(g, &ctx)
    };
    let ln_v = ln_integral_over(&log_f, dmin, dmax, 1e-12)?;
    Ok(LogValue::positive(ln_v))
}

/// Dispatches to the closed form for the robust family and to quadrature
/// otherwise.
pub fn bcal(q: f64, kappa0: usize, kappa1: usize, n: usize, prior: &HyperGPrior) -> Result<LogValue> {
    match prior {
        HyperGPrior::Robust => robust_bf_closed(q, kappa0, kappa1, n),
        HyperGPrior::Custom(_) => bcal_quadrature(q, kappa0, kappa1, n, prior),
    }
}

/// `ln ∫_lo^hi exp(log_f(d)) dd` for `0 ≤ lo < hi`, with geometric
/// breakpoints towards `lo` and the integrand rescaled by its grid maximum.
pub(crate) fn ln_integral_over<F: Fn(f64) -> f64>(log_f: &F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64> {
    if !(hi > lo) {
        return Err(Error::Domain(format!("empty integration range [{lo}, {hi}]")));
    }
    let mut points = vec![hi];
    let mut x = hi;
    loop {
        x *= 0.1;
        if x <= lo || x < 1e-300 || points.len() > 320 {
            break;
        }
        points.push(x);
    }
    points.push(lo);
    points.reverse();

    let mut scale = f64::NEG_INFINITY;
    for w in points.windows(2) {
        for j in 1..8 {
            let v = log_f(w[0] + (w[1] - w[0]) * j as f64 / 8.0);
            if v.is_finite() {
                scale = scale.max(v);
            }
        }
        let v = log_f(w[1]);
        if v.is_finite() {
            scale = scale.max(v);
        }
    }
    if !scale.is_finite() {
        return Err(Error::Numeric("integrand vanishes on the whole grid".into()));
    }
    let f = |d: f64| {
        let v = log_f(d) - scale;
        if v.is_nan() {
            0.0
        } else {
            v.exp()
        }
    };
    let r = integrate_pieces(&f, &points, rel_tol, 0.0, 8000);
    if !r.converged || !(r.value > 0.0) {
        return Err(Error::Numeric(format!(
            "mixing integral did not converge (value {:e}, error {:e})",
            r.value, r.abs_error
        )));
    }
    Ok(scale + r.value.ln())
}
