//! Bayes factors of arbitrary (possibly rank-deficient) models against the
//! null model of sure variables.
//!
//! `B_γ = 𝓑(SSE_γ / SSE_0, k0, r_γ)` where `r_γ` is the rank of
//! `[X0 | X_γ | Z_γ]`. In the full-rank case `r_γ = k0 + |γ|` and this is the
//! usual conventional-prior Bayes factor.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::design::{rank_and_sse, DesignAssembly, ModelGamma};
use crate::error::{Error, Result};
use crate::linalg::Fit;
use crate::numerics::{bcal, HyperGPrior};

/// A Bayes factor against the null together with the statistics it was
/// computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BayesFactorValue {
    pub log_bf: f64,
    /// `SSE_γ / SSE_0`, clamped to `(0, 1]`.
    pub q: f64,
    pub kappa0: usize,
    /// Rank of the model design.
    pub kappa1: usize,
    /// The design has more columns than its rank.
    pub rank_deficient: bool,
    /// The added columns lie in the span of `X0`; the model is observationally
    /// the null and its Bayes factor is 1.
    pub alias_of_null: bool,
}

/// `ln 𝓑(q, κ0, κ1)` with the conventions used for model comparison: the
/// ratio is clamped into `(0, 1]` and `κ1 = κ0` yields 0.
pub fn log_bf_from_statistics(q: f64, kappa0: usize, kappa1: usize, n: usize, prior: &HyperGPrior) -> Result<f64> {
    if kappa1 == kappa0 {
        return Ok(0.0);
    }
    if !(q > 0.0) {
        return Err(Error::DegenerateData(format!(
            "a model with rank {kappa1} < n = {n} fits the response exactly"
        )));
    }
    Ok(bcal(q.min(1.0), kappa0, kappa1, n, prior)?.ln())
}

/// Evaluates Bayes factors for one dataset, memoizing on `(q, κ0, κ1)`.
pub struct BayesFactorEngine<'a> {
    assembly: &'a DesignAssembly,
    prior: HyperGPrior,
    cache: Mutex<HashMap<(u64, usize, usize), f64>>,
}

impl<'a> BayesFactorEngine<'a> {
    pub fn new(assembly: &'a DesignAssembly, prior: HyperGPrior) -> Result<Self> {
        // rounding leaves SSE_0 near (nε)² yᵀy when the null fits exactly
        let floor = (assembly.n() as f64 * f64::EPSILON).powi(2) * assembly.y().norm_squared();
        if !(assembly.sse_null() > floor) {
            return Err(Error::DegenerateData(
                "the null model fits the response exactly (SSE_0 = 0)".into(),
            ));
        }
        Ok(Self {
            assembly,
            prior,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn prior(&self) -> &HyperGPrior {
        &self.prior
    }

    pub fn evaluate(&self, gamma: &ModelGamma) -> Result<BayesFactorValue> {
        let fit = rank_and_sse(self.assembly, gamma)?;
        self.from_fit(fit, self.assembly.k0() + gamma.size())
    }

    /// Bayes factor of a model whose design has `width` columns and the
    /// given least-squares fit.
    pub fn from_fit(&self, fit: Fit, width: usize) -> Result<BayesFactorValue> {
        let k0 = self.assembly.k0();
        let n = self.assembly.n();
        let q = (fit.sse / self.assembly.sse_null()).min(1.0);
        let alias_of_null = fit.rank == k0;
        let log_bf = if alias_of_null {
            0.0
        } else {
            let key = (q.to_bits(), k0, fit.rank);
            let cached = self.cache.lock().expect("cache lock").get(&key).copied();
            match cached {
                Some(v) => v,
                None => {
                    let v = log_bf_from_statistics(q, k0, fit.rank, n, &self.prior)?;
                    self.cache.lock().expect("cache lock").insert(key, v);
                    v
                }
            }
        };
        Ok(BayesFactorValue {
            log_bf,
            q: if alias_of_null { 1.0 } else { q },
            kappa0: k0,
            kappa1: fit.rank,
            rank_deficient: fit.rank < width,
            alias_of_null,
        })
    }
}

/// One-shot Bayes factor of model `gamma` against the null.
pub fn bayes_factor(assembly: &DesignAssembly, gamma: &ModelGamma, prior: &HyperGPrior) -> Result<BayesFactorValue> {
    BayesFactorEngine::new(assembly, prior.clone())?.evaluate(gamma)
}

/// Full-model Bayes factor under one coding of a factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodingBayesFactor {
    pub coding: String,
    pub log_bf: f64,
    pub q: f64,
    pub kappa1: usize,
}

/// Full-model Bayes factor with the factor in indicator coding and in every
/// baseline coding (one level column dropped). All entries agree because the
/// column space, and with it `SSE` and the rank, is the same.
pub fn bf_invariance_report(
    assembly: &DesignAssembly,
    factor: usize,
    prior: &HyperGPrior,
) -> Result<Vec<CodingBayesFactor>> {
    let block = assembly
        .factors()
        .get(factor)
        .ok_or_else(|| Error::Usage(format!("factor index {factor} out of range")))?
        .clone();
    let entry = |coding: String, a: &DesignAssembly| -> Result<CodingBayesFactor> {
        let v = bayes_factor(a, &ModelGamma::full(a.k(), a.l()), prior)?;
        Ok(CodingBayesFactor {
            coding,
            log_bf: v.log_bf,
            q: v.q,
            kappa1: v.kappa1,
        })
    };
    let mut out = vec![entry("indicator".into(), assembly)?];
    for b in 0..block.width() {
        let keep: Vec<usize> = (0..block.width()).filter(|&j| j != b).collect();
        let recoded = assembly.with_factor_columns(factor, &keep)?;
        out.push(entry(format!("baseline={}", block.levels[b]), &recoded)?);
    }
    Ok(out)
}
