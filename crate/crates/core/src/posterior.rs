//! Exhaustive enumeration of the model space and inclusion summaries.

use rayon::prelude::*;
use serde::Serialize;

use crate::bayesfactor::{BayesFactorEngine, BayesFactorValue};
use crate::design::{model_design, rank_and_sse, DesignAssembly, FactorBlock, ModelGamma};
use crate::error::{Error, Result};
use crate::linalg;
use crate::modelspace::{ModelPriorScheme, NeumaierSum, PriorKind, MAX_ENUMERATED_COLUMNS};
use crate::numerics::{log_sum_exp, HyperGPrior};

pub const DEFAULT_TOP_N: usize = 10;

/// Per-model quantities from an enumeration, in lexicographic model order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRecord {
    pub index: u64,
    pub ln_prior: f64,
    pub bf: BayesFactorValue,
    pub ln_unnormalized: f64,
    pub ln_posterior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedProbability {
    pub name: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorLevels {
    pub factor: String,
    pub levels: Vec<NamedProbability>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopModel {
    /// Bit string over variables and levels, `variables|levels`.
    pub gamma: String,
    pub variables: Vec<String>,
    /// Active levels as `factor=level`.
    pub levels: Vec<String>,
    pub prior: f64,
    pub log_bf: f64,
    pub posterior: f64,
    pub design_rank: usize,
    pub rank_deficient: bool,
    pub alias_of_null: bool,
    /// Models in the list sharing a group id span the same column space and
    /// therefore have the same Bayes factor.
    pub alias_group: usize,
}

/// Posterior summary of a full enumeration.
#[derive(Debug, Clone, Serialize)]
pub struct PosteriorReport {
    pub n: usize,
    pub k0: usize,
    pub k: usize,
    pub factor_levels: Vec<usize>,
    pub model_count: u64,
    pub prior_scheme: PriorKind,
    pub hyper_prior: String,
    pub sse_null: f64,
    pub ln_normalizer: f64,
    pub null_posterior: f64,
    pub factor_inclusion: Vec<NamedProbability>,
    pub variable_inclusion: Vec<NamedProbability>,
    pub level_inclusion: Vec<FactorLevels>,
    pub top_models: Vec<TopModel>,
    #[serde(skip)]
    pub models: Vec<ModelRecord>,
    #[serde(skip)]
    blocks: Vec<FactorBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerateOptions {
    pub top_n: usize,
    pub parallel: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            top_n: DEFAULT_TOP_N,
            parallel: true,
        }
    }
}

/// Computes `B_γ P(M_γ)` for every model, normalizes in a fixed order and
/// fills the inclusion summaries.
pub fn enumerate_posterior(
    assembly: &DesignAssembly,
    prior_scheme: PriorKind,
    hyper_prior: &HyperGPrior,
    options: EnumerateOptions,
) -> Result<PosteriorReport> {
    let k = assembly.k();
    let l = assembly.l();
    let width = k + l;
    if width > MAX_ENUMERATED_COLUMNS {
        return Err(Error::Capacity(format!(
            "k + L = {width} candidate columns give 2^{width} models; at most {MAX_ENUMERATED_COLUMNS} columns can be enumerated, reduce the number of variables or levels"
        )));
    }
    let scheme = ModelPriorScheme::for_assembly(prior_scheme, assembly);
    let engine = BayesFactorEngine::new(assembly, hyper_prior.clone())?;
    let count = 1u64 << width;

    let eval = |index: u64| -> Result<ModelRecord> {
        let gamma = ModelGamma::from_index(index, k, l);
        let ln_prior = scheme.ln_prior(&gamma)?;
        let bf = engine.evaluate(&gamma)?;
        Ok(ModelRecord {
            index,
            ln_prior,
            bf,
            ln_unnormalized: bf.log_bf + ln_prior,
            ln_posterior: f64::NAN,
        })
    };
    let mut models: Vec<ModelRecord> = if options.parallel {
        (0..count).into_par_iter().map(eval).collect::<Result<_>>()?
    } else {
        (0..count).map(eval).collect::<Result<_>>()?
    };

    let ln_u: Vec<f64> = models.iter().map(|m| m.ln_unnormalized).collect();
    let ln_z = log_sum_exp(&ln_u);
    for m in &mut models {
        m.ln_posterior = m.ln_unnormalized - ln_z;
    }

    let blocks = assembly.factors().to_vec();
    let mut var_inc = vec![NeumaierSum::default(); k];
    let mut lev_inc = vec![NeumaierSum::default(); l];
    let mut fac_inc = vec![NeumaierSum::default(); blocks.len()];
    for m in &models {
        let p = m.ln_posterior.exp();
        let gamma = ModelGamma::from_index(m.index, k, l);
        for (j, _) in gamma.variable_bits.iter().enumerate().filter(|(_, &b)| b) {
            var_inc[j].add(p);
        }
        for (j, _) in gamma.level_bits.iter().enumerate().filter(|(_, &b)| b) {
            lev_inc[j].add(p);
        }
        for (h, b) in blocks.iter().enumerate() {
            if gamma.active_levels(b) > 0 {
                fac_inc[h].add(p);
            }
        }
    }

    let factor_inclusion = blocks
        .iter()
        .zip(&fac_inc)
        .map(|(b, s)| NamedProbability {
            name: b.name.clone(),
            probability: s.value(),
        })
        .collect();
    let variable_inclusion = assembly
        .variable_names()
        .iter()
        .zip(&var_inc)
        .map(|(name, s)| NamedProbability {
            name: name.clone(),
            probability: s.value(),
        })
        .collect();
    let level_inclusion = blocks
        .iter()
        .map(|b| FactorLevels {
            factor: b.name.clone(),
            levels: b
                .levels
                .iter()
                .zip(&lev_inc[b.range()])
                .map(|(lv, s)| NamedProbability {
                    name: lv.clone(),
                    probability: s.value(),
                })
                .collect(),
        })
        .collect();

    let top_models = top_models(assembly, &models, options.top_n)?;
    Ok(PosteriorReport {
        n: assembly.n(),
        k0: assembly.k0(),
        k,
        factor_levels: assembly.level_counts(),
        model_count: count,
        prior_scheme,
        hyper_prior: hyper_prior.name().to_string(),
        sse_null: assembly.sse_null(),
        ln_normalizer: ln_z,
        null_posterior: models[0].ln_posterior.exp(),
        factor_inclusion,
        variable_inclusion,
        level_inclusion,
        top_models,
        models,
        blocks,
    })
}

fn top_models(assembly: &DesignAssembly, models: &[ModelRecord], top_n: usize) -> Result<Vec<TopModel>> {
    let mut order: Vec<usize> = (0..models.len()).collect();
    // ties broken by model index so the list is reproducible
    order.sort_by(|&a, &b| {
        models[b]
            .ln_posterior
            .total_cmp(&models[a].ln_posterior)
            .then(models[a].index.cmp(&models[b].index))
    });
    order.truncate(top_n);

    let (k, l) = (assembly.k(), assembly.l());
    let mut designs: Vec<(usize, nalgebra::DMatrix<f64>)> = Vec::new();
    let mut out = Vec::with_capacity(order.len());
    for &i in &order {
        let m = &models[i];
        let gamma = ModelGamma::from_index(m.index, k, l);
        let design = model_design(assembly, &gamma)?;
        let rank = m.bf.kappa1;
        let group = designs
            .iter()
            .position(|(r, other)| *r == rank && linalg::rank(&linalg::hstack(&[other, &design])) == rank);
        let alias_group = match group {
            Some(g) => g,
            None => {
                designs.push((rank, design));
                designs.len() - 1
            }
        };
        let variables = assembly
            .variable_names()
            .iter()
            .zip(&gamma.variable_bits)
            .filter(|(_, &b)| b)
            .map(|(n, _)| n.clone())
            .collect();
        let mut levels = Vec::new();
        for b in assembly.factors() {
            for (j, lv) in b.levels.iter().enumerate() {
                if gamma.level_bits[b.offset + j] {
                    levels.push(format!("{}={}", b.name, lv));
                }
            }
        }
        out.push(TopModel {
            gamma: gamma.label(),
            variables,
            levels,
            prior: m.ln_prior.exp(),
            log_bf: m.bf.log_bf,
            posterior: m.ln_posterior.exp(),
            design_rank: rank,
            rank_deficient: m.bf.rank_deficient,
            alias_of_null: m.bf.alias_of_null,
            alias_group,
        });
    }
    Ok(out)
}

impl PosteriorReport {
    pub fn factors(&self) -> &[FactorBlock] {
        &self.blocks
    }

    pub fn factor_count(&self) -> usize {
        self.blocks.len()
    }

    /// Normalized posterior of every model, in enumeration order.
    pub fn posteriors(&self) -> impl Iterator<Item = f64> + '_ {
        self.models.iter().map(|m| m.ln_posterior.exp())
    }

    pub fn gamma(&self, model: usize) -> ModelGamma {
        ModelGamma::from_index(self.models[model].index, self.k, self.blocks.iter().map(FactorBlock::width).sum())
    }

    /// Posterior probability that factor `r` has at least one active level.
    pub fn factor_inclusion(&self, r: usize) -> Result<f64> {
        self.factor_inclusion
            .get(r)
            .map(|p| p.probability)
            .ok_or_else(|| Error::Usage(format!("factor index {r} out of range (p = {})", self.blocks.len())))
    }

    /// Posterior probability that level `j` of factor `r` is active.
    pub fn level_inclusion(&self, r: usize, j: usize) -> Result<f64> {
        let f = self
            .level_inclusion
            .get(r)
            .ok_or_else(|| Error::Usage(format!("factor index {r} out of range (p = {})", self.blocks.len())))?;
        f.levels
            .get(j)
            .map(|p| p.probability)
            .ok_or_else(|| Error::Usage(format!("level index {j} out of range for factor `{}`", f.factor)))
    }

    pub fn variable_inclusion(&self, i: usize) -> Result<f64> {
        self.variable_inclusion
            .get(i)
            .map(|p| p.probability)
            .ok_or_else(|| Error::Usage(format!("variable index {i} out of range (k = {})", self.k)))
    }

    /// Total posterior of models in which factor `r` has no active level.
    pub fn factor_exclusion_mass(&self, r: usize) -> Result<f64> {
        let block = self
            .blocks
            .get(r)
            .ok_or_else(|| Error::Usage(format!("factor index {r} out of range")))?;
        let mut s = NeumaierSum::default();
        for (i, p) in self.posteriors().enumerate() {
            if self.gamma(i).active_levels(block) == 0 {
                s.add(p);
            }
        }
        Ok(s.value())
    }
}

/// `P(A|y)` for one factor after absorbing `baseline_level` into the
/// intercept, i.e. under a full-rank baseline coding of that factor.
/// The model space shrinks to the remaining `ℓ - 1` level columns.
pub fn baseline_coded_factor_probability(
    assembly: &DesignAssembly,
    factor: usize,
    baseline_level: usize,
    prior_scheme: PriorKind,
    hyper_prior: &HyperGPrior,
) -> Result<f64> {
    let block = assembly
        .factors()
        .get(factor)
        .ok_or_else(|| Error::Usage(format!("factor index {factor} out of range")))?;
    if baseline_level >= block.width() {
        return Err(Error::Usage(format!(
            "baseline level {baseline_level} out of range for factor `{}`",
            block.name
        )));
    }
    let keep: Vec<usize> = (0..block.width()).filter(|&j| j != baseline_level).collect();
    let recoded = assembly.with_factor_columns(factor, &keep)?;
    let report = enumerate_posterior(
        &recoded,
        prior_scheme,
        hyper_prior,
        EnumerateOptions { top_n: 0, parallel: true },
    )?;
    report.factor_inclusion(factor)
}

/// Baseline-coded `P(A|y)` for a factor with at least three levels, using
/// the hierarchical model-space prior. With three or more levels the answer
/// depends on which level is chosen as baseline; the indicator-coded
/// analysis has no such argument.
pub fn baseline_sensitivity_demo(
    assembly: &DesignAssembly,
    factor: usize,
    baseline_level: usize,
    hyper_prior: &HyperGPrior,
) -> Result<f64> {
    let block = assembly
        .factors()
        .get(factor)
        .ok_or_else(|| Error::Usage(format!("factor index {factor} out of range")))?;
    if block.width() < 3 {
        return Err(Error::Usage(format!(
            "factor `{}` has {} levels; the baseline comparison needs at least 3",
            block.name,
            block.width()
        )));
    }
    baseline_coded_factor_probability(assembly, factor, baseline_level, PriorKind::Hierarchical, hyper_prior)
}

/// `P(A|y)` of every baseline coding next to the indicator-coded value.
#[derive(Debug, Clone, Serialize)]
pub struct BaselineComparison {
    pub factor: String,
    pub indicator_coding: f64,
    pub baseline_coding: Vec<NamedProbability>,
}

pub fn baseline_comparison(
    assembly: &DesignAssembly,
    factor: usize,
    hyper_prior: &HyperGPrior,
) -> Result<BaselineComparison> {
    let indicator = enumerate_posterior(
        assembly,
        PriorKind::Hierarchical,
        hyper_prior,
        EnumerateOptions { top_n: 0, parallel: true },
    )?
    .factor_inclusion(factor)?;
    let block = &assembly.factors()[factor];
    let baseline_coding = (0..block.width())
        .map(|b| {
            baseline_sensitivity_demo(assembly, factor, b, hyper_prior).map(|p| NamedProbability {
                name: block.levels[b].clone(),
                probability: p,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BaselineComparison {
        factor: block.name.clone(),
        indicator_coding: indicator,
        baseline_coding,
    })
}

/// Convenience for callers that only need SSE and rank of a model.
pub fn model_fit(assembly: &DesignAssembly, gamma: &ModelGamma) -> Result<linalg::Fit> {
    rank_and_sse(assembly, gamma)
}
