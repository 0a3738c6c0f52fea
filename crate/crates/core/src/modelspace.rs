//! Prior probabilities over the `2^(k+L)` model space.
//!
//! Three schemes are available:
//!
//! * `constant`: every model gets `2^-(k+L)`;
//! * `scott-berger`: uniform over the number of active columns, then uniform
//!   within a size, treating each level column like a variable;
//! * `hierarchical`: Scott–Berger over which of the `k + p` predictors are
//!   active (a factor is active when at least one of its levels is), then,
//!   independently for every active factor with `ℓ` levels of which `j` are
//!   active, `[ℓ · C(ℓ, j)]^-1`.
//!
//! Under the hierarchical scheme every variable and every factor is active
//! with prior probability exactly 1/2, whatever the number of levels.

use serde::{Deserialize, Serialize};

use crate::design::{DesignAssembly, ModelGamma};
use crate::error::{Error, Result};
use crate::numerics::ln_choose;

/// Largest `k + L` that may be enumerated exhaustively.
pub const MAX_ENUMERATED_COLUMNS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    Constant,
    ScottBerger,
    Hierarchical,
}

impl PriorKind {
    pub fn name(self) -> &'static str {
        match self {
            PriorKind::Constant => "constant",
            PriorKind::ScottBerger => "scott-berger",
            PriorKind::Hierarchical => "hierarchical",
        }
    }
}

/// A model-space prior together with the dimensions it is defined on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelPriorScheme {
    pub kind: PriorKind,
    /// Number of candidate variables.
    pub k: usize,
    /// Levels per factor, `ℓ_1..ℓ_p`.
    pub levels: Vec<usize>,
}

impl ModelPriorScheme {
    pub fn new(kind: PriorKind, k: usize, levels: Vec<usize>) -> Self {
        Self { kind, k, levels }
    }

    pub fn for_assembly(kind: PriorKind, assembly: &DesignAssembly) -> Self {
        Self::new(kind, assembly.k(), assembly.level_counts())
    }

    pub fn p(&self) -> usize {
        self.levels.len()
    }

    pub fn l(&self) -> usize {
        self.levels.iter().sum()
    }

    /// Total number of columns that can be switched on or off.
    pub fn columns(&self) -> usize {
        self.k + self.l()
    }

    /// Log prior from the number of active variables and the number of
    /// active levels of each factor. All three schemes depend on the model
    /// only through these counts.
    pub fn ln_prior_counts(&self, active_variables: usize, active_levels: &[usize]) -> f64 {
        debug_assert_eq!(active_levels.len(), self.levels.len());
        match self.kind {
            PriorKind::Constant => -(self.columns() as f64) * std::f64::consts::LN_2,
            PriorKind::ScottBerger => {
                let big_k = self.columns();
                let size = active_variables + active_levels.iter().sum::<usize>();
                -((big_k + 1) as f64).ln() - ln_choose(big_k, size)
            }
            PriorKind::Hierarchical => {
                let predictors = self.k + self.p();
                let m2 = active_levels.iter().filter(|&&a| a > 0).count();
                let mut lp = -((predictors + 1) as f64).ln() - ln_choose(predictors, active_variables + m2);
                for (&l, &a) in self.levels.iter().zip(active_levels) {
                    if a > 0 {
                        lp -= (l as f64).ln() + ln_choose(l, a);
                    }
                }
                lp
            }
        }
    }

    pub fn ln_prior(&self, gamma: &ModelGamma) -> Result<f64> {
        self.check(gamma)?;
        let mut counts = Vec::with_capacity(self.levels.len());
        let mut at = 0;
        for &l in &self.levels {
            counts.push(gamma.level_bits[at..at + l].iter().filter(|&&b| b).count());
            at += l;
        }
        Ok(self.ln_prior_counts(gamma.active_variables(), &counts))
    }

    pub fn probability(&self, gamma: &ModelGamma) -> Result<f64> {
        self.ln_prior(gamma).map(f64::exp)
    }

    fn check(&self, gamma: &ModelGamma) -> Result<()> {
        if gamma.variable_bits.len() != self.k || gamma.level_bits.len() != self.l() {
            return Err(Error::Usage(format!(
                "model dimensions ({}, {}) do not match the prior's (k, L) = ({}, {})",
                gamma.variable_bits.len(),
                gamma.level_bits.len(),
                self.k,
                self.l()
            )));
        }
        Ok(())
    }
}

/// `2^-(k+L)` for every model.
pub fn prior_constant(k: usize, levels: &[usize], gamma: &ModelGamma) -> Result<f64> {
    ModelPriorScheme::new(PriorKind::Constant, k, levels.to_vec()).probability(gamma)
}

/// `[(K+1) C(K, |γ|)]^-1` with `K = k + L`.
pub fn prior_scott_berger_flat(k: usize, levels: &[usize], gamma: &ModelGamma) -> Result<f64> {
    ModelPriorScheme::new(PriorKind::ScottBerger, k, levels.to_vec()).probability(gamma)
}

/// Two-stage factor-aware prior.
pub fn prior_hierarchical(k: usize, levels: &[usize], gamma: &ModelGamma) -> Result<f64> {
    ModelPriorScheme::new(PriorKind::Hierarchical, k, levels.to_vec()).probability(gamma)
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NeumaierSum {
    sum: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Exhaustive summary of a model-space prior.
#[derive(Debug, Clone, Serialize)]
pub struct PriorAudit {
    pub scheme: PriorKind,
    pub k: usize,
    pub levels: Vec<usize>,
    pub model_count: u64,
    pub total_mass: f64,
    pub null_mass: f64,
    /// Mass of all models with `s` active columns, `s = 0..=k+L`.
    pub mass_by_size: Vec<f64>,
    pub variable_inclusion: Vec<f64>,
    pub factor_inclusion: Vec<f64>,
    pub level_inclusion: Vec<Vec<f64>>,
    pub checks: Vec<AuditCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl PriorAudit {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Enumerates every model and checks that the prior is a probability
/// distribution with the marginal properties its scheme promises.
pub fn prior_mass_audit(scheme: &ModelPriorScheme) -> Result<PriorAudit> {
    let width = scheme.columns();
    if width > MAX_ENUMERATED_COLUMNS {
        return Err(Error::Capacity(format!(
            "k + L = {width} exceeds the exhaustive enumeration bound of {MAX_ENUMERATED_COLUMNS}"
        )));
    }
    let k = scheme.k;
    let p = scheme.p();
    // bit j of a mask (LSB = last column) is column width-1-j
    let col_bit = |col: usize| 1u64 << (width - 1 - col);
    let mut factor_masks = Vec::with_capacity(p);
    let mut at = k;
    for &l in &scheme.levels {
        factor_masks.push((at..at + l).fold(0u64, |m, c| m | col_bit(c)));
        at += l;
    }
    let var_mask = (0..k).fold(0u64, |m, c| m | col_bit(c));

    let mut total = NeumaierSum::default();
    let mut by_size = vec![NeumaierSum::default(); width + 1];
    let mut col_inc = vec![NeumaierSum::default(); width];
    let mut fac_inc = vec![NeumaierSum::default(); p];
    let mut counts = vec![0usize; p];
    let count = 1u64 << width;
    for mask in 0..count {
        for (c, fm) in counts.iter_mut().zip(&factor_masks) {
            *c = (mask & fm).count_ones() as usize;
        }
        let prob = scheme
            .ln_prior_counts((mask & var_mask).count_ones() as usize, &counts)
            .exp();
        total.add(prob);
        by_size[mask.count_ones() as usize].add(prob);
        let mut bits = mask;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            col_inc[width - 1 - j].add(prob);
            bits &= bits - 1;
        }
        for (h, &c) in counts.iter().enumerate() {
            if c > 0 {
                fac_inc[h].add(prob);
            }
        }
    }

    let col_inc: Vec<f64> = col_inc.iter().map(NeumaierSum::value).collect();
    let mut level_inclusion = Vec::with_capacity(p);
    let mut at = k;
    for &l in &scheme.levels {
        level_inclusion.push(col_inc[at..at + l].to_vec());
        at += l;
    }
    let mut audit = PriorAudit {
        scheme: scheme.kind,
        k,
        levels: scheme.levels.clone(),
        model_count: count,
        total_mass: total.value(),
        null_mass: scheme.ln_prior_counts(0, &vec![0; p]).exp(),
        mass_by_size: by_size.iter().map(NeumaierSum::value).collect(),
        variable_inclusion: col_inc[..k].to_vec(),
        factor_inclusion: fac_inc.iter().map(NeumaierSum::value).collect(),
        level_inclusion,
        checks: Vec::new(),
    };

    const TOL: f64 = 1e-12;
    let within = |x: f64, target: f64| (x - target).abs() <= TOL;
    audit.checks.push(AuditCheck {
        name: "total mass is 1".into(),
        pass: within(audit.total_mass, 1.0),
        detail: format!("{:.15}", audit.total_mass),
    });
    let halves = |name: &str, xs: &[f64]| AuditCheck {
        name: name.into(),
        pass: xs.iter().all(|&x| within(x, 0.5)),
        detail: format!("{xs:?}"),
    };
    match scheme.kind {
        PriorKind::Hierarchical => {
            audit.checks.push(halves("variable marginals are 1/2", &audit.variable_inclusion));
            audit.checks.push(halves("factor marginals are 1/2", &audit.factor_inclusion));
        }
        PriorKind::Constant => {
            audit.checks.push(halves("column marginals are 1/2", &col_inc));
        }
        PriorKind::ScottBerger => {
            let target = 1.0 / (width as f64 + 1.0);
            audit.checks.push(AuditCheck {
                name: "each model size has mass 1/(K+1)".into(),
                pass: audit.mass_by_size.iter().all(|&m| within(m, target)),
                detail: format!("{:?}", audit.mass_by_size),
            });
        }
    }
    Ok(audit)
}
