//! Numerical checks of the matrix facts behind the rank-corrected Bayes
//! factor.
//!
//! For a model whose added columns `X` are collinear with each other or with
//! the sure columns `X0`, let `V = (I - P0) X` with rank `r < ℓ = cols(X)`.
//! The prior `a ~ N(0, g σ² S)` with `S = (VᵀV + T)⁻¹`, `T` PSD supported on
//! the null space of `VᵀV`, gives a marginal likelihood that does not depend
//! on `T` and equals the usual formula with `κ1 = k0 + r`. `S` is then a
//! generalized inverse of `VᵀV`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::bayesfactor::bayes_factor;
use crate::design::{model_design, DesignAssembly, FactorSpec, ModelGamma};
use crate::error::{Error, Result};
use crate::linalg;
use crate::numerics::{bcal_quadrature, ln_integral_over, robust_bf_closed, CustomHyperPrior, HyperGPrior, MixingContext};

pub const DEFAULT_SEED: u64 = 20_141_105;

pub const GI_TOLERANCE: f64 = 1e-8;
pub const EXPLICIT_PRIOR_TOLERANCE: f64 = 1e-4;
pub const T_AGREEMENT_TOLERANCE: f64 = 1e-6;
pub const BCAL_TOLERANCE: f64 = 1e-6;

/// How the null-space matrix `T` is built from `Q2`, the eigenvectors of
/// `VᵀV` with zero eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TVariant {
    /// `Q2 Q2ᵀ`
    NullProjector,
    /// `c Q2 Q2ᵀ`, `c > 0`
    ScaledNullProjector(f64),
    /// `Q2 M Q2ᵀ` with a seeded random positive definite `M`
    RandomPsdInNullspace(u64),
}

impl TVariant {
    pub fn label(&self) -> String {
        match self {
            TVariant::NullProjector => "null-projector".into(),
            TVariant::ScaledNullProjector(c) => format!("scaled-null-projector(c={c})"),
            TVariant::RandomPsdInNullspace(s) => format!("random-psd(seed={s})"),
        }
    }
}

/// Eigen-split of `VᵀV`: `Q1` (ℓ×r), `Q2` (ℓ×(ℓ-r)) and the `r` positive
/// eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralParts {
    pub q1: DMatrix<f64>,
    pub q2: DMatrix<f64>,
    pub d: DVector<f64>,
}

pub fn spectral_parts(v: &DMatrix<f64>) -> SpectralParts {
    let l = v.ncols();
    let r = linalg::rank(v);
    let eig = SymmetricEigen::new(v.transpose() * v);
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let q1 = eig.eigenvectors.select_columns(order[..r].iter());
    let q2 = eig.eigenvectors.select_columns(order[r..].iter());
    let d = DVector::from_iterator(r, order[..r].iter().map(|&i| eig.eigenvalues[i]));
    SpectralParts { q1, q2, d }
}

pub fn build_t(v: &DMatrix<f64>, variant: TVariant) -> Result<DMatrix<f64>> {
    let parts = spectral_parts(v);
    let m = parts.q2.ncols();
    if m == 0 {
        return Err(Error::Construction(format!(
            "V has full column rank {}; there is no null space to place T in",
            v.ncols()
        )));
    }
    let q2 = &parts.q2;
    Ok(match variant {
        TVariant::NullProjector => q2 * q2.transpose(),
        TVariant::ScaledNullProjector(c) => {
            if !(c > 0.0) {
                return Err(Error::Construction(format!("scale must be positive, got {c}")));
            }
            q2 * q2.transpose() * c
        }
        TVariant::RandomPsdInNullspace(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
            let mm = &a * a.transpose() + DMatrix::identity(m, m) * 0.1;
            q2 * mm * q2.transpose()
        }
    })
}

/// `S = (VᵀV + T)⁻¹`, symmetrized.
pub fn s_matrix(v: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let l = v.ncols();
    if t.nrows() != l || t.ncols() != l {
        return Err(Error::Usage(format!("T must be {l}×{l}, got {}×{}", t.nrows(), t.ncols())));
    }
    let a = v.transpose() * v + t;
    if linalg::rank(&a) < l {
        return Err(Error::Construction("VᵀV + T is singular, so S does not exist".into()));
    }
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Construction("VᵀV + T is not positive definite".into()))?;
    let s = chol.inverse();
    Ok((&s + s.transpose()) * 0.5)
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralizedInverseCheck {
    /// `‖VᵀV S VᵀV - VᵀV‖_F / ‖VᵀV‖_F`
    pub residual: f64,
    pub s_min_eigenvalue: f64,
    pub t_rank: usize,
    pub vtv_rank: usize,
    /// `rank([VᵀV | T]) = rank(VᵀV) + rank(T)`
    pub disjoint: bool,
    pub pass: bool,
}

pub fn check_generalized_inverse(v: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<GeneralizedInverseCheck> {
    let s = s_matrix(v, t)?;
    let a = v.transpose() * v;
    let norm = a.norm();
    let residual = if norm == 0.0 { 0.0 } else { (&a * &s * &a - &a).norm() / norm };
    let s_min_eigenvalue = SymmetricEigen::new(s).eigenvalues.min();
    let t_rank = linalg::rank(t);
    let vtv_rank = linalg::rank(&a);
    let disjoint = linalg::rank(&linalg::hstack(&[&a, t])) == vtv_rank + t_rank;
    Ok(GeneralizedInverseCheck {
        residual,
        s_min_eigenvalue,
        t_rank,
        vtv_rank,
        disjoint,
        pass: residual <= GI_TOLERANCE && s_min_eigenvalue > 0.0 && disjoint,
    })
}

/// `ln B_γ` from the marginal likelihood under the explicit prior
/// `a | g, σ ~ N(0, g σ² S)`, `π(α, σ) ∝ 1/σ`.
///
/// Given `g`, `y ~ N(X0 α, σ² Σ_g)` with `Σ_g = I + g V S Vᵀ`. Integrating
/// `α` and `σ` leaves
/// `|Σ_g|^{-1/2} |X0ᵀ Σ_g⁻¹ X0|^{-1/2} (yᵀ R_g y)^{-(n-k0)/2}` with
/// `R_g = Σ_g⁻¹ - Σ_g⁻¹ X0 (X0ᵀ Σ_g⁻¹ X0)⁻¹ X0ᵀ Σ_g⁻¹`, which is divided by
/// the same expression at `g = 0` and integrated against `h(g)`. `Σ_g⁻¹` is
/// applied through the eigendecomposition of `V S Vᵀ`. The mixing density is
/// evaluated with `κ1 = k0 + rank(V)`.
pub fn marginal_via_explicit_prior(
    assembly: &DesignAssembly,
    gamma: &ModelGamma,
    t: &DMatrix<f64>,
    hyper_prior: &HyperGPrior,
) -> Result<f64> {
    let n = assembly.n();
    let k0 = assembly.k0();
    let x0 = assembly.x0();
    let y = assembly.y();
    let design = model_design(assembly, gamma)?;
    let xs = design.columns(k0, design.ncols() - k0).into_owned();
    let v = linalg::residualize(x0, &xs);
    let r = linalg::rank_relative_to(&v, linalg::spectral_norm(&xs));
    if r == 0 {
        return Ok(0.0);
    }
    let s = s_matrix(&v, t)?;
    let w = &v * s * v.transpose();
    let eig = SymmetricEigen::new((&w + w.transpose()) * 0.5);
    let lmax = eig.eigenvalues.amax();
    let keep: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > linalg::rank_tolerance(n, n, lmax) * 1e3)
        .collect();
    if keep.len() != r {
        return Err(Error::Numeric(format!(
            "V S Vᵀ has {} nonzero eigenvalues but V has rank {r}",
            keep.len()
        )));
    }
    let u = eig.eigenvectors.select_columns(keep.iter());
    let lambda: Vec<f64> = keep.iter().map(|&i| eig.eigenvalues[i]).collect();
    let ut_y = u.transpose() * y;
    let ut_x0 = u.transpose() * x0;
    let x0t_x0 = x0.transpose() * x0;
    let x0t_y = x0.transpose() * y;
    let yty = y.dot(y);

    let e0 = (n - k0) as f64 / 2.0;
    let kappa1 = k0 + r;
    let ctx = MixingContext { n, kappa0: k0, kappa1 };

    // quadratic form and log det of X0ᵀ Σ⁻¹ X0, with Σ⁻¹ = I - U diag(w) Uᵀ
    let reduced = |w: &[f64]| -> Option<(f64, f64)> {
        let wd = DVector::from_column_slice(w);
        let m = &x0t_x0 - ut_x0.transpose() * DMatrix::from_diagonal(&wd) * &ut_x0;
        let b = &x0t_y - ut_x0.transpose() * ut_y.component_mul(&wd);
        let yy = yty - ut_y.component_mul(&wd).dot(&ut_y);
        let chol = m.cholesky()?;
        let ln_det = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let quad = yy - b.dot(&chol.solve(&b));
        Some((quad, ln_det))
    };
    let (sse0, ln_det0) = reduced(&vec![0.0; r]).ok_or_else(|| Error::Numeric("X0ᵀX0 is singular".into()))?;

    let custom;
    let prior = match hyper_prior {
        HyperGPrior::Robust => {
            custom = CustomHyperPrior::robust();
            &custom
        }
        HyperGPrior::Custom(c) => c,
    };
    let (lo, hi) = prior.support(&ctx);
    let dmin = if hi.is_finite() { 1.0 / (1.0 + hi) } else { 0.0 };
    let dmax = 1.0 / (1.0 + lo);

    // d = 1/(1+g); 1 + g λ = (d + λ(1-d))/d and g λ/(1 + g λ) = λ(1-d)/(d + λ(1-d))
    let log_f = |d: f64| {
        let g = (1.0 - d) / d;
        let mut ln_det_sigma = 0.0;
        let w: Vec<f64> = lambda
            .iter()
            .map(|&l| {
                let den = d + l * (1.0 - d);
                ln_det_sigma += den.ln() - d.ln();
                l * (1.0 - d) / den
            })
            .collect();
        match reduced(&w) {
            Some((quad, ln_det)) if quad > 0.0 => {
                -0.5 * ln_det_sigma - 0.5 * (ln_det - ln_det0) - e0 * (quad / sse0).ln() + prior.ln_density(g, &ctx)
                    - 2.0 * d.ln()
            }
            _ => f64::NAN,
        }
    };
    ln_integral_over(&log_f, dmin, dmax, 1e-11)
}

/// A hypothesis `L η = 0` is testable iff the rows of `L` lie in the row
/// space of the design.
pub fn testability_check(design: &DMatrix<f64>, hypothesis: &DMatrix<f64>) -> Result<bool> {
    if design.ncols() != hypothesis.ncols() {
        return Err(Error::Usage(format!(
            "hypothesis has {} columns but the design has {}",
            hypothesis.ncols(),
            design.ncols()
        )));
    }
    let zt = design.transpose();
    let lt = hypothesis.transpose();
    Ok(linalg::rank(&linalg::hstack(&[&zt, &lt])) == linalg::rank(&zt))
}

/// `(rank((I - P0) X), rank([X0 | X]) - rank(X0))`
pub fn residual_ranks(x0: &DMatrix<f64>, x: &DMatrix<f64>) -> (usize, usize) {
    let scale = linalg::spectral_norm(&linalg::hstack(&[x0, x]));
    let lhs = linalg::rank_relative_to(&linalg::residualize(x0, x), scale);
    let rhs = linalg::rank(&linalg::hstack(&[x0, x])) - linalg::rank(x0);
    (lhs, rhs)
}

// ---------------------------------------------------------------------------
// seeded instances

/// Intercept plus an optional numeric sure column, one numeric candidate and
/// one factor; `V` for the full model is rank-deficient because the level
/// indicators sum to the intercept.
pub fn random_instance(seed: u64, n: usize, levels: usize, extra_sure: bool) -> Result<DesignAssembly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || rng.sample::<f64, _>(StandardNormal);
    let mut x0 = DMatrix::from_element(n, 1 + extra_sure as usize, 1.0);
    let mut sure = vec!["(intercept)".to_string()];
    if extra_sure {
        for i in 0..n {
            x0[(i, 1)] = normal();
        }
        sure.push("s1".into());
    }
    let x = DMatrix::from_fn(n, 1, |_, _| normal());
    let effects: Vec<f64> = (0..levels).map(|_| 0.6 * normal()).collect();
    let codes: Vec<usize> = (0..n).map(|i| i % levels).collect();
    let y = DVector::from_fn(n, |i, _| 0.4 * x[(i, 0)] + effects[codes[i]] + normal());
    DesignAssembly::from_blocks(
        y,
        x0,
        sure,
        x,
        vec!["x1".into()],
        vec![(
            FactorSpec {
                name: "a".into(),
                levels: (1..=levels).map(|j| format!("l{j}")).collect(),
            },
            codes,
        )],
    )
}

fn t_variants(seed: u64) -> [TVariant; 3] {
    [
        TVariant::NullProjector,
        TVariant::ScaledNullProjector(10.0),
        TVariant::RandomPsdInNullspace(seed ^ 0x9e37_79b9),
    ]
}

// ---------------------------------------------------------------------------
// suites

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Gi,
    ExplicitPrior,
    ResidualRank,
    Testability,
    Bcal,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Gi, Suite::ExplicitPrior, Suite::ResidualRank, Suite::Testability, Suite::Bcal];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Gi => "gi",
            Suite::ExplicitPrior => "explicit-prior",
            Suite::ResidualRank => "residual-rank",
            Suite::Testability => "testability",
            Suite::Bcal => "bcal",
        }
    }

    pub fn from_name(name: &str) -> Result<Vec<Suite>> {
        if name == "all" {
            return Ok(Self::ALL.to_vec());
        }
        Self::ALL
            .iter()
            .find(|s| s.name() == name)
            .map(|&s| vec![s])
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown suite `{name}` (expected all, gi, explicit-prior, residual-rank, testability, bcal)"
                ))
            })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    /// Measured discrepancy (or 0/1 for yes/no checks).
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl ValidationSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn worst(&self, suite: Suite) -> Option<&Check> {
        self.checks
            .iter()
            .filter(|c| c.suite == suite)
            .max_by(|a, b| (a.value / a.tolerance).total_cmp(&(b.value / b.tolerance)))
    }
}

pub fn run_suites(suites: &[Suite], seed: u64) -> Result<ValidationSummary> {
    let mut checks = Vec::new();
    for &s in suites {
        checks.extend(match s {
            Suite::Gi => gi_suite(seed)?,
            Suite::ExplicitPrior => explicit_prior_suite(seed)?,
            Suite::ResidualRank => residual_rank_suite(seed),
            Suite::Testability => testability_suite()?,
            Suite::Bcal => bcal_suite()?,
        });
    }
    Ok(ValidationSummary { seed, checks })
}

/// Generalized-inverse residual on 20 seeded rank-deficient designs for each
/// of three `T` constructions.
pub fn gi_suite(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for i in 0..20u64 {
        let s = seed.wrapping_add(i);
        let n = 10 + (i as usize * 7) % 21;
        let levels = 3 + (i as usize) % 3;
        let a = random_instance(s, n, levels, i % 2 == 1)?;
        let xs = linalg::hstack(&[a.x(), a.z()]);
        let v = linalg::residualize(a.x0(), &xs);
        for variant in t_variants(s) {
            let t = build_t(&v, variant)?;
            let c = check_generalized_inverse(&v, &t)?;
            out.push(Check {
                suite: Suite::Gi,
                name: format!("seed={s} n={n} ℓ={levels} T={}", variant.label()),
                value: c.residual,
                tolerance: GI_TOLERANCE,
                pass: c.pass,
            });
        }
    }
    Ok(out)
}

/// Explicit-prior Bayes factor against the closed form on five small
/// instances, three `T` each, plus pairwise agreement across `T`.
pub fn explicit_prior_suite(seed: u64) -> Result<Vec<Check>> {
    let shapes = [(12, 3, false), (16, 4, false), (20, 3, true), (30, 4, false), (24, 3, true)];
    let prior = HyperGPrior::Robust;
    let mut out = Vec::new();
    for (i, &(n, levels, extra)) in shapes.iter().enumerate() {
        let s = seed.wrapping_add(100 + i as u64);
        let a = random_instance(s, n, levels, extra)?;
        let gamma = ModelGamma::full(a.k(), a.l());
        let closed = bayes_factor(&a, &gamma, &prior)?.log_bf;
        let design = model_design(&a, &gamma)?;
        let v = linalg::residualize(a.x0(), &design.columns(a.k0(), design.ncols() - a.k0()).into_owned());
        let mut values = Vec::new();
        for variant in t_variants(s) {
            let t = build_t(&v, variant)?;
            let explicit = marginal_via_explicit_prior(&a, &gamma, &t, &prior)?;
            let rel = (explicit - closed).exp_m1().abs();
            out.push(Check {
                suite: Suite::ExplicitPrior,
                name: format!("seed={s} n={n} ℓ={levels} T={} vs closed form", variant.label()),
                value: rel,
                tolerance: EXPLICIT_PRIOR_TOLERANCE,
                pass: rel <= EXPLICIT_PRIOR_TOLERANCE,
            });
            values.push((variant, explicit));
        }
        for x in 0..values.len() {
            for y in x + 1..values.len() {
                let rel = (values[x].1 - values[y].1).exp_m1().abs();
                out.push(Check {
                    suite: Suite::ExplicitPrior,
                    name: format!("seed={s} T={} vs T={}", values[x].0.label(), values[y].0.label()),
                    value: rel,
                    tolerance: T_AGREEMENT_TOLERANCE,
                    pass: rel <= T_AGREEMENT_TOLERANCE,
                });
            }
        }
    }
    Ok(out)
}

/// Rank identity on 50 random designs with planted collinearity.
pub fn residual_rank_suite(seed: u64) -> Vec<Check> {
    (0..50u64)
        .map(|i| {
            let s = seed.wrapping_add(1000 + i);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let n = rng.random_range(8..40);
            let k0 = rng.random_range(1..4);
            let k = rng.random_range(1..7);
            let mut normal = || rng.sample::<f64, _>(StandardNormal);
            let mut x0 = DMatrix::from_fn(n, k0, |_, _| normal());
            x0.column_mut(0).fill(1.0);
            let mut x = DMatrix::from_fn(n, k, |_, _| normal());
            // plant dependencies: on X0, on earlier columns of X, or a duplicate
            for j in 0..k {
                match (s as usize + j) % 4 {
                    0 => {
                        let c = &x0 * DVector::from_fn(k0, |_, _| normal());
                        x.set_column(j, &c);
                    }
                    1 if j > 0 => {
                        let c = x.column(j - 1) * 2.0 + x0.column(0) * normal();
                        x.set_column(j, &c);
                    }
                    2 if j > 0 => {
                        let c = x.column(0).into_owned();
                        x.set_column(j, &c);
                    }
                    _ => {}
                }
            }
            let (lhs, rhs) = residual_ranks(&x0, &x);
            Check {
                suite: Suite::ResidualRank,
                name: format!("seed={s} n={n} k0={k0} k={k} rank={lhs}"),
                value: lhs.abs_diff(rhs) as f64,
                tolerance: 0.0,
                pass: lhs == rhs,
            }
        })
        .collect()
}

/// Intercept plus a two-level factor with two observations per level.
fn two_level_design() -> DMatrix<f64> {
    DMatrix::from_row_slice(4, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0])
}

pub fn testability_suite() -> Result<Vec<Check>> {
    let z = two_level_design();
    let both_zero = DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let difference = DMatrix::from_row_slice(1, 3, &[0.0, 1.0, -1.0]);
    let full_rank = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
    let any = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 3.0, -1.0]);
    let cases = [
        ("a1 = a2 = 0 on the rank-deficient design", testability_check(&z, &both_zero)?, false),
        ("a1 - a2 = 0 on the rank-deficient design", testability_check(&z, &difference)?, true),
        ("arbitrary hypothesis on a full-rank design", testability_check(&full_rank, &any)?, true),
    ];
    Ok(cases
        .into_iter()
        .map(|(name, got, want)| Check {
            suite: Suite::Testability,
            name: format!("{name}: testable = {got}"),
            value: (got != want) as u8 as f64,
            tolerance: 0.0,
            pass: got == want,
        })
        .collect())
}

/// The `(q, κ0, κ1, n)` grid used to compare the closed form with quadrature:
/// 12 values of `q` log-spaced on `[0.01, 1]` for every `κ0 ∈ {1, 4}`,
/// `κ1 - κ0 ∈ {1, 3, 8}` and `n ∈ {20, 100, 1002}` (216 points).
pub fn bcal_grid() -> Vec<(f64, usize, usize, usize)> {
    let mut grid = Vec::new();
    for &n in &[20usize, 100, 1002] {
        for &k0 in &[1usize, 4] {
            for &delta in &[1usize, 3, 8] {
                for i in 0..12 {
                    let q = 10f64.powf(-2.0 + 2.0 * i as f64 / 11.0);
                    grid.push((q.min(1.0), k0, k0 + delta, n));
                }
            }
        }
    }
    grid
}

pub fn bcal_suite() -> Result<Vec<Check>> {
    bcal_grid()
        .into_iter()
        .map(|(q, k0, k1, n)| {
            let closed = robust_bf_closed(q, k0, k1, n)?.ln();
            let quad = bcal_quadrature(q, k0, k1, n, &HyperGPrior::Robust)?.ln();
            let rel = (closed - quad).exp_m1().abs();
            Ok(Check {
                suite: Suite::Bcal,
                name: format!("q={q:.4} κ0={k0} κ1={k1} n={n}"),
                value: rel,
                tolerance: BCAL_TOLERANCE,
                pass: rel <= BCAL_TOLERANCE,
            })
        })
        .collect()
}
