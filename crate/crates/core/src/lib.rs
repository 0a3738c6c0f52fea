//! Objective Bayesian variable selection for linear models whose candidate
//! predictors mix numeric variables and categorical factors.
//!
//! Factors are coded with one indicator column per level. Bayes factors are
//! computed directly on these rank-deficient designs (the rank of the model
//! design replaces its column count), and prior model probabilities are
//! assigned hierarchically: first over which variables and factors are
//! active, then over which levels of each active factor are.

pub mod bayesfactor;
pub mod cli;
pub mod design;
pub mod error;
pub mod linalg;
pub mod modelspace;
pub mod numerics;
pub mod posterior;
pub mod report;
pub mod synth;
pub mod validation;

pub use bayesfactor::{bayes_factor, bf_invariance_report, BayesFactorEngine, BayesFactorValue};
pub use design::{ingest, model_design, rank_and_sse, DataFrame, DesignAssembly, FactorSpec, ModelGamma, PredictorSchema};
pub use error::{Error, Result};
pub use modelspace::{ModelPriorScheme, PriorKind};
pub use numerics::{HyperGPrior, LogValue};
pub use posterior::{baseline_sensitivity_demo, enumerate_posterior, PosteriorReport};
