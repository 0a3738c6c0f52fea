//! JSON and aligned-text renderings of selection and validation results.

use std::fmt::Write as _;

use serde::Serialize;

use crate::modelspace::PriorAudit;
use crate::posterior::{BaselineComparison, PosteriorReport};
use crate::validation::{Suite, ValidationSummary};

/// Everything `select` produces. JSON is the canonical form.
#[derive(Debug, Clone, Serialize)]
pub struct SelectOutput {
    pub report: PosteriorReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior_audit: Option<PriorAudit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_demo: Option<BaselineComparison>,
}

impl SelectOutput {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = posterior_text(&self.report);
        if let Some(b) = &self.baseline_demo {
            out.push('\n');
            out.push_str(&baseline_text(b));
        }
        if let Some(a) = &self.prior_audit {
            out.push('\n');
            out.push_str(&audit_text(a));
        }
        out
    }
}

/// `x` with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    // magnitude after rounding, so 0.9999999 prints like 1
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    let mag = rounded.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    format!("{x:.*}", (5 - mag).max(0) as usize)
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |out: &mut String, cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&width)
            .enumerate()
            .map(|(i, (c, &w))| {
                let pad = w - c.chars().count();
                // first column left-aligned, numbers right-aligned
                if i == 0 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        let _ = writeln!(out, "  {}", parts.join("  ").trim_end());
    };
    line(out, &header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    let _ = writeln!(out, "  {}", "-".repeat(width.iter().sum::<usize>() + 2 * (width.len() - 1)));
    for r in rows {
        line(out, r);
    }
}

pub fn posterior_text(r: &PosteriorReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "n = {}  k0 = {}  k = {}  p = {}  L = {}  models = {}",
        r.n,
        r.k0,
        r.k,
        r.factor_levels.len(),
        r.factor_levels.iter().sum::<usize>(),
        r.model_count
    );
    let _ = writeln!(
        out,
        "model prior = {}  mixing prior = {}  P(M0|y) = {}",
        r.prior_scheme.name(),
        r.hyper_prior,
        sig6(r.null_posterior)
    );

    let _ = writeln!(out, "\nInclusion probabilities of factors and variables");
    let mut rows: Vec<Vec<String>> = r
        .factor_inclusion
        .iter()
        .map(|f| vec![f.name.clone(), "factor".into(), sig6(f.probability)])
        .collect();
    rows.extend(
        r.variable_inclusion
            .iter()
            .map(|v| vec![v.name.clone(), "variable".into(), sig6(v.probability)]),
    );
    table(&mut out, &["predictor", "kind", "P(incl|y)"], &rows);

    if !r.level_inclusion.is_empty() {
        let _ = writeln!(out, "\nInclusion probabilities of levels of factors");
        let rows: Vec<Vec<String>> = r
            .level_inclusion
            .iter()
            .flat_map(|f| {
                f.levels
                    .iter()
                    .map(move |l| vec![f.factor.clone(), l.name.clone(), sig6(l.probability)])
            })
            .collect();
        table(&mut out, &["factor", "level", "P(incl|y)"], &rows);
    }

    if !r.top_models.is_empty() {
        let _ = writeln!(out, "\nMost probable models");
        let rows: Vec<Vec<String>> = r
            .top_models
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let mut terms: Vec<String> = m.variables.clone();
                terms.extend(m.levels.iter().cloned());
                vec![
                    (i + 1).to_string(),
                    m.gamma.clone(),
                    sig6(m.posterior),
                    sig6(m.prior),
                    sig6(m.log_bf),
                    m.design_rank.to_string(),
                    m.alias_group.to_string(),
                    if terms.is_empty() { "(null)".into() } else { terms.join(" ") },
                ]
            })
            .collect();
        table(
            &mut out,
            &["#", "gamma", "posterior", "prior", "log BF", "rank", "alias", "terms"],
            &rows,
        );
    }
    out
}

pub fn baseline_text(b: &BaselineComparison) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "P({} active | y) by coding", b.factor);
    let mut rows = vec![vec!["indicator (all levels)".to_string(), sig6(b.indicator_coding)]];
    rows.extend(
        b.baseline_coding
            .iter()
            .map(|p| vec![format!("baseline = {}", p.name), sig6(p.probability)]),
    );
    table(&mut out, &["coding", "P(A|y)"], &rows);
    out
}

pub fn audit_text(a: &PriorAudit) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Prior audit: {} over {} models, total mass {}, P(M0) = {}",
        a.scheme.name(),
        a.model_count,
        sig6(a.total_mass),
        sig6(a.null_mass)
    );
    let rows: Vec<Vec<String>> = a
        .checks
        .iter()
        .map(|c| vec![c.name.clone(), if c.pass { "pass" } else { "FAIL" }.into()])
        .collect();
    table(&mut out, &["check", "result"], &rows);
    out
}

pub fn validation_text(v: &ValidationSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed = {}", v.seed);
    let rows: Vec<Vec<String>> = Suite::ALL
        .iter()
        .filter_map(|&s| {
            let checks: Vec<_> = v.checks.iter().filter(|c| c.suite == s).collect();
            if checks.is_empty() {
                return None;
            }
            let failed = checks.iter().filter(|c| !c.pass).count();
            let worst = v.worst(s).map(|c| c.value).unwrap_or(0.0);
            Some(vec![
                s.name().to_string(),
                checks.len().to_string(),
                failed.to_string(),
                sig6(worst),
                if failed == 0 { "pass" } else { "FAIL" }.into(),
            ])
        })
        .collect();
    table(&mut out, &["suite", "checks", "failed", "worst", "result"], &rows);
    let failures: Vec<_> = v.failures().collect();
    if !failures.is_empty() {
        let _ = writeln!(out, "\nFailed checks");
        for c in failures {
            let _ = writeln!(
                out,
                "  [{}] {}: {} > {}",
                c.suite.name(),
                c.name,
                sig6(c.value),
                sig6(c.tolerance)
            );
        }
    }
    out
}
