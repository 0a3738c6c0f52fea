//! ₂F₁ and the mixing integral against reference values computed with
//! 40-digit arithmetic (mpmath `hyp2f1` and `quad`), plus a plain
//! Gauss–Legendre evaluation of the robust integral written here.

use factor_select::numerics::{
    bcal, bcal_quadrature, gauss_2f1, gauss_2f1_euler, robust_bf_closed, CustomHyperPrior, HyperGPrior, MixingContext,
};
use factor_select::Error;
use proptest::prelude::*;

/// `(a, b, c, z, ln ₂F₁)`
const HYP2F1_REFERENCE: &[(f64, f64, f64, f64, f64)] = &[
    (0.5, 499.0, 1.5, -0.3, -2.6243468779584972842),
    (1.5, 499.0, 3.5, -0.5, -7.0805128505095663572),
    (2.5, 49.5, 4.5, -3.0, -9.9757839811949538306),
    (4.5, 500.0, 6.5, -11.8, -33.385560856390159275),
    (1.0, 1.0, 2.0, -0.9, -0.33803407716903911447),
    (0.5, 10.0, 1.5, 0.4, 2.7541320223802856072),
    (2.0, 0.5, 3.0, -100.0, -2.0281019333500140334),
    (5.0, 498.5, 7.0, -0.0999, -13.037804335161004001),
];

/// `(q, κ0, κ1, n, ln 𝓑)` for the robust density, from direct quadrature
/// of the defining integral.
const BCAL_REFERENCE: &[(f64, usize, usize, usize, f64)] = &[
    (0.8, 4, 6, 100, 6.3809012938291286123),
    (1.0, 1, 2, 20, -1.868834809141684153),
    (0.5, 1, 4, 20, 1.6620264574474193001),
    (0.05, 4, 12, 1002, 1457.6620959691590564),
    (0.01, 1, 9, 1002, 2260.3815650821789294),
    (0.97, 4, 9, 1002, 1.5200821743262451668),
    (0.3, 1, 2, 100, 56.017029400283623994),
    (0.999, 3, 7, 1_000_000, 474.89752309691270572),
];

/// ln-value agreement expressed as relative error of the value.
fn rel_ln(a: f64, b: f64) -> f64 {
    (a - b).exp_m1().abs()
}

#[test]
fn hypergeometric_matches_reference() {
    for &(a, b, c, z, want) in HYP2F1_REFERENCE {
        let got = gauss_2f1(a, b, c, z).unwrap();
        assert_eq!(got.sign, 1);
        assert!(rel_ln(got.ln(), want) < 1e-10, "2F1({a},{b};{c};{z}) = {} vs {want}", got.ln());
    }
}

#[test]
fn euler_integral_matches_reference() {
    for &(a, b, c, z, want) in HYP2F1_REFERENCE {
        if let Ok(got) = gauss_2f1_euler(a, b, c, z) {
            assert!(rel_ln(got.ln(), want) < 1e-8, "Euler 2F1({a},{b};{c};{z}) = {} vs {want}", got.ln());
        }
    }
}

#[test]
fn closed_form_and_quadrature_match_reference() {
    for &(q, k0, k1, n, want) in BCAL_REFERENCE {
        let closed = robust_bf_closed(q, k0, k1, n).unwrap().ln();
        assert!(rel_ln(closed, want) < 1e-9, "closed {q},{k0},{k1},{n}: {closed} vs {want}");
        let quad = bcal_quadrature(q, k0, k1, n, &HyperGPrior::Robust).unwrap().ln();
        assert!(rel_ln(quad, want) < 1e-8, "quadrature {q},{k0},{k1},{n}: {quad} vs {want}");
    }
}

/// With `g = 1/s² - 1` the robust integral becomes
/// `((n+1)/κ1)^{1/2} ∫₀^{√(κ1/(n+1))} s^{κ1-κ0} (q + (1-q) s²)^{-(n-κ0)/2} ds`,
/// a smooth integrand handled by composite 20-point Gauss–Legendre.
fn robust_by_gauss_legendre(q: f64, k0: usize, k1: usize, n: usize) -> f64 {
    const X: [f64; 10] = [
        0.0765265211334973,
        0.2277858511416451,
        0.3737060887154195,
        0.5108670019508271,
        0.6360536807265150,
        0.7463319064601508,
        0.8391169718222188,
        0.9122344282513259,
        0.9639719272779138,
        0.9931285991850949,
    ];
    const W: [f64; 10] = [
        0.1527533871307258,
        0.1491729864726037,
        0.1420961093183820,
        0.1316886384491766,
        0.1181945319615184,
        0.1019301198172404,
        0.0832767415767048,
        0.0626720483341091,
        0.0406014298003869,
        0.0176140071391521,
    ];
    let (nf, e0) = (n as f64, (n - k0) as f64 / 2.0);
    let smax = (k1 as f64 / (nf + 1.0)).sqrt();
    let ln_f = |s: f64| (k1 - k0) as f64 * s.ln() - e0 * (q + (1.0 - q) * s * s).ln();
    let panels = 4000;
    let h = smax / panels as f64;
    let mut nodes = Vec::with_capacity(panels * 20);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(&W) {
            nodes.push((ln_f(mid - 0.5 * h * x), 0.5 * h * w));
            nodes.push((ln_f(mid + 0.5 * h * x), 0.5 * h * w));
        }
    }
    let m = nodes.iter().map(|n| n.0).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = nodes.iter().map(|(l, w)| w * (l - m).exp()).sum();
    0.5 * ((nf + 1.0) / k1 as f64).ln() + m + sum.ln()
}

#[test]
fn closed_form_matches_independent_gauss_legendre() {
    for &(q, k0, k1, n) in &[(0.8, 4, 6, 100), (0.2, 1, 4, 20), (0.6, 4, 12, 1002), (1.0, 2, 3, 50)] {
        let closed = robust_bf_closed(q, k0, k1, n).unwrap().ln();
        let gl = robust_by_gauss_legendre(q, k0, k1, n);
        assert!(rel_ln(closed, gl) < 1e-8, "{q},{k0},{k1},{n}: {closed} vs {gl}");
    }
}

#[test]
fn q_one_zeroes_the_hypergeometric_argument() {
    let v = robust_bf_closed(1.0, 4, 9, 1002).unwrap().ln();
    let expected = -2.5 * (1003.0f64 / 9.0).ln() - 6.0f64.ln();
    assert!((v - expected).abs() < 1e-13);
}

#[test]
fn narrow_density_approaches_point_evaluation() {
    // log-normal density with tiny spread around g*
    let g_star = 30.0f64;
    let spread = 1e-4;
    let narrow = CustomHyperPrior::new(
        "narrow",
        move |g: f64, _: &MixingContext| {
            let z = (g.ln() - g_star.ln()) / spread;
            -0.5 * z * z - g.ln() - spread.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
        },
        move |_| (g_star * (-12.0 * spread).exp(), g_star * (12.0 * spread).exp()),
    );
    let (q, k0, k1, n) = (0.7, 2usize, 5usize, 60usize);
    let got = bcal_quadrature(q, k0, k1, n, &HyperGPrior::Custom(narrow)).unwrap().ln();
    let point = -((n - k0) as f64) / 2.0 * (1.0 + q * g_star).ln() + ((n - k1) as f64) / 2.0 * (1.0 + g_star).ln();
    assert!((got - point).abs() < 1e-3, "{got} vs {point}");
}

#[test]
fn custom_families_integrate_to_one() {
    let ctx = MixingContext { n: 300, kappa0: 2, kappa1: 7 };
    for p in [
        CustomHyperPrior::robust(),
        CustomHyperPrior::hyper_g(3.0),
        CustomHyperPrior::hyper_g(4.0),
        CustomHyperPrior::hyper_g_n(3.0),
        CustomHyperPrior::zellner_siow(),
    ] {
        let m = p.total_mass(&ctx).unwrap();
        assert!((m - 1.0).abs() < 1e-8, "{}: {m}", p.name());
    }
}

#[test]
fn domain_violations_are_reported() {
    assert!(matches!(gauss_2f1(1.0, 1.0, -1.0, -0.5), Err(Error::Domain(_))));
    assert!(matches!(gauss_2f1(1.0, 1.0, 2.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(robust_bf_closed(0.5, 3, 12, 10), Err(Error::Domain(_))));
    assert!(matches!(robust_bf_closed(1.5, 1, 2, 10), Err(Error::Domain(_))));
    assert!(matches!(robust_bf_closed(0.0, 1, 2, 10), Err(Error::Domain(_))));
    assert!(matches!(bcal(0.5, 2, 2, 10, &HyperGPrior::Robust), Err(Error::Domain(_))));
}

#[test]
fn decreasing_in_q() {
    for &(k0, k1, n) in &[(1usize, 2usize, 20usize), (4, 7, 100), (4, 12, 1002)] {
        let mut last = f64::INFINITY;
        for i in 0..=60 {
            let q = 0.01 + 0.99 * i as f64 / 60.0;
            let v = robust_bf_closed(q, k0, k1, n).unwrap().ln();
            assert!(v < last, "not decreasing at q={q} ({k0},{k1},{n})");
            last = v;
        }
    }
}

#[test]
fn finite_for_huge_n() {
    for &q in &[1e-6, 0.3, 0.999999, 1.0] {
        let v = robust_bf_closed(q, 3, 7, 1_000_000).unwrap();
        assert!(v.ln().is_finite(), "q = {q}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_agrees_with_quadrature(
        q in 0.01f64..=1.0,
        k0 in 1usize..6,
        delta in 1usize..10,
        n in 20usize..1500,
    ) {
        let k1 = k0 + delta;
        prop_assume!(k1 <= n);
        let closed = robust_bf_closed(q, k0, k1, n).unwrap().ln();
        let quad = bcal_quadrature(q, k0, k1, n, &HyperGPrior::Robust).unwrap().ln();
        prop_assert!(rel_ln(closed, quad) < 1e-6, "{} vs {}", closed, quad);
    }

    #[test]
    fn series_and_euler_agree_on_the_bayes_factor_domain(
        d in 1usize..10,
        n in 20usize..1200,
        w in -0.5f64..0.0,
    ) {
        let (a, b, c) = ((d as f64 + 1.0) / 2.0, n as f64 / 2.0, (d as f64 + 3.0) / 2.0);
        let s = gauss_2f1(a, b, c, w).unwrap().ln();
        let e = gauss_2f1_euler(a, b, c, w).unwrap().ln();
        prop_assert!(rel_ln(s, e) < 1e-8, "{} vs {}", s, e);
    }
}
