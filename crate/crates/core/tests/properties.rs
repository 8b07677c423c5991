//! Property tests over randomly drawn parameters.

use proptest::prelude::*;
use ricci_rot::classify::{classify, CaseTag, KSign};
use ricci_rot::curvature::{gauss_k, gauss_k_derivs, log_condition_residual};
use ricci_rot::freeboundary::solve_rho;
use ricci_rot::geometry::{height_g, sample_profile};
use ricci_rot::oracle::{case_rng, random_case, CaseFamily, FLAT_SCALE};
use ricci_rot::params::{check_admissible, excluded_set, omega_region};
use ricci_rot::profile::eval_general_case;
use ricci_rot::profile::{solve_ivp_with, IvpOptions, IvpStop, ProfileModel};
use ricci_rot::{Branch, ProfileCurve, RicciParams};

fn family() -> impl Strategy<Value = CaseFamily> {
    prop::sample::select(CaseFamily::ALL.to_vec())
}

fn sampled(family: CaseFamily, seed: u64, n: usize) -> (RicciParams, ProfileCurve, f64) {
    let case = random_case(family, &mut case_rng(seed));
    let curve = sample_profile(&case.params, &case.window, n).expect("random cases sample");
    (case.params, curve, case.center)
}

/// Mixes exact special values with generic ones so the excluded sets are hit.
fn coefficient() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::sample::select(vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0]),
        -3.0..3.0f64,
    ]
}

/// Feasible points of `(a x + b s + c)^2 < x^2` on a logarithmic grid.
fn omega_scan(a: f64, b: f64, c: f64) -> Vec<(f64, f64)> {
    let logs: Vec<f64> = (0..=60).map(|i| 10f64.powf(-3.0 + 0.1 * i as f64)).collect();
    let mut ss: Vec<f64> = logs.iter().flat_map(|&x| [x, -x]).collect();
    ss.push(0.0);
    let mut hits = Vec::new();
    for &s in &ss {
        for &x in &logs {
            let r = a * x + b * s + c;
            if r * r < x * x {
                hits.push((s, x));
            }
        }
    }
    hits
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn admissibility_matches_scan(a in coefficient(), b in coefficient(), c in coefficient()) {
        let hits = omega_scan(a, b, c);
        if !hits.is_empty() {
            prop_assert!(check_admissible(a, b, c));
        }
        if !check_admissible(a, b, c) {
            prop_assert!(excluded_set(a, b, c).is_some());
            prop_assert!(hits.is_empty());
        }
        let region = omega_region(&RicciParams::new(a, b, c, 0.0));
        if let Some(w) = region.barrier_s {
            let below = hits.iter().any(|&(s, _)| s < w);
            let above = hits.iter().any(|&(s, _)| s > w);
            prop_assert!(!(below && above), "feasible points on both sides of s = {w}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interior_samples_stay_inside_omega(fam in family(), seed in any::<u64>()) {
        let (p, curve, _) = sampled(fam, seed, 64);
        for x in &curve.samples[1..curve.len() - 1] {
            let r = p.rhs(x.s, x.f);
            prop_assert!(r * r < x.f * x.f, "|f'| >= 1 at s = {}", x.s);
        }
    }

    #[test]
    fn k_sign_matches_samples(fam in family(), seed in any::<u64>()) {
        let (p, curve, _) = sampled(fam, seed, 64);
        let report = classify(&p).unwrap();
        for x in &curve.samples[1..curve.len() - 1] {
            let k = gauss_k(&p, x.s, x.f);
            if (k * x.f * x.f).abs() < FLAT_SCALE {
                continue;
            }
            let expected = if k < 0.0 { KSign::Negative } else { KSign::Positive };
            prop_assert_eq!(report.k_sign, expected, "K = {} at s = {}", k, x.s);
        }
    }

    #[test]
    fn b0_sign_of_af_plus_c_is_constant(plus in any::<bool>(), seed in any::<u64>()) {
        let fam = if plus { CaseFamily::B0Plus } else { CaseFamily::B0Minus };
        let (p, curve, _) = sampled(fam, seed, 64);
        let sigma = p.branch.sign();
        for x in &curve.samples {
            prop_assert!(sigma * (p.a * x.f + p.c) > 0.0, "a f + c changes sign at s = {}", x.s);
        }
    }

    #[test]
    fn log_condition_holds_where_k_negative(fam in family(), seed in any::<u64>()) {
        let (p, curve, _) = sampled(fam, seed, 64);
        for x in &curve.samples[1..curve.len() - 1] {
            let k = gauss_k(&p, x.s, x.f);
            if !(k < 0.0) || (k * x.f * x.f).abs() < FLAT_SCALE {
                continue;
            }
            let (kp, kpp) = gauss_k_derivs(&p, x.s, x.f, k);
            let res = log_condition_residual(k, kp, kpp, x.f, x.fp) / (4.0 * k.abs()).max(1.0);
            prop_assert!(res.abs() <= 1e-4, "residual {res} at s = {}", x.s);
        }
    }

    #[test]
    fn heights_are_additive(seed in any::<u64>(), u in 0.1..0.9f64) {
        let case = random_case(CaseFamily::A0, &mut case_rng(seed));
        let w = case.window;
        let (lo, hi) = (w.lo + 0.05 * w.width(), w.hi - 0.05 * w.width());
        let mid = lo + u * (hi - lo);
        let p = case.params;
        let whole = height_g(&p, lo, hi).unwrap();
        let parts = height_g(&p, lo, mid).unwrap() + height_g(&p, mid, hi).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-9 * (1.0 + whole.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// `f = a t (s + c/b)` and `f' = a + b/(a t)` along the general-case solution.
    #[test]
    fn general_case_identities(
        a in prop_oneof![-1.5..-0.3f64, 0.3..1.5f64],
        b in prop_oneof![-3.0..-0.3f64, 0.3..3.0f64],
        c in -1.0..1.0f64,
        f_star in 0.5..2.0f64,
        dt in -0.5..0.5f64,
    ) {
        let d = -a * f_star / b;
        let t0 = -b / (a * a);
        let t = t0 * (1.0 + dt);
        let p = RicciParams::new(a, b, c, d);
        let Ok(st) = eval_general_case(&p, t0, t) else {
            // a root of R between t0 and t: outside this solution piece
            return Ok(());
        };
        let expect = a * t * (st.s + c / b);
        prop_assert!((st.f - expect).abs() <= 1e-12 * st.f.abs().max(expect.abs()));
        let fp = p.slope(st.s, st.f);
        prop_assert!((fp - (a + b / (a * t))).abs() <= 1e-10 * (1.0 + fp.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn free_boundary_invariants(b in 0.05..=1.0f64) {
        let sol = solve_rho(b).unwrap();
        prop_assert!((sol.f_hat_prime(sol.rho) - sol.f_hat(sol.rho)).abs() <= 1e-8);
        for i in 0..=10 {
            let t = (sol.rho * i as f64 / 10.0).min(sol.rho);
            let odd = sol.g_hat(t).unwrap() + sol.g_hat(-t).unwrap();
            prop_assert!(odd.abs() <= 1e-12, "g(t) + g(-t) = {odd} at t = {t}");
        }
        let report = classify(&sol.params()).unwrap();
        prop_assert_eq!(report.case_tag, CaseTag::CatenoidalRicci);
    }

    /// The height grows at least like the catenoid of the same neck.
    #[test]
    fn catenoidal_height_lower_bound(
        b in 0.1..=1.0f64,
        c in -1.0..1.0f64,
        neck in 0.3..2.0f64,
        t in 0.0..20.0f64,
    ) {
        let d = neck * neck + c * c / b;
        let p = RicciParams::new(0.0, b, c, d);
        let s_neck = -c / b;
        let q = (b * d - c * c).sqrt();
        let bound = q / b * (b * t / q).asinh();
        let g = height_g(&p, s_neck, s_neck + t).unwrap();
        prop_assert!(g >= bound - 1e-9 * (1.0 + bound), "g = {g} < {bound}");
    }

    /// The closed form agrees with an IVP seeded inside the window.
    #[test]
    fn ivp_agrees_with_closed_form(fam in family(), seed in any::<u64>()) {
        let case = random_case(fam, &mut case_rng(seed));
        let model = ProfileModel::new(&case.params).unwrap();
        let x0 = model.radius(case.center).unwrap();
        let opts = IvpOptions { span: 10f64.max(case.center.abs() + 1.0), ..IvpOptions::default() };
        let sol = solve_ivp_with(&case.params, case.center, x0, &opts).unwrap();
        let w = &case.window;
        for x in &sol.curve.samples {
            if x.s < w.lo || x.s > w.hi {
                continue;
            }
            let f = model.radius(x.s).unwrap();
            prop_assert!((x.f - f).abs() <= 1e-7, "|{} - {f}| at s = {}", x.f, x.s);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Complete surfaces integrate to the full span in both directions.
    #[test]
    fn complete_means_ivp_reaches_span(
        b in 0.1..=1.0f64,
        c in -1.0..1.0f64,
        neck in 0.3..2.0f64,
        s0 in -3.0..3.0f64,
    ) {
        let p = RicciParams::new(0.0, b, c, neck * neck + c * c / b);
        prop_assert!(classify(&p).unwrap().complete);
        let x0 = ProfileModel::new(&p).unwrap().radius(s0).unwrap();
        let sol = solve_ivp_with(&p, s0, x0, &IvpOptions::default()).unwrap();
        prop_assert_eq!(sol.backward, IvpStop::Span);
        prop_assert_eq!(sol.forward, IvpStop::Span);
    }
}

#[test]
fn funnel_complete_and_proper() {
    // a = 1, c = -1: f > 1 on the whole line
    let p = RicciParams::new(1.0, 0.0, -1.0, 0.0).with_branch(Branch::Plus);
    let report = classify(&p).unwrap();
    assert!(report.complete);
    let model = ProfileModel::new(&p).unwrap();
    let x0 = model.radius(0.0).unwrap();
    let sol = solve_ivp_with(&p, 0.0, x0, &IvpOptions::default()).unwrap();
    assert_eq!((sol.backward, sol.forward), (IvpStop::Span, IvpStop::Span));
    // s as a function of tau = f: s = tau - (c/a) ln(a tau + c) / a up to a constant,
    // and the height gains strictly less than s does
    let s_of = |tau: f64| tau + (tau - 1.0).ln();
    let pts = [-8.0, -2.0, 0.0, 3.0, 10.0];
    for w in pts.windows(2) {
        let (f1, f2) = (model.radius(w[0]).unwrap(), model.radius(w[1]).unwrap());
        assert!(((s_of(f2) - s_of(f1)) - (w[1] - w[0])).abs() < 1e-9);
        let dg = height_g(&p, w[0], w[1]).unwrap();
        assert!(0.0 < dg && dg < w[1] - w[0]);
    }
    // properness: the height is unbounded along both ends; forward it grows
    // like sqrt(s) since f' -> 1, backward like |s| since f -> 1
    let far = [10.0, 100.0, 1000.0];
    let up: Vec<f64> = far.iter().map(|&s| height_g(&p, 0.0, s).unwrap()).collect();
    assert!(up[0] < up[1] && up[1] < up[2] && up[2] > 2.0 * up[1]);
    let down = height_g(&p, 0.0, -1000.0).unwrap();
    assert!(down < -900.0, "{down}");
}

#[test]
fn catenoid_height_is_proper() {
    for (b, c, d) in [(1.0, 0.0, 1.0), (0.5, 0.3, 2.0)] {
        let p = RicciParams::new(0.0, b, c, d);
        let mut last = 0.0;
        for s in [10.0, 100.0, 1000.0] {
            let g = height_g(&p, -c / b, -c / b + s).unwrap();
            let g_neg = height_g(&p, -c / b, -c / b - s).unwrap();
            assert!(g > last && (g + g_neg).abs() < 1e-8);
            last = g;
        }
        assert!(last > 7.0);
    }
}

/// `fd_log_condition` converges at second order on the catenoid.
#[test]
fn log_condition_fd_order() {
    use ricci_rot::oracle::fd_log_condition;
    let p = RicciParams::new(0.0, 1.0, 0.0, 1.0);
    let err = |h: f64| {
        let s: Vec<f64> = (-2..=2).map(|j| 0.7 + j as f64 * h).collect();
        let f: Vec<f64> = s.iter().map(|s| (s * s + 1.0f64).sqrt()).collect();
        let k: Vec<f64> = s.iter().zip(&f).map(|(&s, &f)| gauss_k(&p, s, f)).collect();
        fd_log_condition(&k, &f, h).unwrap()[1].abs()
    };
    let ratio = err(1e-2) / err(5e-3);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}
