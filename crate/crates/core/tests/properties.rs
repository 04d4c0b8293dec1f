use hollingiv::model::{self, EquilibriumKind};
use hollingiv::series::{involution_solve, TruncatedSeries};
use hollingiv::sim::{self, ReturnOptions, Section};
use hollingiv::{hopf, ModelParams};
use proptest::prelude::*;

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n + 1)
}

fn params() -> impl Strategy<Value = ModelParams> {
    (-6.0..-0.5f64, 0.2..3.0f64, -0.9..0.9f64, -0.95..1.0f64, 0.02..0.999f64).prop_map(|(la, kf, af, bf, df)| {
        let a = la.exp();
        let k = kf / a.sqrt();
        let p = ModelParams::new(k, af * k, a, bf * 2.0 * a.sqrt(), 1.0).unwrap();
        p.with_d(df * p.d_m())
    })
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn mul_commutes_and_matches_eval(f in coeffs(6), g in coeffs(6), t in -0.05..0.05f64) {
        let (f, g) = (TruncatedSeries::from_coeffs(f), TruncatedSeries::from_coeffs(g));
        let fg = f.try_mul(&g).unwrap();
        let gf = g.try_mul(&f).unwrap();
        for k in 0..=6 {
            prop_assert!((fg.coeff(k) - gf.coeff(k)).abs() < 1e-12);
        }
        prop_assert!((fg.eval(t) - f.eval(t) * g.eval(t)).abs() < 1e-6);
    }

    #[test]
    fn recip_inverts(f in coeffs(6), c in 0.5..2.0f64) {
        let mut f = TruncatedSeries::from_coeffs(f);
        f.set_coeff(0, c);
        let one = f.try_mul(&f.recip().unwrap()).unwrap();
        prop_assert!((one.coeff(0) - 1.0).abs() < 1e-12);
        for k in 1..=6 {
            prop_assert!(one.coeff(k).abs() < 1e-10);
        }
    }

    #[test]
    fn compose_agrees_with_eval(f in coeffs(5), g in coeffs(5), t in -0.02..0.02f64) {
        let f = TruncatedSeries::from_coeffs(f);
        let mut g = TruncatedSeries::from_coeffs(g);
        g.set_coeff(0, 0.0);
        let fg = f.compose(&g).unwrap();
        prop_assert!((fg.eval(t) - f.eval(g.eval(t))).abs() < 1e-7);
    }

    #[test]
    fn involution_preserves_potential(h in coeffs(9), c2 in 0.2..2.0f64) {
        let mut h = TruncatedSeries::from_coeffs(h);
        h.set_coeff(0, 0.0);
        h.set_coeff(1, 0.0);
        h.set_coeff(2, c2);
        let th = involution_solve(&h).unwrap();
        prop_assert_eq!(th.coeff(1), -1.0);
        let diff = h.truncate(8).compose(&th.truncate(8)).unwrap().try_sub(&h.truncate(8)).unwrap();
        for k in 0..=8 {
            prop_assert!(diff.coeff(k).abs() < 1e-9 * h.max_abs().max(1.0));
        }
    }

    #[test]
    fn vieta_and_response_at_roots(p in params()) {
        let r = model::h_roots(&p).unwrap();
        prop_assume!(!r.coalesced);
        prop_assert!(rel(r.alpha * r.beta, 1.0 / p.a) < 1e-12);
        prop_assert!(rel(r.alpha + r.beta, (1.0 - p.b * p.d) / (p.a * p.d)) < 1e-12);
        prop_assert!(rel(p.p(r.alpha), p.d) < 1e-10);
        prop_assert!(rel(p.p(r.beta), p.d) < 1e-10);
    }

    #[test]
    fn interior_trace_and_det(p in params()) {
        for e in model::equilibria(&p).into_iter().filter(|e| e.kind == EquilibriumKind::Ealpha) {
            let x = e.location.0;
            let j = p.jacobian(e.location.0, e.location.1);
            let tr = p.p(x) * p.dG(x);
            let det = p.p(x) * p.dp(x) * p.G(x);
            prop_assert!((j[0][0] + j[1][1] - tr).abs() <= 1e-10 * tr.abs().max(p.p(x) * p.dG(x).abs()).max(1e-12));
            prop_assert!(rel(j[0][0] * j[1][1] - j[0][1] * j[1][0], det) < 1e-10);
        }
    }

    #[test]
    fn axes_are_invariant(p in params(), x in 0.0..50.0f64, y in 0.0..50.0f64) {
        prop_assert_eq!(p.field(x, 0.0)[1], 0.0);
        prop_assert_eq!(p.field(0.0, y)[0], 0.0);
    }

    #[test]
    fn scaled_params_are_valid(r in 0.1..5.0f64, k0 in 0.5..50.0f64, af in -0.9..0.9f64, a0 in 1e-4..1.0f64,
                               bf in -0.95..2.0f64, c in 0.1..5.0f64, d0 in 0.01..5.0f64, m in 0.1..5.0f64) {
        let p = model::scale_params(r, k0, af * k0, a0, bf * 2.0 * a0.sqrt(), c, d0, m).unwrap();
        prop_assert!(p.validate().is_ok());
        let mc = m * c;
        prop_assert!(rel(p.K, mc * k0 / r) < 1e-15 && rel(p.d, r * d0 / (mc * mc)) < 1e-15);
    }

    #[test]
    fn taylor_coefficients_match_differences(p in params(), xf in 0.1..2.0f64) {
        let x0 = xf / p.a.sqrt();
        let (ps, gs) = model::eval_pG(&p, x0, 2).unwrap();
        let h = 1e-5 * x0;
        let fd = |f: &dyn Fn(f64) -> f64| (f(x0 + h) - f(x0 - h)) / (2.0 * h);
        let gscale = p.G(x0).abs() / x0 + gs.coeff(1).abs();
        prop_assert!((ps.coeff(1) - fd(&|x| p.p(x))).abs() < 1e-6 * (ps.coeff(1).abs() + p.p(x0) / x0));
        prop_assert!((gs.coeff(1) - fd(&|x| p.G(x))).abs() < 1e-6 * gscale);
    }

    #[test]
    fn trap_bound_holds(p in params()) {
        let m = model::trap_bound(&p);
        prop_assert!(m > p.K);
        for scale in [1.0, 2.0] {
            let n = scale * m;
            for i in 0..=200 {
                let x = n * i as f64 / 200.0;
                let y = n - x;
                prop_assert!(p.p(x) * p.G(x) - p.d * y < 1e-9 * p.d * n);
            }
        }
    }

    #[test]
    fn closed_and_series_potential_agree(p in params()) {
        prop_assume!(model::e_alpha(&p).is_some());
        let l = hopf::lienard_convert(&p).unwrap();
        let h = hopf::h_closed_form(p.a, l.alpha, p.d, l.h_series.order());
        for k in 0..=l.h_series.order() {
            prop_assert!((l.h_series.coeff(k) - h.coeff(k)).abs() < 1e-10 * h.max_abs());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn return_map_is_monotone(p in params(), u in 0.05..0.9f64) {
        prop_assume!(model::e_alpha(&p).is_some());
        let r = model::h_roots(&p).unwrap();
        let sec = Section::through_e_alpha(&p).unwrap();
        let w = r.beta.min(p.K) - r.alpha;
        let ro = ReturnOptions::default();
        let (s1, s2) = (u * w, (u + 0.05) * w);
        if let (Some(a), Some(b)) = (sim::return_map(&p, &sec, s1, &ro).unwrap().value(), sim::return_map(&p, &sec, s2, &ro).unwrap().value()) {
            prop_assert!(a < b + 1e-8 * w);
        }
    }
}
