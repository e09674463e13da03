use fpcalc_core::convolutions::series::{series_oracle, Kind};
use fpcalc_core::convolutions::{add_boolean, add_free, add_monotone, mul_monotone};
use fpcalc_core::measures::make_named;
use fpcalc_core::spec::{Arg, Spec};
use fpcalc_core::stable_maps::m_alpha_plus;
use fpcalc_core::subordination::cauchy_subordinate;
use fpcalc_core::transforms::{eval_eta, eval_f, eval_g};
use fpcalc_core::{Measure, ToleranceConfig, C64};
use proptest::prelude::*;

fn atoms(lo: f64, hi: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((lo..hi, 0.05f64..1.0), 1..5).prop_map(|v| {
        let s: f64 = v.iter().map(|a| a.1).sum();
        v.into_iter().map(|(x, w)| (x, w / s)).collect()
    })
}

fn upper() -> impl Strategy<Value = C64> {
    (-4.0f64..4.0, 0.05f64..4.0).prop_map(|(x, y)| C64::new(x, y))
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cauchy_transform_is_nevanlinna(a in atoms(-3.0, 3.0), z in upper()) {
        let mu = Measure::atomic(a).unwrap();
        let g = eval_g(&mu, z).unwrap();
        prop_assert!(g.im <= 0.0);
        prop_assert!(g.norm() <= 1.0 / z.im * (1.0 + 1e-12));
        prop_assert!(close(eval_g(&mu, z.conj()).unwrap(), g.conj(), 1e-14));
        prop_assert!(eval_f(&mu, z).unwrap().im >= z.im * (1.0 - 1e-12));
    }

    #[test]
    fn jets_match_central_differences(a in atoms(-3.0, 3.0), z in upper()) {
        let mu = add_free(&Measure::atomic(a).unwrap(), &make_named("semicircle", &[]).unwrap(), &ToleranceConfig::default()).unwrap();
        let jet = mu.eval_at(fpcalc_core::Tr::F, z).unwrap();
        let h = 1e-5 * (1.0 + z.norm());
        let fd = (eval_f(&mu, z + h).unwrap() - eval_f(&mu, z - h).unwrap()) / (2.0 * h);
        prop_assert!(close(jet.d, fd, 1e-6), "{} vs {}", jet.d, fd);
    }

    #[test]
    fn free_and_boolean_sums_commute(a in atoms(-2.0, 2.0), b in atoms(-2.0, 2.0), z in upper()) {
        let cfg = ToleranceConfig::default();
        let (m, n) = (Measure::atomic(a).unwrap(), Measure::atomic(b).unwrap());
        let f1 = eval_f(&add_free(&m, &n, &cfg).unwrap(), z).unwrap();
        let f2 = eval_f(&add_free(&n, &m, &cfg).unwrap(), z).unwrap();
        prop_assert!(close(f1, f2, 1e-9));
        let b1 = eval_f(&add_boolean(&m, &n).unwrap(), z).unwrap();
        let b2 = eval_f(&add_boolean(&n, &m).unwrap(), z).unwrap();
        prop_assert!(close(b1, b2, 1e-13));
    }

    #[test]
    fn monotone_products_associate(a in atoms(0.1, 3.0), b in atoms(0.1, 3.0), c in atoms(0.1, 3.0), x in -5.0f64..-0.01) {
        let (p, q, r) = (Measure::atomic(a).unwrap(), Measure::atomic(b).unwrap(), Measure::atomic(c).unwrap());
        let left = mul_monotone(&mul_monotone(&p, &q).unwrap(), &r).unwrap();
        let right = mul_monotone(&p, &mul_monotone(&q, &r).unwrap()).unwrap();
        let z = C64::new(x, 0.0);
        prop_assert!(close(eval_eta(&left, z).unwrap(), eval_eta(&right, z).unwrap(), 1e-13));
    }

    #[test]
    fn cauchy_maps_compose_additively(a in atoms(-2.0, 2.0), s in (-2.0f64..2.0, 0.0f64..3.0), t in (-2.0f64..2.0, 0.0f64..3.0), z in upper()) {
        let mu = Measure::atomic(a).unwrap();
        let once = cauchy_subordinate(s.0 + t.0, s.1 + t.1, &mu).unwrap();
        let twice = cauchy_subordinate(s.0, s.1, &cauchy_subordinate(t.0, t.1, &mu).unwrap()).unwrap();
        prop_assert!(close(eval_f(&once, z).unwrap(), eval_f(&twice, z).unwrap(), 1e-12));
    }

    #[test]
    fn series_means_add_and_multiply(a in atoms(0.1, 3.0), b in atoms(0.1, 3.0)) {
        let mean = |v: &[(f64, f64)]| v.iter().map(|(x, w)| x * w).sum::<f64>();
        for kind in Kind::ALL {
            let m = series_oracle(&a, &b, kind, 2).unwrap();
            let want = match kind {
                Kind::MulFree | Kind::MulMonotone => mean(&a) * mean(&b),
                _ => mean(&a) + mean(&b),
            };
            prop_assert!((m[0] - want).abs() <= 1e-12 * (1.0 + want.abs()));
            prop_assert!(m[1] >= m[0] * m[0] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn monotone_sum_with_point_mass_on_the_right_translates(a in atoms(-2.0, 2.0), s in -3.0f64..3.0, z in upper()) {
        let mu = Measure::atomic(a.clone()).unwrap();
        let shifted = Measure::atomic(a.iter().map(|(x, w)| (x + s, *w)).collect()).unwrap();
        let m = add_monotone(&mu, &Measure::dirac(s)).unwrap();
        prop_assert!(close(eval_g(&m, z).unwrap(), eval_g(&shifted, z).unwrap(), 1e-13));
    }

    #[test]
    fn stable_maps_compose(a in atoms(0.1, 3.0), al in 0.2f64..1.0, be in 0.2f64..1.0, z in upper()) {
        let mu = Measure::atomic(a).unwrap();
        let lhs = m_alpha_plus(al, &m_alpha_plus(be, &mu).unwrap()).unwrap();
        let rhs = m_alpha_plus(al * be, &mu).unwrap();
        prop_assert!(close(eval_f(&lhs, z).unwrap(), eval_f(&rhs, z).unwrap(), 1e-10));
    }

    #[test]
    fn specs_roundtrip(a in atoms(-2.0, 2.0), t in 0.1f64..3.0) {
        let s = Spec::expr("free-power", vec![Arg::from(Spec::Atomic { atoms: a, support: None }), Arg::from(1.0 + t)]);
        prop_assert_eq!(Spec::parse(&s.to_json()).unwrap(), s);
    }
}
