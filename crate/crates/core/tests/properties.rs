use proptest::prelude::*;
use sosfred_core::mellin::LogGrid;
use sosfred_core::onesided::{classify_binomial, formal_adjoint};
use sosfred_core::operators::{op_s, FunctionalOperatorSeries, Route};
use sosfred_core::shifts::SoShift;
use sosfred_core::so_core::SoFunction;
use sosfred_core::symbols::{coth, csch, SymbolContext};
use sosfred_core::C64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coth_csch_identity(re in -30.0f64..30.0, im in 0.05f64..3.09) {
        let z = C64::new(re, im);
        let e = coth(z) * coth(z) - csch(z) * csch(z) - 1.0;
        prop_assert!(e.norm() < 1e-12, "{z}: {e}");
    }

    #[test]
    fn projections_sum_to_one(p in 1.1f64..8.0, re in -0.4f64..0.4, im in -2.0f64..2.0, x in -40.0f64..40.0) {
        prop_assume!(1.0 / p + re > 0.02 && 1.0 / p + re < 0.98);
        let v = SymbolContext::new(p, C64::new(re, im)).unwrap().eval_s_r_p(x);
        prop_assert!((v.p_plus + v.p_minus - 1.0).norm() < 1e-12);
    }

    #[test]
    fn parsed_polynomial_matches(a in -5.0f64..5.0, b in -5.0f64..5.0, t in 0.01f64..100.0) {
        let f = SoFunction::parse(&format!("({a}) + ({b})*t/(1+t)")).unwrap();
        let want = a + b * t / (1.0 + t);
        prop_assert!((f.eval(t).unwrap() - want).norm() < 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn s_is_linear(ar in -2.0f64..2.0, ai in -2.0f64..2.0, c1 in -1.0f64..1.0, c2 in -1.0f64..1.0) {
        let g = LogGrid::new(-6.0, 6.0, 256).unwrap();
        let s = op_s(C64::new(0.1, 0.2), 2.0, &g, Route::Pv).unwrap();
        let f = g.sample(|x| C64::new((-(x - c1) * (x - c1)).exp(), 0.0));
        let h = g.sample(|x| C64::new(0.0, (-(x - c2) * (x - c2) * 2.0).exp()));
        let a = C64::new(ar, ai);
        let comb: Vec<C64> = f.iter().zip(&h).map(|(u, v)| a * u + v).collect();
        let lhs = s.apply(&comb);
        let (sf, sh) = (s.apply(&f), s.apply(&h));
        let err = lhs.iter().zip(sf.iter().zip(&sh)).map(|(l, (u, v))| (l - (a * u + v)).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12 * (1.0 + a.norm()) * 10.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classifier_scaling_invariance(lambda in 0.05f64..20.0, which in 0usize..4) {
        let alpha = SoShift::dilation(2.0).unwrap();
        let (a, b) = [
            ("2", "1"),
            ("1", "2"),
            ("1", "2/(1+t)"),
            ("1", "2*t/(1+t)"),
        ][which];
        let (a, b) = (SoFunction::parse(a).unwrap(), SoFunction::parse(b).unwrap());
        let l = C64::new(lambda, 0.0);
        let base = classify_binomial(&alpha, &a, &b).unwrap().verdict;
        let scaled = classify_binomial(&alpha, &a.scale(l), &b.scale(l)).unwrap().verdict;
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn formal_adjoint_is_an_involution(c1 in -0.2f64..0.2, x in -8.0f64..8.0) {
        let sh = SoShift::family(0.3, c1, 1.0).unwrap();
        let terms = vec![
            (-1, SoFunction::parse("0.5*i + 1/(1+t)").unwrap()),
            (0, SoFunction::parse("3").unwrap()),
            (2, SoFunction::parse("sin(log(1+log(t)^2)) - 2*i").unwrap()),
        ];
        let a = FunctionalOperatorSeries::new(sh, terms).unwrap();
        let back = formal_adjoint(&formal_adjoint(&a).unwrap()).unwrap();
        prop_assert_eq!(a.terms().len(), back.terms().len());
        for ((k1, f1), (k2, f2)) in a.terms().iter().zip(back.terms()) {
            prop_assert_eq!(k1, k2);
            let d = (f1.eval_log(x).unwrap() - f2.eval_log(x).unwrap()).norm();
            prop_assert!(d < 1e-10, "k={k1}: {d}");
        }
    }
}
