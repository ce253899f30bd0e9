use sosfred_core::mellin::{LogGrid, Measure, Testset};
use sosfred_core::operators::*;
use sosfred_core::shifts::SoShift;
use sosfred_core::so_core::SoFunction;
use sosfred_core::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(g: &LogGrid, p: f64, t: &Testset, a: &DiscretizedOperator, b: &DiscretizedOperator) -> f64 {
    t.max_relative(g, p, Measure::Lebesgue, |f| Ok(a.apply(f).iter().zip(b.apply(f)).map(|(u, v)| u - v).collect()))
        .unwrap()
        .0
}

#[test]
fn routes_agree() {
    let g = LogGrid::default();
    let t = Testset::standard(&g);
    for (p, gamma) in [(2.0, c(0.0, 0.0)), (2.0, c(0.1, 0.2)), (3.0, c(-0.1, 0.0))] {
        let s1 = op_s(gamma, p, &g, Route::Pv).unwrap();
        let s2 = op_s(gamma, p, &g, Route::MellinPadded(CONTINUUM_PAD)).unwrap();
        let r1 = op_r(gamma, p, &g, Route::Pv).unwrap();
        let r2 = op_r(gamma, p, &g, Route::MellinPadded(CONTINUUM_PAD)).unwrap();
        let es = rel(&g, p, &t, &s1, &s2);
        let er = rel(&g, p, &t, &r1, &r2);
        let es1 = rel(&g, p, &t, &s1, &op_s(gamma, p, &g, Route::Mellin).unwrap());
        println!("p={p} gamma={gamma}: S {es:.3e} R {er:.3e} (S vs periodic {es1:.3e})");
        assert!(es < 1e-3 && er < 1e-3);
    }
}

#[test]
fn pr_relations() {
    let g = LogGrid::default();
    let t = Testset::standard(&g);
    for (gm, dl) in [(c(0.1, 0.0), c(0.1, 0.0)), (c(0.1, 0.0), c(0.0, 0.3))] {
        for route in [Route::Mellin, Route::Pv, Route::MellinPadded(4)] {
            let r = pr_relations_check(gm, dl, 2.0, &g, route, &t).unwrap();
            println!("{gm} {dl} {route:?}: {r:?}");
        }
    }
}

#[test]
fn shift_isometry() {
    let g = LogGrid::default();
    let t = Testset::standard(&g);
    for sh in [SoShift::family(0.3, 0.2, 1.0).unwrap(), SoShift::dilation(2.0).unwrap()] {
        for p in [2.0, 3.0] {
            let u = op_u(&sh, p, &g).unwrap();
            let mut worst: f64 = 0.0;
            for f in &t.functions {
                let a = g.norm_p(&u.apply(f), p);
                let b = g.norm_p(f, p);
                worst = worst.max((a - b).abs() / b);
            }
            let ui = op_u(&sh.inverse_shift(), p, &g).unwrap();
            let id = rel(&g, p, &t, &u.compose(&ui), &DiscretizedOperator::identity(g, p));
            println!("{} p={p}: isometry {worst:.3e} inverse {id:.3e}", sh.label());
            assert!(worst < 1e-4);
        }
    }
}

#[test]
fn paired_forms_agree() {
    let g = LogGrid::default();
    let t = Testset::standard(&g);
    let sh = SoShift::dilation(2.0).unwrap();
    let k = |v: f64| SoFunction::constant(c(v, 0.0));
    let data = PairedOperatorData {
        p: 2.0,
        gamma: c(0.1, 0.2),
        a_plus: FunctionalOperatorSeries::binomial(sh.clone(), k(2.0), k(1.0)).unwrap(),
        a_minus: FunctionalOperatorSeries::binomial(sh.clone(), k(1.0), SoFunction::parse("2/(1+t)").unwrap()).unwrap(),
    };
    for route in [Route::Mellin, Route::MellinPadded(4), Route::Pv] {
        let n = op_n(&data, &g, route).unwrap();
        let (n1, n2) = paired_forms(&data, &g, route).unwrap();
        println!("{route:?}: {:.3e} {:.3e} {:.3e}", rel(&g, 2.0, &t, &n, &n1), rel(&g, 2.0, &t, &n, &n2), rel(&g, 2.0, &t, &n1, &n2));
    }
}
