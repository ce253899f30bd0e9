use sosfred_core::mellin::{LogGrid, Testset};
use sosfred_core::onesided::*;
use sosfred_core::operators::FunctionalOperatorSeries;
use sosfred_core::shifts::SoShift;
use sosfred_core::so_core::{Endpoint, SoFunction};
use sosfred_core::C64;
use std::time::Instant;

fn k(v: f64) -> SoFunction {
    SoFunction::constant(C64::new(v, 0.0))
}

#[test]
fn classifier_designed_instances() {
    let al = SoShift::dilation(2.0).unwrap();
    let cases = [
        (k(2.0), k(1.0), BinomialVerdict::InvertibleI1),
        (k(1.0), k(2.0), BinomialVerdict::InvertibleI2),
        (k(1.0), SoFunction::parse("2/(1+t)").unwrap(), BinomialVerdict::StrictlyLeftLi),
        (k(1.0), SoFunction::parse("2*t/(1+t)").unwrap(), BinomialVerdict::StrictlyRightRi),
    ];
    for (a, b, want) in cases {
        let t0 = Instant::now();
        let c = classify_binomial(&al, &a, &b).unwrap();
        println!("{} {:?} {:?}", c.verdict, c.margins, t0.elapsed());
        assert_eq!(c.verdict, want);
    }
}

#[test]
fn limit_bounds_oscillating() {
    let b = SoFunction::parse("1.5+0.4*sin(log(1+abs(log(t))))").unwrap();
    let l = limit_bounds(&k(1.0), &b, Endpoint::Infinity, 10).unwrap();
    println!("{} {} {}", l.l_star, l.l_upper, l.stabilized);
}

#[test]
fn inverses() {
    let g = LogGrid::new(-12.0, 12.0, 512).unwrap();
    let t = Testset::standard(&g);
    let al = SoShift::dilation(2.0).unwrap();
    for (a, b) in [(k(2.0), k(1.0)), (k(1.0), SoFunction::parse("2/(1+t)").unwrap())] {
        let s = FunctionalOperatorSeries::binomial(al.clone(), a, b).unwrap();
        let t0 = Instant::now();
        let l = one_sided_inverse(&s, Side::Left, 2.0, &g, &t, 1e-2, CONDITION_CAP).unwrap();
        let r = one_sided_inverse(&s, Side::Right, 2.0, &g, &t, 1e-2, CONDITION_CAP).unwrap();
        println!("left {:.3e} rank {} cond {:.2e}; right {:.3e} rank {} cond {:.2e}; {:?}", l.residual, l.rank, l.condition, r.residual, r.rank, r.condition, t0.elapsed());
    }
}

#[test]
fn neumann() {
    let g = LogGrid::default();
    let al = SoShift::dilation(2.0).unwrap();
    let inv = neumann_inverse(&al, &k(2.0), &k(1.0), 20, 2.0, &g).unwrap();
    let s = FunctionalOperatorSeries::binomial(al.clone(), k(2.0), k(1.0)).unwrap();
    let t = neumann_testset(&al, 20, &g, 5).unwrap();
    let r = neumann_residual(&inv, &s, &t).unwrap();
    println!("rho {} bound {:e} measured {:e} ratio {}", inv.rho, inv.bound, r, r / inv.bound);
}
