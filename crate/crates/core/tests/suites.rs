use sosfred_core::suites::{run_suite, SuiteName};

#[test]
fn suites_pass() {
    for name in [SuiteName::Identities, SuiteName::Symbols, SuiteName::Probes] {
        let t = std::time::Instant::now();
        let r = run_suite(name, None).unwrap();
        for c in &r.checks {
            println!("{:5} {:<70} {:.3e} {:?} {:e} {:?}", c.pass, c.name, c.measured, c.relation, c.threshold, c.error);
        }
        println!("{} {:?}", r.suite, t.elapsed());
        assert!(r.pass, "{}", r.suite);
    }
}
