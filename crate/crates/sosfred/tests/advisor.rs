use sosfred::core::advisor::{run_advisor, Claim};

fn load(name: &str) -> sosfred::core::advisor::ProblemInstance {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("instances").join(name);
    sosfred::parse_instance(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn li_instance_fiber_minima_match_brute_force() {
    let mut inst = load("li_li.json");
    inst.thresholds.run_probes = false;
    let v = run_advisor(&inst);
    assert_eq!(v.claim, Claim::LeftFredholm);
    let ctx = inst.symbol_context().unwrap();
    assert_eq!(v.condition_ii.fibers.len(), 2);
    for (f, d) in v.condition_ii.fibers.iter().zip(&v.condition_ii.fiber_data) {
        let brute = (-500_000..500_000).map(|i| ctx.eval_n_data(d, i as f64 * 2e-4).norm()).fold(f64::INFINITY, f64::min);
        assert!((brute - f.inf_estimate).abs() < 1e-4, "{}: {brute} vs {}", f.label, f.inf_estimate);
    }
}

#[test]
fn declared_values_are_checked() {
    let text = std::fs::read_to_string(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("instances/li_li.json")).unwrap();
    let wrong = text.replacen("\"a_plus.1\": { \"re\": -2 }", "\"a_plus.1\": { \"re\": -1.5 }", 1);
    assert_ne!(text, wrong);
    let mut inst = sosfred::parse_instance(&wrong).unwrap();
    inst.thresholds.run_probes = false;
    let v = run_advisor(&inst);
    assert_eq!(v.claim, Claim::NoClaim);
    assert!(v.blocking.iter().any(|b| b.contains("declared")), "{:?}", v.blocking);
}

#[test]
fn general_series_uses_numerical_certificate() {
    let inst = load("family_series.json");
    let v = run_advisor(&inst);
    let a_plus = &v.condition_i.operators[0];
    assert_eq!(a_plus.method, "numerical certificate");
    assert!(a_plus.left_certificate.as_ref().unwrap().certified);
    assert_eq!(v.claim, Claim::Fredholm);
    assert!(v.claim_detail.contains("numerical certificate"));
}

#[test]
fn gamma_with_large_imaginary_part_is_admissible() {
    let text = r#"{"p": 2, "gamma": {"re": 0, "im": 0.9}, "alpha": {"omega": "log(2)"}, "a_plus": [{"k": 0, "expr": "1"}], "a_minus": [{"k": 0, "expr": "1"}]}"#;
    assert!(sosfred::parse_instance(text).is_ok());
}
