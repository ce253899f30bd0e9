//! Named batteries of numerical checks with machine-readable results.
//!
//! `identities`: scalar multiplier identities, route agreement, product
//! relations, shift isometry, iterate exponents and paired forms.
//! `probes`: commutator decay, the shifted-`R` pseudodifferential form,
//! composition defects, one-sided inverse and Neumann certificates.
//! `symbols`: scalar identities plus, for an instance, the per-fiber minima
//! of `|n|`.

use crate::advisor::ProblemInstance;
use crate::mellin::{pdo_composition_defect, total_variation, LogGrid, Measure, MellinMultiplier, PdoSymbol, Testset};
use crate::onesided::{neumann_inverse, neumann_residual, neumann_testset, one_sided_inverse, Side, CONDITION_CAP};
use crate::operators::*;
use crate::shifts::SoShift;
use crate::so_core::{fiber_values_joint, FiberPoint, SoFunction, FIBER_N_MAX};
use crate::symbols::{check_admissible, condition_ii_check, SymbolContext};
use crate::{Error, Result, C64, I};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// Passes when `measured < threshold`.
    Below,
    /// Passes when `measured > threshold`.
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
    pub error: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, measured: Result<f64>, threshold: f64, relation: Relation) -> Check {
        let name = name.into();
        match measured {
            Ok(m) => {
                let pass = match relation {
                    Relation::Below => m < threshold,
                    Relation::Above => m > threshold,
                };
                Check { name, measured: m, threshold, relation, pass, error: None }
            }
            Err(e) => Check { name, measured: f64::NAN, threshold, relation, pass: false, error: Some(e.to_string()) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, checks: Vec<Check>) -> SuiteReport {
        SuiteReport { suite: suite.to_string(), pass: checks.iter().all(|c| c.pass), checks }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteName {
    Identities,
    Probes,
    Symbols,
}

impl core::str::FromStr for SuiteName {
    type Err = Error;
    fn from_str(s: &str) -> Result<SuiteName> {
        match s {
            "identities" => Ok(SuiteName::Identities),
            "probes" => Ok(SuiteName::Probes),
            "symbols" => Ok(SuiteName::Symbols),
            _ => Err(Error::InvalidArgument(format!("unknown suite `{s}` (expected identities, probes or symbols)"))),
        }
    }
}

/// Seed of the random samples used by the scalar checks.
pub const SUITE_SEED: u64 = 0x5eed_f00d;
/// Number of random parameter sets for scalar identities.
pub const SCALAR_SAMPLES: usize = 1000;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `p in [1.2, 6]`, `gamma` with `1/p + Re gamma` at least 0.05 from the
/// ends of `(0, 1)`, `Im gamma in [-1, 1]`.
fn random_admissible(rng: &mut ChaCha8Rng) -> (f64, C64) {
    let p = rng.gen_range(1.2..6.0);
    let lo = -1.0 / p + 0.05;
    let hi = 1.0 - 1.0 / p - 0.05;
    (p, c(rng.gen_range(lo..hi), rng.gen_range(-1.0..1.0)))
}

/// Scalar multiplier identities at random admissible parameters:
/// `(s^2 - r^2 = 1, p^+ + p^- = 1)` maximal errors.
pub fn scalar_identities(samples: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let (p, g) = random_admissible(&mut rng);
        let x = rng.gen_range(-3.0..3.0);
        let v = SymbolContext::new(p, g)?.eval_s_r_p(x);
        e1 = e1.max((v.s * v.s - v.r * v.r - 1.0).norm());
        e2 = e2.max((v.p_plus + v.p_minus - 1.0).norm());
    }
    Ok((e1, e2))
}

/// Pointwise product relations at random admissible triples:
/// `p_delta^+ - p_gamma^+ = (1/2) sinh[pi i (gamma - delta)] r_gamma r_delta` and
/// `p_gamma^- p_delta^+ = -(e^{i pi (delta - gamma)}/4) r_gamma r_delta`.
pub fn scalar_pr_relations(samples: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let (p, g) = random_admissible(&mut rng);
        let lo = -1.0 / p + 0.05;
        let hi = 1.0 - 1.0 / p - 0.05;
        let d = c(rng.gen_range(lo..hi), rng.gen_range(-1.0..1.0));
        let x = rng.gen_range(-3.0..3.0);
        let vg = SymbolContext::new(p, g)?.eval_s_r_p(x);
        let vd = SymbolContext::new(p, d)?.eval_s_r_p(x);
        let rr = vg.r * vd.r;
        e1 = e1.max((vd.p_plus - vg.p_plus - 0.5 * (PI * I * (g - d)).sinh() * rr).norm());
        e2 = e2.max((vg.p_minus * vd.p_plus + (I * PI * (d - g)).exp() / 4.0 * rr).norm());
    }
    Ok((e1, e2))
}

fn max_rel(g: &LogGrid, p: f64, t: &Testset, a: &DiscretizedOperator, b: &DiscretizedOperator) -> Result<f64> {
    Ok(t.max_relative(g, p, Measure::Lebesgue, |f| Ok(a.apply(f).iter().zip(b.apply(f)).map(|(u, v)| u - v).collect()))?.0)
}

/// Relative difference of the principal-value and Mellin discretizations.
pub fn route_discrepancy(which: char, gamma: C64, p: f64, g: &LogGrid, t: &Testset) -> Result<f64> {
    let build = |route| if which == 'S' { op_s(gamma, p, g, route) } else { op_r(gamma, p, g, route) };
    max_rel(g, p, t, &build(Route::Pv)?, &build(Route::MellinPadded(CONTINUUM_PAD))?)
}

/// `max_f | ||U f|| - ||f|| | / ||f||`.
pub fn isometry_defect(shift: &SoShift, p: f64, g: &LogGrid, t: &Testset) -> Result<f64> {
    let u = op_u(shift, p, g)?;
    let mut worst: f64 = 0.0;
    for f in &t.functions {
        let a = g.norm_p(&u.apply(f), p);
        let b = g.norm_p(f, p);
        worst = worst.max((a - b).abs() / b);
    }
    Ok(worst)
}

/// `max |omega_k(xi) - k omega(xi)|` over `k in [-k_max, k_max]` and fibers.
pub fn iterate_exponent_defect(shift: &SoShift, fibers: &[FiberPoint], k_max: i64, tol: f64) -> Result<f64> {
    let ks: Vec<i64> = (-k_max..=k_max).collect();
    let fns: Vec<SoFunction> = ks.iter().map(|&k| shift.exponent_of_iterate_fn(k)).collect();
    let mut refs: Vec<&SoFunction> = vec![shift.omega()];
    refs.extend(fns.iter());
    let mut worst: f64 = 0.0;
    for xi in fibers {
        let est = fiber_values_joint(&refs, xi, tol, FIBER_N_MAX)?;
        let w = est.values[0];
        for (i, &k) in ks.iter().enumerate() {
            worst = worst.max((est.values[i + 1] - w * k as f64).norm());
        }
    }
    Ok(worst)
}

/// `(N vs first paired form, N vs second)` relative differences.
pub fn paired_form_discrepancy(data: &PairedOperatorData, g: &LogGrid, route: Route, t: &Testset) -> Result<(f64, f64)> {
    let n = op_n(data, g, route)?;
    let (n1, n2) = paired_forms(data, g, route)?;
    Ok((max_rel(g, data.p, t, &n, &n1)?, max_rel(g, data.p, t, &n, &n2)?))
}

/// The binomial instance `A_+ = 2I - U_{2t}`, `A_- = I - (2/(1+t)) U_{2t}`.
pub fn sample_paired_data(p: f64, gamma: C64) -> Result<PairedOperatorData> {
    let sh = SoShift::dilation(2.0)?;
    let k = |v: f64| SoFunction::constant(c(v, 0.0));
    Ok(PairedOperatorData {
        p,
        gamma,
        a_plus: FunctionalOperatorSeries::binomial(sh.clone(), k(2.0), k(1.0))?,
        a_minus: FunctionalOperatorSeries::binomial(sh, k(1.0), SoFunction::parse("2/(1+t)")?)?,
    })
}

fn identities(g: &LogGrid) -> Vec<Check> {
    use Relation::Below;
    let mut out = Vec::new();
    let t = Testset::standard(g);
    let (e1, e2) = match scalar_identities(SCALAR_SAMPLES, SUITE_SEED) {
        Ok(v) => (Ok(v.0), Ok(v.1)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    out.push(Check::new("scalar: s^2 - r^2 = 1", e1, 1e-12, Below));
    out.push(Check::new("scalar: p+ + p- = 1", e2, 1e-12, Below));
    let (e1, e2) = match scalar_pr_relations(SCALAR_SAMPLES, SUITE_SEED + 1) {
        Ok(v) => (Ok(v.0), Ok(v.1)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    out.push(Check::new("scalar: first product relation", e1, 1e-12, Below));
    out.push(Check::new("scalar: second product relation", e2, 1e-12, Below));

    for (p, gamma) in [(2.0, c(0.0, 0.0)), (2.0, c(0.1, 0.2)), (3.0, c(-0.1, 0.0))] {
        for which in ['S', 'R'] {
            out.push(Check::new(format!("routes agree: {which} p={p} gamma={gamma}"), route_discrepancy(which, gamma, p, g, &t), 1e-3, Below));
        }
    }

    let pp = (|| -> Result<f64> {
        let gamma = c(0.1, 0.2);
        let pp = op_p(gamma, 2.0, g, Route::Pv, Sign::Plus)?;
        let pm = op_p(gamma, 2.0, g, Route::Pv, Sign::Minus)?;
        max_rel(g, 2.0, &t, &pp.add(&pm), &DiscretizedOperator::identity(*g, 2.0))
    })();
    out.push(Check::new("P+ + P- = I", pp, 1e-14, Below));

    for (gm, dl) in [(c(0.1, 0.0), c(0.1, 0.0)), (c(0.1, 0.0), c(0.0, 0.3))] {
        for (route, name, tol) in [(Route::Mellin, "mellin", 1e-10), (Route::Pv, "pv", 1e-3)] {
            let r = pr_relations_check(gm, dl, 2.0, g, route, &t);
            let (a, b) = match r {
                Ok(r) => (Ok(r.first), Ok(r.second)),
                Err(e) => (Err(e.clone()), Err(e)),
            };
            out.push(Check::new(format!("product relation 1 ({name}): gamma={gm} delta={dl}"), a, tol, Below));
            out.push(Check::new(format!("product relation 2 ({name}): gamma={gm} delta={dl}"), b, tol, Below));
        }
    }

    let shifts = [("family(0.3,0.2,1)", SoShift::family(0.3, 0.2, 1.0)), ("2t", SoShift::dilation(2.0))];
    for (name, sh) in &shifts {
        for p in [2.0, 3.0] {
            let m = sh.clone().and_then(|s| isometry_defect(&s, p, g, &t));
            out.push(Check::new(format!("U isometry: {name} p={p}"), m, 1e-4, Below));
        }
        let inv = sh.clone().and_then(|s| {
            let u = op_u(&s, 2.0, g)?;
            let ui = op_u(&s.inverse_shift(), 2.0, g)?;
            max_rel(g, 2.0, &t, &u.compose(&ui), &DiscretizedOperator::identity(*g, 2.0))
        });
        out.push(Check::new(format!("U U_(-1) = I: {name}"), inv, 1e-5, Below));
    }

    let ie = SoShift::family(0.3, 0.2, 1.0).and_then(|s| iterate_exponent_defect(&s, &FiberPoint::default_family(), 5, 1e-6));
    out.push(Check::new("iterate exponents omega_k = k omega", ie, 1e-3, Below));

    let pf = sample_paired_data(2.0, c(0.1, 0.2)).and_then(|d| paired_form_discrepancy(&d, g, Route::Pv, &t));
    let (a, b) = match pf {
        Ok(v) => (Ok(v.0), Ok(v.1)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    out.push(Check::new("paired form 1 agrees with N", a, 1e-3, Below));
    out.push(Check::new("paired form 2 agrees with N", b, 1e-3, Below));
    out
}

/// `e^{i omega(t) x} r_0(x)` for a shift.
pub fn shifted_r0_symbol(shift: &SoShift) -> PdoSymbol {
    let s = shift.clone();
    PdoSymbol::phase("e^{i omega(t) x} r_0(x)", move |x| s.omega_at(x).unwrap_or(f64::NAN), |xi| C64::new(0.0, -1.0 / (PI * xi).cosh()))
}

/// Shift used by the pseudodifferential probes; `c1 nu` is kept small so
/// that the compact remainders stay below the probe thresholds.
pub fn probe_shift_params() -> (f64, f64, f64) {
    (0.3, 0.05, 1.0)
}

/// Shift used by the composition-defect probe.
pub fn defect_shift_params() -> (f64, f64, f64) {
    (0.3, 0.005, 1.0)
}

/// Commutator of `c R_0` with `U_alpha` for the family shift
/// `(0.3, 0.2, 1)` and `c = omega`, at `n = 512`.
pub fn commutator_decay(n: usize) -> Result<CommutatorReport> {
    let g = LogGrid::default().with_n(n)?;
    let sh = SoShift::family(0.3, 0.2, 1.0)?;
    let cm = DiscretizedOperator::multiplication_by(sh.omega(), g, 2.0)?;
    let r0 = op_r(c(0.0, 0.0), 2.0, &g, Route::Pv)?;
    let a = cm.compose(&r0);
    let u = op_u(&sh, 2.0, &g)?;
    commutator_probe(&a, &u, 32, g.inner_window())
}

fn probes(g: &LogGrid, inst: Option<&ProblemInstance>) -> Vec<Check> {
    use Relation::{Above, Below};
    let mut out = Vec::new();
    out.push(Check::new("commutator [c R_0, U_alpha]: sigma_32/sigma_1", commutator_decay(512).map(|r| r.decay_ratio), 1e-2, Below));

    let t = Testset::standard(g);
    let (c0, c1, nu) = probe_shift_params();
    let m = SoShift::family(c0, c1, nu).and_then(|s| shift_r_pdo_discrepancy(&s, c(0.0, 0.0), 2.0, g, &t, CONTINUUM_PAD));
    out.push(Check::new(format!("U R_0 vs shifted-symbol PDO, family({c0},{c1},{nu})"), m, 1e-2, Below));

    let (c0, c1, nu) = defect_shift_params();
    let d = SoShift::family(c0, c1, nu).and_then(|s| {
        let a = shifted_r0_symbol(&s);
        Ok(pdo_composition_defect(&a, &a, &t, g, CONTINUUM_PAD, 2.0)?.max_ratio)
    });
    out.push(Check::new(format!("PDO composition defect, family({c0},{c1},{nu})"), d, 1e-2, Below));

    let g512 = LogGrid::default().with_n(512);
    let k = |v: f64| SoFunction::constant(c(v, 0.0));
    let residuals = |a: SoFunction, b: SoFunction| -> Result<(f64, f64)> {
        let g = g512.clone()?;
        let tests = Testset::standard(&g);
        let s = FunctionalOperatorSeries::binomial(SoShift::dilation(2.0)?, a, b)?;
        let l = one_sided_inverse(&s, Side::Left, 2.0, &g, &tests, 1e-2, CONDITION_CAP)?;
        let r = one_sided_inverse(&s, Side::Right, 2.0, &g, &tests, 1e-2, CONDITION_CAP)?;
        Ok((l.residual, r.residual))
    };
    let split = |r: Result<(f64, f64)>| match r {
        Ok(v) => (Ok(v.0), Ok(v.1)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    let (l, r) = split(residuals(k(2.0), k(1.0)));
    out.push(Check::new("one-sided inverse 2I - U_2t: left residual", l, 1e-3, Below));
    out.push(Check::new("one-sided inverse 2I - U_2t: right residual", r, 1e-3, Below));
    let (l, r) = split(SoFunction::parse("2/(1+t)").and_then(|b| residuals(k(1.0), b)));
    out.push(Check::new("one-sided inverse I - (2/(1+t)) U_2t: left residual", l, 1e-2, Below));
    out.push(Check::new("one-sided inverse I - (2/(1+t)) U_2t: right residual", r, 0.5, Above));

    let nm = (|| -> Result<f64> {
        let sh = SoShift::dilation(2.0)?;
        let inv = neumann_inverse(&sh, &k(2.0), &k(1.0), 20, 2.0, g)?;
        let s = FunctionalOperatorSeries::binomial(sh.clone(), k(2.0), k(1.0))?;
        let tests = neumann_testset(&sh, 20, g, 5)?;
        Ok(neumann_residual(&inv, &s, &tests)? / inv.bound)
    })();
    out.push(Check::new("Neumann K=20: measured / rho^(K+1)", nm, 1.0 + 1e-6, Below));

    if let Some(inst) = inst {
        let tol = inst.thresholds.certificate_tol;
        for (name, s) in [("A+", &inst.a_plus), ("A-", &inst.a_minus)] {
            let res = (|| -> Result<(f64, f64)> {
                let g = inst.grid.with_n(inst.thresholds.probe_n)?;
                let tests = Testset::standard(&g);
                let l = one_sided_inverse(s, Side::Left, inst.p, &g, &tests, tol, inst.thresholds.condition_cap)?;
                let r = one_sided_inverse(s, Side::Right, inst.p, &g, &tests, tol, inst.thresholds.condition_cap)?;
                Ok((l.residual, r.residual))
            })();
            let (l, r) = split(res);
            out.push(Check::new(format!("instance {name}: left residual"), l, tol, Below));
            out.push(Check::new(format!("instance {name}: right residual"), r, tol, Below));
        }
    }
    out
}

fn symbols(inst: Option<&ProblemInstance>) -> Vec<Check> {
    use Relation::{Above, Below};
    let mut out = Vec::new();
    let (e1, e2) = match scalar_identities(SCALAR_SAMPLES, SUITE_SEED) {
        Ok(v) => (Ok(v.0), Ok(v.1)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    out.push(Check::new("scalar: s^2 - r^2 = 1", e1, 1e-12, Below));
    out.push(Check::new("scalar: p+ + p- = 1", e2, 1e-12, Below));
    let tv = (|| -> Result<f64> {
        let g = LogGrid::default();
        let s0 = MellinMultiplier::from_fn(&g, 1, |x| C64::new((PI * x).tanh(), 0.0))?;
        Ok((total_variation(&s0, &g).value - 2.0).abs())
    })();
    out.push(Check::new("total variation of s_0 equals 2", tv, 1e-9, Below));
    if let Some(inst) = inst {
        let margin = inst.thresholds.margin;
        let data: Vec<_> = inst.fiber_symbol_data();
        let mut good = Vec::new();
        for (label, d) in data {
            match d {
                Ok(d) => good.push(d),
                Err(e) => out.push(Check::new(format!("fiber {label}: inf |n|"), Err(e), margin, Above)),
            }
        }
        let res = inst.symbol_context().and_then(|ctx| condition_ii_check(&ctx, &good, &inst.thresholds.condition_ii()));
        match res {
            Ok(fc) => {
                for f in fc {
                    out.push(Check::new(format!("fiber {}: inf |n|", f.label), Ok(f.inf_estimate), margin, Above));
                }
            }
            Err(e) => out.push(Check::new("condition (ii)", Err(e), margin, Above)),
        }
    }
    out
}

/// Runs a suite. Check failures are reported as data.
pub fn run_suite(name: SuiteName, inst: Option<&ProblemInstance>) -> Result<SuiteReport> {
    let g = inst.map(|i| i.grid).unwrap_or_default();
    if let Some(i) = inst {
        check_admissible(i.p, i.gamma)?;
    }
    let checks = match name {
        SuiteName::Identities => identities(&g),
        SuiteName::Probes => probes(&g, inst),
        SuiteName::Symbols => symbols(inst),
    };
    let label = match name {
        SuiteName::Identities => "identities",
        SuiteName::Probes => "probes",
        SuiteName::Symbols => "symbols",
    };
    Ok(SuiteReport::new(label, checks))
}
