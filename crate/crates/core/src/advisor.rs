//! Problem instances and the Fredholm advisor.
//!
//! The advisor evaluates the two sufficient conditions for
//! `N = A_+ P_gamma^+ + A_- P_gamma^-`: one-sided invertibility of `A_+`
//! and `A_-` (condition i) and `inf_x |n(xi, x)| > 0` on every fiber
//! (condition ii). Only positive claims are ever made.

use crate::mellin::{LogGrid, Testset};
use crate::onesided::{classify_binomial, one_sided_inverse, BinomialClassification, Side};
use crate::operators::FunctionalOperatorSeries;
use crate::shifts::{guard_range, FamilyParams, SoShift};
use crate::so_core::{fiber_values_joint, Endpoint, FiberPoint, SoFunction, FIBER_N_MAX};
use crate::symbols::{check_admissible, condition_ii_check, ConditionIiConfig, FiberCondition, FiberSymbolData, SymbolContext};
use crate::{Error, Result, C64};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexSpec> for C64 {
    fn from(c: ComplexSpec) -> C64 {
        C64::new(c.re, c.im)
    }
}

/// A shift given by the built-in family or by expressions for `omega`
/// (and optionally `psi = t omega'`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ShiftSpec {
    Family { family: FamilyParams },
    Expr { omega: String, #[serde(default)] psi: Option<String> },
}

impl ShiftSpec {
    pub fn build(&self) -> Result<SoShift> {
        match self {
            ShiftSpec::Family { family } => SoShift::family(family.c0, family.c1, family.nu),
            ShiftSpec::Expr { omega, psi } => SoShift::from_exprs(omega, psi.as_deref()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub k: i64,
    pub expr: String,
}

/// A geometric test sequence `t_n = e^phase * ratio^{+-n}` toward `endpoint`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberSpec {
    #[serde(default)]
    pub label: Option<String>,
    pub endpoint: Endpoint,
    pub ratio: f64,
    /// `log t_0`.
    #[serde(default)]
    pub phase: f64,
    /// Declared limits keyed by coefficient, e.g. `"a_plus.1"`.
    #[serde(default)]
    pub declared: BTreeMap<String, ComplexSpec>,
}

impl FiberSpec {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| format!("{}:r={}:phase={}", self.endpoint.as_str(), self.ratio, self.phase))
    }

    pub fn build(&self) -> Result<FiberPoint> {
        if !(self.ratio > 0.0 && self.ratio != 1.0 && self.ratio.is_finite()) {
            return Err(Error::Instance(format!("fiber ratio {} must be positive and different from 1", self.ratio)));
        }
        let log_ratio = self.endpoint.direction() * self.ratio.ln().abs();
        FiberPoint::geometric_log(self.label(), log_ratio, self.phase)
    }
}

/// Tolerances and switches; every field can be overridden.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub fiber_tol: f64,
    pub so_tol: f64,
    pub eps_tail: f64,
    pub margin: f64,
    pub quasi_periods: f64,
    pub max_samples: usize,
    pub certificate_tol: f64,
    pub condition_cap: f64,
    pub probe_n: usize,
    pub run_probes: bool,
}

impl Default for Thresholds {
    fn default() -> Self {
        let c = ConditionIiConfig::default();
        Thresholds {
            fiber_tol: crate::so_core::FIBER_TOL,
            so_tol: 1e-3,
            eps_tail: c.eps_tail,
            margin: c.margin,
            quasi_periods: c.quasi_periods,
            max_samples: c.max_samples,
            certificate_tol: 1e-2,
            condition_cap: crate::onesided::CONDITION_CAP,
            probe_n: 512,
            run_probes: true,
        }
    }
}

impl Thresholds {
    pub fn condition_ii(&self) -> ConditionIiConfig {
        ConditionIiConfig { eps_tail: self.eps_tail, margin: self.margin, quasi_periods: self.quasi_periods, max_samples: self.max_samples }
    }
}

/// The declarative form of an instance file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub p: f64,
    #[serde(default)]
    pub gamma: ComplexSpec,
    #[serde(default)]
    pub grid: Option<LogGrid>,
    pub alpha: ShiftSpec,
    /// Shift of `A_-`; defaults to `alpha`.
    #[serde(default)]
    pub beta: Option<ShiftSpec>,
    pub a_plus: Vec<TermSpec>,
    pub a_minus: Vec<TermSpec>,
    /// Defaults to the standard family of geometric fibers.
    #[serde(default)]
    pub fibers: Option<Vec<FiberSpec>>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

/// A validated instance.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub spec: InstanceSpec,
    pub p: f64,
    pub gamma: C64,
    pub grid: LogGrid,
    pub alpha: SoShift,
    pub beta: SoShift,
    pub a_plus: FunctionalOperatorSeries,
    pub a_minus: FunctionalOperatorSeries,
    pub fibers: Vec<FiberPoint>,
    pub thresholds: Thresholds,
}

fn build_terms(name: &str, terms: &[TermSpec], fibers: &[(FiberPoint, &FiberSpec)]) -> Result<Vec<(i64, SoFunction)>> {
    if terms.is_empty() {
        return Err(Error::Instance(format!("{name} has no terms")));
    }
    let mut out = Vec::new();
    for t in terms {
        let mut f = SoFunction::parse(&t.expr)?.with_label(format!("{name}[{}] = {}", t.k, t.expr));
        let key = format!("{name}.{}", t.k);
        for (fp, fs) in fibers {
            if let Some(v) = fs.declared.get(&key) {
                f = f.with_declared(fp.clone(), (*v).into());
            }
        }
        out.push((t.k, f));
    }
    Ok(out)
}

impl ProblemInstance {
    pub fn from_spec(spec: InstanceSpec) -> Result<ProblemInstance> {
        let gamma: C64 = spec.gamma.into();
        check_admissible(spec.p, gamma)?;
        let grid = spec.grid.unwrap_or_default();
        grid.validate()?;
        let alpha = spec.alpha.build()?;
        let beta = match &spec.beta {
            Some(b) => b.build()?,
            None => alpha.clone(),
        };
        let (lo, hi) = guard_range(grid.x_min, grid.x_max);
        for s in [&alpha, &beta] {
            s.diagnostics(lo, hi, 2001)?;
        }
        let fiber_specs: Vec<FiberSpec> = spec.fibers.clone().unwrap_or_default();
        for fs in &fiber_specs {
            for key in fs.declared.keys() {
                let ok = key.split_once('.').is_some_and(|(n, k)| (n == "a_plus" || n == "a_minus") && k.parse::<i64>().is_ok());
                if !ok {
                    return Err(Error::Instance(format!("declared key `{key}` must look like a_plus.K or a_minus.K")));
                }
            }
        }
        let built: Vec<(FiberPoint, &FiberSpec)> = fiber_specs.iter().map(|f| Ok((f.build()?, f))).collect::<Result<_>>()?;
        let a_plus = FunctionalOperatorSeries::new(alpha.clone(), build_terms("a_plus", &spec.a_plus, &built)?)?;
        let a_minus = FunctionalOperatorSeries::new(beta.clone(), build_terms("a_minus", &spec.a_minus, &built)?)?;
        let fibers = if spec.fibers.is_some() { built.into_iter().map(|(f, _)| f).collect() } else { FiberPoint::default_family() };
        if fibers.is_empty() {
            return Err(Error::Instance("at least one fiber is required".to_string()));
        }
        let thresholds = spec.thresholds.clone();
        Ok(ProblemInstance { p: spec.p, gamma, grid, alpha, beta, a_plus, a_minus, fibers, thresholds, spec })
    }

    /// Coefficient limits along each fiber.
    pub fn fiber_symbol_data(&self) -> Vec<(String, Result<FiberSymbolData>)> {
        self.fibers.iter().map(|xi| (xi.label.clone(), self.fiber_data(xi))).collect()
    }

    fn fiber_data(&self, xi: &FiberPoint) -> Result<FiberSymbolData> {
        let mut fs: Vec<&SoFunction> = self.a_plus.terms().iter().map(|(_, f)| f).collect();
        fs.push(self.alpha.omega());
        fs.extend(self.a_minus.terms().iter().map(|(_, f)| f));
        fs.push(self.beta.omega());
        let est = fiber_values_joint(&fs, xi, self.thresholds.fiber_tol, FIBER_N_MAX)?;
        let np = self.a_plus.terms().len();
        let nm = self.a_minus.terms().len();
        let v = &est.values;
        Ok(FiberSymbolData {
            label: xi.label.clone(),
            endpoint: xi.endpoint,
            a: self.a_plus.terms().iter().zip(&v[..np]).map(|((k, _), c)| (*k, *c)).collect(),
            omega: v[np].re,
            b: self.a_minus.terms().iter().zip(&v[np + 1..np + 1 + nm]).map(|((k, _), c)| (*k, *c)).collect(),
            eta: v[np + 1 + nm].re,
        })
    }

    pub fn symbol_context(&self) -> Result<SymbolContext> {
        SymbolContext::new(self.p, self.gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionIStatus {
    LeftCertified,
    RightCertified,
    Both,
    None,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    Fredholm,
    LeftFredholm,
    RightFredholm,
    NoClaim,
}

impl Claim {
    pub fn as_str(self) -> &'static str {
        match self {
            Claim::Fredholm => "fredholm",
            Claim::LeftFredholm => "left_fredholm",
            Claim::RightFredholm => "right_fredholm",
            Claim::NoClaim => "no_claim",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub residual: f64,
    pub tol: f64,
    pub certified: bool,
    pub rank: usize,
    pub condition: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorCondition {
    pub name: String,
    pub terms: Vec<TermSpec>,
    pub wiener_norm: f64,
    /// Exponents whose coefficients fail the slow-oscillation diagnostic.
    pub so_flagged: Vec<i64>,
    /// `binomial classifier` or `numerical certificate`.
    pub method: String,
    pub classification: Option<BinomialClassification>,
    pub left_certificate: Option<CertificateSummary>,
    pub right_certificate: Option<CertificateSummary>,
    pub left: bool,
    pub right: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionI {
    pub status: ConditionIStatus,
    pub operators: Vec<OperatorCondition>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberFailure {
    pub label: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionIi {
    pub pass: bool,
    pub margin: f64,
    pub fibers: Vec<FiberCondition>,
    pub fiber_data: Vec<FiberSymbolData>,
    pub failures: Vec<FiberFailure>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorProbe {
    pub name: String,
    pub left_residual: f64,
    pub right_residual: f64,
    pub left_rank: usize,
    pub right_rank: usize,
    pub condition: f64,
    /// Residuals agree with the claimed sides.
    pub corroborates: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probes {
    pub grid: LogGrid,
    pub tol: f64,
    pub operators: Vec<OperatorProbe>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceEcho {
    pub p: f64,
    pub gamma: ComplexSpec,
    pub grid: LogGrid,
    pub alpha: String,
    pub beta: String,
    pub fibers: usize,
}

/// The advisor's output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FredholmVerdict {
    pub tool: String,
    pub version: String,
    /// Filled in by the caller; excluded from determinism comparisons.
    pub generated_at: Option<String>,
    pub instance: InstanceEcho,
    pub thresholds: Thresholds,
    pub condition_i: ConditionI,
    pub condition_ii: ConditionIi,
    pub claim: Claim,
    pub claim_detail: String,
    pub probes: Option<Probes>,
    /// Sub-results that prevented a claim.
    pub blocking: Vec<String>,
}

fn condition_for(name: &str, series: &FunctionalOperatorSeries, terms: &[TermSpec], inst: &ProblemInstance) -> OperatorCondition {
    let mut oc = OperatorCondition {
        name: name.to_string(),
        terms: terms.to_vec(),
        wiener_norm: series.wiener_norm(),
        so_flagged: series.so_flags().iter().filter(|(_, ok)| !ok).map(|(k, _)| *k).collect(),
        method: String::new(),
        classification: None,
        left_certificate: None,
        right_certificate: None,
        left: false,
        right: false,
        error: None,
    };
    if let Some((a, b)) = series.as_binomial() {
        oc.method = "binomial classifier".to_string();
        match classify_binomial(series.shift(), &a, &b) {
            Ok(c) => {
                oc.left = c.verdict.left();
                oc.right = c.verdict.right();
                oc.classification = Some(c);
            }
            Err(e) => oc.error = Some(e.to_string()),
        }
        return oc;
    }
    oc.method = "numerical certificate".to_string();
    let t = &inst.thresholds;
    let res = (|| -> Result<(CertificateSummary, CertificateSummary)> {
        let g = inst.grid.with_n(t.probe_n)?;
        let tests = Testset::standard(&g);
        let mut out = Vec::new();
        for side in [Side::Left, Side::Right] {
            let inv = one_sided_inverse(series, side, inst.p, &g, &tests, t.certificate_tol, t.condition_cap)?;
            out.push(CertificateSummary { residual: inv.residual, tol: inv.tol, certified: inv.certified, rank: inv.rank, condition: inv.condition });
        }
        let r = out.pop().expect("two sides");
        let l = out.pop().expect("two sides");
        Ok((l, r))
    })();
    match res {
        Ok((l, r)) => {
            oc.left = l.certified;
            oc.right = r.certified;
            oc.left_certificate = Some(l);
            oc.right_certificate = Some(r);
        }
        Err(e) => oc.error = Some(e.to_string()),
    }
    oc
}

fn run_probes(inst: &ProblemInstance, ops: &[OperatorCondition]) -> Probes {
    let t = &inst.thresholds;
    let g = inst.grid.with_n(t.probe_n).unwrap_or(inst.grid);
    let mut probes = Probes { grid: g, tol: t.certificate_tol, operators: Vec::new(), error: None };
    let res = (|| -> Result<()> {
        let tests = Testset::standard(&g);
        for (series, oc) in [(&inst.a_plus, &ops[0]), (&inst.a_minus, &ops[1])] {
            let l = one_sided_inverse(series, Side::Left, inst.p, &g, &tests, t.certificate_tol, t.condition_cap)?;
            let r = one_sided_inverse(series, Side::Right, inst.p, &g, &tests, t.certificate_tol, t.condition_cap)?;
            // a claimed side should show a small residual
            let corroborates = (!oc.left || l.certified) && (!oc.right || r.certified);
            probes.operators.push(OperatorProbe {
                name: oc.name.clone(),
                left_residual: l.residual,
                right_residual: r.residual,
                left_rank: l.rank,
                right_rank: r.rank,
                condition: l.condition,
                corroborates,
            });
        }
        Ok(())
    })();
    if let Err(e) = res {
        probes.error = Some(e.to_string());
    }
    probes
}

/// The claim implied by the evidence: left (right) needs both operators
/// left (right) invertible and condition (ii) on every fiber.
pub fn derive_claim(left_plus: bool, right_plus: bool, left_minus: bool, right_minus: bool, condition_ii: bool) -> Claim {
    let left = left_plus && left_minus && condition_ii;
    let right = right_plus && right_minus && condition_ii;
    match (left, right) {
        (true, true) => Claim::Fredholm,
        (true, false) => Claim::LeftFredholm,
        (false, true) => Claim::RightFredholm,
        (false, false) => Claim::NoClaim,
    }
}

/// Runs both conditions and assembles the verdict.
pub fn run_advisor(inst: &ProblemInstance) -> FredholmVerdict {
    let mut blocking = Vec::new();
    let ops = [
        condition_for("A+", &inst.a_plus, &inst.spec.a_plus, inst),
        condition_for("A-", &inst.a_minus, &inst.spec.a_minus, inst),
    ];
    for oc in &ops {
        if let Some(e) = &oc.error {
            blocking.push(format!("condition (i) for {}: {e}", oc.name));
        }
    }
    let status = if ops.iter().any(|o| o.error.is_some()) {
        ConditionIStatus::Inconclusive
    } else {
        let l = ops.iter().all(|o| o.left);
        let r = ops.iter().all(|o| o.right);
        match (l, r) {
            (true, true) => ConditionIStatus::Both,
            (true, false) => ConditionIStatus::LeftCertified,
            (false, true) => ConditionIStatus::RightCertified,
            (false, false) => ConditionIStatus::None,
        }
    };

    let t = &inst.thresholds;
    let mut cii = ConditionIi { pass: false, margin: t.margin, fibers: Vec::new(), fiber_data: Vec::new(), failures: Vec::new() };
    for (label, d) in inst.fiber_symbol_data() {
        match d {
            Ok(d) => cii.fiber_data.push(d),
            Err(e) => cii.failures.push(FiberFailure { label, error: e.to_string() }),
        }
    }
    match inst.symbol_context().and_then(|ctx| condition_ii_check(&ctx, &cii.fiber_data, &t.condition_ii())) {
        Ok(f) => cii.fibers = f,
        Err(e) => cii.failures.push(FiberFailure { label: "*".to_string(), error: e.to_string() }),
    }
    for f in &cii.failures {
        blocking.push(format!("condition (ii) on fiber {}: {}", f.label, f.error));
    }
    cii.pass = cii.failures.is_empty() && !cii.fibers.is_empty() && cii.fibers.iter().all(|f| f.pass);
    if cii.failures.is_empty() {
        for f in cii.fibers.iter().filter(|f| !f.pass) {
            blocking.push(format!("condition (ii) fails on fiber {}: inf |n| ~ {:.6e} (near x = {:.9})", f.label, f.inf_estimate, f.argmin));
        }
    }

    let claim = derive_claim(ops[0].left, ops[0].right, ops[1].left, ops[1].right, cii.pass);
    let numerical = ops.iter().any(|o| o.method == "numerical certificate");
    let mut claim_detail = match claim {
        Claim::Fredholm => "both operators are two-sided invertible and n does not degenerate on any fiber".to_string(),
        Claim::LeftFredholm => "both operators are left invertible and n does not degenerate on any fiber".to_string(),
        Claim::RightFredholm => "both operators are right invertible and n does not degenerate on any fiber".to_string(),
        Claim::NoClaim => "the sufficient conditions could not be verified; this is not evidence against Fredholmness".to_string(),
    };
    if numerical && claim != Claim::NoClaim {
        claim_detail.push_str(" (condition (i) rests on a numerical certificate)");
    }
    if claim == Claim::NoClaim && blocking.is_empty() {
        blocking.push(format!("condition (i) status: {status:?}"));
    }

    let probes = t.run_probes.then(|| run_probes(inst, &ops));
    FredholmVerdict {
        tool: "sosfred".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        generated_at: None,
        instance: InstanceEcho {
            p: inst.p,
            gamma: inst.spec.gamma,
            grid: inst.grid,
            alpha: inst.alpha.label().to_string(),
            beta: inst.beta.label().to_string(),
            fibers: inst.fibers.len(),
        },
        thresholds: t.clone(),
        condition_i: ConditionI { status, operators: ops.to_vec() },
        condition_ii: cii,
        claim,
        claim_detail,
        probes,
        blocking,
    }
}
