//! Slowly oscillating functions, oscillation moduli and fiber values.
//!
//! A [`SoFunction`] is evaluated in the coordinate `x = log t`, so dyadic
//! intervals `[r, 2r]` become intervals of length `log 2` and the endpoints
//! `0`, `inf` correspond to `x -> -inf`, `x -> +inf`. Points of the fibers
//! over `0` and `inf` are represented by test sequences along which the data
//! converge.

use crate::expr::Expr;
use crate::{Error, Result, C64};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};
use core::fmt;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Default Cauchy tolerance for fiber values.
pub const FIBER_TOL: f64 = 1e-6;
/// Default number of sequence terms available to the Cauchy test.
pub const FIBER_N_MAX: u64 = 1 << 40;
/// Default number of log-uniform samples per dyadic interval.
pub const SAMPLES_PER_DYADIC: usize = 256;

pub type LogEval = Arc<dyn Fn(f64) -> Result<C64> + Send + Sync>;

/// A complex function on `R+`, evaluated through `x = log t`.
#[derive(Clone)]
pub struct SoFunction {
    label: String,
    eval: LogEval,
    declared: Vec<(FiberPoint, C64)>,
}

impl fmt::Debug for SoFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SoFunction").field("label", &self.label).finish()
    }
}

impl SoFunction {
    /// Infallible evaluator in the log coordinate. Non-finite values become
    /// evaluation-domain errors.
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        let label = label.into();
        let lab = label.clone();
        let eval: LogEval = Arc::new(move |x| {
            let v = f(x);
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(Error::EvaluationDomain { label: lab.clone(), x, reason: "non-finite value" })
            }
        });
        SoFunction { label, eval, declared: Vec::new() }
    }

    /// Real-valued evaluator in the log coordinate.
    pub fn real(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(label, move |x| C64::new(f(x), 0.0))
    }

    /// Fallible evaluator in the log coordinate.
    pub fn try_new(label: impl Into<String>, f: impl Fn(f64) -> Result<C64> + Send + Sync + 'static) -> Self {
        SoFunction { label: label.into(), eval: Arc::new(f), declared: Vec::new() }
    }

    /// Evaluator in the variable `t`; only usable where `e^x` is representable.
    pub fn of_t(label: impl Into<String>, f: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        Self::new(label, move |x| f(x.exp()))
    }

    pub fn constant(c: C64) -> Self {
        let label = if c.im == 0.0 { format!("{}", c.re) } else { format!("{}+{}i", c.re, c.im) };
        Self::new(label, move |_| c)
    }

    pub fn from_expr(label: impl Into<String>, e: Expr) -> Self {
        let label = label.into();
        let lab = label.clone();
        Self::try_new(label, move |x| {
            e.eval_log(x).map_err(|err| match err {
                Error::EvaluationDomain { x, reason, .. } => Error::EvaluationDomain { label: lab.clone(), x, reason },
                other => other,
            })
        })
    }

    /// Parses an expression in `t`; the source text becomes the label.
    pub fn parse(src: &str) -> Result<Self> {
        Ok(Self::from_expr(src.to_string(), Expr::parse(src)?))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Attaches a declared limit value along a fiber.
    pub fn with_declared(mut self, fiber: FiberPoint, value: C64) -> Self {
        self.declared.retain(|(f, _)| f.label != fiber.label);
        self.declared.push((fiber, value));
        self
    }

    pub fn declared_fibers(&self) -> &[(FiberPoint, C64)] {
        &self.declared
    }

    pub fn declared_value(&self, fiber_label: &str) -> Option<C64> {
        self.declared.iter().find(|(f, _)| f.label == fiber_label).map(|(_, v)| *v)
    }

    pub fn eval_log(&self, x: f64) -> Result<C64> {
        if x.is_nan() {
            return Err(Error::EvaluationDomain { label: self.label.clone(), x, reason: "log t is NaN" });
        }
        (self.eval)(x)
    }

    pub fn eval(&self, t: f64) -> Result<C64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::EvaluationDomain { label: self.label.clone(), x: t.ln(), reason: "t must be positive and finite" });
        }
        self.eval_log(t.ln())
    }

    pub fn evaluator(&self) -> LogEval {
        self.eval.clone()
    }

    /// Pointwise product.
    pub fn mul(&self, g: &SoFunction) -> SoFunction {
        let (a, b) = (self.eval.clone(), g.eval.clone());
        Self::try_new(format!("({})*({})", self.label, g.label), move |x| Ok(a(x)? * b(x)?))
    }

    /// Pointwise sum.
    pub fn add(&self, g: &SoFunction) -> SoFunction {
        let (a, b) = (self.eval.clone(), g.eval.clone());
        Self::try_new(format!("({})+({})", self.label, g.label), move |x| Ok(a(x)? + b(x)?))
    }

    pub fn scale(&self, c: C64) -> SoFunction {
        let a = self.eval.clone();
        Self::try_new(format!("{}*({})", c, self.label), move |x| Ok(a(x)? * c))
    }

    pub fn conj(&self) -> SoFunction {
        let a = self.eval.clone();
        Self::try_new(format!("conj({})", self.label), move |x| Ok(a(x)?.conj()))
    }

    /// `x -> f(map(x))` for a map of log coordinates.
    pub fn compose_log(&self, label: impl Into<String>, map: Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>) -> SoFunction {
        let a = self.eval.clone();
        Self::try_new(label, move |x| a(map(x)?))
    }
}

/// Endpoint of `R+` over which a fiber lies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Endpoint {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "inf")]
    Infinity,
}

impl Endpoint {
    pub fn as_str(self) -> &'static str {
        match self {
            Endpoint::Zero => "0",
            Endpoint::Infinity => "inf",
        }
    }

    /// Sign of `x = log t` as `t` approaches the endpoint.
    pub fn direction(self) -> f64 {
        match self {
            Endpoint::Zero => -1.0,
            Endpoint::Infinity => 1.0,
        }
    }

    pub fn opposite(self) -> Endpoint {
        match self {
            Endpoint::Zero => Endpoint::Infinity,
            Endpoint::Infinity => Endpoint::Zero,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Generator of a test sequence, in the log coordinate.
#[derive(Clone)]
pub enum TestSequence {
    /// `log t_n = log_phase + n * log_ratio`.
    Geometric { log_ratio: f64, log_phase: f64 },
    /// `log t_n` given by an arbitrary rule.
    Custom(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl fmt::Debug for TestSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestSequence::Geometric { log_ratio, log_phase } => f
                .debug_struct("Geometric")
                .field("log_ratio", log_ratio)
                .field("log_phase", log_phase)
                .finish(),
            TestSequence::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// A point of the fiber over `0` or `inf`, represented by a test sequence.
#[derive(Clone, Debug)]
pub struct FiberPoint {
    pub label: String,
    pub endpoint: Endpoint,
    pub sequence: TestSequence,
}

impl FiberPoint {
    /// `t_n = t0 * ratio^n`; the endpoint is `inf` for `ratio > 1` and `0` otherwise.
    pub fn geometric(label: impl Into<String>, ratio: f64, t0: f64) -> Result<FiberPoint> {
        if !(ratio > 0.0 && ratio.is_finite() && t0 > 0.0 && t0.is_finite()) {
            return Err(Error::InvalidArgument(format!("geometric sequence needs positive finite ratio and phase (got {ratio}, {t0})")));
        }
        Self::geometric_log(label, ratio.ln(), t0.ln())
    }

    pub fn geometric_log(label: impl Into<String>, log_ratio: f64, log_phase: f64) -> Result<FiberPoint> {
        if !(log_ratio.is_finite() && log_phase.is_finite()) || log_ratio.abs() < 1e-6 {
            return Err(Error::InvalidArgument(format!("log ratio {log_ratio} must be finite and bounded away from 0")));
        }
        let endpoint = if log_ratio > 0.0 { Endpoint::Infinity } else { Endpoint::Zero };
        Ok(FiberPoint { label: label.into(), endpoint, sequence: TestSequence::Geometric { log_ratio, log_phase } })
    }

    /// Arbitrary rule `n -> log t_n`. The first 64 terms must move strictly
    /// toward the endpoint.
    pub fn custom(label: impl Into<String>, endpoint: Endpoint, rule: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Result<FiberPoint> {
        let label = label.into();
        let dir = endpoint.direction();
        let mut prev = rule(0);
        for n in 1..64 {
            let x = rule(n);
            if x.is_nan() || !((x - prev) * dir > 0.0) {
                if x.is_infinite() && x * dir > 0.0 {
                    break;
                }
                return Err(Error::InvalidArgument(format!("sequence `{label}` is not strictly monotone toward {endpoint} at n = {n}")));
            }
            prev = x;
        }
        Ok(FiberPoint { label, endpoint, sequence: TestSequence::Custom(Arc::new(rule)) })
    }

    /// `log t_n`.
    pub fn log_point(&self, n: u64) -> f64 {
        match &self.sequence {
            TestSequence::Geometric { log_ratio, log_phase } => log_phase + n as f64 * log_ratio,
            TestSequence::Custom(rule) => rule(n),
        }
    }

    /// Ratios `e^{+-2 pi/m}`, `m in {1,2,3,5}`, phases `t0 in {1, e^{1/2}, e^{4/5}}`.
    pub fn default_family() -> Vec<FiberPoint> {
        let mut out = Vec::new();
        for endpoint in [Endpoint::Zero, Endpoint::Infinity] {
            for m in [1u32, 2, 3, 5] {
                for (pname, x0) in [("1", 0.0), ("e^0.5", 0.5), ("e^0.8", 0.8)] {
                    let lr = endpoint.direction() * 2.0 * PI / m as f64;
                    let label = format!("{}:m={}:t0={}", endpoint, m, pname);
                    out.push(FiberPoint::geometric_log(label, lr, x0).expect("valid default sequence"));
                }
            }
        }
        out
    }
}

/// Result of a joint Cauchy test along a fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberEstimate {
    pub values: Vec<C64>,
    /// Largest pairwise distance among the last five accepted iterates.
    pub radius: f64,
    /// Index of the last iterate used.
    pub index: u64,
}

/// Cauchy-stabilized limits of several functions along one test sequence,
/// taken at a common index. Window starts are `0, 8, 16, 32, ...`. Declared
/// values must agree with the computed limits within `tol`.
pub fn fiber_values_joint(fs: &[&SoFunction], xi: &FiberPoint, tol: f64, n_max: u64) -> Result<FiberEstimate> {
    let mut start: u64 = 0;
    let mut worst = (0usize, f64::INFINITY);
    loop {
        if start.checked_add(4).is_none_or(|e| e > n_max) {
            let (i, spread) = worst;
            return Err(Error::FiberDivergence {
                label: fs.get(i).map(|f| f.label.clone()).unwrap_or_default(),
                fiber: xi.label.clone(),
                n_max,
                spread,
            });
        }
        let xs: Vec<f64> = (start..start + 5).map(|n| xi.log_point(n)).collect();
        if xs.iter().any(|x| !x.is_finite()) {
            let (i, spread) = worst;
            return Err(Error::FiberDivergence {
                label: fs.get(i).map(|f| f.label.clone()).unwrap_or_default(),
                fiber: xi.label.clone(),
                n_max: start,
                spread,
            });
        }
        let mut ok = true;
        let mut radius: f64 = 0.0;
        let mut values = Vec::with_capacity(fs.len());
        for (i, f) in fs.iter().enumerate() {
            let v: Vec<C64> = xs.iter().map(|&x| f.eval_log(x)).collect::<Result<_>>()?;
            let mut d: f64 = 0.0;
            for a in 0..5 {
                for b in a + 1..5 {
                    d = d.max((v[a] - v[b]).norm());
                }
            }
            radius = radius.max(d);
            if d > tol {
                ok = false;
                worst = (i, d);
            }
            values.push(v[4]);
        }
        if ok {
            for (f, v) in fs.iter().zip(&values) {
                if let Some(d) = f.declared_value(&xi.label) {
                    if (d - v).norm() > tol {
                        return Err(Error::DeclaredFiberMismatch {
                            label: f.label.clone(),
                            fiber: xi.label.clone(),
                            computed: format!("{v}"),
                            declared: format!("{d}"),
                        });
                    }
                }
            }
            return Ok(FiberEstimate { values, radius, index: start + 4 });
        }
        start = if start == 0 { 8 } else { start * 2 };
    }
}

/// Limit of `f(t_n)` along the fiber's test sequence.
///
/// A declared value for the fiber must agree with the computed one within `tol`.
pub fn fiber_value(f: &SoFunction, xi: &FiberPoint, tol: f64, n_max: u64) -> Result<FiberEstimate> {
    fiber_values_joint(&[f], xi, tol, n_max)
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Largest pairwise distance of a planar point set (convex hull plus
/// rotating calipers).
pub(crate) fn diameter(values: &[C64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    if values.iter().all(|v| v.im == 0.0) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v.re);
            hi = hi.max(v.re);
        }
        return hi - lo;
    }
    let mut pts: Vec<(f64, f64)> = values.iter().map(|v| (v.re, v.im)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    pts.dedup();
    if pts.len() < 3 {
        return dist(pts[0], pts[pts.len() - 1]);
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    let m = hull.len();
    if m < 3 {
        return dist(hull[0], hull[m - 1]);
    }
    let mut best: f64 = 0.0;
    let mut j = 1;
    for i in 0..m {
        let ni = (i + 1) % m;
        while cross(hull[i], hull[ni], hull[(j + 1) % m]).abs() > cross(hull[i], hull[ni], hull[j]).abs() {
            j = (j + 1) % m;
        }
        best = best.max(dist(hull[i], hull[j])).max(dist(hull[ni], hull[j]));
    }
    best
}

/// Oscillation of `f` over `[r, 2r]` given `log r`.
pub fn oscillation_modulus_log(f: &SoFunction, log_r: f64, samples: usize) -> Result<f64> {
    if samples < 2 || !log_r.is_finite() {
        return Err(Error::InvalidArgument(format!("need samples >= 2 and finite log r (got {samples}, {log_r})")));
    }
    let vals: Vec<C64> = (0..samples)
        .map(|i| f.eval_log(log_r + LN_2 * i as f64 / (samples - 1) as f64))
        .collect::<Result<_>>()?;
    Ok(diameter(&vals))
}

/// `sup |f(t) - f(s)|` over `samples` log-uniform points of `[r, 2r]`.
pub fn oscillation_modulus(f: &SoFunction, r: f64, samples: usize) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("r must be positive and finite (got {r})")));
    }
    oscillation_modulus_log(f, r.ln(), samples)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleModulus {
    /// `log r` of the dyadic interval `[r, 2r]`.
    pub log_r: f64,
    pub modulus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndpointOscillation {
    pub endpoint: Endpoint,
    pub scales: Vec<ScaleModulus>,
    /// Largest modulus over the last decade of scales.
    pub tail_max: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationReport {
    pub label: String,
    pub at_zero: EndpointOscillation,
    pub at_infinity: EndpointOscillation,
}

impl OscillationReport {
    pub fn pass(&self) -> bool {
        self.at_zero.pass && self.at_infinity.pass
    }
}

/// Dyadic moduli at `|log r| = 10^{j/4}`, `j = 0..=4 r_decades`, toward both endpoints.
///
/// An endpoint passes when the moduli over the last decade are below `tol`
/// and do not exceed those of the previous decade beyond a noise margin.
pub fn so_check(f: &SoFunction, r_decades: u32, tol: f64) -> Result<OscillationReport> {
    if r_decades < 4 {
        return Err(Error::InvalidArgument(format!("so_check needs at least 4 decades (got {r_decades})")));
    }
    let mut reports = Vec::with_capacity(2);
    for endpoint in [Endpoint::Zero, Endpoint::Infinity] {
        let mut scales = Vec::new();
        for j in 0..=4 * r_decades {
            let big = 10f64.powf(j as f64 / 4.0);
            let log_r = match endpoint {
                Endpoint::Infinity => big,
                Endpoint::Zero => -big - LN_2,
            };
            let modulus = oscillation_modulus_log(f, log_r, SAMPLES_PER_DYADIC)?;
            scales.push(ScaleModulus { log_r, modulus });
        }
        let k = scales.len();
        let tail_max = scales[k - 4..].iter().map(|s| s.modulus).fold(0.0, f64::max);
        let prev_max = scales[k - 8..k - 4].iter().map(|s| s.modulus).fold(0.0, f64::max);
        let noise = 1e-12 + 1e-9 * prev_max;
        let pass = tail_max < tol && tail_max <= prev_max + noise;
        reports.push(EndpointOscillation { endpoint, scales, tail_max, pass });
    }
    let at_infinity = reports.pop().expect("two endpoints");
    let at_zero = reports.pop().expect("two endpoints");
    Ok(OscillationReport { label: f.label.clone(), at_zero, at_infinity })
}

/// Sample points used for sup/inf estimates over all of `R+`: a dense
/// stretch of `[-20, 20]` plus 64 log-spaced points per decade of `|x|` out
/// to `10^decades`.
pub fn global_sample_points(decades: u32) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..=4000).map(|i| -20.0 + 0.01 * i as f64).collect();
    let steps = 64 * decades.saturating_sub(1) as usize;
    for i in 1..=steps {
        let m = 20.0 * 10f64.powf(i as f64 / 64.0);
        xs.push(m);
        xs.push(-m);
    }
    xs
}

/// `(inf |f|, sup |f|)` over [`global_sample_points`].
pub fn abs_range(f: &SoFunction, decades: u32) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for x in global_sample_points(decades) {
        let a = f.eval_log(x)?.norm();
        lo = lo.min(a);
        hi = hi.max(a);
    }
    Ok((lo, hi))
}

impl fmt::Display for FiberPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (over {})", self.label, self.endpoint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diameter_matches_brute_force() {
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for n in [2usize, 3, 7, 50, 300] {
            let pts: Vec<C64> = (0..n).map(|_| C64::new(rnd(), rnd())).collect();
            let mut best: f64 = 0.0;
            for a in &pts {
                for b in &pts {
                    best = best.max((a - b).norm());
                }
            }
            assert!((diameter(&pts) - best).abs() < 1e-14, "n={n}");
        }
        // points on an arc are all hull vertices
        let arc: Vec<C64> = (0..1000).map(|i| C64::from_polar(1.0, 0.69 * i as f64 / 999.0)).collect();
        assert!((diameter(&arc) - (arc[0] - arc[999]).norm()).abs() < 1e-14);
    }

    #[test]
    fn default_family_has_24_fibers() {
        let fam = FiberPoint::default_family();
        assert_eq!(fam.len(), 24);
        assert_eq!(fam.iter().filter(|f| f.endpoint == Endpoint::Zero).count(), 12);
    }
}
