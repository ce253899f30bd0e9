//! Scalar symbols: `s_gamma`, `r_gamma`, `p_gamma^{+-}`, the almost periodic
//! coefficient symbols `a_{+-}(xi, x)` and the composite symbol
//! `n(xi, x) = a_+ p^+ + a_- p^-`.
//!
//! Here `x` is the Mellin frequency.

use crate::so_core::Endpoint;
use crate::{Error, Result, C64, I};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use serde::Serialize;

/// `coth z`, evaluated without overflow for large `|Re z|`.
pub fn coth(z: C64) -> C64 {
    if z.re >= 0.0 {
        let q = (-2.0 * z).exp();
        (1.0 + q) / (1.0 - q)
    } else {
        let q = (2.0 * z).exp();
        -(1.0 + q) / (1.0 - q)
    }
}

/// `1 / sinh z`, evaluated without overflow for large `|Re z|`.
pub fn csch(z: C64) -> C64 {
    if z.re >= 0.0 {
        2.0 * (-z).exp() / (1.0 - (-2.0 * z).exp())
    } else {
        -2.0 * z.exp() / (1.0 - (2.0 * z).exp())
    }
}

/// Checks `1 < p < inf` and `0 < 1/p + Re gamma < 1`.
pub fn check_admissible(p: f64, gamma: C64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("p = {p} must lie in (1, inf)")));
    }
    if !(gamma.re.is_finite() && gamma.im.is_finite()) {
        return Err(Error::InvalidArgument("gamma must be finite".into()));
    }
    let b = 1.0 / p + gamma.re;
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::Admissibility(b));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SrpValues {
    pub s: C64,
    pub r: C64,
    pub p_plus: C64,
    pub p_minus: C64,
}

/// Coefficient data of `a_{+-}` at one fiber point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberSymbolData {
    pub label: String,
    pub endpoint: Endpoint,
    /// `(k, a_k(xi))` for `A_+`.
    pub a: Vec<(i64, C64)>,
    /// `omega(xi)`.
    pub omega: f64,
    /// `(k, b_k(xi))` for `A_-`.
    pub b: Vec<(i64, C64)>,
    /// `eta(xi)`.
    pub eta: f64,
}

impl FiberSymbolData {
    /// `(a_+(xi, x), a_-(xi, x))`.
    pub fn eval_a_pm(&self, x: f64) -> (C64, C64) {
        let sum = |cs: &[(i64, C64)], w: f64| cs.iter().map(|(k, c)| c * C64::from_polar(1.0, *k as f64 * w * x)).sum::<C64>();
        (sum(&self.a, self.omega), sum(&self.b, self.eta))
    }

    fn coefficient_mass(&self) -> (f64, f64) {
        (self.a.iter().map(|(_, c)| c.norm()).sum(), self.b.iter().map(|(_, c)| c.norm()).sum())
    }
}

/// `p`, `gamma` and per-fiber coefficient data.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolContext {
    p: f64,
    gamma: C64,
    pub fibers: Vec<FiberSymbolData>,
}

impl SymbolContext {
    pub fn new(p: f64, gamma: C64) -> Result<SymbolContext> {
        check_admissible(p, gamma)?;
        Ok(SymbolContext { p, gamma, fibers: Vec::new() })
    }

    pub fn with_fibers(mut self, fibers: Vec<FiberSymbolData>) -> Self {
        self.fibers = fibers;
        self
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> C64 {
        self.gamma
    }

    fn z(&self, x: f64) -> C64 {
        PI * (x + I / self.p + I * self.gamma)
    }

    /// `s_gamma(x) = coth[pi (x + i/p + i gamma)]`.
    pub fn s(&self, x: f64) -> C64 {
        coth(self.z(x))
    }

    /// `r_gamma(x) = 1 / sinh[pi (x + i/p + i gamma)]`.
    pub fn r(&self, x: f64) -> C64 {
        csch(self.z(x))
    }

    pub fn eval_s_r_p(&self, x: f64) -> SrpValues {
        let s = self.s(x);
        SrpValues { s, r: self.r(x), p_plus: (1.0 + s) / 2.0, p_minus: (1.0 - s) / 2.0 }
    }

    pub fn fiber(&self, label: &str) -> Result<&FiberSymbolData> {
        self.fibers
            .iter()
            .find(|f| f.label == label)
            .ok_or_else(|| Error::Context(format!("no fiber data for `{label}`")))
    }

    pub fn eval_a_pm(&self, fiber: &str, x: f64) -> Result<(C64, C64)> {
        Ok(self.fiber(fiber)?.eval_a_pm(x))
    }

    /// `n(xi, x) = a_+(xi, x) p^+(x) + a_-(xi, x) p^-(x)`.
    pub fn eval_n_data(&self, d: &FiberSymbolData, x: f64) -> C64 {
        let v = self.eval_s_r_p(x);
        let (ap, am) = d.eval_a_pm(x);
        ap * v.p_plus + am * v.p_minus
    }

    pub fn eval_n(&self, fiber: &str, x: f64) -> Result<C64> {
        Ok(self.eval_n_data(self.fiber(fiber)?, x))
    }

    /// `m(xi, x) = (a - b e^{i omega x}) p^+ + (c - d e^{i eta x}) p^-`.
    #[allow(clippy::too_many_arguments)]
    pub fn eval_m(&self, a: C64, b: C64, c: C64, d: C64, omega: f64, eta: f64, x: f64) -> C64 {
        let v = self.eval_s_r_p(x);
        (a - b * C64::from_polar(1.0, omega * x)) * v.p_plus + (c - d * C64::from_polar(1.0, eta * x)) * v.p_minus
    }

    /// Smallest `X >= 0` with `|p^+(-x)|, |p^-(x)| < eps` for all `x >= X`
    /// (checked over two further units), plus a guard of `0.5`.
    pub fn tail_start(&self, eps: f64) -> f64 {
        let small = |x: f64| self.eval_s_r_p(-x).p_plus.norm() < eps && self.eval_s_r_p(x).p_minus.norm() < eps;
        let mut x = 0.0;
        while x < 1e3 {
            if small(x) && small(x + 1.0) && small(x + 2.0) {
                return x + 0.5;
            }
            x += 0.05;
        }
        x
    }

    /// Samples `n(xi, .)` on `[lo, hi]`: `(x, n)`.
    pub fn symbol_curve(&self, fiber: &str, lo: f64, hi: f64, samples: usize) -> Result<Vec<(f64, C64)>> {
        let d = self.fiber(fiber)?;
        let samples = samples.max(2);
        Ok((0..samples)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
                (x, self.eval_n_data(d, x))
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionIiConfig {
    pub eps_tail: f64,
    pub margin: f64,
    /// Number of periods of the slowest active frequency covered on each side.
    pub quasi_periods: f64,
    pub max_samples: usize,
}

impl Default for ConditionIiConfig {
    fn default() -> Self {
        ConditionIiConfig { eps_tail: 1e-8, margin: 1e-3, quasi_periods: 100.0, max_samples: 100_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberCondition {
    pub label: String,
    pub endpoint: Endpoint,
    /// Beyond `|x| > x0` the projections' symbols are below `eps_tail`.
    pub x0: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// Minimum of `|n|` over the window, refined.
    pub window_min: f64,
    pub argmin: f64,
    /// Lower bound of `|n|` for `x` beyond the window on the right.
    pub tail_inf_plus: f64,
    /// Lower bound of `|n|` for `x` beyond the window on the left.
    pub tail_inf_minus: f64,
    pub inf_estimate: f64,
    /// Located local minima of `|n|` below the margin: the 64 closest to the origin, ascending.
    pub near_zeros: Vec<f64>,
    /// Set when a zero shift exponent collapses a nonconstant coefficient pattern.
    pub degenerate_frequency: bool,
    pub pass: bool,
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimum of `|g|` over one period `[0, period)` (or the value if `period` is `None`).
fn periodic_inf(g: impl Fn(f64) -> C64, period: Option<f64>) -> f64 {
    let period = match period {
        Some(p) => p,
        None => return g(0.0).norm(),
    };
    let m = 4096;
    let h = period / m as f64;
    let vals: Vec<f64> = (0..=m + 1).map(|i| g(i as f64 * h).norm()).collect();
    let mut best = vals.iter().copied().fold(f64::INFINITY, f64::min);
    for i in 1..=m {
        if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
            let (_, v) = golden_min(|x| g(x).norm(), (i - 1) as f64 * h, (i + 1) as f64 * h);
            best = best.min(v);
        }
    }
    best
}

fn active_frequencies(cs: &[(i64, C64)], w: f64) -> Vec<f64> {
    cs.iter()
        .filter(|(k, c)| *k != 0 && c.norm() > 0.0)
        .map(|(k, _)| (*k as f64 * w).abs())
        .filter(|f| *f > 1e-12)
        .collect()
}

fn is_degenerate(cs: &[(i64, C64)], w: f64) -> bool {
    w.abs() <= 1e-12 && cs.iter().filter(|(k, c)| *k != 0 && c.norm() > 0.0).count() > 0
}

/// Checks `inf_x |n(xi, x)| > margin` on each fiber.
pub fn condition_ii_check(ctx: &SymbolContext, fibers: &[FiberSymbolData], cfg: &ConditionIiConfig) -> Result<Vec<FiberCondition>> {
    if fibers.is_empty() {
        return Err(Error::Context("condition (ii) needs at least one fiber".into()));
    }
    let x0 = ctx.tail_start(cfg.eps_tail);
    let mut out = Vec::with_capacity(fibers.len());
    for d in fibers {
        let fa = active_frequencies(&d.a, d.omega);
        let fb = active_frequencies(&d.b, d.eta);
        let all: Vec<f64> = fa.iter().chain(fb.iter()).copied().collect();
        let nu_min = all.iter().copied().fold(f64::INFINITY, f64::min);
        let nu_max = all.iter().copied().fold(0.0, f64::max);
        let t_cover = if all.is_empty() { 0.0 } else { cfg.quasi_periods * 2.0 * PI / nu_min };
        let (lo, hi) = (-x0 - t_cover, x0 + t_cover);
        let h_target = if all.is_empty() { 0.01 } else { (0.01f64).min(2.0 * PI / nu_max / 64.0) };
        let samples = (((hi - lo) / h_target).ceil() as usize + 1).clamp(2001, cfg.max_samples.max(2001));
        let h = (hi - lo) / (samples - 1) as f64;
        let absn = |x: f64| ctx.eval_n_data(d, x).norm();
        let vals: Vec<f64> = (0..samples).map(|i| absn(lo + i as f64 * h)).collect();
        let mut minima: Vec<(f64, f64)> = Vec::new();
        for i in 0..samples {
            let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
            let right = if i + 1 == samples { f64::INFINITY } else { vals[i + 1] };
            if vals[i] <= left && vals[i] <= right {
                let a = lo + (i.saturating_sub(1)) as f64 * h;
                let b = lo + ((i + 1).min(samples - 1)) as f64 * h;
                minima.push(golden_min(absn, a, b));
            }
        }
        let (mut argmin, mut window_min) = (lo, f64::INFINITY);
        for &(x, v) in &minima {
            if v < window_min {
                window_min = v;
                argmin = x;
            }
        }
        let mut near: Vec<f64> = minima.iter().filter(|(_, v)| *v <= cfg.margin).map(|(x, _)| *x).collect();
        near.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(core::cmp::Ordering::Equal));
        near.truncate(64);
        near.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));

        let (mass_a, mass_b) = d.coefficient_mass();
        let slack = (mass_a + mass_b) * cfg.eps_tail;
        let period_a = if fa.is_empty() { None } else { Some(2.0 * PI / d.omega.abs()) };
        let period_b = if fb.is_empty() { None } else { Some(2.0 * PI / d.eta.abs()) };
        let tail_inf_plus = periodic_inf(|x| d.eval_a_pm(x).0, period_a) - slack;
        let tail_inf_minus = periodic_inf(|x| d.eval_a_pm(x).1, period_b) - slack;
        let inf_estimate = window_min.min(tail_inf_plus).min(tail_inf_minus);
        out.push(FiberCondition {
            label: d.label.clone(),
            endpoint: d.endpoint,
            x0,
            window: (lo, hi),
            samples,
            window_min,
            argmin,
            tail_inf_plus,
            tail_inf_minus,
            inf_estimate,
            near_zeros: near,
            degenerate_frequency: is_degenerate(&d.a, d.omega) || is_degenerate(&d.b, d.eta),
            pass: inf_estimate > cfg.margin,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_gamma0_closed_forms() {
        let ctx = SymbolContext::new(2.0, C64::new(0.0, 0.0)).unwrap();
        for &x in &[-3.0, -0.2, 0.0, 0.7, 40.0, -400.0] {
            let v = ctx.eval_s_r_p(x);
            assert!((v.s - C64::new((PI * x).tanh(), 0.0)).norm() < 1e-14);
            let sech = 1.0 / (PI * x).cosh();
            assert!((v.r - C64::new(0.0, -sech)).norm() < 1e-14);
        }
        let v = ctx.eval_s_r_p(0.0);
        assert!((v.p_plus - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((v.r - C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn admissibility() {
        assert!(SymbolContext::new(2.0, C64::new(0.0, 0.9)).is_ok());
        assert!(matches!(SymbolContext::new(2.0, C64::new(0.6, 0.0)), Err(Error::Admissibility(_))));
        assert!(SymbolContext::new(1.0, C64::new(0.0, 0.0)).is_err());
    }
}
