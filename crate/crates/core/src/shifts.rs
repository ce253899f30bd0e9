//! Slowly oscillating shifts `alpha(t) = t e^{omega(t)}`.
//!
//! In the coordinate `x = log t` a shift is the map `x -> x + omega(x)` with
//! derivative `1 + psi(x)`, where `psi = t omega'(t)`.

use crate::expr::Expr;
use crate::so_core::{Endpoint, SoFunction};
use crate::{Error, Result, C64};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::LN_2;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Number of dyadic scales added on each side of the working range.
pub const GUARD_SCALES: f64 = 10.0;

/// `[x_min - 10 log 2, x_max + 10 log 2]`.
pub fn guard_range(x_min: f64, x_max: f64) -> (f64, f64) {
    (x_min - GUARD_SCALES * LN_2, x_max + GUARD_SCALES * LN_2)
}

/// Parameters of `omega(t) = c0 + c1 sin(nu log(1 + (log t)^2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub c0: f64,
    pub c1: f64,
    pub nu: f64,
}

/// `log(1 + x^2)` without overflow for huge `|x|`.
fn log1p_sq(x: f64) -> f64 {
    if x.abs() > 1e8 {
        2.0 * x.abs().ln() + (1.0 / (x * x)).ln_1p()
    } else {
        (x * x).ln_1p()
    }
}

#[derive(Clone, Debug)]
pub struct SoShift {
    label: String,
    omega: SoFunction,
    psi: SoFunction,
    family: Option<FamilyParams>,
}

/// Position, exponent sum and log-derivative sum after `k` steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterateData {
    pub log_t: f64,
    /// `log(alpha_k(t)/t)`.
    pub exponent: f64,
    /// `log alpha_k'(t)`.
    pub log_derivative: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitSample {
    pub k: i64,
    pub log_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftDynamics {
    /// Attracting point.
    pub tau_plus: Endpoint,
    /// Repelling point.
    pub tau_minus: Endpoint,
    pub orbit_samples: Vec<OrbitSample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftDiagnostics {
    pub inf_one_plus_psi: f64,
    pub sup_abs_omega: f64,
    /// Largest deviation of `psi` from a central difference of `omega`.
    pub psi_check_error: f64,
}

impl SoShift {
    /// User-defined shift from `omega` and its log-derivative `psi`.
    pub fn new(label: impl Into<String>, omega: SoFunction, psi: SoFunction) -> SoShift {
        SoShift { label: label.into(), omega, psi, family: None }
    }

    /// `omega(t) = c0 + c1 sin(nu log(1 + (log t)^2))`, requiring `|c1 nu| < 1`.
    pub fn family(c0: f64, c1: f64, nu: f64) -> Result<SoShift> {
        if !(c0.is_finite() && c1.is_finite() && nu.is_finite()) {
            return Err(Error::ShiftConfig("family parameters must be finite".to_string()));
        }
        // sup over x of |2 nu x / (1 + x^2)| is |nu|
        if !((c1 * nu).abs() < 1.0) {
            return Err(Error::ShiftConfig(format!("|c1 * nu| = {} must be < 1", (c1 * nu).abs())));
        }
        let omega = SoFunction::real(format!("{c0} + {c1}*sin({nu}*log(1 + log(t)^2))"), move |x| c0 + c1 * (nu * log1p_sq(x)).sin());
        let psi = SoFunction::real(format!("psi[{c0},{c1},{nu}]"), move |x| {
            let w = if x == 0.0 { 0.0 } else { 2.0 / (x + 1.0 / x) };
            c1 * nu * (nu * log1p_sq(x)).cos() * w
        });
        Ok(SoShift { label: format!("family(c0={c0}, c1={c1}, nu={nu})"), omega, psi, family: Some(FamilyParams { c0, c1, nu }) })
    }

    /// `alpha(t) = lambda t`.
    pub fn dilation(lambda: f64) -> Result<SoShift> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::ShiftConfig(format!("dilation factor {lambda} must be positive")));
        }
        let w = lambda.ln();
        Ok(SoShift {
            label: format!("{lambda}*t"),
            omega: SoFunction::real(format!("log({lambda})"), move |_| w),
            psi: SoFunction::real("0", |_| 0.0),
            family: None,
        })
    }

    pub fn identity() -> SoShift {
        SoShift::dilation(1.0).expect("identity shift")
    }

    /// Shift from an expression for `omega`; `psi` defaults to the rule-based
    /// derivative of `omega` in `log t`.
    pub fn from_exprs(omega: &str, psi: Option<&str>) -> Result<SoShift> {
        let oe = Expr::parse(omega)?;
        let pe = match psi {
            Some(s) => Expr::parse(s)?,
            None => oe.derivative(),
        };
        let plabel = pe.to_string();
        Ok(SoShift {
            label: format!("t*exp({omega})"),
            omega: SoFunction::from_expr(omega.to_string(), oe),
            psi: SoFunction::from_expr(plabel, pe),
            family: None,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn omega(&self) -> &SoFunction {
        &self.omega
    }

    pub fn psi(&self) -> &SoFunction {
        &self.psi
    }

    pub fn family_params(&self) -> Option<FamilyParams> {
        self.family
    }

    fn real_part(f: &SoFunction, x: f64, what: &str) -> Result<f64> {
        let v = f.eval_log(x)?;
        if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
            return Err(Error::ShiftConfig(format!("{what} must be real-valued (got {v} at log t = {x})")));
        }
        Ok(v.re)
    }

    pub fn omega_at(&self, x: f64) -> Result<f64> {
        Self::real_part(&self.omega, x, "omega")
    }

    pub fn psi_at(&self, x: f64) -> Result<f64> {
        Self::real_part(&self.psi, x, "psi")
    }

    /// `log alpha(e^x)`.
    pub fn log_image(&self, x: f64) -> Result<f64> {
        Ok(x + self.omega_at(x)?)
    }

    /// `log alpha'(e^x) = omega(x) + log(1 + psi(x))`.
    pub fn log_derivative(&self, x: f64) -> Result<f64> {
        let one_psi = 1.0 + self.psi_at(x)?;
        if !(one_psi > 0.0) {
            return Err(Error::ShiftConfig(format!("1 + psi = {one_psi} is not positive at log t = {x}")));
        }
        Ok(self.omega_at(x)? + one_psi.ln())
    }

    /// `alpha(t) = t e^{omega(t)}`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.log_image(t.ln())?.exp())
    }

    /// `alpha'(t) = e^{omega(t)} (1 + psi(t))`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        Ok(self.log_derivative(t.ln())?.exp())
    }

    /// Solves `x + omega(x) = y` by bracketing and safeguarded Newton steps.
    pub fn log_inverse(&self, y: f64, tol: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::Range(y));
        }
        let g = |x: f64| -> Result<f64> { Ok(x + self.omega_at(x)? - y) };
        let x0 = y - self.omega_at(y)?;
        let g0 = g(x0)?;
        if g0 == 0.0 {
            return Ok(x0);
        }
        let (mut lo, mut hi);
        let mut step = 1.0f64.max(1e-3 * x0.abs());
        let mut found = false;
        lo = x0;
        hi = x0;
        for _ in 0..80 {
            if g0 < 0.0 {
                lo = hi;
                hi = x0 + step;
                if g(hi)? >= 0.0 {
                    found = true;
                    break;
                }
            } else {
                hi = lo;
                lo = x0 - step;
                if g(lo)? <= 0.0 {
                    found = true;
                    break;
                }
            }
            step *= 2.0;
        }
        if !found {
            return Err(Error::Range(y));
        }
        let tol = tol.max(1e-15);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let gx = g(x)?;
            if gx.abs() <= 0.5 * tol {
                return Ok(x);
            }
            if gx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = 1.0 + self.psi_at(x)?;
            let mut nx = if d > 0.0 { x - gx / d } else { f64::NAN };
            if !(nx > lo && nx < hi) {
                nx = 0.5 * (lo + hi);
            }
            if (hi - lo) <= 4.0 * f64::EPSILON * (1.0 + x.abs()) {
                return Ok(nx);
            }
            x = nx;
        }
        Ok(x)
    }

    /// `alpha_{-1}(u)` with `|alpha(t) - u|/u < tol`.
    pub fn inverse(&self, u: f64, tol: f64) -> Result<f64> {
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::Range(u.ln()));
        }
        Ok(self.log_inverse(u.ln(), tol)?.exp())
    }

    /// Orbit data after `k` steps from `log t = x`, stopping with
    /// [`Error::OrbitEscape`] when the orbit leaves `range`.
    pub fn iterate_data(&self, k: i64, x: f64, range: Option<(f64, f64)>) -> Result<IterateData> {
        let mut cur = x;
        let mut exponent = 0.0;
        let mut logd = 0.0;
        let inside = |v: f64| range.map_or(v.is_finite(), |(lo, hi)| v >= lo && v <= hi);
        if k >= 0 {
            for j in 0..k {
                let w = self.omega_at(cur)?;
                logd += self.log_derivative(cur)?;
                exponent += w;
                cur += w;
                if !inside(cur) {
                    return Err(Error::OrbitEscape { steps: j + 1, x: cur });
                }
            }
        } else {
            for j in 0..(-k) {
                let prev = self.log_inverse(cur, 1e-14)?;
                let w = self.omega_at(prev)?;
                logd -= self.log_derivative(prev)?;
                exponent -= w;
                cur = prev;
                if !inside(cur) {
                    return Err(Error::OrbitEscape { steps: -(j + 1), x: cur });
                }
            }
        }
        Ok(IterateData { log_t: cur, exponent, log_derivative: logd })
    }

    /// `log alpha_k(e^x)`.
    pub fn log_iterate(&self, k: i64, x: f64) -> Result<f64> {
        Ok(self.iterate_data(k, x, None)?.log_t)
    }

    /// `alpha_k(t)`.
    pub fn iterate(&self, k: i64, t: f64) -> Result<f64> {
        Ok(self.log_iterate(k, t.ln())?.exp())
    }

    /// `log(alpha_k(t)/t)`, as the sum of `omega` along the orbit.
    pub fn exponent_of_iterate(&self, k: i64, t: f64) -> Result<f64> {
        Ok(self.iterate_data(k, t.ln(), None)?.exponent)
    }

    /// `x -> log(alpha_k(e^x)/e^x)` as a function.
    pub fn exponent_of_iterate_fn(&self, k: i64) -> SoFunction {
        let s = self.clone();
        SoFunction::try_new(format!("omega_{k}"), move |x| Ok(C64::new(s.iterate_data(k, x, None)?.exponent, 0.0)))
    }

    /// The inverse shift `alpha_{-1}`, with exponent `-omega(alpha_{-1})` and
    /// `psi = -psi(alpha_{-1}) / (1 + psi(alpha_{-1}))`.
    pub fn inverse_shift(&self) -> SoShift {
        let (a, b) = (self.clone(), self.clone());
        let omega = SoFunction::try_new(format!("inv_omega[{}]", self.label), move |x| {
            let y = a.log_inverse(x, 1e-14)?;
            Ok(C64::new(y - x, 0.0))
        });
        let psi = SoFunction::try_new(format!("inv_psi[{}]", self.label), move |x| {
            let y = b.log_inverse(x, 1e-14)?;
            let p = b.psi_at(y)?;
            Ok(C64::new(-p / (1.0 + p), 0.0))
        });
        SoShift { label: format!("inverse of {}", self.label), omega, psi, family: None }
    }

    /// Dense check of `1 + psi > 0`, `sup |omega|`, and `psi` against a
    /// central difference of `omega`.
    pub fn diagnostics(&self, x_lo: f64, x_hi: f64, samples: usize) -> Result<ShiftDiagnostics> {
        let samples = samples.max(2);
        let mut inf_one = f64::INFINITY;
        let mut sup_w: f64 = 0.0;
        let mut err: f64 = 0.0;
        let h = 1e-4;
        for i in 0..samples {
            let x = x_lo + (x_hi - x_lo) * i as f64 / (samples - 1) as f64;
            let w = self.omega_at(x)?;
            let p = self.psi_at(x)?;
            inf_one = inf_one.min(1.0 + p);
            sup_w = sup_w.max(w.abs());
            let fd = (self.omega_at(x + h)? - self.omega_at(x - h)?) / (2.0 * h);
            err = err.max((fd - p).abs() / (1.0 + p.abs()));
        }
        if !(inf_one > 0.0) {
            return Err(Error::ShiftConfig(format!("inf(1 + psi) = {inf_one} is not positive")));
        }
        if err > 1e-5 {
            return Err(Error::ShiftConfig(format!("psi disagrees with the derivative of omega (relative error {err:e})")));
        }
        Ok(ShiftDiagnostics { inf_one_plus_psi: inf_one, sup_abs_omega: sup_w, psi_check_error: err })
    }

    /// Iterates from `log tau` forward and backward until the orbit leaves
    /// `[x_min, x_max]`; the exits give the attracting and repelling points.
    pub fn detect_dynamics(&self, log_tau: f64, k_max: u64, x_min: f64, x_max: f64, omega_margin: f64) -> Result<ShiftDynamics> {
        let mut samples = Vec::new();
        let mut exits = [Endpoint::Zero; 2];
        for (idx, dir) in [1i64, -1].into_iter().enumerate() {
            let mut x = log_tau;
            let mut k: i64 = 0;
            let mut path = Vec::new();
            loop {
                if x > x_max || x < x_min {
                    exits[idx] = if x > x_max { Endpoint::Infinity } else { Endpoint::Zero };
                    break;
                }
                if k.unsigned_abs() >= k_max {
                    return Err(Error::IndeterminateDynamics(format!("orbit of log t = {log_tau} did not leave [{x_min}, {x_max}] within {k_max} steps")));
                }
                let w = self.omega_at(x)?;
                if w.abs() < omega_margin {
                    return Err(Error::IndeterminateDynamics(format!("|omega| = {:e} below margin {omega_margin:e} at log t = {x}", w.abs())));
                }
                x = if dir > 0 { x + w } else { self.log_inverse(x, 1e-14)? };
                k += dir;
                path.push(OrbitSample { k, log_t: x });
            }
            let stride = (path.len() / 64).max(1);
            samples.extend(path.iter().enumerate().filter(|(i, _)| i % stride == 0 || *i == path.len() - 1).map(|(_, s)| *s));
        }
        if exits[0] == exits[1] {
            return Err(Error::IndeterminateDynamics(format!("forward and backward orbits both exit toward {}", exits[0])));
        }
        samples.push(OrbitSample { k: 0, log_t: log_tau });
        samples.sort_by_key(|s| s.k);
        Ok(ShiftDynamics { tau_plus: exits[0], tau_minus: exits[1], orbit_samples: samples })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dilation_basics() {
        let a = SoShift::dilation(2.0).unwrap();
        assert!((a.eval(3.0).unwrap() - 6.0).abs() < 1e-14);
        assert!((a.derivative(3.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((a.inverse(4.0, 1e-12).unwrap() - 2.0).abs() < 1e-12);
        assert!((a.iterate(3, 1.0).unwrap() - 8.0).abs() < 1e-13);
        assert!((a.iterate(-1, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((a.exponent_of_iterate(5, 1.7).unwrap() - 5.0 * LN_2).abs() < 1e-14);
    }

    #[test]
    fn family_rejects_large_oscillation() {
        assert!(SoShift::family(0.3, 0.5, 2.0).is_err());
        assert!(SoShift::family(0.3, 0.2, 1.0).is_ok());
    }

    #[test]
    fn expression_shift_matches_family() {
        let f = SoShift::family(0.3, 0.2, 1.0).unwrap();
        let e = SoShift::from_exprs("0.3 + 0.2*sin(log(1 + log(t)^2))", None).unwrap();
        for &x in &[-7.0, -1.0, 0.0, 0.4, 3.0, 1e6] {
            assert!((f.omega_at(x).unwrap() - e.omega_at(x).unwrap()).abs() < 1e-13);
            assert!((f.psi_at(x).unwrap() - e.psi_at(x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_shift_composes_to_identity() {
        let a = SoShift::family(0.3, 0.2, 1.0).unwrap();
        let b = a.inverse_shift();
        for &x in &[-5.0, 0.0, 2.5] {
            let y = b.log_image(a.log_image(x).unwrap()).unwrap();
            assert!((y - x).abs() < 1e-12);
        }
        b.diagnostics(-10.0, 10.0, 200).unwrap();
    }
}
