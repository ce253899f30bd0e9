//! One-sided invertibility of functional operators: limit bounds, the
//! classifier for binomial operators `aI - bU_alpha`, formal adjoints,
//! one-sided inverses `(A^* A)^{-1} A^*` with residual certificates, and
//! truncated Neumann series.

use crate::mellin::{LogGrid, Measure, Testset};
use crate::operators::{op_functional, op_u, DiscretizedOperator, FunctionalOperatorSeries};
use crate::shifts::SoShift;
use crate::so_core::{abs_range, global_sample_points, Endpoint, SoFunction};
use crate::{Error, Result, C64};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Samples per decade of `|log t|` in [`limit_bounds`].
pub const LIMIT_SAMPLES_PER_DECADE: usize = 4096;
/// Width of each limit window, in decades of `|log t|`.
pub const LIMIT_WINDOW_DECADES: usize = 3;
/// Number of trailing windows that must agree.
pub const LIMIT_TRAILING_WINDOWS: usize = 4;
/// Agreement required of the trailing window extrema.
pub const LIMIT_STABILITY_TOL: f64 = 1e-3;
/// Orbit steps scanned on each side for the `k_t` clauses.
pub const ZERO_SCAN_STEPS: i64 = 40;
/// Points of the fundamental domain used by the zero scan.
pub const ZERO_SCAN_POINTS: usize = 16;
/// Values below this modulus count as zeros.
pub const ZERO_THRESHOLD: f64 = 1e-9;
/// Default condition cap for normal-operator inversion.
pub const CONDITION_CAP: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowExtrema {
    /// Window in decades of `|log t|`.
    pub decades: (f64, f64),
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitBounds {
    pub endpoint: Endpoint,
    /// Estimate of `liminf (|a| - |b|)`.
    pub l_star: f64,
    /// Estimate of `limsup (|a| - |b|)`.
    pub l_upper: f64,
    pub stabilized: bool,
    pub windows: Vec<WindowExtrema>,
}

/// liminf / limsup of `|a(t)| - |b(t)|` as `t -> s`.
///
/// `|log t|` is sampled log-uniformly over `[1, 10^decades]`. Extrema are
/// taken over windows three decades wide, shifted by one decade; the
/// estimate is the last window, and it counts as stabilized when the trailing
/// four windows agree within [`LIMIT_STABILITY_TOL`].
pub fn limit_bounds(a: &SoFunction, b: &SoFunction, s: Endpoint, decades: usize) -> Result<LimitBounds> {
    if decades < 6 {
        return Err(Error::InvalidArgument(format!("limit_bounds needs at least 6 decades (got {decades})")));
    }
    let dir = s.direction();
    let total = decades * LIMIT_SAMPLES_PER_DECADE;
    let mut vals = Vec::with_capacity(total + 1);
    for i in 0..=total {
        let u = 10f64.powf(i as f64 / LIMIT_SAMPLES_PER_DECADE as f64);
        let x = dir * u;
        vals.push(a.eval_log(x)?.norm() - b.eval_log(x)?.norm());
    }
    let mut windows = Vec::new();
    for start in 0..=(decades - LIMIT_WINDOW_DECADES) {
        let lo = start * LIMIT_SAMPLES_PER_DECADE;
        let hi = (start + LIMIT_WINDOW_DECADES) * LIMIT_SAMPLES_PER_DECADE;
        let w = &vals[lo..=hi];
        windows.push(WindowExtrema {
            decades: (start as f64, (start + LIMIT_WINDOW_DECADES) as f64),
            min: w.iter().copied().fold(f64::INFINITY, f64::min),
            max: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let tail = &windows[windows.len().saturating_sub(LIMIT_TRAILING_WINDOWS)..];
    let spread = |f: fn(&WindowExtrema) -> f64| {
        let lo = tail.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = tail.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let stabilized = tail.len() == LIMIT_TRAILING_WINDOWS
        && spread(|w| w.min) < LIMIT_STABILITY_TOL
        && spread(|w| w.max) < LIMIT_STABILITY_TOL;
    let last = *windows.last().expect("at least one window");
    Ok(LimitBounds { endpoint: s, l_star: last.min, l_upper: last.max, stabilized, windows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinomialVerdict {
    #[serde(rename = "invertible_I1")]
    InvertibleI1,
    #[serde(rename = "invertible_I2")]
    InvertibleI2,
    #[serde(rename = "strictly_left_LI")]
    StrictlyLeftLi,
    #[serde(rename = "strictly_right_RI")]
    StrictlyRightRi,
    #[serde(rename = "unclassified")]
    Unclassified,
}

impl BinomialVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            BinomialVerdict::InvertibleI1 => "invertible_I1",
            BinomialVerdict::InvertibleI2 => "invertible_I2",
            BinomialVerdict::StrictlyLeftLi => "strictly_left_LI",
            BinomialVerdict::StrictlyRightRi => "strictly_right_RI",
            BinomialVerdict::Unclassified => "unclassified",
        }
    }

    /// Whether the verdict gives a left inverse.
    pub fn left(self) -> bool {
        matches!(self, BinomialVerdict::InvertibleI1 | BinomialVerdict::InvertibleI2 | BinomialVerdict::StrictlyLeftLi)
    }

    pub fn right(self) -> bool {
        matches!(self, BinomialVerdict::InvertibleI1 | BinomialVerdict::InvertibleI2 | BinomialVerdict::StrictlyRightRi)
    }
}

impl core::fmt::Display for BinomialVerdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The four limit quantities at the repelling (`minus`) and attracting
/// (`plus`) points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub l_star_minus: f64,
    pub l_upper_minus: f64,
    pub l_star_plus: f64,
    pub l_upper_plus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroScan {
    pub points: usize,
    pub steps: i64,
    /// Orbit indices `k` with `|a(alpha_k(t))| < threshold`, over all points.
    pub a_zero_steps: Vec<i64>,
    pub b_zero_steps: Vec<i64>,
    /// Some `k_t` separates the zeros as the left clause requires.
    pub left_clause: bool,
    pub right_clause: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinomialClassification {
    pub verdict: BinomialVerdict,
    pub tau_minus: Endpoint,
    pub tau_plus: Endpoint,
    pub margins: Margins,
    pub inf_abs_a: f64,
    pub inf_abs_b: f64,
    pub orbit_zero_scan: ZeroScan,
    /// Margins within this distance of zero are treated as undecided.
    pub sign_tolerance: f64,
}

fn zero_scan(alpha: &SoShift, a: &SoFunction, b: &SoFunction) -> Result<ZeroScan> {
    let w0 = alpha.omega_at(0.0)?;
    let mut az = Vec::new();
    let mut bz = Vec::new();
    let mut left = true;
    let mut right = true;
    for i in 0..ZERO_SCAN_POINTS {
        let x0 = w0 * i as f64 / ZERO_SCAN_POINTS as f64;
        let (mut za, mut zb) = (Vec::new(), Vec::new());
        for k in -ZERO_SCAN_STEPS..=ZERO_SCAN_STEPS {
            let x = alpha.log_iterate(k, x0)?;
            if a.eval_log(x)?.norm() < ZERO_THRESHOLD {
                za.push(k);
            }
            if b.eval_log(x)?.norm() < ZERO_THRESHOLD {
                zb.push(k);
            }
        }
        let max_a = za.iter().copied().max().unwrap_or(i64::MIN);
        let min_a = za.iter().copied().min().unwrap_or(i64::MAX);
        let max_b = zb.iter().copied().max().unwrap_or(i64::MIN);
        let min_b = zb.iter().copied().min().unwrap_or(i64::MAX);
        // left: b != 0 for k < k_t and a != 0 for k > k_t, i.e. max za <= min zb
        left &= za.is_empty() || zb.is_empty() || max_a <= min_b;
        // right: b != 0 for k >= k_t and a != 0 for k < k_t, i.e. max zb < min za
        right &= za.is_empty() || zb.is_empty() || max_b < min_a;
        az.extend(za);
        bz.extend(zb);
    }
    az.sort_unstable();
    az.dedup();
    bz.sort_unstable();
    bz.dedup();
    Ok(ZeroScan { points: ZERO_SCAN_POINTS, steps: ZERO_SCAN_STEPS, a_zero_steps: az, b_zero_steps: bz, left_clause: left, right_clause: right })
}

/// Decades of `|log t|` used by [`classify_binomial`].
pub const CLASSIFY_DECADES: usize = 10;

/// Classifies `aI - bU_alpha` by conditions I1, I2, LI, RI.
pub fn classify_binomial(alpha: &SoShift, a: &SoFunction, b: &SoFunction) -> Result<BinomialClassification> {
    let (tm, tp) = match alpha.detect_dynamics(0.0, 1_000_000, -30.0, 30.0, 1e-12) {
        Ok(d) => (d.tau_minus, d.tau_plus),
        // without a shift term the orientation is irrelevant
        Err(e) => {
            if abs_range(b, 6)?.1 == 0.0 {
                (Endpoint::Zero, Endpoint::Infinity)
            } else {
                return Err(e);
            }
        }
    };
    let lm = limit_bounds(a, b, tm, CLASSIFY_DECADES)?;
    let lp = limit_bounds(a, b, tp, CLASSIFY_DECADES)?;
    for l in [&lm, &lp] {
        if !l.stabilized {
            let spread = l.windows.iter().rev().take(LIMIT_TRAILING_WINDOWS).map(|w| w.max - w.min).fold(0.0, f64::max);
            return Err(Error::IndeterminateLimit { endpoint: l.endpoint.as_str(), spread });
        }
    }
    let margins = Margins { l_star_minus: lm.l_star, l_upper_minus: lm.l_upper, l_star_plus: lp.l_star, l_upper_plus: lp.l_upper };
    let inf_abs_a = abs_range(a, 6)?.0;
    let inf_abs_b = abs_range(b, 6)?.0;
    let scan = zero_scan(alpha, a, b)?;
    let eps = LIMIT_STABILITY_TOL;
    let pos = |v: f64| v > eps;
    let neg = |v: f64| v < -eps;
    let verdict = if pos(margins.l_star_minus) && pos(margins.l_star_plus) && inf_abs_a > ZERO_THRESHOLD {
        BinomialVerdict::InvertibleI1
    } else if neg(margins.l_upper_minus) && neg(margins.l_upper_plus) && inf_abs_b > ZERO_THRESHOLD {
        BinomialVerdict::InvertibleI2
    } else if neg(margins.l_upper_minus) && pos(margins.l_star_plus) && scan.left_clause {
        BinomialVerdict::StrictlyLeftLi
    } else if neg(margins.l_upper_plus) && pos(margins.l_star_minus) && scan.right_clause {
        BinomialVerdict::StrictlyRightRi
    } else {
        BinomialVerdict::Unclassified
    };
    Ok(BinomialClassification { verdict, tau_minus: tm, tau_plus: tp, margins, inf_abs_a, inf_abs_b, orbit_zero_scan: scan, sign_tolerance: eps })
}

/// `A^* = sum_k (conj(a_k) o alpha_{-k}) U_alpha^{-k}`.
pub fn formal_adjoint(series: &FunctionalOperatorSeries) -> Result<FunctionalOperatorSeries> {
    let mut terms = Vec::new();
    for (k, f) in series.terms() {
        let k = *k;
        let c = f.conj();
        let g = if k == 0 {
            c
        } else {
            let s = series.shift().clone();
            let map = Arc::new(move |x: f64| s.log_iterate(-k, x));
            c.compose_log(format!("conj({}) o alpha_{}", f.label(), -k), map)
        };
        terms.push((-k, g));
    }
    FunctionalOperatorSeries::new(series.shift().clone(), terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// A candidate one-sided inverse with its residual on the testset.
#[derive(Clone, Debug)]
pub struct OneSidedInverse {
    pub operator: DiscretizedOperator,
    pub side: Side,
    /// `max ||A^L A f - f|| / ||f||` (or `||A A^R f - f||`) over the testset.
    pub residual: f64,
    pub per_function: Vec<f64>,
    pub tol: f64,
    pub certified: bool,
    /// Singular values kept in the normal-operator inversion.
    pub rank: usize,
    /// `sigma_max / sigma_min` of the weighted normal matrix.
    pub condition: f64,
}

impl OneSidedInverse {
    /// The inverse if its residual is below `tol`, else a no-certificate error.
    pub fn certificate(self) -> Result<OneSidedInverse> {
        if self.certified {
            Ok(self)
        } else {
            Err(Error::NoCertificate { side: self.side.as_str(), residual: self.residual, tol: self.tol })
        }
    }
}

/// Pseudo-inverse of `g` in the geometry weighted by `w`, keeping singular
/// values above `sigma_max / cap`.
fn weighted_pinv<T: nalgebra::ComplexField<RealField = f64>>(g: &DMatrix<T>, w: &[f64], cap: f64) -> (DMatrix<T>, usize, f64) {
    let n = g.nrows();
    let gw = DMatrix::<T>::from_fn(n, n, |i, j| g[(i, j)].clone() * T::from_real(w[i] / w[j]));
    let svd = gw.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let s = svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    let cut = smax / cap;
    let mut rank = 0;
    // V diag(1/s) U^*
    let mut vs = vt.adjoint();
    for (k, &sk) in s.iter().enumerate() {
        let f = if sk > cut && sk > 0.0 {
            rank += 1;
            1.0 / sk
        } else {
            0.0
        };
        vs.column_mut(k).scale_mut(f);
    }
    let pw = vs * u.adjoint();
    let p = DMatrix::<T>::from_fn(n, n, |i, j| pw[(i, j)].clone() * T::from_real(w[j] / w[i]));
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    (p, rank, condition)
}

fn one_sided_matrix<T: nalgebra::ComplexField<RealField = f64>>(a: &DMatrix<T>, ad: &DMatrix<T>, side: Side, w: &[f64], cap: f64) -> (DMatrix<T>, usize, f64) {
    match side {
        Side::Left => {
            let (gp, r, c) = weighted_pinv(&(ad * a), w, cap);
            (gp * ad, r, c)
        }
        Side::Right => {
            let (gp, r, c) = weighted_pinv(&(a * ad), w, cap);
            (ad * gp, r, c)
        }
    }
}

fn real_matrix(m: &DMatrix<C64>) -> Option<DMatrix<f64>> {
    m.iter().all(|z| z.im == 0.0).then(|| m.map(|z| z.re))
}

/// `A^L = (A^* A)^{-1} A^*` or `A^R = A^* (A A^*)^{-1}` on the grid, certified
/// by its residual on `tests`.
pub fn one_sided_inverse(
    series: &FunctionalOperatorSeries,
    side: Side,
    p: f64,
    grid: &LogGrid,
    tests: &Testset,
    tol: f64,
    cap: f64,
) -> Result<OneSidedInverse> {
    let a_op = op_functional(series, p, grid)?;
    let ad_op = op_functional(&formal_adjoint(series)?, p, grid)?;
    let a = a_op.materialize()?;
    let ad = ad_op.materialize()?;
    let w: Vec<f64> = (0..grid.n).map(|j| grid.weight(j).sqrt()).collect();
    // real data take the much faster real decompositions
    let (inv, rank, condition) = match (real_matrix(&a), real_matrix(&ad)) {
        (Some(ar), Some(adr)) => {
            let (m, r, c) = one_sided_matrix(&ar, &adr, side, &w, cap);
            (m.map(|v| C64::new(v, 0.0)), r, c)
        }
        _ => one_sided_matrix(&a, &ad, side, &w, cap),
    };
    let label = format!("{}-inverse of {}", side.as_str(), a_op.label());
    let inv_op = DiscretizedOperator::from_matrix(label, *grid, p, inv);
    let composed = match side {
        Side::Left => inv_op.compose(&a_op),
        Side::Right => a_op.compose(&inv_op),
    };
    let (residual, per_function) =
        tests.max_relative(grid, p, Measure::Lebesgue, |f| Ok(composed.apply(f).iter().zip(f).map(|(u, v)| u - v).collect()))?;
    let certified = residual < tol;
    Ok(OneSidedInverse { operator: inv_op, side, residual, per_function, tol, certified, rank, condition })
}

/// Truncated Neumann series for `aI - bU_alpha` under `sup|b/a| < 1`.
#[derive(Clone, Debug)]
pub struct NeumannInverse {
    pub operator: DiscretizedOperator,
    /// Sampled `sup |b/a|`.
    pub rho: f64,
    pub terms: usize,
    /// `rho^{K+1}`.
    pub bound: f64,
}

/// `N_K = sum_{k=0}^{K} (a^{-1} b U_alpha)^k a^{-1}`.
pub fn neumann_inverse(alpha: &SoShift, a: &SoFunction, b: &SoFunction, k_terms: usize, p: f64, grid: &LogGrid) -> Result<NeumannInverse> {
    let mut inf_a = f64::INFINITY;
    let mut rho: f64 = 0.0;
    for x in global_sample_points(6) {
        let av = a.eval_log(x)?.norm();
        inf_a = inf_a.min(av);
        rho = rho.max(b.eval_log(x)?.norm() / av);
    }
    if !(inf_a > ZERO_THRESHOLD) {
        return Err(Error::InvalidArgument(format!("inf |a| = {inf_a:e} is not positive")));
    }
    if !(rho < 1.0) {
        return Err(Error::SeriesDivergence(rho));
    }
    let inv_a: Vec<C64> = (0..grid.n).map(|j| a.eval_log(grid.x(j)).map(|v| v.inv())).collect::<Result<_>>()?;
    let ratio: Vec<C64> = (0..grid.n).map(|j| Ok(b.eval_log(grid.x(j))? * inv_a[j])).collect::<Result<_>>()?;
    let u = op_u(alpha, p, grid)?;
    let op = DiscretizedOperator::new(format!("neumann[K={k_terms}]"), *grid, p, move |f| {
        let g: Vec<C64> = f.iter().zip(&inv_a).map(|(v, c)| v * c).collect();
        let mut s = g.clone();
        for _ in 0..k_terms {
            let us = u.apply(&s);
            for j in 0..s.len() {
                s[j] = g[j] + ratio[j] * us[j];
            }
        }
        s
    });
    Ok(NeumannInverse { operator: op, rho, terms: k_terms, bound: rho.powi(k_terms as i32 + 1) })
}

/// Gaussians whose images under `U_alpha^{K+1}` stay inside the grid, so
/// the Neumann residual is measured without truncation.
pub fn neumann_testset(alpha: &SoShift, k_terms: usize, grid: &LogGrid, count: usize) -> Result<Testset> {
    let sigma = grid.length() / 48.0;
    let steps = -(k_terms as i64 + 1);
    let inside = |x: f64| x - 5.0 * sigma >= grid.x_min && x + 5.0 * sigma <= grid.x_max;
    // U^k f is centered on the backward orbit of the center of f
    let fits = |c: f64| -> Result<bool> { Ok(inside(c) && inside(alpha.log_iterate(steps, c)?)) };
    let cand: Vec<f64> = (0..=400).map(|i| grid.x_min + 5.0 * sigma + (grid.length() - 10.0 * sigma) * i as f64 / 400.0).collect();
    let mut ok = Vec::new();
    for c in cand {
        if fits(c)? {
            ok.push(c);
        }
    }
    if ok.is_empty() {
        return Err(Error::Grid(format!("no test function keeps {} shift steps inside the grid", k_terms + 1)));
    }
    let (lo, hi) = (ok[0], ok[ok.len() - 1]);
    let centers: Vec<f64> = (0..count.max(1)).map(|i| if count <= 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 }).collect();
    Ok(Testset::gaussians(grid, &centers, sigma, (grid.x_min, grid.x_max)))
}

/// `max ||(aI - bU_alpha) N_K f - f|| / ||f||` over the testset.
pub fn neumann_residual(inv: &NeumannInverse, series: &FunctionalOperatorSeries, tests: &Testset) -> Result<f64> {
    let g = *inv.operator.grid();
    let p = inv.operator.p();
    let a = op_functional(series, p, &g)?;
    Ok(tests.max_relative(&g, p, Measure::Lebesgue, |f| Ok(a.apply(&inv.operator.apply(f)).iter().zip(f).map(|(u, v)| u - v).collect()))?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pinv_of_diagonal() {
        let g = DMatrix::<C64>::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(0.5, 0.0), C64::new(1e-12, 0.0)]));
        let (p, rank, cond) = weighted_pinv(&g, &[1.0, 2.0, 3.0], 1e8);
        assert_eq!(rank, 2);
        assert!(cond > 1e11);
        assert!((p[(0, 0)] - C64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((p[(1, 1)] - C64::new(2.0, 0.0)).norm() < 1e-14);
        assert!(p[(2, 2)].norm() < 1e-14);
    }
}
