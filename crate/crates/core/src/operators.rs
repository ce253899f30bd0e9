//! Discretized operators on `L^p(R+)`: weighted shifts, the singular integral
//! operators `S_gamma`, `R_gamma` (principal-value quadrature or Mellin
//! multipliers), projections, functional operators and the composite `N`.

use crate::mellin::{convolve_padded, mellin_pdo_many, LogGrid, Measure, PdoSymbol, Testset};
use crate::shifts::{guard_range, SoShift};
use crate::so_core::{abs_range, so_check, SoFunction};
use crate::symbols::{check_admissible, coth, csch};
use crate::{Error, Result, C64, I};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use serde::Serialize;

/// Largest grid for which dense matrices are assembled.
pub const MAX_DENSE_N: usize = 1024;

pub type Action = Arc<dyn Fn(&[C64]) -> Vec<C64> + Send + Sync>;

/// A linear operator acting on grid functions.
#[derive(Clone)]
pub struct DiscretizedOperator {
    label: String,
    grid: LogGrid,
    p: f64,
    action: Action,
    matrix: Option<Arc<DMatrix<C64>>>,
}

impl core::fmt::Debug for DiscretizedOperator {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DiscretizedOperator")
            .field("label", &self.label)
            .field("n", &self.grid.n)
            .field("p", &self.p)
            .field("materialized", &self.matrix.is_some())
            .finish()
    }
}

impl DiscretizedOperator {
    pub fn new(label: impl Into<String>, grid: LogGrid, p: f64, action: impl Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static) -> Self {
        DiscretizedOperator { label: label.into(), grid, p, action: Arc::new(action), matrix: None }
    }

    pub fn from_matrix(label: impl Into<String>, grid: LogGrid, p: f64, m: DMatrix<C64>) -> Self {
        let m = Arc::new(m);
        let mm = m.clone();
        let action: Action = Arc::new(move |f: &[C64]| {
            let v = nalgebra::DVector::from_column_slice(f);
            (&*mm * v).as_slice().to_vec()
        });
        DiscretizedOperator { label: label.into(), grid, p, action, matrix: Some(m) }
    }

    pub fn identity(grid: LogGrid, p: f64) -> Self {
        Self::new("I", grid, p, |f| f.to_vec())
    }

    /// Pointwise multiplication by grid values.
    pub fn multiplication(label: impl Into<String>, grid: LogGrid, p: f64, c: Vec<C64>) -> Self {
        Self::new(label, grid, p, move |f| f.iter().zip(&c).map(|(a, b)| a * b).collect())
    }

    /// Multiplication by a function of `t`.
    pub fn multiplication_by(f: &SoFunction, grid: LogGrid, p: f64) -> Result<Self> {
        let c: Vec<C64> = (0..grid.n).map(|j| f.eval_log(grid.x(j))).collect::<Result<_>>()?;
        Ok(Self::multiplication(f.label(), grid, p, c))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Applies the operator. Panics if `f` does not match the grid size.
    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        assert_eq!(f.len(), self.grid.n, "grid function length does not match operator `{}`", self.label);
        (self.action)(f)
    }

    /// Dense matrix (columns are images of unit vectors).
    pub fn materialize(&self) -> Result<DMatrix<C64>> {
        if let Some(m) = &self.matrix {
            return Ok((**m).clone());
        }
        let n = self.grid.n;
        if n > MAX_DENSE_N {
            return Err(Error::InvalidArgument(format!("dense matrices are limited to n <= {MAX_DENSE_N} (got {n})")));
        }
        let mut m = DMatrix::<C64>::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            e[k] = C64::new(1.0, 0.0);
            let col = self.apply(&e);
            for (j, v) in col.into_iter().enumerate() {
                m[(j, k)] = v;
            }
            e[k] = C64::new(0.0, 0.0);
        }
        Ok(m)
    }

    /// Returns a copy backed by its dense matrix.
    pub fn materialized(&self) -> Result<Self> {
        Ok(Self::from_matrix(self.label.clone(), self.grid, self.p, self.materialize()?))
    }

    fn same_space(&self, o: &DiscretizedOperator) {
        assert!(self.grid == o.grid && self.p == o.p, "operators `{}` and `{}` act on different spaces", self.label, o.label);
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &DiscretizedOperator) -> Self {
        self.same_space(other);
        let (a, b) = (self.action.clone(), other.action.clone());
        Self::new(format!("{}*{}", self.label, other.label), self.grid, self.p, move |f| a(&b(f)))
    }

    pub fn add(&self, other: &DiscretizedOperator) -> Self {
        self.same_space(other);
        let (a, b) = (self.action.clone(), other.action.clone());
        Self::new(format!("({} + {})", self.label, other.label), self.grid, self.p, move |f| {
            a(f).into_iter().zip(b(f)).map(|(u, v)| u + v).collect()
        })
    }

    pub fn sub(&self, other: &DiscretizedOperator) -> Self {
        self.same_space(other);
        let (a, b) = (self.action.clone(), other.action.clone());
        Self::new(format!("({} - {})", self.label, other.label), self.grid, self.p, move |f| {
            a(f).into_iter().zip(b(f)).map(|(u, v)| u - v).collect()
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        let a = self.action.clone();
        Self::new(format!("{}*{}", c, self.label), self.grid, self.p, move |f| a(f).into_iter().map(|v| v * c).collect())
    }
}

/// Discretization route for `S_gamma` and `R_gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// Principal-value quadrature of the kernel in log coordinates.
    Pv,
    /// `Phi^{-1} Co(a) Phi` with the multiplier applied on the unpadded DFT
    /// grid; exactly diagonal, so multiplier identities hold to rounding.
    Mellin,
    /// Same with zero padding by the given factor, approximating the
    /// non-periodic operator on `R+`.
    MellinPadded(usize),
}

/// Standard padding for comparisons against the continuum.
pub const CONTINUUM_PAD: usize = 4;

fn s_symbol(p: f64, gamma: C64) -> impl Fn(f64) -> C64 + Send + Sync + 'static {
    move |xi: f64| {
        if p == 2.0 && gamma == C64::new(0.0, 0.0) {
            C64::new((PI * xi).tanh(), 0.0)
        } else {
            coth(PI * (xi + I / p + I * gamma))
        }
    }
}

fn r_symbol(p: f64, gamma: C64) -> impl Fn(f64) -> C64 + Send + Sync + 'static {
    move |xi: f64| {
        if p == 2.0 && gamma == C64::new(0.0, 0.0) {
            C64::new(0.0, -1.0 / (PI * xi).cosh())
        } else {
            csch(PI * (xi + I / p + I * gamma))
        }
    }
}

fn mellin_route(label: String, grid: &LogGrid, p: f64, pad: usize, a: impl Fn(f64) -> C64) -> Result<DiscretizedOperator> {
    if pad == 0 || !pad.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("padding factor {pad} must be a power of two")));
    }
    let values: Vec<C64> = grid.frequencies(grid.n * pad).into_iter().map(a).collect();
    let g = *grid;
    Ok(DiscretizedOperator::new(label, g, p, move |f| {
        let phi = g.phi(f, p);
        let c = convolve_padded(&phi, &values, g.n, pad);
        g.phi_inv(&c, p)
    }))
}

/// Dense Toeplitz action `out_j = sum_k kernel[j - k + n - 1] f_k`.
fn toeplitz_apply(kernel: &[C64], f: &[C64]) -> Vec<C64> {
    let n = f.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (j, o) in out.iter_mut().enumerate() {
        let row = &kernel[j..j + n];
        let mut acc = C64::new(0.0, 0.0);
        // kernel index for column k is j - k + n - 1 = (n - 1 - k) + j
        for (k, fk) in f.iter().enumerate() {
            acc += row[n - 1 - k] * fk;
        }
        *o = acc;
    }
    out
}

/// `e^{gamma u} / (1 - e^u)` without overflow.
fn s_kernel(gamma: C64, u: f64) -> C64 {
    if u < 0.0 {
        (gamma * u).exp() / (1.0 - u.exp())
    } else {
        -((gamma - 1.0) * u).exp() / (1.0 - (-u).exp())
    }
}

/// `e^{gamma u} / (1 + e^u)` without overflow.
fn r_kernel(gamma: C64, u: f64) -> C64 {
    if u < 0.0 {
        (gamma * u).exp() / (1.0 + u.exp())
    } else {
        ((gamma - 1.0) * u).exp() / (1.0 + (-u).exp())
    }
}

/// `S_gamma f(t) = (1/pi i) p.v. int (t/tau)^gamma f(tau) / (tau - t) dtau`.
pub fn op_s(gamma: C64, p: f64, grid: &LogGrid, route: Route) -> Result<DiscretizedOperator> {
    check_admissible(p, gamma)?;
    grid.validate()?;
    let label = format!("S[{gamma}]");
    match route {
        Route::Mellin => mellin_route(label, grid, p, 1, s_symbol(p, gamma)),
        Route::MellinPadded(pad) => mellin_route(label, grid, p, pad, s_symbol(p, gamma)),
        Route::Pv => {
            let n = grid.n;
            let dx = grid.dx();
            let c = 1.0 / (PI * I);
            let kernel: Vec<C64> = (0..2 * n - 1)
                .map(|i| {
                    let d = i as f64 - (n - 1) as f64;
                    if d == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        c * dx * s_kernel(gamma, d * dx)
                    }
                })
                .collect();
            let diag = c * dx * (0.5 - gamma);
            Ok(DiscretizedOperator::new(label, *grid, p, move |f| {
                let mut out = toeplitz_apply(&kernel, f);
                let n = f.len();
                for j in 0..n {
                    let fp = if j + 1 < n { f[j + 1] } else { C64::new(0.0, 0.0) };
                    let fm = if j > 0 { f[j - 1] } else { C64::new(0.0, 0.0) };
                    out[j] += diag * f[j] + c * (fp - fm) * 0.5;
                }
                out
            }))
        }
    }
}

/// `R_gamma f(t) = (1/pi i) int (t/tau)^gamma f(tau) / (tau + t) dtau`.
pub fn op_r(gamma: C64, p: f64, grid: &LogGrid, route: Route) -> Result<DiscretizedOperator> {
    check_admissible(p, gamma)?;
    grid.validate()?;
    let label = format!("R[{gamma}]");
    match route {
        Route::Mellin => mellin_route(label, grid, p, 1, r_symbol(p, gamma)),
        Route::MellinPadded(pad) => mellin_route(label, grid, p, pad, r_symbol(p, gamma)),
        Route::Pv => {
            let n = grid.n;
            let dx = grid.dx();
            let c = 1.0 / (PI * I);
            let kernel: Vec<C64> = (0..2 * n - 1)
                .map(|i| {
                    let d = i as f64 - (n - 1) as f64;
                    c * dx * r_kernel(gamma, d * dx)
                })
                .collect();
            Ok(DiscretizedOperator::new(label, *grid, p, move |f| toeplitz_apply(&kernel, f)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `P_gamma^{+-} = (I +- S_gamma)/2`.
pub fn op_p(gamma: C64, p: f64, grid: &LogGrid, route: Route, sign: Sign) -> Result<DiscretizedOperator> {
    let s = op_s(gamma, p, grid, route)?;
    let sg = if sign == Sign::Plus { 1.0 } else { -1.0 };
    let label = format!("P{}[{gamma}]", if sign == Sign::Plus { "+" } else { "-" });
    Ok(DiscretizedOperator::new(label, *grid, p, move |f| {
        s.apply(f).into_iter().zip(f).map(|(v, u)| (u + sg * v) * 0.5).collect()
    }))
}

/// 4-point Lagrange stencil for sampling at fractional index `s`; clamped to
/// stay inside the grid. `None` outside `[0, n - 1]`.
fn cubic_stencil(s: f64, n: usize) -> Option<(usize, [f64; 4])> {
    if !(s >= 0.0 && s <= (n - 1) as f64) {
        return None;
    }
    let base = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let u = s - base as f64;
    let mut w = [0.0; 4];
    for (i, wi) in w.iter_mut().enumerate() {
        let mut v = 1.0;
        for m in 0..4 {
            if m != i {
                v *= (u - m as f64) / (i as f64 - m as f64);
            }
        }
        *wi = v;
    }
    Some((base, w))
}

type StencilRow = Option<(usize, [f64; 4])>;

/// Sparse rows for `f -> (alpha_k')^{1/p} f(alpha_k)` on the grid.
fn shift_rows(shift: &SoShift, k: i64, p: f64, grid: &LogGrid) -> Result<Vec<StencilRow>> {
    let guard = guard_range(grid.x_min, grid.x_max);
    let dx = grid.dx();
    let mut rows = Vec::with_capacity(grid.n);
    for j in 0..grid.n {
        let d = shift.iterate_data(k, grid.x(j), Some(guard))?;
        let weight = (d.log_derivative / p).exp();
        rows.push(cubic_stencil((d.log_t - grid.x_min) / dx, grid.n).map(|(b, w)| (b, w.map(|v| v * weight))));
    }
    Ok(rows)
}

fn apply_rows(rows: &[Option<(usize, [f64; 4])>], f: &[C64]) -> Vec<C64> {
    rows.iter()
        .map(|r| match r {
            Some((b, w)) => f[*b] * w[0] + f[b + 1] * w[1] + f[b + 2] * w[2] + f[b + 3] * w[3],
            None => C64::new(0.0, 0.0),
        })
        .collect()
}

/// `U_alpha^k f = (alpha_k')^{1/p} (f o alpha_k)`, built from the `k`-th
/// iterate directly, with cubic interpolation in `log t`.
pub fn op_u_power(shift: &SoShift, k: i64, p: f64, grid: &LogGrid) -> Result<DiscretizedOperator> {
    grid.validate()?;
    let rows = shift_rows(shift, k, p, grid)?;
    Ok(DiscretizedOperator::new(format!("U^{k}"), *grid, p, move |f| apply_rows(&rows, f)))
}

/// `U_alpha f = (alpha')^{1/p} (f o alpha)`.
pub fn op_u(shift: &SoShift, p: f64, grid: &LogGrid) -> Result<DiscretizedOperator> {
    op_u_power(shift, 1, p, grid)
}

/// `A = sum_k a_k U_alpha^k` with finitely many terms.
#[derive(Clone, Debug)]
pub struct FunctionalOperatorSeries {
    shift: SoShift,
    terms: Vec<(i64, SoFunction)>,
    wiener_norm: f64,
    so_flags: Vec<(i64, bool)>,
}

impl FunctionalOperatorSeries {
    /// Terms with equal `k` are summed. Computes the Wiener norm
    /// `sum_k sup|a_k|` by sampling and flags coefficients that fail the
    /// slow-oscillation diagnostic.
    pub fn new(shift: SoShift, terms: Vec<(i64, SoFunction)>) -> Result<Self> {
        let mut merged: Vec<(i64, SoFunction)> = Vec::new();
        for (k, f) in terms {
            if let Some(pos) = merged.iter().position(|(kk, _)| *kk == k) {
                let g = merged[pos].1.add(&f);
                merged[pos].1 = g;
            } else {
                merged.push((k, f));
            }
        }
        merged.sort_by_key(|(k, _)| *k);
        let mut wiener_norm = 0.0;
        let mut so_flags = Vec::new();
        for (k, f) in &merged {
            wiener_norm += abs_range(f, 6)?.1;
            so_flags.push((*k, so_check(f, 6, 1e-3)?.pass()));
        }
        Ok(FunctionalOperatorSeries { shift, terms: merged, wiener_norm, so_flags })
    }

    /// `a I - b U_alpha`.
    pub fn binomial(shift: SoShift, a: SoFunction, b: SoFunction) -> Result<Self> {
        let nb = b.scale(C64::new(-1.0, 0.0)).with_label(format!("-({})", b.label()));
        Self::new(shift, vec![(0, a), (1, nb)])
    }

    pub fn identity(shift: SoShift) -> Result<Self> {
        Self::new(shift, vec![(0, SoFunction::constant(C64::new(1.0, 0.0)))])
    }

    pub fn shift(&self) -> &SoShift {
        &self.shift
    }

    pub fn terms(&self) -> &[(i64, SoFunction)] {
        &self.terms
    }

    pub fn wiener_norm(&self) -> f64 {
        self.wiener_norm
    }

    /// `(k, passes so_check)` per coefficient.
    pub fn so_flags(&self) -> &[(i64, bool)] {
        &self.so_flags
    }

    /// `(a, b)` with `A = a I - b U_alpha` when all exponents are 0 or 1.
    pub fn as_binomial(&self) -> Option<(SoFunction, SoFunction)> {
        if self.terms.iter().any(|(k, _)| *k != 0 && *k != 1) {
            return None;
        }
        let zero = || SoFunction::constant(C64::new(0.0, 0.0));
        let a = self.terms.iter().find(|(k, _)| *k == 0).map(|(_, f)| f.clone()).unwrap_or_else(zero);
        let b = self
            .terms
            .iter()
            .find(|(k, _)| *k == 1)
            .map(|(_, f)| f.scale(C64::new(-1.0, 0.0)).with_label(format!("-({})", f.label())))
            .unwrap_or_else(zero);
        Some((a, b))
    }
}

/// Discretization of `sum_k a_k U_alpha^k`.
pub fn op_functional(series: &FunctionalOperatorSeries, p: f64, grid: &LogGrid) -> Result<DiscretizedOperator> {
    grid.validate()?;
    let mut parts = Vec::new();
    for (k, f) in series.terms() {
        let c: Vec<C64> = (0..grid.n).map(|j| f.eval_log(grid.x(j))).collect::<Result<_>>()?;
        let rows = if *k == 0 { None } else { Some(shift_rows(series.shift(), *k, p, grid)?) };
        parts.push((c, rows));
    }
    let label = format!("A[{}]", series.terms().iter().map(|(k, f)| format!("{k}:{}", f.label())).collect::<Vec<_>>().join(", "));
    Ok(DiscretizedOperator::new(label, *grid, p, move |f| {
        let mut out = vec![C64::new(0.0, 0.0); f.len()];
        for (c, rows) in &parts {
            match rows {
                None => {
                    for j in 0..f.len() {
                        out[j] += c[j] * f[j];
                    }
                }
                Some(r) => {
                    let u = apply_rows(r, f);
                    for j in 0..f.len() {
                        out[j] += c[j] * u[j];
                    }
                }
            }
        }
        out
    }))
}

/// Data of `N = A_+ P_gamma^+ + A_- P_gamma^-`.
#[derive(Clone, Debug)]
pub struct PairedOperatorData {
    pub p: f64,
    pub gamma: C64,
    pub a_plus: FunctionalOperatorSeries,
    pub a_minus: FunctionalOperatorSeries,
}

/// `N = A_+ P_gamma^+ + A_- P_gamma^-`.
pub fn op_n(data: &PairedOperatorData, grid: &LogGrid, route: Route) -> Result<DiscretizedOperator> {
    let ap = op_functional(&data.a_plus, data.p, grid)?;
    let am = op_functional(&data.a_minus, data.p, grid)?;
    let pp = op_p(data.gamma, data.p, grid, route, Sign::Plus)?;
    let pm = op_p(data.gamma, data.p, grid, route, Sign::Minus)?;
    Ok(ap.compose(&pp).add(&am.compose(&pm)).relabel("N"))
}

/// `(A_+ P_0^+ + C_- P_0^-, C_+ P_0^+ + A_- P_0^-)` with
/// `C_+ = A_+ + 2 sinh(pi i gamma) e^{pi i gamma} (A_+ - A_-) P_gamma^-` and
/// `C_- = A_- + 2 sinh(pi i gamma) e^{-pi i gamma} (A_+ - A_-) P_gamma^+`.
pub fn paired_forms(data: &PairedOperatorData, grid: &LogGrid, route: Route) -> Result<(DiscretizedOperator, DiscretizedOperator)> {
    let (p, g) = (data.p, data.gamma);
    let zero = C64::new(0.0, 0.0);
    let ap = op_functional(&data.a_plus, p, grid)?;
    let am = op_functional(&data.a_minus, p, grid)?;
    let p0p = op_p(zero, p, grid, route, Sign::Plus)?;
    let p0m = op_p(zero, p, grid, route, Sign::Minus)?;
    let pgp = op_p(g, p, grid, route, Sign::Plus)?;
    let pgm = op_p(g, p, grid, route, Sign::Minus)?;
    let sh = 2.0 * (PI * I * g).sinh();
    let e = (PI * I * g).exp();
    let diff = ap.sub(&am);
    let c_plus = ap.add(&diff.compose(&pgm).scale(sh * e));
    let c_minus = am.add(&diff.compose(&pgp).scale(sh / e));
    let n1 = ap.compose(&p0p).add(&c_minus.compose(&p0m)).relabel("N (first paired form)");
    let n2 = c_plus.compose(&p0p).add(&am.compose(&p0m)).relabel("N (second paired form)");
    Ok((n1, n2))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrReport {
    /// `P_delta^+ - P_gamma^+ - (1/2) sinh[pi i (gamma - delta)] R_gamma R_delta`.
    pub first: f64,
    /// `P_gamma^- P_delta^+ + (e^{i pi (delta - gamma)}/4) R_gamma R_delta`.
    pub second: f64,
}

/// Residuals of the two product relations between projections and `R`.
pub fn pr_relations_check(gamma: C64, delta: C64, p: f64, grid: &LogGrid, route: Route, tests: &Testset) -> Result<PrReport> {
    let ppd = op_p(delta, p, grid, route, Sign::Plus)?;
    let ppg = op_p(gamma, p, grid, route, Sign::Plus)?;
    let pmg = op_p(gamma, p, grid, route, Sign::Minus)?;
    let rg = op_r(gamma, p, grid, route)?;
    let rd = op_r(delta, p, grid, route)?;
    let c1 = 0.5 * (PI * I * (gamma - delta)).sinh();
    let c2 = (I * PI * (delta - gamma)).exp() / 4.0;
    let mut first: f64 = 0.0;
    let mut second: f64 = 0.0;
    for f in &tests.functions {
        let rr = rg.apply(&rd.apply(f));
        let a = ppd.apply(f);
        let b = ppg.apply(f);
        let pd = ppd.apply(f);
        let c = pmg.apply(&pd);
        let r1: Vec<C64> = (0..f.len()).map(|j| a[j] - b[j] - c1 * rr[j]).collect();
        let r2: Vec<C64> = (0..f.len()).map(|j| c[j] + c2 * rr[j]).collect();
        let nf = grid.norm(f, p, Measure::Lebesgue, None);
        first = first.max(grid.norm(&r1, p, Measure::Lebesgue, Some(tests.window)) / nf);
        second = second.max(grid.norm(&r2, p, Measure::Lebesgue, Some(tests.window)) / nf);
    }
    Ok(PrReport { first, second })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorReport {
    pub singular_values: Vec<f64>,
    /// `sigma_k / sigma_1` for the last reported index `k`.
    pub decay_ratio: f64,
    pub decay_index: usize,
}

/// Singular values of `AB - BA` restricted to functions supported in
/// `window`, in the `L^2(dt)` geometry of the grid.
pub fn commutator_probe(a: &DiscretizedOperator, b: &DiscretizedOperator, k_report: usize, window: (f64, f64)) -> Result<CommutatorReport> {
    a.same_space(b);
    let g = *a.grid();
    let ma = a.materialize()?;
    let mb = b.materialize()?;
    let c = &ma * &mb - &mb * &ma;
    let cols: Vec<usize> = (0..g.n).filter(|&j| g.x(j) >= window.0 && g.x(j) <= window.1).collect();
    let w: Vec<f64> = (0..g.n).map(|j| g.weight(j).sqrt()).collect();
    let m = DMatrix::<C64>::from_fn(g.n, cols.len(), |i, jj| {
        let j = cols[jj];
        c[(i, j)] * (w[i] / w[j])
    });
    let sv = m.singular_values();
    let mut s: Vec<f64> = sv.iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(core::cmp::Ordering::Equal));
    s.truncate(k_report.max(1));
    let decay_index = s.len();
    let decay_ratio = if s[0] == 0.0 { 0.0 } else { s[decay_index - 1] / s[0] };
    Ok(CommutatorReport { singular_values: s, decay_ratio, decay_index })
}

/// `Phi^{-1} Op(a) Phi` applied to each test function.
pub fn conjugated_pdo_many(a: &PdoSymbol, fs: &[Vec<C64>], grid: &LogGrid, p: f64, pad: usize) -> Result<Vec<Vec<C64>>> {
    let phis: Vec<Vec<C64>> = fs.iter().map(|f| grid.phi(f, p)).collect();
    Ok(mellin_pdo_many(a, &phis, grid, pad)?.into_iter().map(|v| grid.phi_inv(&v, p)).collect())
}

/// `max_f ||(U_alpha R_gamma - Phi^{-1} Op(e^{i omega(t) x} r_gamma(x)) Phi) f|| / ||f||`
/// on the testset window.
pub fn shift_r_pdo_discrepancy(shift: &SoShift, gamma: C64, p: f64, grid: &LogGrid, tests: &Testset, pad: usize) -> Result<f64> {
    check_admissible(p, gamma)?;
    let u = op_u(shift, p, grid)?;
    let r = op_r(gamma, p, grid, Route::MellinPadded(pad))?;
    let s = shift.clone();
    let rs = r_symbol(p, gamma);
    let sym = PdoSymbol::phase("e^{i omega(t) x} r(x)", move |x| s.omega_at(x).unwrap_or(f64::NAN), rs);
    let pdo = conjugated_pdo_many(&sym, &tests.functions, grid, p, pad)?;
    let mut worst: f64 = 0.0;
    for (f, b) in tests.functions.iter().zip(&pdo) {
        let a = u.apply(&r.apply(f));
        let d: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        worst = worst.max(grid.norm(&d, p, Measure::Lebesgue, Some(tests.window)) / grid.norm(f, p, Measure::Lebesgue, None));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_reproduces_cubics() {
        let n = 16;
        for &s in &[0.0, 0.3, 1.5, 7.25, 14.9, 15.0] {
            let (b, w) = cubic_stencil(s, n).unwrap();
            let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.1 * x * x * x;
            let v: f64 = (0..4).map(|i| w[i] * f((b + i) as f64)).sum();
            assert!((v - f(s)).abs() < 1e-11, "s={s}");
        }
        assert!(cubic_stencil(-0.1, n).is_none());
        assert!(cubic_stencil(15.1, n).is_none());
    }

    #[test]
    fn toeplitz_matches_direct() {
        let n = 8;
        let kernel: Vec<C64> = (0..2 * n - 1).map(|i| C64::new(i as f64, -(i as f64) * 0.5)).collect();
        let f: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), 0.0)).collect();
        let out = toeplitz_apply(&kernel, &f);
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += kernel[j + n - 1 - k] * f[k];
            }
            assert!((acc - out[j]).norm() < 1e-12);
        }
    }
}
