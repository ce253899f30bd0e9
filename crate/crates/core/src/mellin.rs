//! Discretized Mellin analysis on a uniform grid in `x = log t`.
//!
//! Conventions: `(Mf)(xi) = int f(t) t^{-i xi} dt/t`, inverse
//! `f(t) = (1/2pi) int (Mf)(xi) t^{i xi} dxi`. On the grid this is the DFT of
//! `f(e^{x_j})` scaled by `dx` and a phase for `x_min`.
//!
//! Convolution and PDO routines take a padding factor. With `pad = 1` the
//! discrete operators are exactly diagonal in the DFT basis, so algebraic
//! identities between multipliers hold to rounding error. Larger padding
//! suppresses periodization and approximates the continuum operator.

use crate::fft::{fft, ifft};
use crate::{Error, Result, C64};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Uniform grid `x_j = x_min + j dx`, `j = 0..n`, with `dx = (x_max - x_min)/(n - 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        LogGrid { x_min: -12.0, x_max: 12.0, n: 4096 }
    }
}

/// Measure used for grid norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// `dt` on `R+`: weights `t_j dx`.
    Lebesgue,
    /// `dt/t` on `R+`: weights `dx`.
    Haar,
}

impl LogGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<LogGrid> {
        let g = LogGrid { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(Error::Grid(format!("need finite x_min < x_max (got {}, {})", self.x_min, self.x_max)));
        }
        if self.n < 4 || !self.n.is_power_of_two() {
            return Err(Error::Grid(format!("n = {} must be a power of two >= 4", self.n)));
        }
        if self.x_max.abs().max(self.x_min.abs()) > 700.0 {
            return Err(Error::Grid("|x| must stay below 700 so that t is representable".into()));
        }
        Ok(())
    }

    /// Same range with a different number of points.
    pub fn with_n(&self, n: usize) -> Result<LogGrid> {
        LogGrid::new(self.x_min, self.x_max, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn t(&self, j: usize) -> f64 {
        self.x(j).exp()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.x_min + self.x_max)
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Middle half of the range.
    pub fn inner_window(&self) -> (f64, f64) {
        let c = self.center();
        let h = 0.25 * self.length();
        (c - h, c + h)
    }

    /// Quadrature weight of node `j` for `int |f|^p dt`.
    pub fn weight(&self, j: usize) -> f64 {
        self.t(j) * self.dx()
    }

    /// Frequencies of a length-`m` DFT with spacing `dx`, in FFT order.
    pub fn frequencies(&self, m: usize) -> Vec<f64> {
        let base = 2.0 * PI / (m as f64 * self.dx());
        (0..m)
            .map(|k| {
                let kk = if k < m / 2 { k as f64 } else { k as f64 - m as f64 };
                base * kk
            })
            .collect()
    }

    /// `(sum |f_j|^p w_j)^{1/p}` restricted to nodes inside `window`.
    pub fn norm(&self, f: &[C64], p: f64, measure: Measure, window: Option<(f64, f64)>) -> f64 {
        let dx = self.dx();
        let mut s = 0.0;
        for (j, v) in f.iter().enumerate() {
            let x = self.x(j);
            if let Some((lo, hi)) = window {
                if x < lo || x > hi {
                    continue;
                }
            }
            let w = match measure {
                Measure::Lebesgue => x.exp() * dx,
                Measure::Haar => dx,
            };
            s += v.norm().powf(p) * w;
        }
        s.powf(1.0 / p)
    }

    /// `L^p(R+, dt)` norm.
    pub fn norm_p(&self, f: &[C64], p: f64) -> f64 {
        self.norm(f, p, Measure::Lebesgue, None)
    }

    /// `(Phi f)(t) = t^{1/p} f(t)`, an isometry from `L^p(dt)` to `L^p(dt/t)`.
    pub fn phi(&self, f: &[C64], p: f64) -> Vec<C64> {
        f.iter().enumerate().map(|(j, v)| v * (self.x(j) / p).exp()).collect()
    }

    pub fn phi_inv(&self, f: &[C64], p: f64) -> Vec<C64> {
        f.iter().enumerate().map(|(j, v)| v * (-self.x(j) / p).exp()).collect()
    }

    /// Samples a function of `x = log t` on the grid.
    pub fn sample(&self, f: impl Fn(f64) -> C64) -> Vec<C64> {
        (0..self.n).map(|j| f(self.x(j))).collect()
    }
}

fn check_len(f: &[C64], g: &LogGrid) -> Result<()> {
    if f.len() != g.n {
        return Err(Error::InvalidArgument(format!("grid function has {} values, grid has {}", f.len(), g.n)));
    }
    if f.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::InvalidArgument("grid function has non-finite values".into()));
    }
    Ok(())
}

/// Mellin transform on the grid frequencies (FFT order).
pub fn mellin_transform(f: &[C64], g: &LogGrid) -> Result<Vec<C64>> {
    check_len(f, g)?;
    let mut buf = f.to_vec();
    fft(&mut buf);
    let dx = g.dx();
    let freqs = g.frequencies(g.n);
    Ok(buf
        .iter()
        .zip(freqs)
        .map(|(v, xi)| v * dx * C64::from_polar(1.0, -xi * g.x_min))
        .collect())
}

/// Inverse of [`mellin_transform`].
pub fn inverse_mellin_transform(big_f: &[C64], g: &LogGrid) -> Result<Vec<C64>> {
    check_len(big_f, g)?;
    let freqs = g.frequencies(g.n);
    let mut buf: Vec<C64> = big_f.iter().zip(freqs).map(|(v, xi)| v * C64::from_polar(1.0, xi * g.x_min)).collect();
    ifft(&mut buf);
    let s = 1.0 / (g.n as f64 * g.dx());
    Ok(buf.into_iter().map(|v| v * s).collect())
}

/// `(1/2pi) sum |F_k|^p dxi`, the frequency-side quadrature (`p = 2` gives Plancherel).
pub fn frequency_norm(big_f: &[C64], g: &LogGrid, p: f64) -> f64 {
    let dxi = 2.0 * PI / (big_f.len() as f64 * g.dx());
    (big_f.iter().map(|v| v.norm().powf(p)).sum::<f64>() * dxi / (2.0 * PI)).powf(1.0 / p)
}

pub type FreqFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// A Mellin multiplier sampled on the (padded) frequency grid.
#[derive(Clone)]
pub struct MellinMultiplier {
    values: Vec<C64>,
    pad: usize,
    closed_form: Option<FreqFn>,
    v_norm_estimate: f64,
}

impl core::fmt::Debug for MellinMultiplier {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("MellinMultiplier").field("pad", &self.pad).field("len", &self.values.len()).finish()
    }
}

impl MellinMultiplier {
    /// Samples `a` at the frequencies of a `pad * n` point DFT.
    pub fn from_fn(g: &LogGrid, pad: usize, a: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Result<Self> {
        if pad == 0 || !pad.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("padding factor {pad} must be a power of two")));
        }
        let a: FreqFn = Arc::new(a);
        let values: Vec<C64> = g.frequencies(pad * g.n).into_iter().map(|xi| a(xi)).collect();
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidArgument("multiplier is not finite on the frequency grid".into()));
        }
        let mut m = MellinMultiplier { values, pad, closed_form: Some(a), v_norm_estimate: 0.0 };
        let tv = total_variation(&m, g);
        m.v_norm_estimate = tv.sup + tv.value;
        Ok(m)
    }

    /// Values given directly in FFT order on the unpadded grid.
    pub fn from_values(g: &LogGrid, values: Vec<C64>) -> Result<Self> {
        check_len(&values, g)?;
        let mut m = MellinMultiplier { values, pad: 1, closed_form: None, v_norm_estimate: 0.0 };
        let tv = total_variation(&m, g);
        m.v_norm_estimate = tv.sup + tv.value;
        Ok(m)
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    /// `sup |a| + V(a)`.
    pub fn v_norm_estimate(&self) -> f64 {
        self.v_norm_estimate
    }

    /// Off-grid evaluation through the closed form, if one was given.
    pub fn eval(&self, xi: f64) -> Option<C64> {
        self.closed_form.as_ref().map(|a| a(xi))
    }

    /// Pointwise product; both factors must use the same padding.
    pub fn mul(&self, other: &MellinMultiplier, g: &LogGrid) -> Result<MellinMultiplier> {
        if self.pad != other.pad || self.values.len() != other.values.len() {
            return Err(Error::InvalidArgument("multipliers live on different frequency grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        let closed_form = match (&self.closed_form, &other.closed_form) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.clone(), b.clone());
                Some(Arc::new(move |xi| a(xi) * b(xi)) as FreqFn)
            }
            _ => None,
        };
        let mut m = MellinMultiplier { values, pad: self.pad, closed_form, v_norm_estimate: 0.0 };
        let tv = total_variation(&m, g);
        m.v_norm_estimate = tv.sup + tv.value;
        Ok(m)
    }
}

/// Zero-pads to `pad * n`, multiplies the DFT by `values`, and truncates.
pub(crate) fn convolve_padded(f: &[C64], values: &[C64], n: usize, pad: usize) -> Vec<C64> {
    let m = n * pad;
    let mut buf = vec![C64::new(0.0, 0.0); m];
    buf[..n].copy_from_slice(f);
    fft(&mut buf);
    for (b, a) in buf.iter_mut().zip(values) {
        *b *= a;
    }
    ifft(&mut buf);
    let s = 1.0 / m as f64;
    buf.truncate(n);
    buf.into_iter().map(|v| v * s).collect()
}

/// `Co(a) f = M^{-1} (a Mf)`.
pub fn mellin_convolution(a: &MellinMultiplier, f: &[C64], g: &LogGrid) -> Result<Vec<C64>> {
    check_len(f, g)?;
    if a.values.len() != g.n * a.pad {
        return Err(Error::InvalidArgument("multiplier was sampled for a different grid".into()));
    }
    Ok(convolve_padded(f, &a.values, g.n, a.pad))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TotalVariation {
    pub value: f64,
    pub sup: f64,
    /// Set when the variation is still accumulating at the ends of the
    /// frequency window, so `value` is only a lower bound.
    pub truncated: bool,
}

/// `V(a) = int |a'|`, as the variation of the piecewise-linear interpolant on
/// a refinement of the frequency window `[-pi/dx, pi/dx]`.
pub fn total_variation(a: &MellinMultiplier, g: &LogGrid) -> TotalVariation {
    let vals: Vec<C64> = match &a.closed_form {
        Some(f) => {
            let half = 8 * g.n * a.pad;
            let xmax = PI / g.dx();
            (0..=2 * half).map(|i| f(xmax * (i as f64 - half as f64) / half as f64)).collect()
        }
        None => {
            let m = a.values.len();
            (0..m).map(|i| a.values[(i + m / 2) % m]).collect()
        }
    };
    variation_of_samples(&vals)
}

fn variation_of_samples(vals: &[C64]) -> TotalVariation {
    let m = vals.len();
    let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let value: f64 = diffs.iter().sum();
    let sup = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let edge = (m / 20).max(1);
    let tail: f64 = diffs[..edge.min(diffs.len())].iter().sum::<f64>() + diffs[diffs.len().saturating_sub(edge)..].iter().sum::<f64>();
    TotalVariation { value, sup, truncated: tail > 1e-6 * value.max(1.0) }
}

/// Total variation of a closed-form function of frequency on `[-xi_max, xi_max]`.
pub fn total_variation_fn(a: impl Fn(f64) -> C64, xi_max: f64, points: usize) -> TotalVariation {
    let half = points.max(2) / 2;
    let vals: Vec<C64> = (0..=2 * half).map(|i| a(xi_max * (i as f64 - half as f64) / half as f64)).collect();
    variation_of_samples(&vals)
}

/// `c_p (sup|a| + V(a))`. The constant `c_p` (norm of the Cauchy singular
/// integral on `L^p(R)`) is 1 at `p = 2` and must be supplied otherwise.
pub fn stechkin_bound(a: &MellinMultiplier, g: &LogGrid, p: f64, c_p: Option<f64>) -> Result<f64> {
    let c = match c_p {
        Some(c) => c,
        None if p == 2.0 => 1.0,
        None => return Err(Error::InvalidArgument(format!("the Stechkin constant for p = {p} must be supplied"))),
    };
    let tv = total_variation(a, g);
    Ok(c * (tv.sup + tv.value))
}

pub type SymbolFn = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;
type PhaseFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type XiFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// Symbol `(log t, xi) -> a(t, xi)` of a Mellin pseudodifferential operator.
#[derive(Clone)]
pub struct PdoSymbol {
    pub label: String,
    eval: SymbolFn,
    // `a(x, xi) = e^{i phi(x) xi} b(xi)`, kept so rows cost one `phi` call
    phase: Option<(PhaseFn, XiFn)>,
    pub depends_on_t: bool,
    pub depends_on_xi: bool,
}

impl core::fmt::Debug for PdoSymbol {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PdoSymbol")
            .field("label", &self.label)
            .field("depends_on_t", &self.depends_on_t)
            .field("depends_on_xi", &self.depends_on_xi)
            .finish()
    }
}

impl PdoSymbol {
    pub fn new(label: impl Into<String>, a: impl Fn(f64, f64) -> C64 + Send + Sync + 'static) -> Self {
        PdoSymbol { label: label.into(), eval: Arc::new(a), phase: None, depends_on_t: true, depends_on_xi: true }
    }

    /// Symbol depending on `log t` only.
    pub fn of_t(label: impl Into<String>, c: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        PdoSymbol { label: label.into(), eval: Arc::new(move |x, _| c(x)), phase: None, depends_on_t: true, depends_on_xi: false }
    }

    /// Symbol depending on the frequency only.
    pub fn of_xi(label: impl Into<String>, a: impl Fn(f64) -> C64 + Send + Sync + 'static) -> Self {
        PdoSymbol { label: label.into(), eval: Arc::new(move |_, xi| a(xi)), phase: None, depends_on_t: false, depends_on_xi: true }
    }

    pub fn constant(c: C64) -> Self {
        PdoSymbol { label: format!("{c}"), eval: Arc::new(move |_, _| c), phase: None, depends_on_t: false, depends_on_xi: false }
    }

    /// `e^{i phi(x) xi} b(xi)`.
    pub fn phase(
        label: impl Into<String>,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        b: impl Fn(f64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        let (phi, b): (PhaseFn, XiFn) = (Arc::new(phi), Arc::new(b));
        let (p2, b2) = (phi.clone(), b.clone());
        PdoSymbol {
            label: label.into(),
            eval: Arc::new(move |x, xi| C64::from_polar(1.0, p2(x) * xi) * b2(xi)),
            phase: Some((phi, b)),
            depends_on_t: true,
            depends_on_xi: true,
        }
    }

    pub fn eval(&self, x: f64, xi: f64) -> C64 {
        (self.eval)(x, xi)
    }

    pub fn mul(&self, other: &PdoSymbol) -> PdoSymbol {
        if let (Some((p1, b1)), Some((p2, b2))) = (&self.phase, &other.phase) {
            let (p1, b1, p2, b2) = (p1.clone(), b1.clone(), p2.clone(), b2.clone());
            return PdoSymbol::phase(format!("({})*({})", self.label, other.label), move |x| p1(x) + p2(x), move |xi| b1(xi) * b2(xi));
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        PdoSymbol {
            label: format!("({})*({})", self.label, other.label),
            eval: Arc::new(move |x, xi| a(x, xi) * b(x, xi)),
            phase: None,
            depends_on_t: self.depends_on_t || other.depends_on_t,
            depends_on_xi: self.depends_on_xi || other.depends_on_xi,
        }
    }
}

/// `Op(a) f` by frozen-row quadrature, for several inputs at once:
/// `(Op(a) f)(t_j) = (1/2pi) int a(t_j, xi) t_j^{i xi} (Mf)(xi) dxi`.
pub fn mellin_pdo_many(a: &PdoSymbol, fs: &[Vec<C64>], g: &LogGrid, pad: usize) -> Result<Vec<Vec<C64>>> {
    if pad == 0 || !pad.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("padding factor {pad} must be a power of two")));
    }
    let n = g.n;
    let m = n * pad;
    let mut spectra = Vec::with_capacity(fs.len());
    for f in fs {
        check_len(f, g)?;
        let mut buf = vec![C64::new(0.0, 0.0); m];
        buf[..n].copy_from_slice(f);
        fft(&mut buf);
        spectra.push(buf);
    }
    let freqs = g.frequencies(m);
    // e^{i xi_k (x_j - x_min)} = e^{2 pi i jk/m}
    let table: Vec<C64> = (0..m).map(|r| C64::from_polar(1.0, 2.0 * PI * r as f64 / m as f64)).collect();
    let mut out = vec![vec![C64::new(0.0, 0.0); n]; fs.len()];
    let mut row = vec![C64::new(0.0, 0.0); m];
    let scale = 1.0 / m as f64;
    let bvals: Option<Vec<C64>> = a.phase.as_ref().map(|(_, b)| freqs.iter().map(|&xi| b(xi)).collect());
    for j in 0..n {
        let x = g.x(j);
        match (&a.phase, &bvals) {
            (Some((phi, _)), Some(bv)) => {
                // freqs[k] = (k or k - m) * dxi, so the phase is a geometric
                // progression in k; re-anchored every 256 steps
                let w = phi(x);
                let dxi = freqs[1];
                let theta = w * dxi + 2.0 * PI * j as f64 / m as f64;
                let step = C64::from_polar(1.0, theta);
                let wrap = C64::from_polar(1.0, -w * dxi * m as f64);
                let mut z = C64::new(1.0, 0.0);
                for k in 0..m {
                    if k % 256 == 0 {
                        z = C64::from_polar(1.0, theta * k as f64);
                    }
                    let e = if k < m / 2 { z } else { z * wrap };
                    row[k] = bv[k] * e;
                    z *= step;
                }
            }
            _ => {
                for k in 0..m {
                    row[k] = a.eval(x, freqs[k]) * table[(j * k) % m];
                }
            }
        }
        for (s, o) in spectra.iter().zip(out.iter_mut()) {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..m {
                acc += row[k] * s[k];
            }
            o[j] = acc * scale;
        }
    }
    Ok(out)
}

pub fn mellin_pdo(a: &PdoSymbol, f: &[C64], g: &LogGrid, pad: usize) -> Result<Vec<C64>> {
    Ok(mellin_pdo_many(a, &[f.to_vec()], g, pad)?.pop().expect("one output"))
}

/// Localized test functions with the window on which residuals are measured.
#[derive(Clone, Debug)]
pub struct Testset {
    pub functions: Vec<Vec<C64>>,
    pub labels: Vec<String>,
    pub window: (f64, f64),
}

impl Testset {
    /// Gaussians `exp(-(x - c)^2 / (2 sigma^2))` in `x = log t`.
    pub fn gaussians(g: &LogGrid, centers: &[f64], sigma: f64, window: (f64, f64)) -> Testset {
        let functions = centers
            .iter()
            .map(|&c| g.sample(|x| C64::new((-(x - c) * (x - c) / (2.0 * sigma * sigma)).exp(), 0.0)))
            .collect();
        let labels = centers.iter().map(|c| format!("gauss(c={c}, sigma={sigma})")).collect();
        Testset { functions, labels, window }
    }

    /// Five Gaussians at `center + L * {-1/12, -1/24, 0, 1/24, 1/12}` with
    /// `sigma = L/48`, measured on the inner half of the grid.
    pub fn standard(g: &LogGrid) -> Testset {
        let (c, l) = (g.center(), g.length());
        let centers: Vec<f64> = [-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|k| c + k * l / 24.0).collect();
        Testset::gaussians(g, &centers, l / 48.0, g.inner_window())
    }

    /// `max_f ||residual(f)||_window / ||f||`, with the per-function ratios.
    pub fn max_relative(
        &self,
        g: &LogGrid,
        p: f64,
        measure: Measure,
        mut residual: impl FnMut(&[C64]) -> Result<Vec<C64>>,
    ) -> Result<(f64, Vec<f64>)> {
        let mut per = Vec::with_capacity(self.functions.len());
        for f in &self.functions {
            let r = residual(f)?;
            let num = g.norm(&r, p, measure, Some(self.window));
            let den = g.norm(f, p, measure, None);
            per.push(num / den);
        }
        Ok((per.iter().copied().fold(0.0, f64::max), per))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DefectReport {
    pub max_ratio: f64,
    pub per_function: Vec<f64>,
}

/// `max_f ||(Op(a)Op(b) - Op(ab)) f|| / ||f||` in `L^p(dt/t)` on the testset window.
pub fn pdo_composition_defect(a: &PdoSymbol, b: &PdoSymbol, tests: &Testset, g: &LogGrid, pad: usize, p: f64) -> Result<DefectReport> {
    let ab = a.mul(b);
    let bf = mellin_pdo_many(b, &tests.functions, g, pad)?;
    let abf = mellin_pdo_many(a, &bf, g, pad)?;
    let direct = mellin_pdo_many(&ab, &tests.functions, g, pad)?;
    let mut per = Vec::new();
    for i in 0..tests.functions.len() {
        let d: Vec<C64> = abf[i].iter().zip(&direct[i]).map(|(u, v)| u - v).collect();
        per.push(g.norm(&d, p, Measure::Haar, Some(tests.window)) / g.norm(&tests.functions[i], p, Measure::Haar, None));
    }
    Ok(DefectReport { max_ratio: per.iter().copied().fold(0.0, f64::max), per_function: per })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies_are_symmetric() {
        let g = LogGrid::new(-1.0, 1.0, 8).unwrap();
        let f = g.frequencies(8);
        assert_eq!(f[0], 0.0);
        assert!((f[1] + f[7]).abs() < 1e-14);
        assert!(f[4] < 0.0);
    }

    #[test]
    fn grid_validation() {
        assert!(LogGrid::new(-1.0, 1.0, 100).is_err());
        assert!(LogGrid::new(1.0, -1.0, 64).is_err());
        assert!(LogGrid::new(-1.0, 1.0, 64).is_ok());
    }
}
