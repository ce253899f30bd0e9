//! Complex numbers stored as a unit phase times `exp(log_mag)`.
//!
//! Used by the expression evaluator so that `t = e^x` stays usable for
//! `|x|` far beyond the `f64` exponent range.

use crate::C64;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Wide {
    /// Zero, or `1 <= |mant| < 2` after normalization.
    mant: C64,
    /// Integer-valued binary exponent.
    e2: f64,
}

const LN2_HI: f64 = 6.931_471_803_691_238e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;

fn pow2(e: f64) -> f64 {
    // two factors keep subnormal results reachable
    let h = (e / 2.0).trunc();
    2f64.powi(h as i32) * 2f64.powi((e - h) as i32)
}

impl Wide {
    pub const ZERO: Wide = Wide { mant: C64::new(0.0, 0.0), e2: f64::NEG_INFINITY };

    pub fn nan() -> Wide {
        Wide { mant: C64::new(f64::NAN, f64::NAN), e2: f64::NAN }
    }

    fn normalized(mant: C64, e2: f64) -> Wide {
        if !(mant.re.is_finite() && mant.im.is_finite()) || e2.is_nan() {
            return Wide::nan();
        }
        let r = mant.norm();
        if r == 0.0 {
            return Wide::ZERO;
        }
        let k = r.log2().floor();
        let mut m = mant * pow2(-k);
        let mut e = e2 + k;
        // guard against log2 rounding at exact powers of two
        let rm = m.norm();
        if rm >= 2.0 {
            m /= 2.0;
            e += 1.0;
        } else if rm < 1.0 {
            m *= 2.0;
            e -= 1.0;
        }
        Wide { mant: m, e2: e }
    }

    /// `e^x` for real `x`.
    pub fn exp_real(x: f64) -> Wide {
        if x.is_nan() || x == f64::INFINITY {
            return Wide::nan();
        }
        if x == f64::NEG_INFINITY {
            return Wide::ZERO;
        }
        let k = (x / core::f64::consts::LN_2).round();
        let r = (x - k * LN2_HI) - k * LN2_LO;
        Wide::normalized(C64::new(r.exp(), 0.0), k)
    }

    pub fn from_c64(z: C64) -> Wide {
        Wide::normalized(z, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.re == 0.0 && self.mant.im == 0.0 && self.e2 == f64::NEG_INFINITY
    }

    pub fn is_valid(&self) -> bool {
        !self.e2.is_nan() && self.mant.re.is_finite() && self.mant.im.is_finite()
    }

    pub fn to_c64(self) -> C64 {
        if self.is_zero() {
            return C64::new(0.0, 0.0);
        }
        if !self.is_valid() {
            return C64::new(f64::NAN, f64::NAN);
        }
        let e = self.e2.clamp(-1200.0, 1200.0);
        let s = pow2(e);
        let part = |c: f64| if c == 0.0 { 0.0 } else { c * s };
        C64::new(part(self.mant.re), part(self.mant.im))
    }

    pub fn add(self, o: Wide) -> Wide {
        if !self.is_valid() || !o.is_valid() {
            return Wide::nan();
        }
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let e = self.e2.max(o.e2);
        let da = self.e2 - e;
        let db = o.e2 - e;
        let part = |m: C64, d: f64| if d < -1100.0 { C64::new(0.0, 0.0) } else { m * pow2(d) };
        Wide::normalized(part(self.mant, da) + part(o.mant, db), e)
    }

    pub fn neg(self) -> Wide {
        Wide { mant: -self.mant, e2: self.e2 }
    }

    pub fn sub(self, o: Wide) -> Wide {
        self.add(o.neg())
    }

    pub fn mul(self, o: Wide) -> Wide {
        if !self.is_valid() || !o.is_valid() {
            return Wide::nan();
        }
        if self.is_zero() || o.is_zero() {
            return Wide::ZERO;
        }
        Wide::normalized(self.mant * o.mant, self.e2 + o.e2)
    }

    pub fn recip(self) -> Wide {
        if !self.is_valid() || self.is_zero() {
            return Wide::nan();
        }
        Wide::normalized(self.mant.inv(), -self.e2)
    }

    pub fn div(self, o: Wide) -> Wide {
        self.mul(o.recip())
    }

    pub fn powi(self, k: i32) -> Wide {
        if k == 0 {
            return Wide::from_c64(C64::new(1.0, 0.0));
        }
        if self.is_zero() {
            return if k > 0 { Wide::ZERO } else { Wide::nan() };
        }
        let mut acc = Wide::from_c64(C64::new(1.0, 0.0));
        let mut base = if k > 0 { self } else { self.recip() };
        let mut n = k.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            n >>= 1;
        }
        acc
    }

    pub fn abs(self) -> Wide {
        if self.is_zero() || !self.is_valid() {
            return self;
        }
        Wide { mant: C64::new(self.mant.norm(), 0.0), e2: self.e2 }
    }

    pub fn sqrt(self) -> Wide {
        if self.is_zero() || !self.is_valid() {
            return self;
        }
        let (m, e) = if self.e2 % 2.0 != 0.0 { (self.mant * 2.0, self.e2 - 1.0) } else { (self.mant, self.e2) };
        Wide::normalized(m.sqrt(), e / 2.0)
    }

    /// `ln |z|`.
    pub fn ln_abs(&self) -> f64 {
        self.mant.norm().ln() + self.e2 * core::f64::consts::LN_2
    }

    /// Principal logarithm; finite for any nonzero value.
    pub fn ln(self) -> Wide {
        if self.is_zero() || !self.is_valid() {
            return Wide::nan();
        }
        Wide::from_c64(C64::new(self.ln_abs(), self.mant.arg()))
    }

    /// `ln(1 + z)` computed without cancellation for small `z`.
    pub fn ln_1p(self) -> Wide {
        if !self.is_valid() {
            return Wide::nan();
        }
        if self.e2 < 1020.0 {
            let z = self.to_c64();
            if z.norm() < 0.5 {
                let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
                return Wide::from_c64(C64::new(re, z.im.atan2(1.0 + z.re)));
            }
        }
        let one = Wide::from_c64(C64::new(1.0, 0.0));
        one.add(self).ln()
    }

    pub fn exp(self) -> Wide {
        let z = self.to_c64();
        if z.re == f64::NEG_INFINITY && z.im.is_finite() {
            return Wide::ZERO;
        }
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Wide::nan();
        }
        Wide::exp_real(z.re).mul(Wide::from_c64(C64::new(z.im.cos(), z.im.sin())))
    }

    /// Applies an ordinary complex function; large arguments are rejected.
    pub fn map(self, f: impl Fn(C64) -> C64) -> Wide {
        let z = self.to_c64();
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Wide::nan();
        }
        Wide::from_c64(f(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_with_huge_exponent() {
        let t = Wide::exp_real(1e10);
        let one = Wide::from_c64(C64::new(1.0, 0.0));
        let two = Wide::from_c64(C64::new(2.0, 0.0));
        let v = two.mul(t).div(one.add(t)).to_c64();
        assert!((v - C64::new(2.0, 0.0)).norm() < 1e-15);
        let tiny = Wide::exp_real(-1e10);
        let w = two.div(one.add(tiny)).to_c64();
        assert!((w - C64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn add_cancels_to_zero() {
        let a = Wide::from_c64(C64::new(1.5, -2.0));
        assert!(a.sub(a).is_zero());
    }

    #[test]
    fn log1p_small() {
        let z = Wide::from_c64(C64::new(1e-12, 0.0));
        assert!((z.ln_1p().to_c64().re - (1e-12 - 5e-25)).abs() < 1e-27);
    }
}
