//! Double-double arithmetic: unevaluated sums `hi + lo` of two `f64`s giving
//! roughly 106 bits of significand.
//!
//! The sum evaluators difference quantities like `p1^c + p2^c - p3^c - p4^c`
//! and reduce phases `p^c * x` modulo 1 where the product can reach 1e12 and
//! beyond; both lose too many bits in plain `f64`. Everything here is the
//! classical error-free-transformation toolkit (Dekker/Knuth two_sum and
//! FMA-based two_prod) plus `exp`/`ln`/`sin`/`cos` by argument reduction and
//! series, enough for ~1e-30 relative accuracy on the ranges we use.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Error-free sum: `a + b = s + e` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Error-free sum assuming `|a| >= |b|`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Error-free product via FMA: `a * b = p + e` exactly.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// A double-double value. Invariant: `lo` is no larger than half an ulp of `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

pub const TWO_PI: Dd = Dd {
    hi: std::f64::consts::TAU,
    lo: 2.449_293_598_294_706_4e-16,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two `f64`s.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Dd { hi: p, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, mut e) = two_prod(self.hi, b);
        e = self.lo.mul_add(b, e);
        let (s, e2) = quick_two_sum(p, e);
        Dd { hi: s, lo: e2 }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    /// Integer power by binary exponentiation.
    pub fn powi(self, n: u32) -> Self {
        let mut base = self;
        let mut n = n;
        let mut acc = Dd::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// Natural log; requires a positive, finite argument.
    pub fn ln(self) -> Self {
        assert!(self.hi > 0.0, "dd ln of non-positive value");
        // self = m * 2^e with m in [1, 2); then center m around 1 and use
        // ln m = 2 atanh((m-1)/(m+1)).
        let e = self.hi.log2().floor();
        let scale = (-e) as i32;
        let m = Dd {
            hi: libm_ldexp(self.hi, scale),
            lo: libm_ldexp(self.lo, scale),
        };
        // t = (m-1)/(m+1), |t| <= 1/3
        let t = (m - Dd::ONE) / (m + Dd::ONE);
        let t2 = t * t;
        // 2 * (t + t^3/3 + t^5/5 + ...); divisors kept exact
        let mut term = t;
        let mut sum = t;
        for k in 1..32 {
            term = term * t2;
            let add = term / Dd::from_f64(2.0 * k as f64 + 1.0);
            sum = sum + add;
            if add.hi.abs() < 1e-35 * sum.hi.abs() {
                break;
            }
        }
        sum.mul_f64(2.0) + LN2.mul_f64(e)
    }

    /// Exponential; assumes `|x| < 700`.
    pub fn exp(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        let n = (self.hi / LN2.hi).round();
        let r = self - LN2.mul_f64(n);
        // Taylor on |r| <= ln2/2; divisors kept exact
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for k in 1..32 {
            term = (term * r) / Dd::from_f64(k as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-35 * sum.hi.abs() {
                break;
            }
        }
        let s = n as i32;
        Dd {
            hi: libm_ldexp(sum.hi, s),
            lo: libm_ldexp(sum.lo, s),
        }
    }

    /// `base^exponent` for a positive integer base and arbitrary `f64`
    /// exponent. Integral exponents go through exact binary exponentiation.
    pub fn pow_u64(base: u64, exponent: f64) -> Self {
        assert!(base >= 1, "pow_u64 base must be >= 1");
        if exponent == 0.0 {
            return Dd::ONE;
        }
        if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
            let p = Dd::from_f64(base as f64).powi(exponent.abs() as u32);
            return if exponent > 0.0 { p } else { Dd::ONE / p };
        }
        (Dd::from_f64(base as f64).ln().mul_f64(exponent)).exp()
    }

    /// `base^exponent` for positive real base.
    pub fn pow_f64(base: f64, exponent: f64) -> Self {
        assert!(base > 0.0);
        (Dd::from_f64(base).ln().mul_f64(exponent)).exp()
    }

    /// `base^exponent` with both sides in double-double precision.
    pub fn pow_dd(base: Dd, exponent: Dd) -> Self {
        assert!(base.hi > 0.0);
        (base.ln() * exponent).exp()
    }

    /// Reduce to the centered fractional part in [-1/2, 1/2).
    ///
    /// Exact while `|hi|` stays below 2^52 (all uses are guarded upstream by
    /// the oscillation budgets).
    pub fn reduce_mod1(self) -> Dd {
        let n = self.hi.round();
        let mut r = self - Dd::from_f64(n);
        if r.hi >= 0.5 {
            r = r - Dd::ONE;
        } else if r.hi < -0.5 {
            r = r + Dd::ONE;
        }
        r
    }

    /// sin(2*pi*self) and cos(2*pi*self) for `self` already reduced to
    /// [-1/2, 1/2). Quadrant split keeps the series argument below pi/4.
    pub fn sincos_2pi(self) -> (Dd, Dd) {
        let q = (self.hi * 4.0).round();
        let r = (self - Dd::from_f64(q * 0.25)) * TWO_PI;
        let (s, c) = sincos_small(r);
        match q as i64 {
            0 => (s, c),
            1 => (c, -s),
            -1 => (-c, s),
            2 | -2 => (-s, -c),
            _ => unreachable!("reduced argument out of range"),
        }
    }
}

/// sin/cos by Taylor series, |arg| <= pi/4 + eps.
fn sincos_small(r: Dd) -> (Dd, Dd) {
    let r2 = r * r;
    let mut term = r;
    let mut sin = r;
    let mut k = 1.0_f64;
    loop {
        term = -((term * r2) / Dd::from_f64((k + 1.0) * (k + 2.0)));
        sin = sin + term;
        k += 2.0;
        if term.hi.abs() < 1e-35 {
            break;
        }
    }
    let mut term = Dd::ONE;
    let mut cos = Dd::ONE;
    let mut k = 0.0_f64;
    loop {
        term = -((term * r2) / Dd::from_f64((k + 1.0) * (k + 2.0)));
        cos = cos + term;
        k += 2.0;
        if term.hi.abs() < 1e-35 {
            break;
        }
    }
    (sin, cos)
}

#[inline]
fn libm_ldexp(x: f64, e: i32) -> f64 {
    // Powers of two up to +-1074 scale exactly.
    x * f64::powi(2.0, e)
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let e = e + self.lo + rhs.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, mut e) = two_prod(self.hi, rhs.hi);
        e += self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs.mul_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r2 = r - rhs.mul_f64(q2);
        let q3 = r2.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd::new(hi, lo + q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

/// Kahan-Babuska-Neumaier compensated accumulator for plain `f64` streams.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
