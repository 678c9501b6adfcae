//! Double-double real numbers: an unevaluated sum `hi + lo` with
//! `|lo| ≤ ulp(hi)/2`, giving about 106 significant bits.
//!
//! Addition, multiplication, division and square root are double-double
//! accurate (Joldes, Muller, Popescu 2017). Transcendental functions are
//! evaluated at `f64` accuracy with a first-order correction for `lo`.

use std::cmp::Ordering;
use std::fmt;
use std::num::FpCategory;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

#[inline]
fn fast_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl Dd {
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// `hi + lo`, renormalized.
    pub fn new(hi: f64, lo: f64) -> Self {
        two_sum(hi, lo)
    }

    pub const fn hi(self) -> f64 {
        self.hi
    }

    pub const fn lo(self) -> f64 {
        self.lo
    }

    fn lift_f64(self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Self {
        let v = f(self.hi);
        if !v.is_finite() || self.lo == 0.0 {
            return Self::from_f64(v);
        }
        Self::new(v, df(self.hi) * self.lo)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.hi + self.lo)
    }
}

impl Neg for Dd {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let s = two_sum(self.hi, rhs.hi);
        let t = two_sum(self.lo, rhs.lo);
        let v = fast_two_sum(s.hi, s.lo + t.hi);
        fast_two_sum(v.hi, t.lo + v.lo)
    }
}

impl Sub for Dd {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let c = two_prod(self.hi, rhs.hi);
        let t = self.lo.mul_add(rhs.hi, self.hi * rhs.lo);
        fast_two_sum(c.hi, c.lo + t)
    }
}

impl Div for Dd {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        // long division: first quotient digit, exact remainder, correction
        let q1 = self.hi / rhs.hi;
        if !q1.is_finite() {
            return Self::from_f64(q1);
        }
        let r = self - rhs * Self::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Self::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let q = fast_two_sum(q1, q2);
        q + Self::from_f64(q3)
    }
}

impl Rem for Dd {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        self - (self / rhs).trunc() * rhs
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for Dd {
            fn $m(&mut self, rhs: Self) {
                *self = *self $op rhs;
            }
        }
    )*};
}

assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Self::from_f64(1.0)
    }
}

impl Num for Dd {
    type FromStrRadixErr = <f64 as Num>::FromStrRadixErr;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Self::from_f64)
    }
}

impl ToPrimitive for Dd {
    fn to_i64(&self) -> Option<i64> {
        let t = self.trunc();
        t.hi.to_i64().and_then(|h| t.lo.to_i64().and_then(|l| h.checked_add(l)))
    }

    fn to_u64(&self) -> Option<u64> {
        self.to_i64().and_then(|v| u64::try_from(v).ok()).or_else(|| (self.hi + self.lo).to_u64())
    }

    fn to_f64(&self) -> Option<f64> {
        Some(self.hi + self.lo)
    }
}

impl FromPrimitive for Dd {
    fn from_i64(n: i64) -> Option<Self> {
        let hi = n as f64;
        // the rounding residual of a 64-bit integer fits in an f64
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::new(hi, lo))
    }

    fn from_u64(n: u64) -> Option<Self> {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        Some(Self::new(hi, lo))
    }

    fn from_f64(n: f64) -> Option<Self> {
        Some(Self::from_f64(n))
    }
}

impl NumCast for Dd {
    fn from<T: ToPrimitive>(n: T) -> Option<Self> {
        n.to_f64().map(Self::from_f64)
    }
}

impl Float for Dd {
    fn nan() -> Self {
        Self::from_f64(f64::NAN)
    }

    fn infinity() -> Self {
        Self::from_f64(f64::INFINITY)
    }

    fn neg_infinity() -> Self {
        Self::from_f64(f64::NEG_INFINITY)
    }

    fn neg_zero() -> Self {
        Self::from_f64(-0.0)
    }

    fn min_value() -> Self {
        Self::from_f64(f64::MIN)
    }

    fn min_positive_value() -> Self {
        Self::from_f64(f64::MIN_POSITIVE)
    }

    fn epsilon() -> Self {
        // 2^-104
        Self::from_f64(f64::EPSILON * f64::EPSILON / 4.0)
    }

    fn max_value() -> Self {
        Self::from_f64(f64::MAX)
    }

    fn is_nan(self) -> bool {
        self.hi.is_nan()
    }

    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }

    fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }

    fn classify(self) -> FpCategory {
        self.hi.classify()
    }

    fn floor(self) -> Self {
        let h = self.hi.floor();
        if h == self.hi {
            Self::new(h, self.lo.floor())
        } else {
            Self::from_f64(h)
        }
    }

    fn ceil(self) -> Self {
        let h = self.hi.ceil();
        if h == self.hi {
            Self::new(h, self.lo.ceil())
        } else {
            Self::from_f64(h)
        }
    }

    fn round(self) -> Self {
        (self + Self::from_f64(0.5)).floor()
    }

    fn trunc(self) -> Self {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }

    fn fract(self) -> Self {
        self - self.trunc()
    }

    fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn signum(self) -> Self {
        Self::from_f64(self.hi.signum())
    }

    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }

    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }

    fn mul_add(self, a: Self, b: Self) -> Self {
        self * a + b
    }

    fn recip(self) -> Self {
        Self::one() / self
    }

    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    fn powf(self, n: Self) -> Self {
        (n * self.ln()).exp()
    }

    fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(self.hi.sqrt());
        }
        // one Newton step from the f64 root
        let x = self.hi.sqrt();
        let r = self - two_prod(x, x);
        Self::new(x, r.hi / (2.0 * x))
    }

    fn exp(self) -> Self {
        self.lift_f64(f64::exp, f64::exp)
    }

    fn exp2(self) -> Self {
        self.lift_f64(f64::exp2, |x| x.exp2() * std::f64::consts::LN_2)
    }

    fn ln(self) -> Self {
        self.lift_f64(f64::ln, f64::recip)
    }

    fn log(self, base: Self) -> Self {
        self.ln() / base.ln()
    }

    fn log2(self) -> Self {
        self.lift_f64(f64::log2, |x| 1.0 / (x * std::f64::consts::LN_2))
    }

    fn log10(self) -> Self {
        self.lift_f64(f64::log10, |x| 1.0 / (x * std::f64::consts::LN_10))
    }

    fn max(self, other: Self) -> Self {
        if self >= other || other.is_nan() {
            self
        } else {
            other
        }
    }

    fn min(self, other: Self) -> Self {
        if self <= other || other.is_nan() {
            self
        } else {
            other
        }
    }

    fn abs_sub(self, other: Self) -> Self {
        if self > other {
            self - other
        } else {
            Self::zero()
        }
    }

    fn cbrt(self) -> Self {
        self.lift_f64(f64::cbrt, |x| 1.0 / (3.0 * x.cbrt() * x.cbrt()))
    }

    fn hypot(self, other: Self) -> Self {
        let (a, b) = (self.abs(), other.abs());
        let (big, small) = if a >= b { (a, b) } else { (b, a) };
        if big.is_zero() || big.is_infinite() {
            return big;
        }
        let r = small / big;
        big * (Self::one() + r * r).sqrt()
    }

    fn sin(self) -> Self {
        self.lift_f64(f64::sin, f64::cos)
    }

    fn cos(self) -> Self {
        self.lift_f64(f64::cos, |x| -x.sin())
    }

    fn tan(self) -> Self {
        self.lift_f64(f64::tan, |x| 1.0 / (x.cos() * x.cos()))
    }

    fn asin(self) -> Self {
        self.lift_f64(f64::asin, |x| 1.0 / (1.0 - x * x).sqrt())
    }

    fn acos(self) -> Self {
        self.lift_f64(f64::acos, |x| -1.0 / (1.0 - x * x).sqrt())
    }

    fn atan(self) -> Self {
        self.lift_f64(f64::atan, |x| 1.0 / (1.0 + x * x))
    }

    fn atan2(self, other: Self) -> Self {
        Self::from_f64((self.hi + self.lo).atan2(other.hi + other.lo))
    }

    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }

    fn exp_m1(self) -> Self {
        self.lift_f64(f64::exp_m1, f64::exp)
    }

    fn ln_1p(self) -> Self {
        self.lift_f64(f64::ln_1p, |x| 1.0 / (1.0 + x))
    }

    fn sinh(self) -> Self {
        self.lift_f64(f64::sinh, f64::cosh)
    }

    fn cosh(self) -> Self {
        self.lift_f64(f64::cosh, f64::sinh)
    }

    fn tanh(self) -> Self {
        self.lift_f64(f64::tanh, |x| 1.0 / (x.cosh() * x.cosh()))
    }

    fn asinh(self) -> Self {
        self.lift_f64(f64::asinh, |x| 1.0 / (x * x + 1.0).sqrt())
    }

    fn acosh(self) -> Self {
        self.lift_f64(f64::acosh, |x| 1.0 / (x * x - 1.0).sqrt())
    }

    fn atanh(self) -> Self {
        self.lift_f64(f64::atanh, |x| 1.0 / (1.0 - x * x))
    }

    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }
}

const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };
const E: Dd = Dd { hi: std::f64::consts::E, lo: 1.445_646_891_729_250_2e-16 };
const LN_2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };
const LN_10: Dd = Dd { hi: std::f64::consts::LN_10, lo: -2.170_756_223_382_249_4e-16 };
const SQRT_2: Dd = Dd { hi: std::f64::consts::SQRT_2, lo: -9.667_293_313_452_913e-17 };

impl FloatConst for Dd {
    fn E() -> Self {
        E
    }

    fn FRAC_1_PI() -> Self {
        PI.recip()
    }

    fn FRAC_1_SQRT_2() -> Self {
        SQRT_2.recip()
    }

    fn FRAC_2_PI() -> Self {
        Self::from_f64(2.0) / PI
    }

    fn FRAC_2_SQRT_PI() -> Self {
        Self::from_f64(2.0) / PI.sqrt()
    }

    fn FRAC_PI_2() -> Self {
        PI * Self::from_f64(0.5)
    }

    fn FRAC_PI_3() -> Self {
        PI / Self::from_f64(3.0)
    }

    fn FRAC_PI_4() -> Self {
        PI * Self::from_f64(0.25)
    }

    fn FRAC_PI_6() -> Self {
        PI / Self::from_f64(6.0)
    }

    fn FRAC_PI_8() -> Self {
        PI * Self::from_f64(0.125)
    }

    fn LN_10() -> Self {
        LN_10
    }

    fn LN_2() -> Self {
        LN_2
    }

    fn LOG10_E() -> Self {
        LN_10.recip()
    }

    fn LOG2_E() -> Self {
        LN_2.recip()
    }

    fn PI() -> Self {
        PI
    }

    fn SQRT_2() -> Self {
        SQRT_2
    }

    fn TAU() -> Self {
        PI * Self::from_f64(2.0)
    }

    fn LOG10_2() -> Self {
        LN_2 / LN_10
    }

    fn LOG2_10() -> Self {
        LN_10 / LN_2
    }
}
