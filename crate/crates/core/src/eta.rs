//! Binomial weights `a_{n,N}`, the finite series `η_N(s)`, the entire
//! prefactor `h_N(s)` and the reference value of `η(s)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::scalar::{lift, lower, pow_neg, Real};
use crate::{special, Rational, C64};

/// Largest `N` accepted by [`WeightTable::new`].
pub const WEIGHT_CAP: usize = 512;

/// Default exclusion radius around poles and forbidden points.
pub const DEFAULT_GUARD: f64 = 1e-6;

/// Evaluation point `s = re + i·im`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SParam {
    pub re: f64,
    pub im: f64,
}

impl SParam {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(domain(format!("s = {re}+{im}i is not finite")));
        }
        Ok(Self { re, im })
    }

    pub const fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn complex(self) -> C64 {
        C64::new(self.re, self.im)
    }

    pub fn is_real(self) -> bool {
        self.im == 0.0
    }

    pub fn distance_to(self, re: f64, im: f64) -> f64 {
        (self.complex() - C64::new(re, im)).norm()
    }

    /// Reject `s` within `guard` of `-2, -4, …, -2(N-1)`.
    pub fn check_poles(self, n: usize, guard: f64) -> Result<()> {
        for k in 1..n {
            let pole = -2.0 * k as f64;
            if self.distance_to(pole, 0.0) <= guard {
                return Err(Error::PoleError(format!("s = {self} is within {guard} of {pole}")));
            }
        }
        Ok(())
    }

    /// Reject `s` within `guard` of zero.
    pub fn check_nonzero(self, guard: f64, what: &str) -> Result<()> {
        if self.complex().norm() <= guard {
            return Err(domain(format!("{what} undefined at s=0")));
        }
        Ok(())
    }
}

impl fmt::Display for SParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0.0 {
            write!(f, "{}", self.re)
        } else if self.im < 0.0 {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl From<f64> for SParam {
    fn from(re: f64) -> Self {
        Self::real(re)
    }
}

impl FromStr for SParam {
    type Err = Error;

    /// Parses `RE`, `RE+IMi`, `RE-IMi` or `IMi`.
    fn from_str(text: &str) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || domain(format!("cannot parse s = {text:?}; expected RE[+IMi]"));
        let num = |p: &str| p.parse::<f64>().map_err(|_| bad());
        let Some(body) = t.strip_suffix('i') else {
            return SParam::new(num(&t)?, 0.0);
        };
        let bytes = body.as_bytes();
        // the split is the last sign that is neither leading nor an exponent sign
        let split =
            (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let imag = |p: &str| match p {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => num(p),
        };
        match split {
            Some(k) => SParam::new(num(&body[..k])?, imag(&body[k..])?),
            None => SParam::new(0.0, imag(body)?),
        }
    }
}

/// Exact weights `a_{1,N}, …, a_{N,N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    n: usize,
    weights: Vec<Rational>,
}

impl WeightTable {
    /// Build from `a_{n,N} = ½ ∏_{j≠n} j²/(j²−n²)` and confirm against the
    /// binomial form `(-1)^{n-1} C(2N, N−n) / C(2N, N)`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("N must be positive"));
        }
        if n > WEIGHT_CAP {
            return Err(Error::CapExceeded { what: "N", value: n, cap: WEIGHT_CAP });
        }
        let weights: Vec<Rational> = (1..=n).map(|k| product_weight(k, n)).collect();
        let binomial = binomial_weights(n);
        if weights != binomial {
            return Err(Error::OracleUnstable(format!("weight closed forms disagree at N={n}")));
        }
        Ok(Self { n, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.weights
    }

    /// `a_{k,N}` with `k` counted from 1.
    pub fn get(&self, k: usize) -> &Rational {
        &self.weights[k - 1]
    }

    pub fn sum(&self) -> Rational {
        self.weights.iter().fold(Rational::zero(), |acc, w| acc + w)
    }

    pub fn signs_alternate(&self) -> bool {
        self.weights.iter().enumerate().all(|(k, w)| if k % 2 == 0 { w.is_positive() } else { w.is_negative() })
    }

    /// Weights rounded into `T` with a correction term, so double-double
    /// receives more than 53 bits.
    pub fn to_real<T: Real>(&self) -> Vec<T> {
        self.weights.iter().map(rational_to_real).collect()
    }
}

/// Round an exact rational into `T`, carrying the `f64` residual.
pub fn rational_to_real<T: Real>(r: &Rational) -> T {
    let hi = r.to_f64().unwrap_or(f64::NAN);
    let Some(exact_hi) = Rational::from_float(hi) else {
        return T::of(hi);
    };
    let lo = (r - exact_hi).to_f64().unwrap_or(0.0);
    T::of(hi) + T::of(lo)
}

/// `a_{k,N} = ½ ∏_{j≠k} j²/(j²−k²)` exactly.
pub fn product_weight(k: usize, n: usize) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    let k2 = (k * k) as i64;
    for j in (1..=n).filter(|&j| j != k) {
        let j2 = (j * j) as i64;
        num *= j2;
        den *= j2 - k2;
    }
    Rational::new(num, den * 2)
}

/// `a_{k,N} = (-1)^{k-1} C(2N, N−k)/C(2N, N)` for `k = 1, …, N`.
pub fn binomial_weights(n: usize) -> Vec<Rational> {
    // row C(2N, m) for m = 0..=N
    let mut row = Vec::with_capacity(n + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for m in 1..=n {
        c = c * (2 * n - m + 1) / m;
        row.push(c.clone());
    }
    let central = row[n].clone();
    (1..=n)
        .map(|k| {
            let w = Rational::new(row[n - k].clone(), central.clone());
            if k % 2 == 1 {
                w
            } else {
                -w
            }
        })
        .collect()
}

/// Floating weights by the ratio recurrence `|a_n| = |a_{n-1}|·(N−n+1)/(N+n)`.
///
/// Never forms a binomial coefficient, so it does not overflow for any `N`.
pub fn weights_recurrence<T: Real>(n: usize) -> Vec<T> {
    let big_n = T::of_usize(n);
    let mut v = T::one();
    (1..=n)
        .map(|k| {
            let k_t = T::of_usize(k);
            v = v * (big_n - k_t + T::one()) / (big_n + k_t);
            if k % 2 == 1 {
                v
            } else {
                -v
            }
        })
        .collect()
}

/// Representation that produced an [`EvalResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Series,
    Determinant,
    Tridiag,
    Contfrac,
    Mc,
    Ensemble,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Determinant => "determinant",
            Method::Tridiag => "tridiag",
            Method::Contfrac => "contfrac",
            Method::Mc => "mc",
            Method::Ensemble => "ensemble",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Method-specific diagnostics.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition_estimate: Option<f64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub ill_conditioned: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: C64,
    pub method: Method,
    #[serde(rename = "N")]
    pub n: usize,
    pub meta: Diagnostics,
}

impl EvalResult {
    pub fn plain(value: C64, method: Method, n: usize) -> Self {
        Self { value, method, n, meta: Diagnostics::default() }
    }
}

/// `Σ_{n≤N} a_{n,N} n^{-s}` in any real type, given weights in that type.
pub fn eta_series_with<T: Real>(s: Complex<T>, weights: &[T]) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    // smallest terms first
    for (k, w) in weights.iter().enumerate().rev() {
        acc = acc + pow_neg(T::of_usize(k + 1), s) * *w;
    }
    acc
}

/// The finite series `η_N(s)` in double precision.
pub fn eta_series(s: SParam, n: usize) -> Result<EvalResult> {
    let weights = WeightTable::new(n)?.to_real::<f64>();
    Ok(EvalResult::plain(eta_series_with(s.complex(), &weights), Method::Series, n))
}

/// `η_N(s)` exactly at `s ∈ {0, -2, -4, …}`.
pub fn eta_series_exact(s: i64, n: usize) -> Result<Rational> {
    if s > 0 || s % 2 != 0 {
        return Err(domain(format!("exact evaluation needs s even and nonpositive, got {s}")));
    }
    let table = WeightTable::new(n)?;
    let p = (-s) as u32;
    Ok(table
        .as_slice()
        .iter()
        .enumerate()
        .fold(Rational::zero(), |acc, (k, w)| acc + w * Rational::from_integer(BigInt::from(k + 1).pow(p))))
}

/// `h_N(s) = 2/(s Γ_{N-1}(s/2)) = ∏_{n<N} (1 + s/2n) / N^{s/2}`.
///
/// `∏ (1+1/n)^{s/2}` telescopes to `N^{s/2}`.
pub fn h_factor_in<T: Real>(s: Complex<T>, n: usize) -> Complex<T> {
    let half = s * T::of(0.5);
    let mut prod = Complex::new(T::one(), T::zero());
    for k in 1..n {
        prod = prod * (half / T::of_usize(k) + T::one());
    }
    prod * pow_neg(T::of_usize(n.max(1)), half)
}

pub fn h_factor(s: SParam, n: usize) -> C64 {
    h_factor_in(s.complex(), n)
}

/// `(1/z) ∏_{n≤M} (1+1/n)^z / (1+z/n)`, which tends to `Γ(z)`.
pub fn gamma_product_partial(z: C64, m: usize) -> Result<C64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::PoleError(format!("z = {}", z.re)));
    }
    let mut den = C64::new(1.0, 0.0);
    for k in 1..=m {
        den *= z / k as f64 + 1.0;
    }
    // ∏ (1+1/n)^z telescopes to (M+1)^z
    Ok((z * ((m + 1) as f64).ln()).exp() / (den * z))
}

/// Reference value of `η(s)` independent of the finite series.
pub fn eta_reference(s: SParam) -> Result<C64> {
    special::eta_reference(s.complex())
}

/// `η_N(s)` evaluated with double-double weights and arithmetic.
pub fn eta_series_dd(s: SParam, n: usize) -> Result<C64> {
    let weights = WeightTable::new(n)?.to_real::<crate::Dd>();
    Ok(lower(eta_series_with(lift(s.complex()), &weights)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_tables() {
        assert_eq!(WeightTable::new(1).unwrap().as_slice(), &[q(1, 2)]);
        assert_eq!(WeightTable::new(2).unwrap().as_slice(), &[q(2, 3), q(-1, 6)]);
        assert_eq!(WeightTable::new(3).unwrap().as_slice(), &[q(3, 4), q(-3, 10), q(1, 20)]);
        assert!(matches!(WeightTable::new(WEIGHT_CAP + 1), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn weights_sum_to_half() {
        for n in 1..=64 {
            let t = WeightTable::new(n).unwrap();
            assert_eq!(t.sum(), q(1, 2), "N={n}");
            assert!(t.signs_alternate(), "N={n}");
        }
    }

    #[test]
    fn recurrence_matches_exact() {
        for n in [1, 2, 7, 64, 300] {
            let exact = WeightTable::new(n).unwrap().to_real::<f64>();
            let rec = weights_recurrence::<f64>(n);
            for (a, b) in exact.iter().zip(&rec) {
                assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-300), "N={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn exact_special_values() {
        assert_eq!(eta_series_exact(0, 9).unwrap(), q(1, 2));
        assert_eq!(eta_series_exact(-4, 7).unwrap(), Rational::zero());
        // boundary of the zero pattern: 3/4 - 3/10·64 + 1/20·729 = 18
        assert_eq!(eta_series_exact(-6, 3).unwrap(), Rational::from_integer(BigInt::from(18)));
        assert!(eta_series_exact(-3, 3).is_err());
        assert!(eta_series_exact(2, 3).is_err());
    }

    #[test]
    fn series_examples() {
        let v = eta_series(SParam::real(0.0), 17).unwrap().value;
        assert!((v.re - 0.5).abs() <= f64::EPSILON && v.im == 0.0);
        assert!(eta_series(SParam::real(-2.0), 5).unwrap().value.norm() < 1e-12);
        // η_2(1) = 2/3 - 1/12
        assert!((eta_series(SParam::real(1.0), 2).unwrap().value.re - 7.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn h_factor_examples() {
        assert_eq!(h_factor(SParam::real(0.0), 50), C64::new(1.0, 0.0));
        assert_eq!(h_factor(SParam::new(3.0, -2.0).unwrap(), 1), C64::new(1.0, 0.0));
        assert!((h_factor(SParam::real(2.0), 4096).re - 1.0).abs() < 1e-3);
        // N=2: (1 + s/2) / 2^{s/2}; at s=2 this is 1
        assert!((h_factor(SParam::real(2.0), 2).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_product_examples() {
        let one = gamma_product_partial(C64::new(1.0, 0.0), 10_000).unwrap();
        assert!((one.re - 1.0).abs() < 1e-3);
        let half = gamma_product_partial(C64::new(0.5, 0.0), 100_000).unwrap();
        assert!((half.re - std::f64::consts::PI.sqrt()).abs() < 1e-4);
        let four = gamma_product_partial(C64::new(4.0, 0.0), 100_000).unwrap();
        assert!((four.re - 6.0).abs() / 6.0 < 1e-3);
        assert!(matches!(gamma_product_partial(C64::new(-2.0, 0.0), 10), Err(Error::PoleError(_))));
    }

    #[test]
    fn parse_s() {
        let p = |t: &str| t.parse::<SParam>().unwrap();
        assert_eq!(p("1"), SParam::real(1.0));
        assert_eq!(p("0.5+14.1i"), SParam { re: 0.5, im: 14.1 });
        assert_eq!(p("-1-2i"), SParam { re: -1.0, im: -2.0 });
        assert_eq!(p("2i"), SParam { re: 0.0, im: 2.0 });
        assert_eq!(p("-i"), SParam { re: 0.0, im: -1.0 });
        assert_eq!(p("1e-3+2e+1i"), SParam { re: 1e-3, im: 20.0 });
        assert!("abc".parse::<SParam>().is_err());
        assert!("1+2j".parse::<SParam>().is_err());
        assert!("inf".parse::<SParam>().is_err());
        assert_eq!(p(&SParam { re: 1.5, im: -2.0 }.to_string()), SParam { re: 1.5, im: -2.0 });
    }

    #[test]
    fn pole_guard() {
        assert!(SParam::real(-4.0).check_poles(3, DEFAULT_GUARD).is_err());
        assert!(SParam::real(-4.0).check_poles(2, DEFAULT_GUARD).is_ok());
        assert!(SParam::real(-3.999).check_poles(5, DEFAULT_GUARD).is_ok());
    }
}
