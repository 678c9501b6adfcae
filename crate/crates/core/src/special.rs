//! Complex Gamma function and an independent high-accuracy evaluator of the
//! alternating zeta function used as a reference.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` for complex `z` off the nonpositive integers.
///
/// The imaginary part is a branch of the logarithm, not necessarily the
/// principal one; only `exp` of sums and differences of these values is used.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1-z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += *c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// Borwein's acceleration of the alternating series with `n` terms.
pub fn eta_borwein(s: Complex64, n: usize) -> Complex64 {
    let mut d = Vec::with_capacity(n + 1);
    let mut term = 1.0 / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        if i > 0 {
            let i = i as f64;
            let nf = n as f64;
            term *= (nf + i - 1.0) * (nf - i + 1.0) * 4.0 / ((2.0 * i - 1.0) * (2.0 * i));
        }
        acc += term;
        d.push(n as f64 * acc);
    }
    let dn = d[n];
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (d[k] - dn) * (-s * ((k + 1) as f64).ln()).exp();
    }
    -sum / dn
}

/// Euler-transformed partial summation of `Σ (-1)^{n-1} n^{-s}` for real `s > 0`.
pub fn eta_euler_transform(s: f64) -> f64 {
    const DIRECT: usize = 12;
    const DIFFS: usize = 56;
    let a = |k: usize| ((k + 1) as f64).powf(-s);
    let mut head = 0.0;
    for k in 0..DIRECT {
        head += if k % 2 == 0 { a(k) } else { -a(k) };
    }
    // tail Σ_{k≥0} (-1)^k a_{DIRECT+k} via iterated forward differences
    let mut diffs: Vec<f64> = (0..DIFFS).map(|k| a(DIRECT + k)).collect();
    let mut tail = 0.0;
    let mut scale = 0.5;
    for k in 0..DIFFS {
        tail += if k % 2 == 0 { diffs[0] * scale } else { -diffs[0] * scale };
        scale *= 0.5;
        for i in 0..diffs.len() - 1 - k {
            diffs[i] = diffs[i + 1] - diffs[i];
        }
    }
    let sign = if DIRECT.is_multiple_of(2) { 1.0 } else { -1.0 };
    head + sign * tail
}

const BORWEIN_TERMS: (usize, usize) = (64, 96);
const REFERENCE_TOL: f64 = 1e-12;

fn borwein_checked(s: Complex64) -> Result<Complex64> {
    let a = eta_borwein(s, BORWEIN_TERMS.0);
    let b = eta_borwein(s, BORWEIN_TERMS.1);
    if (a - b).norm() > REFERENCE_TOL * b.norm().max(1.0) || !b.is_finite() {
        return Err(Error::OracleUnstable(format!(
            "Borwein sums at s={s} move by {:.3e} between {} and {} terms",
            (a - b).norm(),
            BORWEIN_TERMS.0,
            BORWEIN_TERMS.1
        )));
    }
    Ok(b)
}

/// Reference value of the alternating zeta function at any complex `s`.
///
/// Borwein's algorithm in the half-plane `Re s ≥ -1/2` and the functional
/// equation elsewhere. Two term counts must agree to `1e-12`; real `s > 0`
/// is additionally cross-checked against an Euler transform.
pub fn eta_reference(s: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let value = if s.re >= -0.5 {
        borwein_checked(s)?
    } else {
        let reflected = borwein_checked(one - s)?;
        let ratio = (one - two.powc(one - s)) / (one - two.powc(s));
        ratio
            * two.powc(s)
            * Complex64::new(PI, 0.0).powc(s - 1.0)
            * (s * (PI / 2.0)).sin()
            * gamma(one - s)
            * reflected
    };
    if s.im == 0.0 && s.re > 0.0 {
        let euler = eta_euler_transform(s.re);
        if (euler - value.re).abs() > 1e-10 * value.norm().max(1.0) {
            return Err(Error::OracleUnstable(format!("Euler transform {euler} disagrees with {}", value.re)));
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(c(0.5, 0.0)) - c(PI.sqrt(), 0.0)).norm() < 1e-14);
        assert!((gamma(c(5.0, 0.0)) - c(24.0, 0.0)).norm() < 1e-11);
        assert!((gamma(c(-0.5, 0.0)) - c(-2.0 * PI.sqrt(), 0.0)).norm() < 1e-13);
        // |Γ(iy)|² = π / (y sinh(πy))
        let y = 2.0_f64;
        let g = gamma(c(0.0, y));
        assert!((g.norm_sqr() - PI / (y * (PI * y).sinh())).abs() < 1e-14);
        // recurrence Γ(z+1) = zΓ(z) at a complex point
        let z = c(1.3, -4.2);
        let lhs = gamma(z + 1.0);
        let rhs = z * gamma(z);
        assert!((lhs - rhs).norm() / lhs.norm() < 1e-13);
    }

    #[test]
    fn classical_values() {
        assert!((eta_reference(c(1.0, 0.0)).unwrap().re - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((eta_reference(c(2.0, 0.0)).unwrap().re - PI * PI / 12.0).abs() < 1e-15);
        assert!((eta_reference(c(0.0, 0.0)).unwrap().re - 0.5).abs() < 1e-15);
        // η(-1) = (1 - 4)ζ(-1) = 1/4, η(-3) = (1-16)ζ(-3) = -1/8
        assert!((eta_reference(c(-1.0, 0.0)).unwrap().re - 0.25).abs() < 1e-14);
        assert!((eta_reference(c(-3.0, 0.0)).unwrap().re + 0.125).abs() < 1e-14);
        // trivial zeros survive the reflection
        assert!(eta_reference(c(-4.0, 0.0)).unwrap().norm() < 1e-14);
    }

    #[test]
    fn both_branches_agree_near_the_seam() {
        let s = c(-0.5, 3.0);
        let direct = borwein_checked(s).unwrap();
        let via = eta_reference(c(-0.5000001, 3.0)).unwrap();
        assert!((direct - via).norm() < 1e-6);
    }

    #[test]
    fn euler_transform_accuracy() {
        assert!((eta_euler_transform(1.0) - std::f64::consts::LN_2).abs() < 1e-14);
        assert!((eta_euler_transform(2.0) - PI * PI / 12.0).abs() < 1e-14);
    }
}
