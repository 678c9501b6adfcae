//! Kolmogorov-Smirnov statistics and batch-means error estimates.

use crate::C64;

/// Asymptotic 1% critical coefficient of the Kolmogorov distribution.
pub const KS_COEFF_1PCT: f64 = 1.628;

/// Two-sample KS statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical value of the two-sample statistic at the 1% level.
pub fn ks_two_sample_critical_1pct(n: usize, m: usize) -> f64 {
    KS_COEFF_1PCT * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn ks_one_sample_critical_1pct(n: usize) -> f64 {
    KS_COEFF_1PCT / (n as f64).sqrt()
}

/// Sum and size of one batch of a Monte Carlo run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Batch {
    pub sum: C64,
    pub count: u64,
}

/// Mean and standard error from consecutive batches.
///
/// The error is `sqrt(Σ c_b² |m_b − m|² · B/(B−1)) / n`, which reduces to the
/// usual batch-means formula when batches have equal size; real and imaginary
/// parts add in quadrature.
pub fn batch_means(batches: &[Batch]) -> (C64, f64) {
    let n: u64 = batches.iter().map(|b| b.count).sum();
    if n == 0 {
        return (C64::new(f64::NAN, f64::NAN), f64::NAN);
    }
    let total = batches.iter().fold(C64::new(0.0, 0.0), |acc, b| acc + b.sum);
    let mean = total / n as f64;
    let used: Vec<&Batch> = batches.iter().filter(|b| b.count > 0).collect();
    if used.len() < 2 {
        return (mean, f64::NAN);
    }
    let spread: f64 = used
        .iter()
        .map(|b| {
            let c = b.count as f64;
            c * c * (b.sum / c - mean).norm_sqr()
        })
        .sum();
    let k = used.len() as f64;
    (mean, (spread * k / (k - 1.0)).sqrt() / n as f64)
}

/// Integrated autocorrelation time `1 + 2 Σ ρ_k`, summed up to the first lag
/// `M ≥ 5 τ(M)` (Sokal's window). Returns `NaN` for fewer than 4 points.
pub fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return f64::NAN;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c0 = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..n / 2 {
        let c = series.iter().zip(&series[lag..]).map(|(x, y)| (x - mean) * (y - mean)).sum::<f64>() / n as f64;
        tau += 2.0 * c / c0;
        if lag as f64 >= 5.0 * tau {
            break;
        }
    }
    tau
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_identical_and_disjoint() {
        let a: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        let b: Vec<f64> = (200..300).map(f64::from).collect();
        assert_eq!(ks_two_sample(&a, &b), 1.0);
        assert!((ks_two_sample_critical_1pct(10_000, 10_000) - 0.023_023).abs() < 1e-5);
    }

    #[test]
    fn ks_one_sample_uniform_grid() {
        let n = 1000;
        let s: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect();
        assert!((ks_one_sample(&s, |x| x) - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn batch_means_constant_is_exact() {
        let b = vec![Batch { sum: C64::new(10.0, 0.0), count: 10 }; 5];
        let (m, se) = batch_means(&b);
        assert_eq!(m, C64::new(1.0, 0.0));
        assert_eq!(se, 0.0);
    }

    #[test]
    fn batch_means_matches_textbook_formula() {
        let means = [1.0, 2.0, 4.0, 5.0];
        let b: Vec<Batch> = means.iter().map(|&m| Batch { sum: C64::new(3.0 * m, 0.0), count: 3 }).collect();
        let (m, se) = batch_means(&b);
        assert_eq!(m.re, 3.0);
        // var of batch means 10/3, divided by 4 batches
        assert!((se - (10.0_f64 / 3.0 / 4.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn autocorrelation_of_ar1() {
        // AR(1) with φ = 0.8 has τ = (1 + φ)/(1 − φ) = 9
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut x = 0.0;
        let series: Vec<f64> = (0..200_000)
            .map(|_| {
                x = 0.8 * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect();
        let tau = integrated_autocorrelation(&series);
        assert!((tau - 9.0).abs() < 1.0, "{tau}");
        assert_eq!(integrated_autocorrelation(&[1.0; 10]), 1.0);
    }
}
