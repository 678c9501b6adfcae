//! Dixon-Anderson samplers and the Monte Carlo representations built on them.
//!
//! With `α = 1` the Dixon-Anderson density on the interlacing region
//! `u_1 < x_1 < u_2 < … < x_{N−1} < u_N` is proportional to `∏_{i<j}(x_j − x_i)`.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::determinants::OrderedGrid;
use crate::error::{domain, Error, Result};
use crate::eta::{h_factor, SParam, WeightTable, DEFAULT_GUARD};
use crate::special::ln_gamma;
use crate::stats::{batch_means, Batch};
use crate::C64;

/// Largest `N` for the rejection sampler.
pub const REJECTION_CAP: usize = 6;

/// Batches per chunk for the standard error.
pub const BATCHES_PER_CHUNK: usize = 10;

/// Newton/bisection tolerance on the unit interval for conditional inversion.
pub const INVERSION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub burn_in: usize,
    pub thinning: usize,
    /// Samples per deterministic work unit.
    pub chunk: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { seed: 0, burn_in: 100, thinning: 1, chunk: 10_000 }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(domain("thinning must be at least 1"));
        }
        if self.chunk == 0 {
            return Err(domain("chunk size must be at least 1"));
        }
        Ok(())
    }
}

/// Generator for chunk `index` of a run keyed on `seed`.
pub fn chunk_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A point `x` interlacing the grid `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterlacedSample {
    pub x: Vec<f64>,
    pub u: OrderedGrid,
}

impl InterlacedSample {
    pub fn is_interlaced(&self) -> bool {
        interlaces(&self.x, self.u.as_slice())
    }
}

/// `u_1 < x_1 < u_2 < … < x_{N−1} < u_N`, strictly.
pub fn interlaces(x: &[f64], u: &[f64]) -> bool {
    x.len() + 1 == u.len() && x.iter().enumerate().all(|(k, &xk)| u[k] < xk && xk < u[k + 1])
}

/// Monte Carlo result.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: C64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub method: String,
}

impl MCEstimate {
    /// `c · estimate`, for deterministic prefactors.
    pub fn scaled(mut self, c: C64) -> Self {
        self.mean *= c;
        self.std_error *= c.norm();
        self
    }

    /// Distance to `target` in standard errors; a zero-variance estimate is
    /// either exact (0) or infinitely far.
    pub fn z_score(&self, target: C64) -> f64 {
        let d = (self.mean - target).norm();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Run `n` samples in chunks of `cfg.chunk`; chunk `k` draws from stream `k`.
///
/// `fill(rng, count, out)` pushes exactly `count` values. Chunks run in
/// parallel but are reduced in index order, so the result does not depend on
/// the number of workers.
pub fn monte_carlo<F>(n: u64, cfg: &SamplerConfig, method: &str, fill: F) -> Result<MCEstimate>
where
    F: Fn(&mut ChaCha8Rng, usize, &mut Vec<C64>) -> Result<()> + Sync,
{
    cfg.validate()?;
    if n == 0 {
        return Err(domain("sample count must be positive"));
    }
    let chunk = cfg.chunk as u64;
    let chunks = n.div_ceil(chunk);
    let per_chunk: Vec<Result<Vec<Batch>>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let count = chunk.min(n - k * chunk) as usize;
            let mut rng = chunk_rng(cfg.seed, k);
            let mut values = Vec::with_capacity(count);
            fill(&mut rng, count, &mut values)?;
            debug_assert_eq!(values.len(), count);
            let size = count.div_ceil(BATCHES_PER_CHUNK);
            Ok(values.chunks(size).map(|b| Batch { sum: b.iter().sum(), count: b.len() as u64 }).collect())
        })
        .collect();
    let mut batches = Vec::new();
    for chunk in per_chunk {
        batches.extend(chunk?);
    }
    let (mean, std_error) = batch_means(&batches);
    Ok(MCEstimate { mean, std_error, n_samples: n, seed: cfg.seed, method: method.to_string() })
}

/// Draw `t ∈ (0, 1)` from the density proportional to the polynomial with
/// ascending coefficients `p`, which must be positive on `(0, 1)`.
pub fn sample_polynomial_density<R: RngExt + ?Sized>(p: &[f64], rng: &mut R) -> f64 {
    // CDF coefficients, ascending, without the constant term
    let cdf: Vec<f64> = p.iter().enumerate().map(|(i, c)| c / (i + 1) as f64).collect();
    let eval_cdf = |t: f64| t * cdf.iter().rev().fold(0.0, |acc, c| acc * t + c);
    let eval_pdf = |t: f64| p.iter().rev().fold(0.0, |acc, c| acc * t + c);
    let target = rng.random::<f64>() * eval_cdf(1.0);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut t = 0.5;
    for _ in 0..200 {
        let f = eval_cdf(t) - target;
        let d = eval_pdf(t);
        if f == 0.0 || (d > 0.0 && (f / d).abs() < INVERSION_TOL * 0.5) {
            break;
        }
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        if hi - lo < INVERSION_TOL {
            t = 0.5 * (lo + hi);
            break;
        }
        let newton = t - f / d;
        t = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    t.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

/// Coefficients of the conditional density of `x_k` on `(u_k, u_{k+1})` in
/// `t = (x − u_k)/(u_{k+1} − u_k)`, each linear factor scaled to at most 1.
fn conditional_polynomial(x: &[f64], u: &[f64], k: usize, poly: &mut Vec<f64>) {
    let a = u[k];
    let w = u[k + 1] - a;
    poly.clear();
    poly.push(1.0);
    for (j, &xj) in x.iter().enumerate() {
        if j == k {
            continue;
        }
        // factor α + βt
        let (alpha, beta) = if j < k {
            let c = a - xj;
            (c / (c + w), w / (c + w))
        } else {
            (1.0, -w / (xj - a))
        };
        poly.push(0.0);
        for i in (0..poly.len()).rev() {
            let lower = if i > 0 { poly[i - 1] } else { 0.0 };
            poly[i] = poly[i] * alpha + lower * beta;
        }
    }
}

/// Gibbs sampler for the `α = 1` Dixon-Anderson density on a fixed grid.
///
/// Each sweep redraws every `x_k` from its exact conditional, a polynomial
/// density on `(u_k, u_{k+1})`, by inverting its CDF.
pub struct GibbsSampler<R = ChaCha8Rng> {
    u: Vec<f64>,
    x: Vec<f64>,
    rng: R,
    thinning: usize,
    poly: Vec<f64>,
}

impl<R: RngExt> GibbsSampler<R> {
    /// Start at the cell midpoints and run `burn_in` sweeps.
    pub fn from_rng(u: &[f64], rng: R, burn_in: usize, thinning: usize) -> Self {
        let x = u.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut sampler = Self { u: u.to_vec(), x, rng, thinning: thinning.max(1), poly: Vec::new() };
        for _ in 0..burn_in {
            sampler.sweep();
        }
        sampler
    }

    pub fn sweep(&mut self) {
        for k in 0..self.x.len() {
            conditional_polynomial(&self.x, &self.u, k, &mut self.poly);
            let t = sample_polynomial_density(&self.poly, &mut self.rng);
            let (a, b) = (self.u[k], self.u[k + 1]);
            // keep strict interlacing even when t rounds to an endpoint
            self.x[k] = (a + (b - a) * t).clamp(a.next_up(), b.next_down());
        }
    }

    /// Advance by `thinning` sweeps and return the state.
    pub fn next_x(&mut self) -> &[f64] {
        for _ in 0..self.thinning {
            self.sweep();
        }
        debug_assert!(interlaces(&self.x, &self.u));
        &self.x
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    pub fn grid(&self) -> &[f64] {
        &self.u
    }

    /// Replace the grid; the current state must still interlace it.
    pub fn set_grid(&mut self, u: &[f64]) {
        debug_assert!(interlaces(&self.x, u));
        self.u.clear();
        self.u.extend_from_slice(u);
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }
}

impl GibbsSampler<ChaCha8Rng> {
    pub fn new(u: &OrderedGrid, cfg: &SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        if u.len() < 2 {
            return Err(Error::GridError("Dixon-Anderson sampling needs N >= 2".into()));
        }
        Ok(Self::from_rng(u.as_slice(), chunk_rng(cfg.seed, 0), cfg.burn_in, cfg.thinning))
    }
}

impl<R: RngExt> Iterator for GibbsSampler<R> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        Some(self.next_x().to_vec())
    }
}

/// Stream of Gibbs samples on the grid `u`.
pub fn dixon_anderson_gibbs(u: &OrderedGrid, cfg: &SamplerConfig) -> Result<impl Iterator<Item = InterlacedSample>> {
    let grid = u.clone();
    Ok(GibbsSampler::new(u, cfg)?.map(move |x| InterlacedSample { x, u: grid.clone() }))
}

/// Exact sampler: uniform proposals on the cells, accepted with probability
/// `∏_{i<j}(x_j − x_i) / ∏_{i<j}(u_{j+1} − u_i)`.
pub struct RejectionSampler<R = ChaCha8Rng> {
    u: Vec<f64>,
    bound: f64,
    rng: R,
    proposals: u64,
    accepted: u64,
}

impl<R: RngExt> RejectionSampler<R> {
    pub fn from_rng(u: &[f64], rng: R) -> Result<Self> {
        if u.len() > REJECTION_CAP {
            return Err(Error::CapExceeded { what: "N", value: u.len(), cap: REJECTION_CAP });
        }
        if u.len() < 2 {
            return Err(Error::GridError("Dixon-Anderson sampling needs N >= 2".into()));
        }
        let m = u.len() - 1;
        let mut bound = 1.0;
        for i in 0..m {
            for j in i + 1..m {
                bound *= u[j + 1] - u[i];
            }
        }
        Ok(Self { u: u.to_vec(), bound, rng, proposals: 0, accepted: 0 })
    }

    pub fn next_x(&mut self) -> Vec<f64> {
        let m = self.u.len() - 1;
        let mut x = vec![0.0; m];
        loop {
            self.proposals += 1;
            for (k, xk) in x.iter_mut().enumerate() {
                let (a, b) = (self.u[k], self.u[k + 1]);
                *xk = (a + (b - a) * self.rng.random::<f64>()).max(a.next_up());
            }
            let mut v = 1.0;
            for i in 0..m {
                for j in i + 1..m {
                    v *= x[j] - x[i];
                }
            }
            if self.rng.random::<f64>() * self.bound < v {
                self.accepted += 1;
                return x;
            }
        }
    }

    /// Accepted over proposed so far.
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposals.max(1) as f64
    }

    pub fn counts(&self) -> (u64, u64) {
        (self.accepted, self.proposals)
    }
}

impl RejectionSampler<ChaCha8Rng> {
    pub fn new(u: &OrderedGrid, cfg: &SamplerConfig) -> Result<Self> {
        Self::from_rng(u.as_slice(), chunk_rng(cfg.seed, 0))
    }
}

impl<R: RngExt> Iterator for RejectionSampler<R> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        Some(self.next_x())
    }
}

pub fn dixon_anderson_rejection(
    u: &OrderedGrid,
    cfg: &SamplerConfig,
) -> Result<impl Iterator<Item = InterlacedSample>> {
    let grid = u.clone();
    Ok(RejectionSampler::new(u, cfg)?.map(move |x| InterlacedSample { x, u: grid.clone() }))
}

/// Log of the general Dixon-Anderson density with exponents `α` on the
/// grid `a`, or `None` off the interlacing region.
pub fn dixon_anderson_log_density(x: &[f64], alpha: &[f64], a: &[f64]) -> Result<Option<f64>> {
    if alpha.len() != a.len() {
        return Err(Error::ArityError { expected: a.len(), got: alpha.len() });
    }
    if !alpha.iter().all(|&al| al > 0.0) {
        return Err(domain("Dixon-Anderson exponents must be positive"));
    }
    if !interlaces(x, a) {
        return Ok(None);
    }
    let lg = statrs::function::gamma::ln_gamma;
    let mut log = lg(alpha.iter().sum()) - alpha.iter().map(|&al| lg(al)).sum::<f64>();
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            log += (x[j] - x[i]).ln();
        }
    }
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            log -= (alpha[i] + alpha[j] - 1.0) * (a[j] - a[i]).ln();
        }
    }
    for &xn in x {
        for (ai, al) in a.iter().zip(alpha) {
            log += (al - 1.0) * (xn - ai).abs().ln();
        }
    }
    Ok(Some(log))
}

fn check_mc_inputs(s: SParam, n: usize) -> Result<()> {
    if n < 2 {
        return Err(domain("Monte Carlo representations need N >= 2"));
    }
    s.check_poles(n, DEFAULT_GUARD)
}

/// Run a Gibbs chain per chunk and average `f(x)`.
fn gibbs_mc<F>(u: &[f64], cfg: &SamplerConfig, n: u64, method: &str, f: F) -> Result<MCEstimate>
where
    F: Fn(&[f64]) -> C64 + Sync,
{
    monte_carlo(n, cfg, method, |rng, count, out| {
        let mut chain = GibbsSampler::from_rng(u, rng.clone(), cfg.burn_in, cfg.thinning);
        for _ in 0..count {
            out.push(f(chain.next_x()));
        }
        Ok(())
    })
}

/// `η_N(s) = (h_N(s)/2) E[∏ (X_n/(n(n+1)))^{s/2}]` with `X` Dixon-Anderson on
/// `1, 4, …, N²`.
pub fn eta_mc(s: SParam, n: usize, cfg: &SamplerConfig, samples: u64) -> Result<MCEstimate> {
    check_mc_inputs(s, n)?;
    let half = s.complex() * 0.5;
    let u = OrderedGrid::squares(n);
    let est = gibbs_mc(u.as_slice(), cfg, samples, "eta_mc", |x| {
        let log: f64 = x.iter().enumerate().map(|(k, xk)| (xk / ((k + 1) * (k + 2)) as f64).ln()).sum();
        (half * log).exp()
    })?;
    Ok(est.scaled(h_factor(s, n) * 0.5))
}

fn ln_gamma_ratio(a: C64, b: C64) -> C64 {
    (ln_gamma(a) - ln_gamma(b)).exp()
}

/// `ψ_N(n; s) = 2^{1−s/2} (N/(|a_{n,N}| n²))^{s/2} Γ(N)/Γ(N+s/2)`.
///
/// This is the value of the defining expectation for every `n ≥ 1`; it tends
/// to `2^{1−s/2} n^{−s}`, which is `n^{−s}` at `s = 2`.
pub fn psi_closed(n: usize, big_n: usize, s: SParam) -> Result<C64> {
    if n == 0 || n > big_n {
        return Err(domain(format!("psi_closed needs 1 <= n <= N, got n={n}, N={big_n}")));
    }
    let half = s.complex() * 0.5;
    let lg = statrs::function::gamma::ln_gamma;
    // ln |a_{n,N}| = 2 ln N! − ln (N−n)! − ln (N+n)!
    let nf = big_n as f64;
    let ln_a = 2.0 * lg(nf + 1.0) - lg(nf - n as f64 + 1.0) - lg(nf + n as f64 + 1.0);
    let ln_base = nf.ln() - ln_a - 2.0 * (n as f64).ln() - std::f64::consts::LN_2;
    Ok(2.0 * (half * ln_base).exp() * ln_gamma_ratio(C64::new(nf, 0.0), half + nf))
}

/// The closed form as displayed, with the `n = 1` case `N^{s/2}Γ(N)/Γ(N+s/2)`
/// and `(1/(|a_{n,N}|n²))^{s/2} N^{s/2} Γ(N)/Γ(N+s/2)` otherwise.
pub fn psi_closed_displayed(n: usize, big_n: usize, s: SParam) -> Result<C64> {
    if n == 0 || n > big_n {
        return Err(domain(format!("psi_closed needs 1 <= n <= N, got n={n}, N={big_n}")));
    }
    let half = s.complex() * 0.5;
    let nf = big_n as f64;
    let gamma = ln_gamma_ratio(C64::new(nf, 0.0), half + nf);
    if n == 1 {
        return Ok((half * nf.ln()).exp() * gamma);
    }
    let lg = statrs::function::gamma::ln_gamma;
    let ln_a = 2.0 * lg(nf + 1.0) - lg(nf - n as f64 + 1.0) - lg(nf + n as f64 + 1.0);
    let ln_base = nf.ln() - ln_a - 2.0 * (n as f64).ln();
    Ok((half * ln_base).exp() * gamma)
}

/// `ψ_N(0; s) = 4 η_N(s) / (Γ(1+s/2) h_N(s))`, which tends to `4η(s)`.
pub fn psi_zero_closed(big_n: usize, s: SParam) -> Result<C64> {
    let eta = crate::eta::eta_series(s, big_n)?.value;
    let g = crate::special::gamma(s.complex() * 0.5 + 1.0);
    Ok(eta * 4.0 / (g * h_factor(s, big_n)))
}

/// Monte Carlo `ψ_N(x; s)`, the defining expectation
/// `(2/Γ(1+s/2)) ((N²−1)^{N−1}/(N!(N−1)!))^{s/2} E[∏ |Y_n − (x²−1)/(N²−1)|^{s/2}]`
/// with `Y = (X − 1)/(N² − 1)`.
pub fn psi_mc(x: usize, big_n: usize, s: SParam, cfg: &SamplerConfig, samples: u64) -> Result<MCEstimate> {
    check_mc_inputs(s, big_n)?;
    if x > big_n {
        return Err(domain(format!("psi_mc needs 0 <= x <= N, got x={x}, N={big_n}")));
    }
    let half = s.complex() * 0.5;
    let scale = (big_n * big_n - 1) as f64;
    let b = (x as f64 * x as f64 - 1.0) / scale;
    let u = OrderedGrid::squares(big_n);
    let est = gibbs_mc(u.as_slice(), cfg, samples, "psi_mc", |xs| {
        let log: f64 = xs.iter().map(|&xk| ((xk - 1.0) / scale - b).abs().ln()).sum();
        (half * log).exp()
    })?;
    let lg = statrs::function::gamma::ln_gamma;
    let nf = big_n as f64;
    let ln_c = (nf - 1.0) * scale.ln() - lg(nf + 1.0) - lg(nf);
    let prefactor = 2.0 * (half * ln_c).exp() / crate::special::gamma(half + 1.0);
    Ok(est.scaled(prefactor))
}

/// Default margin in `Re(s) > −2N + margin` for the exponential moment.
pub const EXP_MOMENT_MARGIN: f64 = 0.5;

fn check_exp_moment(u: &OrderedGrid, s: SParam) -> Result<()> {
    let bound = -2.0 * u.len() as f64 + EXP_MOMENT_MARGIN;
    if s.re <= bound {
        return Err(domain(format!("E[(Σ ε/u)^(s/2)] needs Re(s) > {bound}, got {}", s.re)));
    }
    Ok(())
}

/// `Γ(1+s/2) Σ u_n^{−s/2} ∏_{j≠n} u_j/(u_j − u_n)`.
pub fn exp_moment_closed(u: &OrderedGrid, s: SParam) -> Result<C64> {
    check_exp_moment(u, s)?;
    let half = s.complex() * 0.5;
    let g = crate::special::gamma(half + 1.0);
    let v = u.as_slice();
    let mut acc = C64::new(0.0, 0.0);
    for (n, &un) in v.iter().enumerate() {
        let w: f64 = v.iter().enumerate().filter(|&(j, _)| j != n).map(|(_, &uj)| uj / (uj - un)).product();
        acc += (-half * un.ln()).exp() * w;
    }
    Ok(g * acc)
}

/// `E[(Σ ε_n/u_n)^{s/2}]` with `ε_n` independent standard exponentials.
pub fn exp_moment_mc(u: &OrderedGrid, s: SParam, cfg: &SamplerConfig, samples: u64) -> Result<MCEstimate> {
    check_exp_moment(u, s)?;
    let half = s.complex() * 0.5;
    let v = u.as_slice().to_vec();
    monte_carlo(samples, cfg, "exp_moment_mc", |rng, count, out| {
        for _ in 0..count {
            let sum: f64 = v.iter().map(|&un| <Exp1 as Distribution<f64>>::sample(&Exp1, rng) / un).sum();
            out.push((half * sum.ln()).exp());
        }
        Ok(())
    })
}

/// `h_N(s) N^{s/2} E[∏ X_n^{s/2} / ∏ u_n^{s/2}]` with `X` Dixon-Anderson on
/// `u`, an estimate of `V^{(s/2)}(u)/V(u)`.
pub fn ratio_mc(u: &OrderedGrid, s: SParam, cfg: &SamplerConfig, samples: u64) -> Result<MCEstimate> {
    let n = u.len();
    check_mc_inputs(s, n)?;
    let half = s.complex() * 0.5;
    let ln_u: f64 = u.as_slice().iter().map(|x| x.ln()).sum();
    let est = gibbs_mc(u.as_slice(), cfg, samples, "ratio_mc", |x| {
        let log: f64 = x.iter().map(|xk| xk.ln()).sum::<f64>() - ln_u;
        (half * log).exp()
    })?;
    Ok(est.scaled(ratio_prefactor(s, n)))
}

/// `h_N(s) N^{s/2}`.
pub fn ratio_prefactor(s: SParam, n: usize) -> C64 {
    h_factor(s, n) * (s.complex() * 0.5 * (n as f64).ln()).exp()
}

/// Exact weights as `f64`, for callers that need `a_{n,N}` next to samples.
pub fn weights_f64(n: usize) -> Result<Vec<f64>> {
    Ok(WeightTable::new(n)?.to_real::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eta::eta_series;
    use crate::quadrature::{integrate, integrate_plain, Tolerance};
    use crate::stats::{ks_two_sample, ks_two_sample_critical_1pct};

    fn grid(v: &[f64]) -> OrderedGrid {
        OrderedGrid::new(v.to_vec()).unwrap()
    }

    #[test]
    fn polynomial_inversion_recovers_cdf() {
        // density 3t² on (0,1): CDF t³
        let mut rng = chunk_rng(7, 0);
        let draws: Vec<f64> = (0..20_000).map(|_| sample_polynomial_density(&[0.0, 0.0, 3.0], &mut rng)).collect();
        let ks = crate::stats::ks_one_sample(&draws, |t| t * t * t);
        assert!(ks < crate::stats::ks_one_sample_critical_1pct(draws.len()), "{ks}");
    }

    #[test]
    fn conditional_matches_direct_product() {
        let u = [1.0, 4.0, 9.0, 16.0, 25.0];
        let x = [2.0, 5.5, 12.0, 20.0];
        let mut poly = Vec::new();
        for k in 0..4 {
            conditional_polynomial(&x, &u, k, &mut poly);
            let direct = |t: f64| {
                let xk = u[k] + (u[k + 1] - u[k]) * t;
                x.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &xj)| (xk - xj).abs()).product::<f64>()
            };
            let ratio = |t: f64| poly.iter().rev().fold(0.0, |a, c| a * t + c) / direct(t);
            let r0 = ratio(0.3);
            for t in [0.01, 0.5, 0.77, 0.99] {
                assert!((ratio(t) / r0 - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_point_gibbs_is_uniform() {
        let u = grid(&[1.0, 4.0]);
        let cfg = SamplerConfig::with_seed(3);
        let est = monte_carlo(100_000, &cfg, "mean", |rng, count, out| {
            let mut chain = GibbsSampler::from_rng(u.as_slice(), rng.clone(), 0, 1);
            for _ in 0..count {
                out.push(C64::new(chain.next_x()[0], 0.0));
            }
            Ok(())
        })
        .unwrap();
        assert!(est.z_score(C64::new(2.5, 0.0)) < 3.0, "{est:?}");
    }

    #[test]
    fn samples_interlace() {
        let u = grid(&[1.0, 4.0, 9.0]);
        let cfg = SamplerConfig::with_seed(11);
        for s in dixon_anderson_gibbs(&u, &cfg).unwrap().take(5000) {
            assert!(s.is_interlaced());
        }
        for s in dixon_anderson_rejection(&u, &cfg).unwrap().take(5000) {
            assert!(s.is_interlaced());
        }
    }

    #[test]
    fn gibbs_agrees_with_rejection() {
        let u = grid(&[1.0, 4.0, 9.0]);
        let cfg = SamplerConfig { seed: 5, burn_in: 100, thinning: 10, chunk: 10_000 };
        let gibbs: Vec<f64> = GibbsSampler::new(&u, &cfg).unwrap().take(10_000).map(|x| x[0]).collect();
        let rej: Vec<f64> =
            RejectionSampler::new(&u, &SamplerConfig::with_seed(6)).unwrap().take(10_000).map(|x| x[0]).collect();
        let d = ks_two_sample(&gibbs, &rej);
        assert!(d < ks_two_sample_critical_1pct(10_000, 10_000), "{d}");
    }

    #[test]
    fn rejection_acceptance_rate() {
        let mut two = RejectionSampler::new(&grid(&[1.0, 4.0]), &SamplerConfig::default()).unwrap();
        two.by_ref().take(100).for_each(drop);
        assert_eq!(two.acceptance_rate(), 1.0);

        // analytic rate: ∫∫ (x2 − x1) over the cells / (|cells| · B)
        let (u1, u2, u3) = (1.0, 4.0, 9.0);
        let integral: f64 =
            integrate(|x1| integrate_plain(|x2| x2 - x1, u2, u3, Tolerance::default()), u1, u2, Tolerance::default())
                .unwrap();
        let rate = integral / ((u2 - u1) * (u3 - u2) * (u3 - u1));
        assert!((rate - 0.5).abs() < 1e-12);
        let mut s = RejectionSampler::new(&grid(&[u1, u2, u3]), &SamplerConfig::with_seed(9)).unwrap();
        s.by_ref().take(20_000).for_each(drop);
        let (acc, prop) = s.counts();
        let se = (rate * (1.0 - rate) / prop as f64).sqrt();
        assert!((acc as f64 / prop as f64 - rate).abs() < 3.0 * se);
        assert!(matches!(
            RejectionSampler::new(&OrderedGrid::squares(7), &SamplerConfig::default()),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn general_density_normalizes_at_n2() {
        // N=2 grid, one x: density ∝ |x−a1|^{α1−1}|x−a2|^{α2−1}
        let a = [0.5, 2.0];
        let alpha = [1.7, 2.4];
        let total: f64 = integrate_plain(
            |x| dixon_anderson_log_density(&[x], &alpha, &a).unwrap().map_or(0.0, f64::exp),
            a[0],
            a[1],
            Tolerance::new(1e-12, 0.0),
        )
        .unwrap();
        assert!((total - 1.0).abs() < 1e-10, "{total}");
        // α = 1 on squares: (N−1)!/∏(j²−i²) · ∏(x_j − x_i)
        let x = [2.0, 7.0];
        let log = dixon_anderson_log_density(&x, &[1.0; 3], &[1.0, 4.0, 9.0]).unwrap().unwrap();
        assert!((log.exp() - 2.0 * 5.0 / 120.0).abs() < 1e-15);
        assert_eq!(dixon_anderson_log_density(&[5.0], &[1.0, 1.0], &[1.0, 4.0]).unwrap(), None);
    }

    #[test]
    fn zero_variance_at_s_zero() {
        let cfg = SamplerConfig { chunk: 500, ..SamplerConfig::with_seed(1) };
        let e = eta_mc(SParam::real(0.0), 5, &cfg, 2000).unwrap();
        assert_eq!((e.mean, e.std_error), (C64::new(0.5, 0.0), 0.0));
        let r = ratio_mc(&grid(&[0.2, 1.0, 3.0]), SParam::real(0.0), &cfg, 2000).unwrap();
        assert_eq!((r.mean, r.std_error), (C64::new(1.0, 0.0), 0.0));
    }

    #[test]
    fn eta_mc_normalization_anchor() {
        // N=2, s=2: h=1, E[X/2] = 5/4, so the estimator targets 5/8 = η_2(2)
        let target = eta_series(SParam::real(2.0), 2).unwrap().value;
        assert!((target.re - 0.625).abs() < 1e-15);
        let e = eta_mc(SParam::real(2.0), 3, &SamplerConfig::with_seed(2), 200_000).unwrap();
        let t3 = eta_series(SParam::real(2.0), 3).unwrap().value;
        assert!(e.z_score(t3) < 4.0, "{e:?} vs {t3}");
    }

    #[test]
    fn psi_closed_forms() {
        let two = SParam::real(2.0);
        assert!((psi_closed(1, 2, two).unwrap().re - 1.5).abs() < 1e-13);
        assert!((psi_closed_displayed(1, 2, two).unwrap().re - 1.0).abs() < 1e-13);
        // both forms agree for n ≥ 2 at s = 2
        for n in 2..=5 {
            let a = psi_closed(n, 9, two).unwrap();
            let b = psi_closed_displayed(n, 9, two).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
        // direct check against the factorial form at a complex s
        let s = SParam::new(1.3, 0.4).unwrap();
        let (n, big) = (3usize, 6usize);
        let fact = |k: usize| (1..=k).product::<usize>() as f64;
        let base = fact(big - n) * fact(big + n) / (2.0 * (n * n) as f64 * fact(big) * fact(big - 1));
        let half = s.complex() * 0.5;
        let expect = 2.0 * (half * base.ln()).exp() * ln_gamma_ratio(C64::new(6.0, 0.0), half + 6.0);
        assert!((psi_closed(n, big, s).unwrap() - expect).norm() < 1e-13);
    }

    #[test]
    fn psi_zero_limit_is_four_eta() {
        let s = SParam::real(2.0);
        let v = psi_zero_closed(256, s).unwrap();
        let four_eta = 4.0 * crate::eta::eta_reference(s).unwrap();
        assert!((v - four_eta).norm() < 0.05 * four_eta.norm());
    }

    #[test]
    fn exp_moment_closed_examples() {
        let two = SParam::real(2.0);
        assert!((exp_moment_closed(&grid(&[1.0]), two).unwrap() - 1.0).norm() < 1e-13);
        assert!((exp_moment_closed(&grid(&[1.0, 2.0]), two).unwrap() - 1.5).norm() < 1e-13);
        let one = SParam::real(1.0);
        let via_eta = crate::special::gamma(C64::new(1.5, 0.0)) * 2.0 * eta_series(one, 3).unwrap().value;
        assert!((exp_moment_closed(&OrderedGrid::squares(3), one).unwrap() - via_eta).norm() < 1e-14);
        assert!(exp_moment_closed(&grid(&[1.0, 2.0]), SParam::real(-3.6)).is_err());
    }

    #[test]
    fn reproducible_regardless_of_workers() {
        let cfg = SamplerConfig { chunk: 1000, ..SamplerConfig::with_seed(42) };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| eta_mc(SParam::new(1.0, 0.5).unwrap(), 4, &cfg, 10_000).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.mean.re.to_bits(), b.mean.re.to_bits());
        assert_eq!(a.mean.im.to_bits(), b.mean.im.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
}
