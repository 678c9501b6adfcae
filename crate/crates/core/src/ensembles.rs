//! Jacobi (Selberg) and Laguerre ensembles: normalizations, densities,
//! Metropolis samplers, the closed-form averaged ratio and the two cube
//! integrals it implies.
//!
//! The weights are `g(u) = u^{a−1}(1−u)^{b−1}` on `(0, 1)` and
//! `g(u) = u^{a−1}e^{−u/θ}` on `(0, ∞)`, and `U` has density
//! `N!/Z_N · V(u)² ∏ g(u_n)` on the ordered region.

use num_complex::Complex64;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::determinants::{alternating_sum_in, OrderedGrid};
use crate::error::{domain, Error, Result};
use crate::eta::{h_factor, SParam};
use crate::matrix::Matrix;
use crate::oracle::cofactor_det;
use crate::quadrature::{integrate, Tolerance};
use crate::sampling::{chunk_rng, monte_carlo, ratio_prefactor, GibbsSampler, MCEstimate, SamplerConfig};
use crate::stats::integrated_autocorrelation;
use crate::C64;

/// Largest `N` for the Metropolis samplers.
pub const SAMPLER_CAP: usize = 16;

/// Largest `N` for the cube quadratures.
pub const QUADRATURE_CAP: usize = 3;

/// Minimum number of tuning sweeps, whatever the configured burn-in.
pub const MIN_TUNING_SWEEPS: usize = 500;

/// Acceptance band targeted while tuning the proposal scales.
pub const TARGET_ACCEPTANCE: (f64, f64) = (0.3, 0.5);

/// Upper-tail mass left out by the Laguerre truncation.
pub const LAGUERRE_TAIL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnsembleKind {
    Jacobi { a: f64, b: f64 },
    Laguerre { a: f64, theta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    #[serde(rename = "N")]
    pub n: usize,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive, got {v}")))
    }
}

impl EnsembleSpec {
    pub fn jacobi(n: usize, a: f64, b: f64) -> Result<Self> {
        Self { kind: EnsembleKind::Jacobi { a, b }, n }.validated()
    }

    pub fn laguerre(n: usize, a: f64, theta: f64) -> Result<Self> {
        Self { kind: EnsembleKind::Laguerre { a, theta }, n }.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.n == 0 {
            return Err(domain("ensemble size N must be positive"));
        }
        match self.kind {
            EnsembleKind::Jacobi { a, b } => {
                positive("a", a)?;
                positive("b", b)?;
            }
            EnsembleKind::Laguerre { a, theta } => {
                positive("a", a)?;
                positive("theta", theta)?;
            }
        }
        Ok(self)
    }

    pub fn a(&self) -> f64 {
        match self.kind {
            EnsembleKind::Jacobi { a, .. } | EnsembleKind::Laguerre { a, .. } => a,
        }
    }

    /// Right end of the support.
    pub fn upper(&self) -> f64 {
        match self.kind {
            EnsembleKind::Jacobi { .. } => 1.0,
            EnsembleKind::Laguerre { .. } => f64::INFINITY,
        }
    }

    /// `ln g(u)`, `−∞` off `(0, upper)`.
    pub fn log_weight(&self, u: f64) -> f64 {
        if !(u > 0.0 && u < self.upper()) {
            return f64::NEG_INFINITY;
        }
        match self.kind {
            EnsembleKind::Jacobi { a, b } => (a - 1.0) * u.ln() + (b - 1.0) * (-u).ln_1p(),
            EnsembleKind::Laguerre { a, theta } => (a - 1.0) * u.ln() - u / theta,
        }
    }

    /// `ln Z_N`.
    pub fn ln_norm(&self) -> f64 {
        match self.kind {
            EnsembleKind::Jacobi { a, b } => ln_selberg(self.n, a, b),
            EnsembleKind::Laguerre { a, theta } => ln_laguerre(self.n, a, theta),
        }
    }

    /// `Re(a − s/2) > 0`.
    pub fn check_ratio(&self, s: SParam) -> Result<()> {
        if self.a() - 0.5 * s.re > 0.0 {
            Ok(())
        } else {
            Err(domain(format!("averaged ratio needs Re(a - s/2) > 0, got a={} and s={s}", self.a())))
        }
    }
}

/// `ln Γ(x + c) − ln Γ(x)`, kept accurate for large `x`.
fn ln_gamma_shift(x: f64, c: f64) -> f64 {
    if x < 1e4 {
        return ln_gamma(x + c) - ln_gamma(x);
    }
    let y = x + c;
    c * x.ln() + (y - 0.5) * (c / x).ln_1p() - c + (1.0 / y - 1.0 / x) / 12.0
        - (1.0 / (y * y * y) - 1.0 / (x * x * x)) / 360.0
}

fn ln_selberg(n: usize, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    (0..n)
        .map(|k| {
            let k = k as f64;
            ln_gamma(a + k) + ln_gamma(2.0 + k) - ln_gamma_shift(b + k, a - 1.0 + nf)
        })
        .sum()
}

fn ln_laguerre_products(n: usize, a: f64) -> f64 {
    (0..n).map(|k| ln_gamma(a + k as f64) + ln_gamma(2.0 + k as f64)).sum()
}

fn ln_laguerre(n: usize, a: f64, theta: f64) -> f64 {
    let nf = n as f64;
    nf * (a + nf - 1.0) * theta.ln() + ln_laguerre_products(n, a)
}

/// `S_N(a, b, 1) = ∏_{n<N} Γ(a+n)Γ(b+n)Γ(2+n)/Γ(a+b−1+N+n)`.
pub fn selberg_value(n: usize, a: f64, b: f64) -> Result<f64> {
    EnsembleSpec::jacobi(n, a, b)?;
    Ok(ln_selberg(n, a, b).exp())
}

/// `W_N(a, θ) = θ^{N(a+N−1)} ∏_{n<N} Γ(a+n)Γ(2+n)`, the integral of
/// `V(u)² ∏ u^{a−1}e^{−u/θ}` over the ordered region times `N!`.
pub fn laguerre_norm(n: usize, a: f64, theta: f64) -> Result<f64> {
    EnsembleSpec::laguerre(n, a, theta)?;
    Ok(ln_laguerre(n, a, theta).exp())
}

/// The displayed normalization, with exponent `(a+N)N` on `θ`.
pub fn laguerre_norm_displayed(n: usize, a: f64, theta: f64) -> Result<f64> {
    EnsembleSpec::laguerre(n, a, theta)?;
    let nf = n as f64;
    Ok(((a + nf) * nf * theta.ln() + ln_laguerre_products(n, a)).exp())
}

/// Relative gap `|S_N(a, L/θ+1) L^{N(a+N−1)} / W_N(a, θ) − 1|`.
pub fn laguerre_limit_gap(n: usize, a: f64, theta: f64, l: f64) -> Result<f64> {
    EnsembleSpec::laguerre(n, a, theta)?;
    let nf = n as f64;
    let log = ln_selberg(n, a, l / theta + 1.0) + nf * (a + nf - 1.0) * l.ln() - ln_laguerre(n, a, theta);
    Ok(log.exp_m1().abs())
}

/// The same gap for the displayed limit `S_N(a, L/θ+1)/L^{(a+N)N}` against
/// the displayed `W_N`.
pub fn laguerre_limit_gap_displayed(n: usize, a: f64, theta: f64, l: f64) -> Result<f64> {
    EnsembleSpec::laguerre(n, a, theta)?;
    let nf = n as f64;
    let w = (a + nf) * nf * theta.ln() + ln_laguerre_products(n, a);
    let log = ln_selberg(n, a, l / theta + 1.0) - (a + nf) * nf * l.ln() - w;
    Ok(log.exp_m1().abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DensityValue {
    pub log_density: f64,
    pub in_support: bool,
}

impl DensityValue {
    const OUTSIDE: Self = Self { log_density: f64::NEG_INFINITY, in_support: false };

    pub fn density(&self) -> f64 {
        self.log_density.exp()
    }
}

fn ln_vandermonde_sq(u: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            acc += 2.0 * (u[j] - u[i]).ln();
        }
    }
    acc
}

/// `ln(N!/Z_N · V(u)² ∏ g(u_n))` on the ordered support.
pub fn density_eval(spec: &EnsembleSpec, u: &OrderedGrid) -> Result<DensityValue> {
    if u.len() != spec.n {
        return Err(Error::ArityError { expected: spec.n, got: u.len() });
    }
    Ok(density_at(spec, u.as_slice()))
}

fn density_at(spec: &EnsembleSpec, u: &[f64]) -> DensityValue {
    if !u.windows(2).all(|w| w[0] < w[1]) {
        return DensityValue::OUTSIDE;
    }
    let lw: f64 = u.iter().map(|&x| spec.log_weight(x)).sum();
    if lw == f64::NEG_INFINITY {
        return DensityValue::OUTSIDE;
    }
    let ln_fact: f64 = (1..=spec.n).map(|k| (k as f64).ln()).sum();
    DensityValue { log_density: ln_fact - spec.ln_norm() + ln_vandermonde_sq(u) + lw, in_support: true }
}

/// Summary of a Metropolis chain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleDiagnostics {
    pub acceptance_rate: f64,
    pub proposal_scales: Vec<f64>,
    /// Integrated autocorrelation time of `ln V(u)² ∏ g(u_n)`, in samples.
    pub autocorrelation_time: f64,
}

/// Per-coordinate random-walk Metropolis on an ordered vector.
///
/// Coordinate `k` moves inside `(lo_k, hi_k)` with a Gaussian step reflected
/// at the ends, so the proposal is symmetric; its scale is `σ_k` times the
/// interval width, or times `θ √(a+N)` for the unbounded last coordinate.
struct Walker {
    spec: EnsembleSpec,
    u: Vec<f64>,
    scales: Vec<f64>,
    accepted: u64,
    proposed: u64,
}

fn reflect(t: f64, lo: f64, hi: f64) -> f64 {
    if hi.is_infinite() {
        return lo + (t - lo).abs();
    }
    let w = hi - lo;
    let r = (t - lo).rem_euclid(2.0 * w);
    lo + if r > w { 2.0 * w - r } else { r }
}

impl Walker {
    fn new(spec: EnsembleSpec) -> Self {
        let n = spec.n;
        let u = match spec.kind {
            EnsembleKind::Jacobi { .. } => (1..=n).map(|k| k as f64 / (n + 1) as f64).collect(),
            EnsembleKind::Laguerre { a, theta } => (1..=n).map(|k| theta * (a + 2.0 * k as f64)).collect(),
        };
        Self { spec, u, scales: vec![0.5; n], accepted: 0, proposed: 0 }
    }

    fn unbounded_scale(&self) -> f64 {
        match self.spec.kind {
            EnsembleKind::Laguerre { a, theta } => theta * (a + self.spec.n as f64).sqrt(),
            EnsembleKind::Jacobi { .. } => 1.0,
        }
    }

    /// One Metropolis step on coordinate `k` in `(lo, hi)` targeting
    /// `∏_{j≠k}|u_k − u_j|^power g(u_k)`.
    fn step<R: RngExt>(&mut self, k: usize, lo: f64, hi: f64, power: f64, rng: &mut R) -> bool {
        let width = if hi.is_finite() { hi - lo } else { self.unbounded_scale() };
        let z: f64 = rng.sample(StandardNormal);
        let proposal = reflect(self.u[k] + self.scales[k] * width * z, lo, hi);
        self.proposed += 1;
        if !(proposal > lo && proposal < hi) {
            return false;
        }
        let log_target = |t: f64| {
            let rep: f64 = self.u.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &uj)| (t - uj).abs().ln()).sum();
            power * rep + self.spec.log_weight(t)
        };
        let log_ratio = log_target(proposal) - log_target(self.u[k]);
        if log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp() {
            self.u[k] = proposal;
            self.accepted += 1;
            true
        } else {
            false
        }
    }

    /// Sweep with neighbour bounds, the marginal chain for `U`.
    fn sweep<R: RngExt>(&mut self, rng: &mut R, hits: &mut [u32]) {
        let n = self.u.len();
        for k in 0..n {
            let lo = if k == 0 { 0.0 } else { self.u[k - 1] };
            let hi = if k + 1 == n { self.spec.upper() } else { self.u[k + 1] };
            if self.step(k, lo, hi, 2.0, rng) {
                hits[k] += 1;
            }
        }
    }

    /// Sweep with bounds set by an interlacing `x`, the conditional of `U`
    /// given `X` under the joint density.
    fn sweep_given<R: RngExt>(&mut self, x: &[f64], rng: &mut R, hits: &mut [u32]) {
        let n = self.u.len();
        for k in 0..n {
            let lo = if k == 0 { 0.0 } else { x[k - 1] };
            let hi = if k + 1 == n { self.spec.upper() } else { x[k] };
            if self.step(k, lo, hi, 1.0, rng) {
                hits[k] += 1;
            }
        }
    }

    fn adapt(&mut self, hits: &mut [u32], window: u32) {
        for (scale, h) in self.scales.iter_mut().zip(hits.iter_mut()) {
            let rate = f64::from(*h) / f64::from(window);
            if rate > TARGET_ACCEPTANCE.1 {
                *scale = (*scale * 1.5).min(4.0);
            } else if rate < TARGET_ACCEPTANCE.0 {
                *scale /= 1.5;
            }
            *h = 0;
        }
    }

    fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposed.max(1) as f64
    }
}

const TUNING_WINDOW: u32 = 50;

fn tuning_sweeps(cfg: &SamplerConfig) -> usize {
    cfg.burn_in.max(MIN_TUNING_SWEEPS)
}

fn check_sampler(spec: &EnsembleSpec, cfg: &SamplerConfig) -> Result<()> {
    cfg.validate()?;
    if spec.n > SAMPLER_CAP {
        return Err(Error::CapExceeded { what: "ensemble N", value: spec.n, cap: SAMPLER_CAP });
    }
    Ok(())
}

/// Metropolis chain for the ensemble density of `U`.
pub struct EnsembleChain<R = ChaCha8Rng> {
    walker: Walker,
    rng: R,
    thinning: usize,
}

impl<R: RngExt> EnsembleChain<R> {
    /// Tune the proposal scales over the burn-in, then freeze them.
    pub fn from_rng(spec: &EnsembleSpec, mut rng: R, cfg: &SamplerConfig) -> Result<Self> {
        check_sampler(spec, cfg)?;
        let mut walker = Walker::new(*spec);
        let mut hits = vec![0; spec.n];
        for sweep in 1..=tuning_sweeps(cfg) {
            walker.sweep(&mut rng, &mut hits);
            if (sweep as u32).is_multiple_of(TUNING_WINDOW) {
                walker.adapt(&mut hits, TUNING_WINDOW);
            }
        }
        walker.accepted = 0;
        walker.proposed = 0;
        Ok(Self { walker, rng, thinning: cfg.thinning.max(1) })
    }

    pub fn next_u(&mut self) -> &[f64] {
        let mut hits = vec![0; self.walker.u.len()];
        for _ in 0..self.thinning {
            self.walker.sweep(&mut self.rng, &mut hits);
        }
        &self.walker.u
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.walker.acceptance_rate()
    }

    pub fn proposal_scales(&self) -> &[f64] {
        &self.walker.scales
    }

    /// Run `len` more samples and summarize them.
    pub fn diagnostics(&mut self, len: usize) -> EnsembleDiagnostics {
        let spec = self.walker.spec;
        let series: Vec<f64> = (0..len)
            .map(|_| {
                let u = self.next_u();
                ln_vandermonde_sq(u) + u.iter().map(|&x| spec.log_weight(x)).sum::<f64>()
            })
            .collect();
        EnsembleDiagnostics {
            acceptance_rate: self.acceptance_rate(),
            proposal_scales: self.walker.scales.clone(),
            autocorrelation_time: integrated_autocorrelation(&series),
        }
    }
}

impl EnsembleChain<ChaCha8Rng> {
    pub fn new(spec: &EnsembleSpec, cfg: &SamplerConfig) -> Result<Self> {
        Self::from_rng(spec, chunk_rng(cfg.seed, 0), cfg)
    }
}

impl<R: RngExt> Iterator for EnsembleChain<R> {
    type Item = OrderedGrid;

    fn next(&mut self) -> Option<OrderedGrid> {
        let u = self.next_u().to_vec();
        Some(OrderedGrid::with_min_gap(u, 0.0).expect("chain stays strictly ordered"))
    }
}

/// Stream of ensemble draws.
pub fn sample_ensemble(spec: &EnsembleSpec, cfg: &SamplerConfig) -> Result<EnsembleChain> {
    EnsembleChain::new(spec, cfg)
}

/// Chain on the joint density `∝ V(x) V(u) ∏ g(u_n)` over interlacing
/// `(x, u)`: `U | X` by Metropolis, `X | U` by exact Gibbs sweeps.
pub struct JointChain<R = ChaCha8Rng> {
    walker: Walker,
    gibbs: GibbsSampler<R>,
    thinning: usize,
}

impl<R: RngExt> JointChain<R> {
    pub fn from_rng(spec: &EnsembleSpec, rng: R, cfg: &SamplerConfig) -> Result<Self> {
        check_sampler(spec, cfg)?;
        let walker = Walker::new(*spec);
        let gibbs = GibbsSampler::from_rng(&walker.u, rng, 0, 1);
        let mut chain = Self { walker, gibbs, thinning: cfg.thinning.max(1) };
        let mut hits = vec![0; spec.n];
        for sweep in 1..=tuning_sweeps(cfg) {
            chain.sweep(&mut hits);
            if (sweep as u32).is_multiple_of(TUNING_WINDOW) {
                chain.walker.adapt(&mut hits, TUNING_WINDOW);
            }
        }
        chain.walker.accepted = 0;
        chain.walker.proposed = 0;
        Ok(chain)
    }

    fn sweep(&mut self, hits: &mut [u32]) {
        let x = self.gibbs.state().to_vec();
        self.walker.sweep_given(&x, self.gibbs.rng_mut(), hits);
        self.gibbs.set_grid(&self.walker.u);
        self.gibbs.sweep();
    }

    /// Advance and return `(x, u)`.
    pub fn next_pair(&mut self) -> (&[f64], &[f64]) {
        let mut hits = vec![0; self.walker.u.len()];
        for _ in 0..self.thinning {
            self.sweep(&mut hits);
        }
        (self.gibbs.state(), &self.walker.u)
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.walker.acceptance_rate()
    }
}

/// `E[V^{(s/2)}(U)/V(U)] = h_N(s) N^{s/2} Γ(a+b−1+N)Γ(a−s/2) / (Γ(a−s/2+b−1+N)Γ(a))`
/// for Jacobi, `h_N(s) (N/θ)^{s/2} Γ(a−s/2)/Γ(a)` for Laguerre, with
/// `h_N(s) = 2/(sΓ_{N−1}(s/2))`.
pub fn avg_ratio_closed(spec: &EnsembleSpec, s: SParam) -> Result<C64> {
    spec.check_ratio(s)?;
    Ok(h_factor(s, spec.n) * ensemble_factor(spec, s))
}

/// The Gamma and power factors shared by both prefactor conventions.
fn ensemble_factor(spec: &EnsembleSpec, s: SParam) -> C64 {
    use crate::special::ln_gamma as lg;
    let half = s.complex() * 0.5;
    let re = |x: f64| Complex64::new(x, 0.0);
    let nf = spec.n as f64;
    match spec.kind {
        EnsembleKind::Jacobi { a, b } => {
            let c = a + b - 1.0 + nf;
            (half * nf.ln() + lg(re(c)) + lg(re(a) - half) - lg(re(c) - half) - lg(re(a))).exp()
        }
        EnsembleKind::Laguerre { a, theta } => (half * (nf / theta).ln() + lg(re(a) - half) - lg(re(a))).exp(),
    }
}

/// The displayed prefactor `2/(sΓ_{N−1}(s)) = 2 ∏_{n<N}(1+s/n) / N^s`.
pub fn displayed_prefactor(s: SParam, n: usize) -> C64 {
    let z = s.complex();
    let prod = (1..n).fold(C64::new(1.0, 0.0), |acc, k| acc * (z / k as f64 + 1.0));
    2.0 * prod * (-z * (n as f64).ln()).exp()
}

/// The theorem as displayed, with `Γ_{N−1}(s)` in the prefactor.
pub fn avg_ratio_closed_displayed(spec: &EnsembleSpec, s: SParam) -> Result<C64> {
    spec.check_ratio(s)?;
    Ok(displayed_prefactor(s, spec.n) * ensemble_factor(spec, s))
}

/// The two Monte Carlo estimates of the averaged ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AvgRatioEstimates {
    /// Alternating sum evaluated on ensemble draws of `U`.
    pub direct: MCEstimate,
    /// `h_N N^{s/2} ∏X^{s/2}/∏U^{s/2}` on draws of the joint chain.
    pub joint: MCEstimate,
}

impl AvgRatioEstimates {
    /// `|direct − joint|` in combined standard errors.
    pub fn disagreement(&self) -> f64 {
        let d = (self.direct.mean - self.joint.mean).norm();
        let se = self.direct.std_error.hypot(self.joint.std_error);
        if se > 0.0 {
            d / se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

pub fn avg_ratio_mc(spec: &EnsembleSpec, s: SParam, cfg: &SamplerConfig, samples: u64) -> Result<AvgRatioEstimates> {
    spec.check_ratio(s)?;
    check_sampler(spec, cfg)?;
    let z = s.complex();
    let half = z * 0.5;
    let exact_one = z == C64::new(0.0, 0.0);
    let direct = monte_carlo(samples, cfg, "ensemble_direct", |rng, count, out| {
        let mut chain = EnsembleChain::from_rng(spec, rng.clone(), cfg)?;
        for _ in 0..count {
            let u = chain.next_u();
            // at s = 0 the ratio is V(u)/V(u)
            out.push(if exact_one { C64::new(1.0, 0.0) } else { alternating_sum_in(z, u) });
        }
        Ok(())
    })?;
    let prefactor = ratio_prefactor(s, spec.n);
    let joint = monte_carlo(samples, cfg, "ensemble_joint", |rng, count, out| {
        let mut chain = JointChain::from_rng(spec, rng.clone(), cfg)?;
        for _ in 0..count {
            let (x, u) = chain.next_pair();
            let log = x.iter().map(|v| v.ln()).sum::<f64>() - u.iter().map(|v| v.ln()).sum::<f64>();
            out.push((half * log).exp());
        }
        Ok(())
    })?
    .scaled(prefactor);
    Ok(AvgRatioEstimates { direct, joint })
}

/// Closed form of `∫ V^{(s/2)}(u) V(u) ∏ g(u_n) du` over the cube:
/// `Z_N` times the averaged ratio.
pub fn corollary_closed(spec: &EnsembleSpec, s: SParam) -> Result<C64> {
    Ok(avg_ratio_closed(spec, s)? * spec.ln_norm().exp())
}

/// The corollary as displayed: `Γ_{N−1}(s)` in the prefactor and, for
/// Laguerre, `θ^{(a+N)N}`.
pub fn corollary_closed_displayed(spec: &EnsembleSpec, s: SParam) -> Result<C64> {
    let z = match spec.kind {
        EnsembleKind::Jacobi { .. } => spec.ln_norm().exp(),
        EnsembleKind::Laguerre { a, theta } => laguerre_norm_displayed(spec.n, a, theta)?,
    };
    Ok(avg_ratio_closed_displayed(spec, s)? * z)
}

/// `det[u_i^{−s/2}, u_i, …, u_i^{N−1}]`.
pub fn gen_vandermonde_det(s: SParam, u: &[f64]) -> Result<C64> {
    let half = s.complex() * 0.5;
    let m = Matrix::from_fn(u.len(), u.len(), |i, j| {
        if j == 0 {
            (-half * u[i].ln()).exp()
        } else {
            C64::new(u[i].powi(j as i32), 0.0)
        }
    });
    cofactor_det(&m)
}

/// A quadrature coordinate `u` together with `c = 1 − u`, each accurate near
/// its own end, so Jacobi weights stay resolved next to `u = 1`.
#[derive(Clone, Copy, Debug)]
struct Coord {
    u: f64,
    c: f64,
}

impl Coord {
    fn at(u: f64) -> Self {
        Coord { u, c: 1.0 - u }
    }

    /// `other − self`.
    fn gap_to(self, other: Coord) -> f64 {
        if self.c < 0.5 && other.c < 0.5 {
            self.c - other.c
        } else {
            other.u - self.u
        }
    }
}

impl EnsembleSpec {
    fn log_weight_at(&self, x: Coord) -> f64 {
        match self.kind {
            EnsembleKind::Jacobi { a, b } if x.u > 0.0 && x.c > 0.0 => (a - 1.0) * x.u.ln() + (b - 1.0) * x.c.ln(),
            EnsembleKind::Jacobi { .. } => f64::NEG_INFINITY,
            EnsembleKind::Laguerre { .. } => self.log_weight(x.u),
        }
    }
}

fn vandermonde(x: &[Coord]) -> f64 {
    let mut v = 1.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            v *= x[i].gap_to(x[j]);
        }
    }
    v
}

/// `N!/Z_N · V(u)² ∏ g(u_n)`, zero off the ordered support.
fn density_at_coords(spec: &EnsembleSpec, x: &[Coord]) -> f64 {
    let v = vandermonde(x);
    let ordered = x.windows(2).all(|w| w[0].gap_to(w[1]) > 0.0);
    let lw: f64 = x.iter().map(|&p| spec.log_weight_at(p)).sum();
    if !ordered || lw == f64::NEG_INFINITY {
        return 0.0;
    }
    let ln_fact: f64 = (1..=spec.n).map(|k| (k as f64).ln()).sum();
    (ln_fact - spec.ln_norm() + 2.0 * v.ln() + lw).exp()
}

/// A coordinate range with power maps at singular ends: on each half of
/// `[lo, hi]`, `u = end ± (width/2) t^{1/p}` with `p` in `(0, 1]`.
#[derive(Clone, Copy, Debug)]
struct Range {
    lo: Coord,
    hi: Coord,
    p_lo: f64,
    p_hi: f64,
}

/// Power `p` turning an endpoint behaviour `|u − end|^e du` into a
/// polynomial in `t`.
fn flattening_power(e: f64) -> f64 {
    (e + 1.0) / (e + 1.0).ceil()
}

fn integrate_range<F>(mut f: F, r: Range, tol: Tolerance) -> Result<C64>
where
    F: FnMut(Coord) -> Result<C64>,
{
    let half = 0.5 * r.lo.gap_to(r.hi);
    let mut side = |end: Coord, dir: f64, p: f64| -> Result<C64> {
        // offsets are applied to both parts, so the distance to `end` is exact
        let at = |d: f64| Coord { u: end.u + dir * d, c: end.c - dir * d };
        if p >= 1.0 {
            return integrate(|d| f(at(d)), 0.0, half, tol);
        }
        let inv = 1.0 / p;
        integrate(
            |t: f64| {
                let jac = half * inv * t.powf(inv - 1.0);
                Ok(f(at(half * t.powf(inv)))? * jac)
            },
            0.0,
            1.0,
            tol,
        )
    };
    Ok(side(r.lo, 1.0, r.p_lo)? + side(r.hi, -1.0, r.p_hi)?)
}

/// Nested integral over a product of ranges.
fn integrate_box<F>(f: &F, ranges: &[Range], point: &mut Vec<Coord>, tol: Tolerance) -> Result<C64>
where
    F: Fn(&[Coord]) -> Result<C64>,
{
    let depth = point.len();
    if depth == ranges.len() {
        return f(point);
    }
    integrate_range(
        |x| {
            point.push(x);
            let v = integrate_box(f, ranges, point, tol);
            point.pop();
            v
        },
        ranges[depth],
        tol,
    )
}

/// Truncation point `T` with Gamma upper tail below [`LAGUERRE_TAIL`] for
/// the shape `k`.
fn laguerre_cutoff(k: f64, theta: f64) -> f64 {
    let mut x = k.max(1.0);
    while gamma_ur(k, x) > LAGUERRE_TAIL {
        x *= 1.25;
    }
    theta * x
}

/// Coordinate ranges for an integrand whose behaviour at zero is `u^{e0}`
/// and whose heaviest growth is `u^{degree} g(u)`.
fn cube_ranges(spec: &EnsembleSpec, e0: f64, degree: f64) -> Vec<Range> {
    let (hi, p_hi) = match spec.kind {
        EnsembleKind::Jacobi { b, .. } => (Coord { u: 1.0, c: 0.0 }, flattening_power(b - 1.0)),
        EnsembleKind::Laguerre { a, theta } => (Coord::at(laguerre_cutoff(a + degree, theta)), 1.0),
    };
    vec![Range { lo: Coord::at(0.0), hi, p_lo: flattening_power(e0), p_hi }; spec.n]
}

fn quadrature_cap(n: usize) -> Result<()> {
    if !(1..=QUADRATURE_CAP).contains(&n) {
        return Err(Error::CapExceeded { what: "quadrature N", value: n, cap: QUADRATURE_CAP });
    }
    Ok(())
}

/// `∫ V^{(s/2)}(u) V(u) ∏ g(u_n) du` over `[0, 1]^N` (Jacobi) or
/// `[0, T]^N` (Laguerre) by nested adaptive quadrature.
pub fn corollary_integral_quadrature(spec: &EnsembleSpec, s: SParam) -> Result<C64> {
    quadrature_cap(spec.n)?;
    spec.check_ratio(s)?;
    let a = spec.a();
    let e0 = a - 1.0 - (0.5 * s.re).max(0.0);
    let degree = 2.0 * (spec.n as f64 - 1.0) + (-0.5 * s.re).max(0.0);
    let ranges = cube_ranges(spec, e0, degree);
    let f = |x: &[Coord]| -> Result<C64> {
        let lw: f64 = x.iter().map(|&p| spec.log_weight_at(p)).sum();
        if lw == f64::NEG_INFINITY {
            return Ok(C64::new(0.0, 0.0));
        }
        let u: Vec<f64> = x.iter().map(|p| p.u).collect();
        Ok(gen_vandermonde_det(s, &u)? * (vandermonde(x) * lw.exp()))
    };
    integrate_box(&f, &ranges, &mut Vec::with_capacity(spec.n), Tolerance::new(1e-10, 0.0))
}

/// `∫ V(u)² ∏ g(u_n) du` over the cube, which equals `Z_N`.
pub fn norm_quadrature(spec: &EnsembleSpec) -> Result<f64> {
    quadrature_cap(spec.n)?;
    let ranges = cube_ranges(spec, spec.a() - 1.0, 2.0 * (spec.n as f64 - 1.0));
    let f = |x: &[Coord]| -> Result<C64> {
        let lw: f64 = x.iter().map(|&p| spec.log_weight_at(p)).sum();
        let v = vandermonde(x);
        Ok(C64::new(if lw == f64::NEG_INFINITY { 0.0 } else { v * v * lw.exp() }, 0.0))
    };
    Ok(integrate_box(&f, &ranges, &mut Vec::with_capacity(spec.n), Tolerance::new(1e-10, 0.0))?.re)
}

/// `∫ density` over the ordered region, for `N ∈ {1, 2}`.
pub fn density_mass_quadrature(spec: &EnsembleSpec) -> Result<f64> {
    if !(1..=2).contains(&spec.n) {
        return Err(Error::CapExceeded { what: "density quadrature N", value: spec.n, cap: 2 });
    }
    let top = cube_ranges(spec, spec.a() - 1.0, 2.0 * (spec.n as f64 - 1.0))[0];
    let tol = Tolerance::new(1e-10, 0.0);
    let dens = |x: &[Coord]| C64::new(density_at_coords(spec, x), 0.0);
    let total = if spec.n == 1 {
        integrate_range(|u| Ok(dens(&[u])), top, tol)?
    } else {
        integrate_range(
            |u1| integrate_range(|u2| Ok(dens(&[u1, u2])), Range { lo: u1, p_lo: 1.0, ..top }, tol),
            top,
            tol,
        )?
    };
    Ok(total.re)
}

/// Marginal density of `X` at `N = 2` from the joint density
/// `N!(N−1)!/Z_N · V(x)V(u)∏g(u_n)`, by integrating out `u`.
pub fn marginal_x_quadrature(spec: &EnsembleSpec, x: f64) -> Result<f64> {
    if spec.n != 2 {
        return Err(domain("the marginal check is implemented for N = 2"));
    }
    if !(x > 0.0 && x < spec.upper()) {
        return Ok(0.0);
    }
    let top = cube_ranges(spec, spec.a() - 1.0, 1.0)[0];
    let tol = Tolerance::new(1e-11, 0.0);
    let g = |p: Coord| spec.log_weight_at(p).exp();
    let at_x = Coord::at(x);
    let hi = if top.hi.u > x { top.hi } else { at_x };
    let inner = integrate_range(
        |u1| {
            let outer = integrate_range(
                |u2| Ok(C64::new(u1.gap_to(u2) * g(u2), 0.0)),
                Range { lo: at_x, p_lo: 1.0, hi, ..top },
                tol,
            )?;
            Ok(outer * g(u1))
        },
        Range { lo: top.lo, hi: at_x, p_lo: top.p_lo, p_hi: 1.0 },
        tol,
    )?;
    Ok(2.0 * inner.re / spec.ln_norm().exp())
}

/// The stated marginal: the `N−1` ensemble with `a+1` (and `b+1`) at `x`,
/// for `N = 2`.
pub fn marginal_x_closed(spec: &EnsembleSpec, x: f64) -> Result<f64> {
    if spec.n != 2 {
        return Err(domain("the marginal check is implemented for N = 2"));
    }
    let shifted = match spec.kind {
        EnsembleKind::Jacobi { a, b } => EnsembleSpec::jacobi(1, a + 1.0, b + 1.0)?,
        EnsembleKind::Laguerre { a, theta } => EnsembleSpec::laguerre(1, a + 1.0, theta)?,
    };
    Ok(density_at(&shifted, &[x]).density())
}
