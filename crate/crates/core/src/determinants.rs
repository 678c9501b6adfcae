//! Determinant representations of `η_N`: the factorial-scaled determinant,
//! generalized Vandermonde ratios, the nested-integral form, and the
//! tridiagonal recurrence with its continued fraction.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{domain, Error, Result};
use crate::eta::{h_factor_in, Diagnostics, EvalResult, Method, SParam, WeightTable, DEFAULT_GUARD};
use crate::matrix::Matrix;
use crate::quadrature::{integrate, Tolerance};
use crate::scalar::{lift, lower, pow_neg, Real};
use crate::{Dd, C64};

/// Largest `N` for [`eta_det`].
pub const DET_CAP: usize = 40;

/// Relative condition threshold above which a determinant is flagged.
pub const ILL_CONDITIONED: f64 = 1e-8;

/// Default minimum gap between consecutive grid points.
pub const DEFAULT_MIN_GAP: f64 = 1e-9;

/// Strictly increasing positive nodes `u_1 < … < u_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedGrid {
    u: Vec<f64>,
}

impl OrderedGrid {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        Self::with_min_gap(u, DEFAULT_MIN_GAP)
    }

    pub fn with_min_gap(u: Vec<f64>, min_gap: f64) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::GridError("empty grid".into()));
        }
        if let Some(bad) = u.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::GridError(format!("node {bad} is not finite and positive")));
        }
        if let Some(k) = u.windows(2).position(|w| w[1] - w[0] <= min_gap) {
            return Err(Error::GridError(format!(
                "nodes {} and {} are not increasing by more than {min_gap}",
                u[k],
                u[k + 1]
            )));
        }
        Ok(Self { u })
    }

    /// The grid `1, 4, …, N²`.
    pub fn squares(n: usize) -> Self {
        Self { u: (1..=n).map(|k| (k * k) as f64).collect() }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.u
    }
}

/// Determinant with the by-products of partial-pivoted LU.
#[derive(Clone, Debug)]
pub struct LuDet<T> {
    pub det: Complex<T>,
    /// `max |U_ij| / max |A_ij|`.
    pub growth: f64,
    /// `‖A‖₁ ‖A⁻¹‖₁`.
    pub cond1: f64,
}

/// Determinant by LU with partial pivoting, plus growth and 1-norm condition.
pub fn lu_det<T: Real>(a: &Matrix<Complex<T>>) -> Result<LuDet<T>> {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let n = a.rows();
    let mag = |z: &Complex<T>| z.norm().to_f64_lossy();
    let max_a = (0..n).flat_map(|i| a.row(i).iter().map(mag)).fold(0.0, f64::max);
    let norm1_a = (0..n).map(|j| (0..n).map(|i| mag(&a[(i, j)])).sum::<f64>()).fold(0.0, f64::max);

    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut det = Complex::new(T::one(), T::zero());
    let mut max_u = max_a;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| mag(&lu[(i, k)]).total_cmp(&mag(&lu[(j, k)]))).expect("nonempty pivot column");
        if lu[(p, k)].is_zero() {
            return Err(Error::SingularMatrix);
        }
        if p != k {
            lu.swap_rows(p, k);
            perm.swap(p, k);
            det = -det;
        }
        let pivot = lu[(k, k)];
        det = det * pivot;
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            for j in k + 1..n {
                let update = lu[(i, j)] - factor * lu[(k, j)];
                lu[(i, j)] = update;
                max_u = max_u.max(mag(&update));
            }
        }
    }

    // ‖A⁻¹‖₁ from the factors, one column of the inverse at a time
    let mut norm1_inv = 0.0_f64;
    for col in 0..n {
        let mut x: Vec<Complex<T>> =
            perm.iter().map(|&p| if p == col { Complex::new(T::one(), T::zero()) } else { Complex::zero() }).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - lu[(i, j)] * x[j];
            }
            x[i] = x[i] / lu[(i, i)];
        }
        norm1_inv = norm1_inv.max(x.iter().map(mag).sum());
    }

    Ok(LuDet { det, growth: if max_a > 0.0 { max_u / max_a } else { 1.0 }, cond1: norm1_a * norm1_inv })
}

/// The `N×N` matrix with first column `n^{1-s}` and column `k ≥ 2` equal to
/// `n^{2k-1}/(2k-1)!`; half its determinant is `η_N(s)`.
pub fn scaled_matrix<T: Real>(s: Complex<T>, n: usize) -> Matrix<Complex<T>> {
    Matrix::from_fn(n, n, |row, col| {
        let x = T::of_usize(row + 1);
        if col == 0 {
            pow_neg(x, s - T::one())
        } else {
            // x^{2k-1}/(2k-1)! built incrementally to stay in range
            let mut v = x;
            for m in 1..=col {
                let a = T::of_usize(2 * m);
                v = v * x * x / (a * (a + T::one()));
            }
            Complex::new(v, T::zero())
        }
    })
}

/// `½ det` of [`scaled_matrix`] in the working precision `T`.
pub fn eta_det_in<T: Real>(s: Complex<T>, n: usize) -> Result<(Complex<T>, LuDet<T>)> {
    let lu = lu_det(&scaled_matrix(s, n))?;
    Ok((lu.det * T::of(0.5), lu))
}

/// `η_N(s)` as a determinant, factorized in double-double.
///
/// The scaled matrix reaches condition numbers near `1e10` by `N = 12`, so
/// double precision alone cannot deliver eight digits.
pub fn eta_det(s: SParam, n: usize) -> Result<EvalResult> {
    if n < 2 {
        return Err(domain("determinant form needs N >= 2"));
    }
    if n > DET_CAP {
        return Err(Error::CapExceeded { what: "N", value: n, cap: DET_CAP });
    }
    let (value, lu) = eta_det_in::<Dd>(lift(s.complex()), n)?;
    let meta = Diagnostics {
        growth_factor: Some(lu.growth),
        condition_estimate: Some(lu.cond1),
        ill_conditioned: lu.cond1 * Dd::unit_roundoff() > ILL_CONDITIONED,
        ..Diagnostics::default()
    };
    Ok(EvalResult { value: lower(value), method: Method::Determinant, n, meta })
}

fn power_rows<T: Real>(u: &[f64], first: impl Fn(T) -> Complex<T>) -> Matrix<Complex<T>> {
    let n = u.len();
    Matrix::from_fn(n, n, |row, col| {
        let x = T::of(u[row]);
        // every row is scaled by 1/u_n
        let entry = if col == 0 { first(x) } else { Complex::new(x.powi(col as i32), T::zero()) };
        entry / x
    })
}

/// `V^{(s/2)}(u) / V(u)` as a ratio of determinants in precision `T`.
pub fn gen_vandermonde_ratio_in<T: Real>(s: Complex<T>, u: &[f64]) -> Result<Complex<T>> {
    let half = s * T::of(0.5);
    let top = lu_det(&power_rows(u, |x| pow_neg(x, half)))?;
    let bottom = lu_det(&power_rows::<T>(u, |_| Complex::new(T::one(), T::zero())))?;
    Ok(top.det / bottom.det)
}

/// Generalized Vandermonde ratio, with columns `(u^{-s/2}, u, …, u^{N-1})`
/// over the ordinary Vandermonde determinant.
pub fn gen_vandermonde_ratio(s: SParam, u: &OrderedGrid) -> Result<C64> {
    if u.len() < 2 {
        return Err(Error::GridError("the ratio needs at least two nodes".into()));
    }
    Ok(lower(gen_vandermonde_ratio_in::<Dd>(lift(s.complex()), u.as_slice())?))
}

/// `Σ (-1)^{n-1} u_n^{-s/2} ∏_{j≠n} u_j/|u_j − u_n|` in precision `T`.
pub fn alternating_sum_in<T: Real>(s: Complex<T>, u: &[f64]) -> Complex<T> {
    let half = s * T::of(0.5);
    let mut acc = Complex::new(T::zero(), T::zero());
    for (n, &un) in u.iter().enumerate() {
        let un_t = T::of(un);
        let mut weight = T::one();
        for (_, &uj) in u.iter().enumerate().filter(|&(j, _)| j != n) {
            let uj_t = T::of(uj);
            weight = weight * uj_t / (uj_t - un_t).abs();
        }
        let term = pow_neg(un_t, half) * weight;
        acc = if n % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

pub fn alternating_sum(s: SParam, u: &OrderedGrid) -> C64 {
    alternating_sum_in(s.complex(), u.as_slice())
}

/// `det V^{(s)}_N` for the squares grid, directly: the ratio times `det V_N`.
pub fn detvs_direct(s: SParam, n: usize) -> Result<C64> {
    let ratio = if n == 1 { C64::new(1.0, 0.0) } else { gen_vandermonde_ratio(s, &OrderedGrid::squares(n))? };
    let det_v = crate::eta::rational_to_real::<f64>(&crate::exact_linalg::squares_vandermonde_det(n));
    Ok(ratio * det_v)
}

/// `det V^{(s)}_N` from its nested-integral representation,
/// `(N−1)! h_N(s) ∫ ∏_{i<j}(x_j − x_i) ∏ (x_n/(n(n+1)))^{s/2} dx` over the
/// boxes `x_n ∈ [n², (n+1)²]`, for `N ∈ {2, 3}`.
pub fn detvs_integral_quadrature(s: SParam, n: usize) -> Result<C64> {
    if !(2..=3).contains(&n) {
        return Err(domain(format!("quadrature form is restricted to N in {{2, 3}}, got {n}")));
    }
    if s.re <= -2.0 {
        return Err(domain(format!("integrand is not integrable for Re(s) = {} <= -2", s.re)));
    }
    let half = s.complex() * 0.5;
    let factor = |x: f64, k: usize| (half * (x / (k * (k + 1)) as f64).ln()).exp();
    let tol = Tolerance::new(1e-9, 0.0);
    let integral: C64 = if n == 2 {
        integrate(|x| Ok(factor(x, 1)), 1.0, 4.0, tol)?
    } else {
        integrate(
            |x1| {
                let inner: C64 = integrate(|x2| Ok(factor(x2, 2) * (x2 - x1)), 4.0, 9.0, tol)?;
                Ok(inner * factor(x1, 1))
            },
            1.0,
            4.0,
            tol,
        )?
    };
    let factorial = (1..n).product::<usize>() as f64;
    Ok(h_factor_in(s.complex(), n) * factorial * integral)
}

/// `λ_{n,N}⁻¹ = 2a_{n,N}(n^{-s} − 1)` and `β_{n,N}` for `n = 2, …, N`.
#[derive(Clone, Debug)]
pub struct TridiagCoeffs {
    pub n: usize,
    pub s: SParam,
    /// `lambda_inv[k]` is `λ_{k+2,N}⁻¹`.
    pub lambda_inv: Vec<C64>,
    /// `beta[k]` is `β_{k+2,N}`.
    pub beta: Vec<C64>,
}

impl TridiagCoeffs {
    /// `λ_{k,N}⁻¹` for `k ≥ 1`, with `λ_{1,N} = 1`.
    pub fn lambda_inv_at(&self, k: usize) -> C64 {
        if k == 1 {
            C64::new(1.0, 0.0)
        } else {
            self.lambda_inv[k - 2]
        }
    }

    /// `β_{k,N}` for `k ≥ 2`.
    pub fn beta_at(&self, k: usize) -> C64 {
        self.beta[k - 2]
    }
}

pub fn tridiag_coeffs(s: SParam, n: usize) -> Result<TridiagCoeffs> {
    tridiag_coeffs_guarded(s, n, DEFAULT_GUARD)
}

pub fn tridiag_coeffs_guarded(s: SParam, n: usize, guard: f64) -> Result<TridiagCoeffs> {
    s.check_nonzero(guard, "tridiagonal form")?;
    if n < 2 {
        return Err(domain("tridiagonal form needs N >= 2"));
    }
    let weights = WeightTable::new(n)?.to_real::<f64>();
    let z = s.complex();
    let mut lambda_inv = Vec::with_capacity(n - 1);
    for k in 2..=n {
        let li = (pow_neg(k as f64, z) - 1.0) * (2.0 * weights[k - 1]);
        if li.is_zero() {
            return Err(Error::ZeroLambda { index: k });
        }
        lambda_inv.push(li);
    }
    // β_2 = 1/λ_2 and β_k = λ_{k-1}/λ_k = λ_k⁻¹/λ_{k-1}⁻¹
    let beta =
        (0..lambda_inv.len()).map(|k| if k == 0 { lambda_inv[0] } else { lambda_inv[k] / lambda_inv[k - 1] }).collect();
    Ok(TridiagCoeffs { n, s, lambda_inv, beta })
}

fn run_recurrence(c: &TridiagCoeffs, d0: C64, d1: C64) -> Vec<C64> {
    let mut d = vec![d0, d1];
    for k in 2..=c.n {
        let b = c.beta_at(k);
        let next = (b + 1.0) * d[k - 1] - b * d[k - 2];
        d.push(next);
    }
    d
}

/// `Δ_{0,N}, …, Δ_{N,N}` from `Δ_0 = 0`, `Δ_1 = 1`.
pub fn delta_sequence(c: &TridiagCoeffs) -> Vec<C64> {
    run_recurrence(c, C64::new(0.0, 0.0), C64::new(1.0, 0.0))
}

/// `Δ̃_{0,N}, …, Δ̃_{N,N}` from `Δ̃_0 = 1`, `Δ̃_1 = 0`.
pub fn delta_tilde_sequence(c: &TridiagCoeffs) -> Vec<C64> {
    run_recurrence(c, C64::new(1.0, 0.0), C64::new(0.0, 0.0))
}

/// `η_N(s) = Δ_{N,N} / 2`.
pub fn eta_tridiag(s: SParam, n: usize) -> Result<EvalResult> {
    let c = tridiag_coeffs(s, n)?;
    let delta = delta_sequence(&c);
    Ok(EvalResult::plain(delta[n] * 0.5, Method::Tridiag, n))
}

/// `1/(2η_N) = 1 − β_2/(1+β_2 − β_3/(1+β_3 − … − β_N/(1+β_N)))`, evaluated
/// tail first.
pub fn contfrac_value(c: &TridiagCoeffs) -> Result<C64> {
    let n = c.n;
    let breakdown = |t: C64, b: C64| t.norm() <= 1e-12 * (1.0 + b.norm());
    let mut t = c.beta_at(n) + 1.0;
    for k in (2..n).rev() {
        if breakdown(t, c.beta_at(k + 1)) {
            return Err(Error::ContFracBreakdown { level: k + 1 });
        }
        t = c.beta_at(k) + 1.0 - c.beta_at(k + 1) / t;
    }
    if breakdown(t, c.beta_at(2)) {
        return Err(Error::ContFracBreakdown { level: 2 });
    }
    Ok(C64::new(1.0, 0.0) - c.beta_at(2) / t)
}

/// The displayed pattern read with regular indexing,
/// `1 + (1−β_2)/(β_2 + (1−β_3)/(β_3 + … + (1−β_N)/β_N))`.
///
/// Kept only to document that it does not reproduce `1/(2η_N)`.
pub fn contfrac_displayed(c: &TridiagCoeffs) -> C64 {
    let one = C64::new(1.0, 0.0);
    let mut t = c.beta_at(c.n);
    for k in (2..c.n).rev() {
        t = c.beta_at(k) + (one - c.beta_at(k + 1)) / t;
    }
    one + (one - c.beta_at(2)) / t
}

pub fn eta_contfrac(s: SParam, n: usize) -> Result<EvalResult> {
    let c = tridiag_coeffs(s, n)?;
    let v = contfrac_value(&c)?;
    Ok(EvalResult::plain(C64::new(0.5, 0.0) / v, Method::Contfrac, n))
}
