//! Vandermonde determinants and inverses, Lagrange interpolation, partial
//! fractions and the rank-one-perturbed matrix identities.
//!
//! Everything here is generic over [`Field`] so it runs exactly over
//! [`Rational`]. Nothing in this module rounds.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Field;
use crate::Rational;

/// Pairwise distinct nodes `x_1, …, x_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet<T> {
    nodes: Vec<T>,
}

impl<T: Field> NodeSet<T> {
    pub fn new(nodes: Vec<T>) -> Result<Self> {
        for i in 0..nodes.len() {
            for j in 0..i {
                if nodes[i] == nodes[j] {
                    return Err(Error::DegenerateNodes);
                }
            }
        }
        Ok(Self { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.nodes
    }
}

impl<T: Field + PartialOrd> NodeSet<T> {
    pub fn is_increasing(&self) -> bool {
        self.nodes.windows(2).all(|w| w[0] < w[1])
    }
}

impl NodeSet<Rational> {
    /// The nodes `1², 2², …, N²`.
    pub fn squares(n: usize) -> Self {
        let nodes = (1..=n).map(|k| Rational::from_integer(BigInt::from(k * k))).collect();
        Self { nodes }
    }
}

/// Polynomial coefficients in ascending degree, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCoeffs<T> {
    coeffs: Vec<T>,
}

impl<T: Field> PolyCoeffs<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// Multiply by `(x - root)`.
    pub fn mul_linear(&self, root: &T) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k + 1] = out[k + 1].clone() + c.clone();
            out[k] = out[k].clone() - c.clone() * root.clone();
        }
        Self::new(out)
    }

    pub fn scale(&self, factor: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect())
    }
}

/// `∏_{i<j} (x_j - x_i)`.
pub fn vandermonde_det<T: Field>(nodes: &NodeSet<T>) -> T {
    let x = nodes.as_slice();
    let mut acc = T::one();
    for j in 1..x.len() {
        for i in 0..j {
            acc = acc * (x[j].clone() - x[i].clone());
        }
    }
    acc
}

/// Closed form `(1/N!) ∏_{n=1}^{N-1} (2n+1)!` of the Vandermonde determinant
/// on the nodes `1², …, N²`.
pub fn squares_vandermonde_det(n: usize) -> Rational {
    assert!(n >= 1, "N must be positive");
    let mut numer = BigInt::one();
    let mut fact = BigInt::one();
    // fact walks through (2k+1)! incrementally
    for k in 1..n {
        fact *= BigInt::from(2 * k) * BigInt::from(2 * k + 1);
        numer *= &fact;
    }
    let denom: BigInt = (1..=n).map(BigInt::from).product();
    Rational::new(numer, denom)
}

/// Rows `(1, x_i, x_i², …, x_i^{N-1})`.
pub fn vandermonde_matrix<T: Field>(nodes: &NodeSet<T>) -> Matrix<T> {
    let x = nodes.as_slice();
    let n = x.len();
    let mut m = Matrix::from_fn(n, n, |_, _| T::one());
    for i in 0..n {
        for j in 1..n {
            m[(i, j)] = m[(i, j - 1)].clone() * x[i].clone();
        }
    }
    m
}

/// First row of the inverse Vandermonde matrix: `w_{1n} = ∏_{j≠n} x_j/(x_j - x_n)`.
///
/// These are the constant terms of the Lagrange basis polynomials, i.e. the
/// weights that evaluate an interpolant at zero.
pub fn vandermonde_inverse_first_row<T: Field>(nodes: &NodeSet<T>) -> Result<Vec<T>> {
    let x = nodes.as_slice();
    if let Some(index) = x.iter().position(Zero::is_zero) {
        return Err(Error::ZeroNode { index });
    }
    Ok((0..x.len())
        .map(|n| {
            x.iter()
                .enumerate()
                .filter(|&(j, _)| j != n)
                .fold(T::one(), |acc, (_, xj)| acc * xj.clone() / (xj.clone() - x[n].clone()))
        })
        .collect())
}

/// The `n`-th Lagrange basis polynomial `∏_{j≠n} (x - x_j)/(x_n - x_j)`.
pub fn lagrange_basis<T: Field>(nodes: &NodeSet<T>, n: usize) -> PolyCoeffs<T> {
    let x = nodes.as_slice();
    let mut poly = PolyCoeffs::constant(T::one());
    let mut denom = T::one();
    for (_, xj) in x.iter().enumerate().filter(|&(j, _)| j != n) {
        poly = poly.mul_linear(xj);
        denom = denom * (x[n].clone() - xj.clone());
    }
    poly.scale(&(T::one() / denom))
}

/// Full inverse of the Vandermonde matrix; column `n` holds the coefficients
/// of the `n`-th Lagrange basis polynomial.
pub fn vandermonde_inverse<T: Field>(nodes: &NodeSet<T>) -> Matrix<T> {
    let n = nodes.len();
    let mut w = Matrix::from_fn(n, n, |_, _| T::zero());
    for col in 0..n {
        let basis = lagrange_basis(nodes, col);
        for (row, c) in basis.coeffs().iter().enumerate() {
            w[(row, col)] = c.clone();
        }
    }
    w
}

/// Value at `x` of the unique interpolant of degree below `N`.
pub fn lagrange_interpolate<T: Field>(nodes: &NodeSet<T>, values: &[T], x: &T) -> Result<T> {
    let nx = nodes.as_slice();
    if values.len() != nx.len() {
        return Err(Error::ArityError { expected: nx.len(), got: values.len() });
    }
    let mut acc = T::zero();
    for (n, (xn, yn)) in nx.iter().zip(values).enumerate() {
        let mut term = yn.clone();
        for (j, xj) in nx.iter().enumerate() {
            if j != n {
                term = term * (x.clone() - xj.clone()) / (xn.clone() - xj.clone());
            }
        }
        acc = acc + term;
    }
    Ok(acc)
}

/// Residues `c_n = P(x_n)/Q'(x_n)` of `P/Q` with `Q = ∏ (x - x_n)`.
pub fn partial_fraction_coeffs<T: Field>(p: &PolyCoeffs<T>, nodes: &NodeSet<T>) -> Result<Vec<T>> {
    let x = nodes.as_slice();
    if let Some(degree) = p.degree() {
        if degree >= x.len() {
            return Err(Error::DegreeError { degree, nodes: x.len() });
        }
    }
    Ok((0..x.len())
        .map(|n| {
            let dq = x
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != n)
                .fold(T::one(), |acc, (_, xj)| acc * (x[n].clone() - xj.clone()));
            p.eval(&x[n]) / dq
        })
        .collect())
}

/// `Σ c_n / (x - x_n)`.
pub fn partial_fraction_eval<T: Field>(coeffs: &[T], nodes: &NodeSet<T>, x: &T) -> T {
    coeffs.iter().zip(nodes.as_slice()).fold(T::zero(), |acc, (c, xn)| acc + c.clone() / (x.clone() - xn.clone()))
}

/// The `K×K` matrix with `1 + λ_i` on the diagonal and `1` elsewhere.
pub fn rank_one_perturbed_matrix<T: Field>(lambdas: &[T]) -> Matrix<T> {
    let k = lambdas.len();
    Matrix::from_fn(k, k, |i, j| if i == j { T::one() + lambdas[i].clone() } else { T::one() })
}

fn check_lambdas<T: Field>(lambdas: &[T]) -> Result<()> {
    match lambdas.iter().position(Zero::is_zero) {
        Some(index) => Err(Error::ZeroLambda { index }),
        None => Ok(()),
    }
}

fn reciprocal_sum<T: Field>(lambdas: &[T]) -> T {
    lambdas.iter().fold(T::one(), |acc, l| acc + T::one() / l.clone())
}

/// `(∏ λ_i)(1 + Σ 1/λ_i)`, which vanishes exactly when `Σ 1/λ_i = -1`.
pub fn rank_one_perturbed_det<T: Field>(lambdas: &[T]) -> Result<T> {
    check_lambdas(lambdas)?;
    let prod = lambdas.iter().fold(T::one(), |acc, l| acc * l.clone());
    Ok(prod * reciprocal_sum(lambdas))
}

/// Closed-form inverse: `b_ij = -1/(S λ_i λ_j)` off the diagonal and
/// `b_ii = 1/λ_i - 1/(S λ_i²)`, with `S = 1 + Σ 1/λ_i`.
pub fn rank_one_perturbed_inverse<T: Field>(lambdas: &[T]) -> Result<Matrix<T>> {
    check_lambdas(lambdas)?;
    let s = reciprocal_sum(lambdas);
    if s.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let k = lambdas.len();
    Ok(Matrix::from_fn(k, k, |i, j| {
        let li = lambdas[i].clone();
        let lj = lambdas[j].clone();
        if i == j {
            T::one() / li.clone() - T::one() / (s.clone() * li.clone() * li)
        } else {
            -(T::one() / (s.clone() * li * lj))
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::cofactor_det;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn int(n: i64) -> Rational {
        q(n, 1)
    }

    fn nodes(xs: &[i64]) -> NodeSet<Rational> {
        NodeSet::new(xs.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert_eq!(NodeSet::new(vec![int(1), int(2), int(1)]), Err(Error::DegenerateNodes));
    }

    #[test]
    fn small_vandermonde_dets() {
        assert_eq!(vandermonde_det(&nodes(&[1, 4])), int(3));
        assert_eq!(vandermonde_det(&nodes(&[1, 4, 9])), int(120));
        assert_eq!(vandermonde_det(&NodeSet::squares(4)), int(151_200));
    }

    #[test]
    fn squares_closed_form_small() {
        assert_eq!(squares_vandermonde_det(1), int(1));
        assert_eq!(squares_vandermonde_det(2), int(3));
        assert_eq!(squares_vandermonde_det(3), int(120));
        for n in 1..=8 {
            assert_eq!(squares_vandermonde_det(n), vandermonde_det(&NodeSet::squares(n)), "N={n}");
        }
    }

    #[test]
    fn inverse_first_row_two_points() {
        assert_eq!(vandermonde_inverse_first_row(&nodes(&[1, 2])).unwrap(), vec![int(2), int(-1)]);
        assert_eq!(vandermonde_inverse_first_row(&nodes(&[0, 2])), Err(Error::ZeroNode { index: 0 }));
    }

    #[test]
    fn inverse_two_by_two() {
        let ns = nodes(&[1, 4]);
        let w = vandermonde_inverse(&ns);
        assert!(vandermonde_matrix(&ns).mul(&w).is_identity());
        assert_eq!(w.row(0), &[q(4, 3), q(-1, 3)]);
    }

    #[test]
    fn lagrange_examples() {
        assert_eq!(lagrange_interpolate(&nodes(&[1, 2]), &[int(1), int(1)], &int(100)).unwrap(), int(1));
        assert_eq!(lagrange_interpolate(&nodes(&[1, 2, 3]), &[int(1), int(4), int(9)], &int(5)).unwrap(), int(25));
        assert_eq!(lagrange_interpolate(&nodes(&[1, 4]), &[int(1), q(1, 4)], &int(0)).unwrap(), q(5, 4));
        assert_eq!(
            lagrange_interpolate(&nodes(&[1, 4]), &[int(1)], &int(0)),
            Err(Error::ArityError { expected: 2, got: 1 })
        );
    }

    #[test]
    fn partial_fraction_examples() {
        let one = PolyCoeffs::constant(int(1));
        assert_eq!(partial_fraction_coeffs(&one, &nodes(&[1, 2])).unwrap(), vec![int(-1), int(1)]);
        let x = PolyCoeffs::new(vec![int(0), int(1)]);
        assert_eq!(partial_fraction_coeffs(&x, &nodes(&[0, 1])).unwrap(), vec![int(0), int(1)]);
        let quad = PolyCoeffs::new(vec![int(1), int(1), int(1)]);
        assert_eq!(partial_fraction_coeffs(&quad, &nodes(&[1, 2])), Err(Error::DegreeError { degree: 2, nodes: 2 }));
    }

    #[test]
    fn partial_fraction_reconstruction_at_ten() {
        let p = PolyCoeffs::new(vec![int(3), q(-1, 2), int(7)]);
        let ns = nodes(&[1, 2, 3]);
        let c = partial_fraction_coeffs(&p, &ns).unwrap();
        let x = int(10);
        let qx = ns.as_slice().iter().fold(int(1), |acc, xn| acc * (x.clone() - xn.clone()));
        assert_eq!(partial_fraction_eval(&c, &ns, &x), p.eval(&x) / qx);
    }

    #[test]
    fn rank_one_examples() {
        assert_eq!(rank_one_perturbed_det(&[int(1), int(1)]).unwrap(), int(3));
        assert_eq!(rank_one_perturbed_det(&[int(-2), int(-2)]).unwrap(), int(0));
        assert_eq!(rank_one_perturbed_det(&[int(1), int(0)]), Err(Error::ZeroLambda { index: 1 }));

        let b = rank_one_perturbed_inverse(&[int(1), int(1)]).unwrap();
        assert_eq!(b, Matrix::from_rows(vec![vec![q(2, 3), q(-1, 3)], vec![q(-1, 3), q(2, 3)]]));
        let b1 = rank_one_perturbed_inverse(&[int(2)]).unwrap();
        assert_eq!(b1, Matrix::from_rows(vec![vec![q(1, 3)]]));
        assert_eq!(rank_one_perturbed_inverse(&[int(-2), int(-2)]), Err(Error::SingularMatrix));
    }

    #[test]
    fn rank_one_matches_cofactor_at_k4() {
        let l = vec![q(3, 7), q(-5, 2), q(11, 3), q(-1, 9)];
        let a = rank_one_perturbed_matrix(&l);
        assert_eq!(rank_one_perturbed_det(&l).unwrap(), cofactor_det(&a).unwrap());
    }

    #[test]
    fn works_over_floats_too() {
        let ns = NodeSet::new(vec![1.0_f64, 4.0, 9.0]).unwrap();
        assert_eq!(vandermonde_det(&ns), 120.0);
    }
}
