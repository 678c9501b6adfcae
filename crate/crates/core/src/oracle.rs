//! Brute-force reference computations, kept independent of the fast paths.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Field;

/// Largest matrix the cofactor oracle will expand.
pub const COFACTOR_CAP: usize = 7;

/// Determinant by recursive cofactor expansion along the first row.
pub fn cofactor_det<T: Field>(m: &Matrix<T>) -> Result<T> {
    assert!(m.is_square(), "determinant of a non-square matrix");
    if m.rows() > COFACTOR_CAP {
        return Err(Error::CapExceeded { what: "cofactor size", value: m.rows(), cap: COFACTOR_CAP });
    }
    Ok(expand(m))
}

fn expand<T: Field>(m: &Matrix<T>) -> T {
    match m.rows() {
        0 => T::one(),
        1 => m[(0, 0)].clone(),
        n => {
            let mut acc = T::zero();
            for j in 0..n {
                let term = m[(0, j)].clone() * expand(&m.minor(0, j));
                acc = if j % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}
