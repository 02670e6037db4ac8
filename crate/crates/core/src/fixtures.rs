//! The worked mixtures used throughout the tests, benches and docs.

use nalgebra::{DMatrix, DVector};

use crate::model::Mixture;

fn diag(values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(values))
}

fn vec(values: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(values)
}

/// Two components in the plane with crossed elongated covariances; three modes.
pub fn example1() -> Mixture {
    Mixture::from_parts(
        vec![vec(&[0.0, 0.0]), vec(&[1.0, 1.0])],
        vec![diag(&[1.0, 0.05]), diag(&[0.05, 1.0])],
        vec![0.5, 0.5],
    )
    .expect("valid fixture")
}

/// Two components in three dimensions; four modes.
pub fn example2() -> Mixture {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Mixture::from_parts(
        vec![vec(&[0.0, 0.0, 0.0]), vec(&[r, 2.0, r])],
        vec![diag(&[1.0, 1.0, 0.05]), diag(&[0.05, 1.0, 1.0])],
        vec![0.5, 0.5],
    )
    .expect("valid fixture")
}

/// Three unit-covariance components at the corners of a right triangle; three modes.
pub fn example3() -> Mixture {
    Mixture::from_parts(
        vec![vec(&[0.0, 0.0]), vec(&[0.0, 3.0]), vec(&[3.0, 0.0])],
        vec![DMatrix::identity(2, 2); 3],
        vec![1.0 / 3.0; 3],
    )
    .expect("valid fixture")
}

/// Three collinear components with alternating elongation; five modes.
pub fn example4() -> Mixture {
    Mixture::from_parts(
        vec![vec(&[0.0, 0.0]), vec(&[1.0, 1.0]), vec(&[2.0, 2.0])],
        vec![diag(&[1.0, 0.05]), diag(&[0.05, 1.0]), diag(&[1.0, 0.05])],
        vec![1.0 / 3.0; 3],
    )
    .expect("valid fixture")
}

/// Fixture by number, 1 through 4.
pub fn example(n: usize) -> Option<Mixture> {
    match n {
        1 => Some(example1()),
        2 => Some(example2()),
        3 => Some(example3()),
        4 => Some(example4()),
        _ => None,
    }
}
