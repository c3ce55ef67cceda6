pub mod jacobi;
pub mod lu;
pub mod qr;
pub mod schur;
pub mod tridiag;

pub use jacobi::{herm_eig, HermEig};
pub use lu::inverse;
pub use qr::qr_unitary;
pub use schur::{schur, swap_schur_diag, SchurForm};
pub use tridiag::{lambda_max_hermitian, lambda_min_hermitian};

use crate::error::Result;
use crate::matrix::CMatrix;

/// Largest singular value, computed from the Gram matrix on the smaller side.
pub fn op_norm(a: &CMatrix) -> Result<f64> {
    let gram = if a.rows() <= a.cols() {
        a.mul(&a.adjoint())
    } else {
        a.adjoint().mul(a)
    };
    let top = lambda_max_hermitian(&gram)?;
    Ok(top.max(0.0).sqrt())
}

/// Largest eigenvalue modulus, read off the Schur diagonal.
pub fn spectral_radius(a: &CMatrix) -> Result<f64> {
    let s = schur(a)?;
    Ok(s
        .eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn op_norm_of_known_matrices() {
        // Scaled unitary: norm equals the scale.
        let u = CMatrix::new(2, 2, vec![c(0.0, 3.0), c(0.0, 0.0), c(0.0, 0.0), c(-3.0, 0.0)])
            .unwrap();
        assert!((op_norm(&u).unwrap() - 3.0).abs() < 1e-12);

        // [[1, 1], [0, 1]] has norm equal to the golden ratio.
        let j = CMatrix::new(2, 2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        let golden = 0.5 * (1.0 + 5.0f64.sqrt());
        assert!((op_norm(&j).unwrap() - golden).abs() < 1e-12);

        // Rectangular: norm of a column vector is its Euclidean norm.
        let v = CMatrix::new(3, 1, vec![c(1.0, 0.0), c(0.0, 2.0), c(2.0, 0.0)]).unwrap();
        assert!((op_norm(&v).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_of_known_matrices() {
        let a = CMatrix::diag(&[c(0.3, 0.4), c(-1.0, 0.0), c(0.0, 0.2)]);
        assert!((spectral_radius(&a).unwrap() - 1.0).abs() < 1e-12);

        // Nilpotent: spectral radius zero despite norm one.
        let nil = CMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert!(spectral_radius(&nil).unwrap() < 1e-12);
        assert!((op_norm(&nil).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_never_exceeds_op_norm() {
        for k in 0..8u32 {
            let n = 2 + (k as usize % 4);
            let a = CMatrix::from_fn(n, n, |i, j| {
                c(
                    ((i * 7 + j * 3 + k as usize) as f64 * 0.61).sin(),
                    ((i + j * 5 + 2 * k as usize) as f64 * 0.43).cos(),
                )
            });
            let rho = spectral_radius(&a).unwrap();
            let norm = op_norm(&a).unwrap();
            assert!(rho <= norm + 1e-10, "rho {rho} > norm {norm}");
        }
    }
}
