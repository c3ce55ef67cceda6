use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use num_complex::Complex64;

/// Matrix inverse via partially pivoted LU. Returns `Singular` when a pivot
/// falls below `1e-14` times the largest entry of the input.
pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    let n = a.require_square()?;
    let scale = a.max_abs();
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    let piv_floor = 1e-14 * scale;

    let mut lu: Vec<Complex64> = a.data().to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if lu[i * n + k].norm() > lu[p * n + k].norm() {
                p = i;
            }
        }
        if lu[p * n + k].norm() <= piv_floor {
            return Err(Error::Singular);
        }
        if p != k {
            perm.swap(k, p);
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
        }
        let pivot = lu[k * n + k];
        for i in k + 1..n {
            let f = lu[i * n + k] / pivot;
            lu[i * n + k] = f;
            for j in k + 1..n {
                let v = lu[k * n + j];
                lu[i * n + j] -= f * v;
            }
        }
    }

    // Solve A X = I column by column through the factorization.
    let mut out = CMatrix::zeros(n, n);
    let mut col = vec![Complex64::ZERO; n];
    for e in 0..n {
        for i in 0..n {
            col[i] = if perm[i] == e {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
        }
        for i in 1..n {
            for j in 0..i {
                let f = lu[i * n + j];
                let v = col[j];
                col[i] -= f * v;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let f = lu[i * n + j];
                let v = col[j];
                col[i] -= f * v;
            }
            col[i] /= lu[i * n + i];
        }
        for i in 0..n {
            out.set(i, e, col[i]);
        }
    }
    Ok(out)
}

/// |det(A)| via the same pivoted elimination; used by tests as an
/// implementation-independent spectrum oracle.
#[cfg(test)]
pub(crate) fn det_modulus(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut lu: Vec<Complex64> = a.data().to_vec();
    let mut det = 1.0f64;
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if lu[i * n + k].norm() > lu[p * n + k].norm() {
                p = i;
            }
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
        }
        let pivot = lu[k * n + k];
        det *= pivot.norm();
        if pivot.norm() == 0.0 {
            return 0.0;
        }
        for i in k + 1..n {
            let f = lu[i * n + k] / pivot;
            for j in k..n {
                let v = lu[k * n + j];
                lu[i * n + j] -= f * v;
            }
        }
    }
    det
}
