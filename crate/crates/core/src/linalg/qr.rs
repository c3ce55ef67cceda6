use crate::matrix::CMatrix;
use num_complex::Complex64;

/// Householder QR of a square matrix, returning (Q, R) with Q unitary. The
/// caller fixes the diagonal phases of R when a canonical choice matters
/// (e.g. Haar-distributed unitaries).
pub fn qr_unitary(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.rows();
    assert!(a.is_square());
    let mut r = a.clone();
    let mut q = CMatrix::identity(n);

    for k in 0..n.saturating_sub(1) {
        let col_sq: f64 = (k..n).map(|i| r.at(i, k).norm_sqr()).sum();
        if col_sq == 0.0 {
            continue;
        }
        let alpha = r.at(k, k);
        let sigma = col_sq.sqrt();
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            Complex64::ONE
        };
        let m = n - k;
        let mut v: Vec<Complex64> = (0..m).map(|i| r.at(k + i, k)).collect();
        v[0] += phase * sigma;
        let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vn2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vn2;

        // R <- P R with P = I - tau v v* acting on rows k..
        for j in k..n {
            let s: Complex64 = (0..m).map(|i| v[i].conj() * r.at(k + i, j)).sum();
            let ts = tau * s;
            for i in 0..m {
                let cur = r.at(k + i, j);
                r.set(k + i, j, cur - v[i] * ts);
            }
        }
        for i in k + 1..n {
            r.set(i, k, Complex64::ZERO);
        }
        // Q <- Q P (P is Hermitian), acting on columns k..
        for i in 0..n {
            let s: Complex64 = (0..m).map(|j| q.at(i, k + j) * v[j]).sum();
            let ts = tau * s;
            for j in 0..m {
                let cur = q.at(i, k + j);
                q.set(i, k + j, cur - ts * v[j].conj());
            }
        }
    }
    (q, r)
}
