use crate::error::Result;
use crate::matrix::CMatrix;
use num_complex::Complex64;

/// Largest eigenvalue of a Hermitian matrix via Householder tridiagonalization
/// and Sturm-sequence bisection. Much cheaper than a full eigendecomposition
/// when only one extreme eigenvalue is needed (operator norms, support
/// functions, definiteness tests).
pub fn lambda_max_hermitian(h: &CMatrix) -> Result<f64> {
    extreme_eig(h, true)
}

/// Smallest eigenvalue; same machinery as `lambda_max_hermitian`.
pub fn lambda_min_hermitian(h: &CMatrix) -> Result<f64> {
    extreme_eig(h, false)
}

fn extreme_eig(h: &CMatrix, want_max: bool) -> Result<f64> {
    let n = h.require_square()?;
    let a = h.hermitian_part();
    if n == 1 {
        return Ok(a.at(0, 0).re);
    }
    if n == 2 {
        // Closed form for [[p, w], [conj(w), q]].
        let p = a.at(0, 0).re;
        let q = a.at(1, 1).re;
        let m = 0.5 * (p + q);
        let r = (0.25 * (p - q) * (p - q) + a.at(0, 1).norm_sqr()).sqrt();
        return Ok(if want_max { m + r } else { m - r });
    }

    let (d, e) = tridiagonalize(&a);
    let e2: Vec<f64> = e.iter().map(|x| x * x).collect();

    // Gershgorin bounds for the tridiagonal form.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { e[i - 1] } else { 0.0 };
        let right = if i + 1 < n { e[i] } else { 0.0 };
        lo = lo.min(d[i] - left - right);
        hi = hi.max(d[i] + left + right);
    }
    let pivmin = 1e-300 * e2.iter().cloned().fold(1.0, f64::max);

    let mut a_lo = lo;
    let mut a_hi = hi;
    for _ in 0..120 {
        if a_hi - a_lo <= f64::EPSILON * (a_lo.abs() + a_hi.abs() + 1e-30) {
            break;
        }
        let mid = 0.5 * (a_lo + a_hi);
        let below = sturm_count(&d, &e2, mid, pivmin);
        let shrink_hi = if want_max { below == n } else { below >= 1 };
        if shrink_hi {
            a_hi = mid;
        } else {
            a_lo = mid;
        }
    }
    Ok(0.5 * (a_lo + a_hi))
}

/// Number of eigenvalues strictly below `x`, counted from the signs of the
/// LDL^T pivots of (T - x I). Tiny pivots are clamped away from zero so the
/// recurrence cannot divide by zero.
fn sturm_count(d: &[f64], e2: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        if q.abs() < pivmin {
            q = -pivmin;
        }
        q = (d[i] - x) - e2[i - 1] / q;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Unitary reduction of a Hermitian matrix to real symmetric tridiagonal form.
/// Returns (diagonal, subdiagonal moduli); the transform itself is discarded.
fn tridiagonalize(h: &CMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = h.rows();
    let mut m = h.clone();
    let scale = m.max_abs().max(1e-300);
    let negligible = (f64::EPSILON * scale) * (f64::EPSILON * scale);

    for k in 0..n.saturating_sub(2) {
        let alpha = m.at(k + 1, k);
        let tail_sq: f64 = (k + 2..n).map(|i| m.at(i, k).norm_sqr()).sum();
        if tail_sq <= negligible {
            continue; // already tridiagonal in this column
        }
        let sigma = (alpha.norm_sqr() + tail_sq).sqrt();
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            Complex64::ONE
        };
        // Householder vector v = x + phase*sigma*e1 avoids cancellation.
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| m.at(i, k)).collect();
        v[0] += phase * sigma;
        let vn2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vn2;

        // Hermitian rank-two update of the trailing block S = S - v w* - w v*
        // with u = tau S v and w = u - (tau/2)(v* u) v.
        let blk = n - k - 1;
        let mut u = vec![Complex64::ZERO; blk];
        for i in 0..blk {
            let mut acc = Complex64::ZERO;
            for j in 0..blk {
                acc += m.at(k + 1 + i, k + 1 + j) * v[j];
            }
            u[i] = tau * acc;
        }
        let vu: Complex64 = v.iter().zip(&u).map(|(a, b)| a.conj() * b).sum();
        let w: Vec<Complex64> = u
            .iter()
            .zip(&v)
            .map(|(ui, vi)| ui - 0.5 * tau * vu * vi)
            .collect();
        for i in 0..blk {
            for j in 0..blk {
                let delta = v[i] * w[j].conj() + w[i] * v[j].conj();
                let cur = m.at(k + 1 + i, k + 1 + j);
                m.set(k + 1 + i, k + 1 + j, cur - delta);
            }
        }

        // Column k collapses onto the subdiagonal; record its modulus.
        m.set(k + 1, k, Complex64::new(sigma, 0.0));
        for i in k + 2..n {
            m.set(i, k, Complex64::ZERO);
        }
    }

    let d: Vec<f64> = (0..n).map(|i| m.at(i, i).re).collect();
    let e: Vec<f64> = (0..n - 1).map(|i| m.at(i + 1, i).norm()).collect();
    (d, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jacobi::herm_eig;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matches_closed_forms_in_small_dimensions() {
        let h = CMatrix::diag(&[c(-4.0, 0.0)]);
        assert_eq!(lambda_max_hermitian(&h).unwrap(), -4.0);

        let h = CMatrix::new(2, 2, vec![c(2.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(0.0, 0.0)])
            .unwrap();
        let r = 3.0f64.sqrt();
        assert!((lambda_max_hermitian(&h).unwrap() - (1.0 + r)).abs() < 1e-13);
        assert!((lambda_min_hermitian(&h).unwrap() - (1.0 - r)).abs() < 1e-13);
    }

    #[test]
    fn agrees_with_jacobi_on_dense_hermitian_matrices() {
        for n in [3usize, 5, 8, 12] {
            let h = CMatrix::from_fn(n, n, |i, j| {
                let (a, b, flip) = if i <= j { (i, j, 1.0) } else { (j, i, -1.0) };
                c(
                    ((a * 3 + b * 5 + n) as f64 * 0.41).sin(),
                    if a == b {
                        0.0
                    } else {
                        flip * ((a * 7 + b * 2) as f64 * 0.29).cos()
                    },
                )
            });
            let full = herm_eig(&h).unwrap();
            let top = lambda_max_hermitian(&h).unwrap();
            let bot = lambda_min_hermitian(&h).unwrap();
            let scale = 1.0 + h.fro_norm();
            assert!(
                (top - full.values[n - 1]).abs() < 1e-11 * scale,
                "n={n}: {top} vs {}",
                full.values[n - 1]
            );
            assert!(
                (bot - full.values[0]).abs() < 1e-11 * scale,
                "n={n}: {bot} vs {}",
                full.values[0]
            );
        }
    }

    #[test]
    fn handles_already_tridiagonal_input_with_zero_tail() {
        // Column 0 below the subdiagonal is exactly zero: reflector skipped.
        let n = 5;
        let h = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(i as f64 - 2.0, 0.0)
            } else if i.abs_diff(j) == 1 {
                c(0.0, if i < j { -1.0 } else { 1.0 })
            } else {
                Complex64::ZERO
            }
        });
        let full = herm_eig(&h).unwrap();
        let top = lambda_max_hermitian(&h).unwrap();
        assert!((top - full.values[n - 1]).abs() < 1e-12);
    }

    #[test]
    fn psd_gram_matrix_has_nonnegative_bottom() {
        let g = CMatrix::new(3, 2, vec![
            c(1.0, 0.5), c(0.0, 1.0),
            c(2.0, 0.0), c(1.0, -1.0),
            c(0.0, 0.0), c(3.0, 0.2),
        ])
        .unwrap();
        let gram = g.adjoint().mul(&g);
        assert!(lambda_min_hermitian(&gram).unwrap() > -1e-12);
    }
}
