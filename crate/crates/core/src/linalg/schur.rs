use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::tol::Tolerances;
use num_complex::Complex64;

/// Unitary triangularization A = U T U* with T upper triangular. The strict
/// lower triangle of `t` is exactly zero and the diagonal carries the
/// eigenvalues.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub u: CMatrix,
    pub t: CMatrix,
}

impl SchurForm {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.rows()).map(|i| self.t.at(i, i)).collect()
    }

    pub fn reassemble(&self) -> CMatrix {
        self.u.mul(&self.t).mul(&self.u.adjoint())
    }
}

/// Complex Schur decomposition by Householder–Hessenberg reduction followed by
/// explicit single-shift QR with Wilkinson shifts. Already-triangular input is
/// returned untouched with U = I.
pub fn schur(a: &CMatrix) -> Result<SchurForm> {
    let n = a.require_square()?;
    if is_upper_triangular(a) {
        return Ok(SchurForm {
            u: CMatrix::identity(n),
            t: a.clone(),
        });
    }

    let tols = Tolerances::default();
    let (mut h, mut u) = hessenberg(a);
    let floor = f64::EPSILON * a.fro_norm();
    let negligible = |h: &CMatrix, k: usize| -> bool {
        let thr = tols.schur_deflation_coeff * (h.at(k, k).norm() + h.at(k + 1, k + 1).norm());
        h.at(k + 1, k).norm() <= thr.max(floor)
    };

    let max_iters = tols.schur_iter_factor * n;
    let mut iters = 0usize;
    let mut stall = 0usize;
    let mut hi = n - 1;
    while hi > 0 {
        if negligible(&h, hi - 1) {
            h.set(hi, hi - 1, Complex64::ZERO);
            hi -= 1;
            stall = 0;
            continue;
        }
        let mut lo = hi - 1;
        while lo > 0 && !negligible(&h, lo - 1) {
            lo -= 1;
        }
        if lo > 0 {
            h.set(lo, lo - 1, Complex64::ZERO);
        }
        if hi - lo == 1 {
            triangularize_2x2(&mut h, &mut u, lo);
            hi = lo;
            stall = 0;
            continue;
        }

        iters += 1;
        stall += 1;
        if iters > max_iters {
            return Err(Error::Convergence {
                algorithm: "schur qr iteration",
                iterations: max_iters,
            });
        }
        let shift = if stall % 10 == 0 {
            // Break potential shift cycles on highly symmetric spectra.
            h.at(hi, hi) + Complex64::new(0.75 * h.at(hi, hi - 1).norm(), 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_step(&mut h, &mut u, lo, hi, shift);
    }

    for i in 0..n {
        for j in 0..i {
            h.set(i, j, Complex64::ZERO);
        }
    }
    validate(a, &u, &h)?;
    Ok(SchurForm { u, t: h })
}

fn is_upper_triangular(a: &CMatrix) -> bool {
    let n = a.rows();
    (0..n).all(|i| (0..i).all(|j| a.at(i, j) == Complex64::ZERO))
}

/// Unitary reduction to upper Hessenberg form, accumulating the transform.
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut u = CMatrix::identity(n);
    let scale = h.max_abs().max(1e-300);
    let dust = (f64::EPSILON * scale) * (f64::EPSILON * scale);

    for k in 0..n.saturating_sub(2) {
        let tail_sq: f64 = (k + 2..n).map(|i| h.at(i, k).norm_sqr()).sum();
        if tail_sq <= dust {
            // Negligible below the subdiagonal; make the zeros exact so the
            // QR sweep's sparsity assumptions hold.
            for i in k + 2..n {
                h.set(i, k, Complex64::ZERO);
            }
            continue;
        }
        let alpha = h.at(k + 1, k);
        let sigma = (alpha.norm_sqr() + tail_sq).sqrt();
        let phase = if alpha.norm() > 0.0 {
            alpha / alpha.norm()
        } else {
            Complex64::ONE
        };
        let m = n - k - 1;
        let mut v: Vec<Complex64> = (0..m).map(|i| h.at(k + 1 + i, k)).collect();
        v[0] += phase * sigma;
        let tau = 2.0 / v.iter().map(|z| z.norm_sqr()).sum::<f64>();

        // Left reflector on rows k+1.., columns k+1..
        for j in k + 1..n {
            let s: Complex64 = (0..m).map(|i| v[i].conj() * h.at(k + 1 + i, j)).sum();
            let ts = tau * s;
            for i in 0..m {
                let cur = h.at(k + 1 + i, j);
                h.set(k + 1 + i, j, cur - v[i] * ts);
            }
        }
        // Column k collapses exactly.
        h.set(k + 1, k, -phase * sigma);
        for i in k + 2..n {
            h.set(i, k, Complex64::ZERO);
        }
        // Right reflector on columns k+1.., all rows; same for U.
        for mat in [&mut h, &mut u] {
            for i in 0..n {
                let s: Complex64 = (0..m).map(|j| mat.at(i, k + 1 + j) * v[j]).sum();
                let ts = tau * s;
                for j in 0..m {
                    let cur = mat.at(i, k + 1 + j);
                    mat.set(i, k + 1 + j, cur - ts * v[j].conj());
                }
            }
        }
    }
    (h, u)
}

/// Eigenvalue of the trailing 2x2 of the active block closest to the corner
/// entry.
fn wilkinson_shift(h: &CMatrix, hi: usize) -> Complex64 {
    let a = h.at(hi - 1, hi - 1);
    let b = h.at(hi - 1, hi);
    let c = h.at(hi, hi - 1);
    let d = h.at(hi, hi);
    let m = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * c).sqrt();
    let l1 = m + disc;
    let l2 = m - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Rotation (c, s) with c real such that
/// [[c, s], [-conj(s), c]] * (f, g) = (r, 0).
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, Complex64::ZERO);
    }
    let fn_ = f.norm();
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn);
    }
    let d = (fn_ * fn_ + gn * gn).sqrt();
    (fn_ / d, (f / fn_) * g.conj() / d)
}

/// One explicit shifted QR step on the active block [lo..=hi]. The shift is
/// subtracted on the block diagonal only; since the accumulated rotations act
/// as the identity outside the block, adding it back afterwards reproduces the
/// unshifted similarity transform.
fn qr_step(h: &mut CMatrix, u: &mut CMatrix, lo: usize, hi: usize, shift: Complex64) {
    let n = h.rows();
    for k in lo..=hi {
        let cur = h.at(k, k);
        h.set(k, k, cur - shift);
    }
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h.at(k, k), h.at(k + 1, k));
        rots.push((c, s));
        for j in k..n {
            let x = h.at(k, j);
            let y = h.at(k + 1, j);
            h.set(k, j, c * x + s * y);
            h.set(k + 1, j, -s.conj() * x + c * y);
        }
        h.set(k + 1, k, Complex64::ZERO);
    }
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        for i in 0..=k + 1 {
            let x = h.at(i, k);
            let y = h.at(i, k + 1);
            h.set(i, k, c * x + s.conj() * y);
            h.set(i, k + 1, -s * x + c * y);
        }
        for i in 0..n {
            let x = u.at(i, k);
            let y = u.at(i, k + 1);
            u.set(i, k, c * x + s.conj() * y);
            u.set(i, k + 1, -s * x + c * y);
        }
    }
    for k in lo..=hi {
        let cur = h.at(k, k);
        h.set(k, k, cur + shift);
    }
}

/// Directly triangularize the 2x2 block at rows/cols (lo, lo+1) with a
/// unitary similarity whose first column is an eigenvector of the block.
fn triangularize_2x2(h: &mut CMatrix, u: &mut CMatrix, lo: usize) {
    let n = h.rows();
    let a = h.at(lo, lo);
    let b = h.at(lo, lo + 1);
    let c = h.at(lo + 1, lo);
    let d = h.at(lo + 1, lo + 1);
    if c.norm() == 0.0 {
        return;
    }
    let m = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * c).sqrt();
    let l1 = m + disc;
    let l2 = m - disc;
    // (lam - d, c) is an eigenvector; prefer the eigenvalue farther from d
    // for a well-scaled first component.
    let lam = if (l1 - d).norm() >= (l2 - d).norm() {
        l1
    } else {
        l2
    };
    let v = (lam - d, c);
    let vn = (v.0.norm_sqr() + v.1.norm_sqr()).sqrt();
    let (g1, g2) = (v.0 / vn, v.1 / vn);

    // Left-multiply by G*, right-multiply by G, G = [[g1, -conj(g2)], [g2, conj(g1)]].
    for j in 0..n {
        let x = h.at(lo, j);
        let y = h.at(lo + 1, j);
        h.set(lo, j, g1.conj() * x + g2.conj() * y);
        h.set(lo + 1, j, -g2 * x + g1 * y);
    }
    for mat in [&mut *h, &mut *u] {
        for i in 0..n {
            let x = mat.at(i, lo);
            let y = mat.at(i, lo + 1);
            mat.set(i, lo, g1 * x + g2 * y);
            mat.set(i, lo + 1, -g2.conj() * x + g1.conj() * y);
        }
    }
    h.set(lo + 1, lo, Complex64::ZERO);
}

/// Swap the (k, k+1) diagonal entries of an upper triangular T by a unitary
/// similarity, preserving triangularity; U is updated alongside.
pub fn swap_schur_diag(t: &mut CMatrix, u: &mut CMatrix, k: usize) {
    let n = t.rows();
    let l1 = t.at(k, k);
    let w = t.at(k, k + 1);
    let l2 = t.at(k + 1, k + 1);
    // (w, l2 - l1) spans the eigenvector of [[l1, w], [0, l2]] for l2; making
    // it the new first basis vector moves l2 to the front.
    let vn = (w.norm_sqr() + (l2 - l1).norm_sqr()).sqrt();
    if vn == 0.0 {
        return; // equal diagonal, no coupling: nothing to move
    }
    let g1 = w / vn;
    let g2 = (l2 - l1) / vn;
    for j in 0..n {
        let x = t.at(k, j);
        let y = t.at(k + 1, j);
        t.set(k, j, g1.conj() * x + g2.conj() * y);
        t.set(k + 1, j, -g2 * x + g1 * y);
    }
    for mat in [&mut *t, &mut *u] {
        for i in 0..n {
            let x = mat.at(i, k);
            let y = mat.at(i, k + 1);
            mat.set(i, k, g1 * x + g2 * y);
            mat.set(i, k + 1, -g2.conj() * x + g1.conj() * y);
        }
    }
    t.set(k + 1, k, Complex64::ZERO);
}

fn validate(a: &CMatrix, u: &CMatrix, t: &CMatrix) -> Result<()> {
    let n = a.rows();
    let resid = u.mul(t).mul(&u.adjoint()).sub(a).fro_norm();
    if resid > 1e-9 * (1.0 + a.fro_norm()) {
        return Err(Error::Convergence {
            algorithm: "schur qr iteration",
            iterations: Tolerances::default().schur_iter_factor * n,
        });
    }
    let ortho = u.adjoint().mul(u).max_abs_diff(&CMatrix::identity(n));
    if ortho > 1e-10 {
        return Err(Error::Convergence {
            algorithm: "schur qr iteration",
            iterations: Tolerances::default().schur_iter_factor * n,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::lu::det_modulus;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_moduli(vals: &[Complex64]) -> Vec<f64> {
        let mut m: Vec<f64> = vals.iter().map(|z| z.norm()).collect();
        m.sort_by(f64::total_cmp);
        m
    }

    #[test]
    fn triangular_input_passes_through_exactly() {
        let t = CMatrix::new(3, 3, vec![
            c(1.0, 0.0), c(2.0, 1.0), c(0.5, 0.0),
            c(0.0, 0.0), c(-1.0, 0.5), c(3.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0),
        ])
        .unwrap();
        let s = schur(&t).unwrap();
        assert_eq!(s.t, t);
        assert_eq!(s.u, CMatrix::identity(3));
    }

    #[test]
    fn rotation_matrix_has_pure_imaginary_spectrum() {
        let a = CMatrix::new(2, 2, vec![c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        let s = schur(&a).unwrap();
        let mut eigs = s.eigenvalues();
        eigs.sort_by(|x, y| x.im.total_cmp(&y.im));
        assert!((eigs[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((eigs[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn circulant_spectrum_is_cube_roots_of_unity() {
        let a = CMatrix::new(3, 3, vec![
            c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0),
            c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
        ])
        .unwrap();
        let s = schur(&a).unwrap();
        for lam in s.eigenvalues() {
            assert!((lam.norm() - 1.0).abs() < 1e-10);
            assert!((lam.powi(3) - Complex64::ONE).norm() < 1e-9);
        }
    }

    #[test]
    fn nilpotent_jordan_block_deflates_to_zero_spectrum() {
        // Exercises the absolute deflation floor: relative thresholds alone
        // never fire when the whole diagonal is zero.
        let n = 4;
        let shifted = CMatrix::from_fn(n, n, |i, j| {
            if j == i + 1 {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        });
        // Conjugate by a fixed unitary so the input is not already triangular.
        let th = 0.3f64;
        let mut q = CMatrix::identity(n);
        q.set(0, 0, c(th.cos(), 0.0));
        q.set(0, 1, c(th.sin(), 0.0));
        q.set(1, 0, c(-th.sin(), 0.0));
        q.set(1, 1, c(th.cos(), 0.0));
        let a = q.mul(&shifted).mul(&q.adjoint());
        let s = schur(&a).unwrap();
        for lam in s.eigenvalues() {
            assert!(lam.norm() < 1e-8, "nilpotent eigenvalue drifted: {lam}");
        }
    }

    #[test]
    fn dense_matrix_eigenvalues_kill_the_characteristic_polynomial() {
        let n = 6;
        let a = CMatrix::from_fn(n, n, |i, j| {
            c(
                ((i * 5 + j * 3 + 1) as f64 * 0.47).sin(),
                ((i * 2 + j * 7 + 3) as f64 * 0.31).cos() * 0.6,
            )
        });
        let s = schur(&a).unwrap();
        let eigs = s.eigenvalues();
        for &lam in &eigs {
            let shifted = CMatrix::from_fn(n, n, |i, j| {
                a.at(i, j) - if i == j { lam } else { Complex64::ZERO }
            });
            let det = det_modulus(&shifted);
            let gaps: f64 = eigs
                .iter()
                .map(|&o| (o - lam).norm().max(1e-10))
                .product();
            assert!(det < 1e-7 * gaps.max(1.0), "det {det:.3e} at {lam}");
        }
        // Trace is preserved by similarity.
        let tsum: Complex64 = eigs.iter().sum();
        assert!((tsum - a.trace()).norm() < 1e-10);
    }

    #[test]
    fn repeated_defective_eigenvalue_is_recovered() {
        // Unitary conjugate of [[1, 1], [0, 1]].
        let j = CMatrix::new(2, 2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        let th = 1.1f64;
        let q = CMatrix::new(2, 2, vec![
            c(th.cos(), 0.0), c(th.sin(), 0.0),
            c(-th.sin(), 0.0), c(th.cos(), 0.0),
        ])
        .unwrap();
        let a = q.mul(&j).mul(&q.adjoint());
        let s = schur(&a).unwrap();
        for lam in s.eigenvalues() {
            assert!((lam - Complex64::ONE).norm() < 1e-7);
        }
    }

    #[test]
    fn swap_preserves_similarity_and_exchanges_diagonal() {
        let t0 = CMatrix::new(3, 3, vec![
            c(1.0, 0.0), c(2.0, -1.0), c(0.3, 0.0),
            c(0.0, 0.0), c(3.0, 1.0), c(0.7, 0.2),
            c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0),
        ])
        .unwrap();
        let mut t = t0.clone();
        let mut u = CMatrix::identity(3);
        swap_schur_diag(&mut t, &mut u, 0);
        assert!((t.at(0, 0) - c(3.0, 1.0)).norm() < 1e-14);
        assert!((t.at(1, 1) - c(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(t.at(1, 0), Complex64::ZERO);
        assert_eq!(t.at(2, 0), Complex64::ZERO);
        assert_eq!(t.at(2, 1), Complex64::ZERO);
        // u t u* must reproduce the original matrix.
        let back = u.mul(&t).mul(&u.adjoint());
        assert!(back.max_abs_diff(&t0) < 1e-14);
        assert!(u.adjoint().mul(&u).max_abs_diff(&CMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn moduli_survive_unitary_conjugation() {
        let d = CMatrix::diag(&[c(2.0, 0.0), c(0.0, 1.5), c(-0.5, 0.5), c(0.1, 0.0)]);
        let n = 4;
        // A deterministic unitary from the QR of a fixed matrix is overkill
        // here; a product of plane rotations does the job.
        let mut q = CMatrix::identity(n);
        for k in 0..n - 1 {
            let th = 0.4 + 0.3 * k as f64;
            let mut g = CMatrix::identity(n);
            g.set(k, k, c(th.cos(), 0.0));
            g.set(k, k + 1, c(th.sin(), 0.0));
            g.set(k + 1, k, c(-th.sin(), 0.0));
            g.set(k + 1, k + 1, c(th.cos(), 0.0));
            q = q.mul(&g);
        }
        let a = q.mul(&d).mul(&q.adjoint());
        let s = schur(&a).unwrap();
        let got = sorted_moduli(&s.eigenvalues());
        let want = sorted_moduli(&[c(2.0, 0.0), c(0.0, 1.5), c(-0.5, 0.5), c(0.1, 0.0)]);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10);
        }
    }
}
