use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::tol::Tolerances;
use num_complex::Complex64;

/// Full Hermitian eigendecomposition. Eigenvalues ascend; `vectors` holds the
/// matching orthonormal eigenvectors as columns, so `H = V diag(values) V*`.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.rows()).map(|i| self.vectors.at(i, k)).collect()
    }
}

/// Cyclic complex Jacobi iteration. The input must be Hermitian up to
/// `1e-12 * (1 + ||H||)`; it is symmetrized before sweeping so the rotations
/// see an exactly Hermitian matrix.
pub fn herm_eig(h: &CMatrix) -> Result<HermEig> {
    let n = h.require_square()?;
    let hnorm = h.fro_norm();
    let asym = h.sub(&h.adjoint()).fro_norm();
    if asym > 1e-12 * (1.0 + hnorm) {
        return Err(Error::NotHermitian { deviation: asym });
    }

    let mut a = h.hermitian_part();
    let mut v = CMatrix::identity(n);
    if n == 1 {
        return Ok(HermEig {
            values: vec![a.at(0, 0).re],
            vectors: v,
        });
    }

    let tols = Tolerances::default();
    let stop = tols.jacobi_off_coeff * hnorm;
    // Entries already far below the stopping threshold are not worth rotating.
    let skip = stop * 1e-3 / n as f64;

    let mut converged = hnorm == 0.0;
    for _ in 0..tols.jacobi_max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.at(p, q).norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let w = a.at(p, q);
                let b = w.norm();
                if b <= skip {
                    continue;
                }
                // Phase out the pivot, then a real Jacobi rotation: the
                // combined 2x2 unitary is [[c, s], [-s*ph', c*ph']] with
                // ph = w/|w| and ph' its conjugate.
                let ph = w / b;
                let theta = (a.at(q, q).re - a.at(p, p).re) / (2.0 * b);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // Rows p and q of U* A.
                for j in 0..n {
                    let ap = a.at(p, j);
                    let aq = a.at(q, j);
                    a.set(p, j, c * ap - s * ph * aq);
                    a.set(q, j, s * ap + c * ph * aq);
                }
                // Columns p and q of (U* A) U.
                for i in 0..n {
                    let ap = a.at(i, p);
                    let aq = a.at(i, q);
                    a.set(i, p, c * ap - s * ph.conj() * aq);
                    a.set(i, q, s * ap + c * ph.conj() * aq);
                }
                a.set(p, q, Complex64::ZERO);
                a.set(q, p, Complex64::ZERO);
                let app = a.at(p, p);
                let aqq = a.at(q, q);
                a.set(p, p, Complex64::new(app.re, 0.0));
                a.set(q, q, Complex64::new(aqq.re, 0.0));

                for i in 0..n {
                    let vp = v.at(i, p);
                    let vq = v.at(i, q);
                    v.set(i, p, c * vp - s * ph.conj() * vq);
                    v.set(i, q, s * vp + c * ph.conj() * vq);
                }
            }
        }
    }
    if !converged {
        // Final re-check: the last sweep may have finished the job.
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.at(p, q).norm_sqr();
            }
        }
        if (2.0 * off).sqrt() > stop {
            return Err(Error::Convergence {
                algorithm: "jacobi eigenvalue iteration",
                iterations: tols.jacobi_max_sweeps,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.at(i, i).re.total_cmp(&a.at(j, j).re));
    let values: Vec<f64> = order.iter().map(|&i| a.at(i, i).re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v.at(i, order[j]));

    validate(h, &values, &vectors, hnorm)?;
    Ok(HermEig { values, vectors })
}

// Residual and orthonormality guards; a failure here means the iteration
// produced garbage rather than merely converging slowly.
fn validate(h: &CMatrix, values: &[f64], vectors: &CMatrix, hnorm: f64) -> Result<()> {
    let n = h.rows();
    let lam = CMatrix::diag(
        &values
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect::<Vec<_>>(),
    );
    let resid = h
        .mul(vectors)
        .sub(&vectors.mul(&lam))
        .max_abs_diff(&CMatrix::zeros(n, n));
    let ortho = vectors
        .adjoint()
        .mul(vectors)
        .max_abs_diff(&CMatrix::identity(n));
    if resid > 1e-10 * (1.0 + hnorm) || ortho > 1e-10 {
        return Err(Error::Convergence {
            algorithm: "jacobi eigenvalue iteration",
            iterations: Tolerances::default().jacobi_max_sweeps,
        });
    }
    Ok(())
}
