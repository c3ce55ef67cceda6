use crate::error::{Error, Result};
use crate::linalg::{herm_eig, lambda_max_hermitian, schur};
use crate::matrix::{inner, vnorm, CMatrix};
use crate::tol::Tolerances;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// Evaluates the support function of the numerical range,
/// f(theta) = max Re(e^{i theta} W(A)) = lambda_max(Re(e^{i theta} A)).
struct SupportEvaluator {
    h1: CMatrix,
    h2: CMatrix,
}

impl SupportEvaluator {
    fn new(a: &CMatrix) -> Self {
        SupportEvaluator {
            h1: a.hermitian_part(),
            h2: a.skew_hermitian_part(),
        }
    }

    fn eval(&self, theta: f64) -> Result<f64> {
        let (c, s) = (theta.cos(), theta.sin());
        let n = self.h1.rows();
        let m = CMatrix::from_fn(n, n, |i, j| c * self.h1.at(i, j) + s * self.h2.at(i, j));
        lambda_max_hermitian(&m)
    }
}

/// Support function values on a uniform angular grid; the intersection of the
/// associated half-planes is an outer polytope of W(A), which is what the
/// membership and containment queries measure against.
pub(crate) struct SupportTable {
    angles: Vec<f64>,
    values: Vec<f64>,
}

impl SupportTable {
    pub(crate) fn compute(a: &CMatrix, k: usize) -> Result<SupportTable> {
        let ev = SupportEvaluator::new(a);
        let angles: Vec<f64> = (0..k).map(|i| TAU * i as f64 / k as f64).collect();
        let values = angles
            .iter()
            .map(|&t| ev.eval(t))
            .collect::<Result<Vec<f64>>>()?;
        Ok(SupportTable { angles, values })
    }

    /// Positive when `z` lies outside every certificate the table holds;
    /// values <= 0 mean `z` is inside the outer polytope.
    pub(crate) fn margin(&self, z: Complex64) -> f64 {
        self.angles
            .iter()
            .zip(&self.values)
            .map(|(&t, &v)| (Complex64::from_polar(1.0, t) * z).re - v)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Numerical radius r(A) = max |W(A)|: a 720-point support scan followed by
/// golden-section refinement of the best bracket (and of any bracket whose
/// grid value comes within 1e-4 of the best, to guard against near-ties).
pub fn numerical_radius(a: &CMatrix) -> Result<f64> {
    a.require_square()?;
    if a.is_zero() {
        return Ok(0.0);
    }
    let tols = Tolerances::default();
    let k = tols.radius_angles;
    let ev = SupportEvaluator::new(a);
    let step = TAU / k as f64;
    let mut vals = Vec::with_capacity(k);
    for i in 0..k {
        vals.push(ev.eval(step * i as f64)?);
    }
    let best_grid = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = best_grid.abs().max(1e-300);

    let mut best = best_grid;
    for i in 0..k {
        let prev = vals[(i + k - 1) % k];
        let next = vals[(i + 1) % k];
        let local_max = vals[i] > prev && vals[i] >= next;
        let near_tie = vals[i] >= best_grid - 1e-4 * scale;
        if local_max && near_tie {
            let center = step * i as f64;
            let refined = golden_max(&ev, center - step, center + step, tols.radius_refine_width)?;
            best = best.max(refined);
        }
    }
    Ok(best)
}

fn golden_max(ev: &SupportEvaluator, mut lo: f64, mut hi: f64, width: f64) -> Result<f64> {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let mut c = hi - INVPHI * (hi - lo);
    let mut d = lo + INVPHI * (hi - lo);
    let mut fc = ev.eval(c)?;
    let mut fd = ev.eval(d)?;
    let mut best = fc.max(fd);
    while hi - lo > width {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INVPHI * (hi - lo);
            fc = ev.eval(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INVPHI * (hi - lo);
            fd = ev.eval(d)?;
        }
        best = best.max(fc.max(fd));
    }
    Ok(best)
}

/// Whether `z` lies in the numerical range of `a`, up to `tol` outward slack,
/// measured against the support polytope on the standard grid.
pub fn in_range(z: Complex64, a: &CMatrix, tol: f64) -> Result<bool> {
    a.require_square()?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let table = SupportTable::compute(a, Tolerances::default().radius_angles)?;
    Ok(table.margin(z) <= tol)
}

/// Numerical radius of the rank-one matrix x y*:
/// (||x|| ||y|| + |<x, y>|) / 2. Both vectors must be nonzero.
pub fn r_rank_one(x: &[Complex64], y: &[Complex64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimMismatch(format!(
            "rank-one factors of lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (nx, ny) = (vnorm(x), vnorm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(0.5 * (nx * ny + inner(x, y).norm()))
}

/// Boundary sample of the numerical range: for each grid angle, the support
/// value and the boundary point achieved by the top eigenvector of the
/// rotated Hermitian part.
#[derive(Debug, Clone, Serialize)]
pub struct RangeSample {
    pub angles: Vec<f64>,
    pub support: Vec<f64>,
    pub boundary: Vec<[f64; 2]>,
}

impl RangeSample {
    pub fn compute(a: &CMatrix, samples: usize) -> Result<RangeSample> {
        a.require_square()?;
        if samples < 8 {
            return Err(Error::InvalidArgument(format!(
                "need at least 8 samples, got {samples}"
            )));
        }
        let mut angles = Vec::with_capacity(samples);
        let mut support = Vec::with_capacity(samples);
        let mut boundary = Vec::with_capacity(samples);
        let h1 = a.hermitian_part();
        let h2 = a.skew_hermitian_part();
        let n = a.rows();
        for i in 0..samples {
            let theta = TAU * i as f64 / samples as f64;
            let (c, s) = (theta.cos(), theta.sin());
            let m = CMatrix::from_fn(n, n, |p, q| c * h1.at(p, q) + s * h2.at(p, q));
            let eig = herm_eig(&m)?;
            let v = eig.eigenvector(n - 1);
            let z = inner(&a.matvec(&v), &v);
            angles.push(theta);
            support.push(eig.values[n - 1]);
            boundary.push([z.re, z.im]);
        }
        Ok(RangeSample {
            angles,
            support,
            boundary,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,support,boundary_re,boundary_im\n");
        for i in 0..self.angles.len() {
            out.push_str(&format!(
                "{:.17e},{:.17e},{:.17e},{:.17e}\n",
                self.angles[i], self.support[i], self.boundary[i][0], self.boundary[i][1]
            ));
        }
        out
    }
}

/// Containment status of one product eigenvalue in W(A) W(B).
#[derive(Debug, Clone, Serialize)]
pub struct EigenContainment {
    pub lambda: [f64; 2],
    pub contained: bool,
    /// Worst-case miss distance against the scaled range of B (<= tolerance
    /// means certified).
    pub margin: f64,
    /// Scale factor from the segment W(A) at which the miss was smallest.
    pub scale_at_best: f64,
}

/// Report for the product-spectrum containment check sigma(AB) within
/// W(A) W(B) when A is a rotated positive semidefinite matrix.
#[derive(Debug, Clone, Serialize)]
pub struct ContainmentReport {
    pub all_contained: bool,
    pub phase: [f64; 2],
    pub segment: [f64; 2],
    pub eigenvalues: Vec<EigenContainment>,
}

/// Certifies sigma(AB) within W(A) W(B) for A = c P with P positive
/// semidefinite and c a complex phase-and-scale factor. W(A) is then the
/// segment c [m, M]; each eigenvalue of AB is searched over that segment for
/// a scale at which it falls inside W(B).
pub fn product_containment_check(
    a: &CMatrix,
    b: &CMatrix,
    tols: &Tolerances,
) -> Result<ContainmentReport> {
    let n = a.require_square()?;
    if b.require_square()? != n {
        return Err(Error::DimMismatch(format!(
            "factors of dimensions {} and {}",
            n,
            b.rows()
        )));
    }

    // A must be normal with collinear spectrum on a ray from the origin.
    let scale_a = a.fro_norm();
    let comm = a.adjoint().mul(a).sub(&a.mul(&a.adjoint())).fro_norm();
    if comm > tols.normality_coeff * scale_a * scale_a {
        return Err(Error::NotNormal { deviation: comm });
    }
    let eigs_a = schur(a)?.eigenvalues();
    let big = eigs_a
        .iter()
        .cloned()
        .max_by(|u, v| u.norm().total_cmp(&v.norm()))
        .unwrap();

    let (phase, seg_lo, seg_hi) = if big.norm() <= 1e-14 * (1.0 + scale_a) {
        (Complex64::ONE, 0.0, 0.0)
    } else {
        let u = big / big.norm();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for lam in &eigs_a {
            let t = (u.conj() * lam).re;
            let off = (u.conj() * lam).im.abs();
            if off > tols.collinear_tol * (1.0 + scale_a) || t < -tols.collinear_tol * (1.0 + scale_a)
            {
                return Err(Error::NotPsdMultiple(format!(
                    "eigenvalue {lam} is not on the ray of the dominant eigenvalue"
                )));
            }
            let t = t.max(0.0);
            lo = lo.min(t);
            hi = hi.max(t);
        }
        (u, lo, hi)
    };

    let table = SupportTable::compute(b, tols.radius_angles)?;
    let prod = a.mul(b);
    let eigs_p = schur(&prod)?.eigenvalues();
    let tiny = 1e-12 * (1.0 + scale_a) * (1.0 + b.fro_norm());

    let mut out = Vec::with_capacity(n);
    let mut all = true;
    for lam in eigs_p {
        let ec = if lam.norm() <= tiny {
            // lambda = 0: contained iff 0 is available as s * w.
            let margin = if seg_lo <= tols.containment_tol {
                0.0
            } else {
                table.margin(Complex64::ZERO).max(0.0)
            };
            EigenContainment {
                lambda: [lam.re, lam.im],
                contained: margin <= tols.containment_tol,
                margin,
                scale_at_best: seg_lo,
            }
        } else if seg_hi <= 0.0 {
            // A is (numerically) zero but the product has a nonzero
            // eigenvalue: impossible unless the input is inconsistent.
            EigenContainment {
                lambda: [lam.re, lam.im],
                contained: false,
                margin: f64::INFINITY,
                scale_at_best: 0.0,
            }
        } else {
            let miss = |s: f64| table.margin(phase.conj() * lam / s);
            let floor = tols.containment_floor * seg_hi;
            let lo = seg_lo.max(floor);
            let grid = tols.containment_grid;
            let log_spacing = seg_lo < floor;
            let (mut best_s, mut best_m) = (lo, f64::INFINITY);
            for i in 0..grid {
                let f = i as f64 / (grid - 1) as f64;
                let s = if log_spacing {
                    lo * (seg_hi / lo).powf(f)
                } else {
                    lo + (seg_hi - lo) * f
                };
                let m = miss(s);
                if m < best_m {
                    best_m = m;
                    best_s = s;
                }
            }
            // Local refinement around the best grid scale.
            let (mut glo, mut ghi) = (
                (best_s * 0.999).max(lo.min(best_s)),
                (best_s * 1.001).min(seg_hi),
            );
            if ghi > glo {
                const INVPHI: f64 = 0.618_033_988_749_894_8;
                let mut c = ghi - INVPHI * (ghi - glo);
                let mut d = glo + INVPHI * (ghi - glo);
                let mut fc = miss(c);
                let mut fd = miss(d);
                for _ in 0..60 {
                    if ghi - glo <= 1e-12 * seg_hi {
                        break;
                    }
                    if fc <= fd {
                        ghi = d;
                        d = c;
                        fd = fc;
                        c = ghi - INVPHI * (ghi - glo);
                        fc = miss(c);
                    } else {
                        glo = c;
                        c = d;
                        fc = fd;
                        d = glo + INVPHI * (ghi - glo);
                        fd = miss(d);
                    }
                    if fc < best_m {
                        best_m = fc;
                        best_s = c;
                    }
                    if fd < best_m {
                        best_m = fd;
                        best_s = d;
                    }
                }
            }
            EigenContainment {
                lambda: [lam.re, lam.im],
                contained: best_m <= tols.containment_tol,
                margin: best_m,
                scale_at_best: best_s,
            }
        };
        all &= ec.contained;
        out.push(ec);
    }

    Ok(ContainmentReport {
        all_contained: all,
        phase: [phase.re, phase.im],
        segment: [seg_lo, seg_hi],
        eigenvalues: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::outer;
    use crate::random::{rand_psd, rand_unit_vector, rng_from_seed, unit_vector_with};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn radius_of_normal_matrices_is_peak_modulus() {
        let a = CMatrix::diag(&[c(0.3, 0.4), c(-1.0, 0.2), c(0.0, 0.0)]);
        let want = (1.0f64 + 0.04).sqrt();
        assert!((numerical_radius(&a).unwrap() - want).abs() < 1e-11);
        // Scalar matrix: a flat support function with no local maxima.
        let s = CMatrix::identity(4).scale(c(0.0, 2.5));
        assert!((numerical_radius(&s).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn radius_of_shift_block_is_half() {
        // W([[0, 1], [0, 0]]) is the disk of radius 1/2 at the origin.
        let j = CMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert!((numerical_radius(&j).unwrap() - 0.5).abs() < 1e-11);
    }

    #[test]
    fn radius_of_shifted_jordan_cell() {
        // W([[1/2, 1/2], [0, 1/2]]) is the disk of radius 1/4 at 1/2.
        let t = CMatrix::new(2, 2, vec![c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)])
            .unwrap();
        assert!((numerical_radius(&t).unwrap() - 0.75).abs() < 1e-11);
    }

    #[test]
    fn radius_brackets_norm_and_spectral_radius() {
        use crate::linalg::{op_norm, spectral_radius};
        for i in 0..10u64 {
            let n = 2 + (i as usize) % 5;
            let mut rng = rng_from_seed(500 + i);
            let a = crate::random::ginibre_with(n, &mut rng);
            let r = numerical_radius(&a).unwrap();
            let rho = spectral_radius(&a).unwrap();
            let nrm = op_norm(&a).unwrap();
            assert!(rho <= r + 1e-9, "rho {rho} > r {r}");
            assert!(r <= nrm + 1e-9, "r {r} > norm {nrm}");
            assert!(nrm <= 2.0 * r + 1e-9, "norm {nrm} > 2r {r}");
        }
    }

    #[test]
    fn membership_matches_disk_geometry() {
        let t = CMatrix::new(2, 2, vec![c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)])
            .unwrap();
        let tol = 1e-8;
        assert!(in_range(c(0.5, 0.249), &t, tol).unwrap());
        assert!(!in_range(c(0.5, 0.26), &t, tol).unwrap());
        assert!(in_range(c(0.25, 0.0), &t, tol).unwrap());
        assert!(!in_range(c(0.76, 0.0), &t, tol).unwrap());
    }

    #[test]
    fn rank_one_radius_closed_form() {
        let x = vec![c(1.0 / 2f64.sqrt(), 0.0), c(1.0 / 2f64.sqrt(), 0.0)];
        let e1 = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let want = 0.5 * (1.0 + 1.0 / 2f64.sqrt());
        assert!((r_rank_one(&x, &e1).unwrap() - want).abs() < 1e-15);
        // Scaling both factors scales the radius by the product.
        let x3: Vec<Complex64> = x.iter().map(|z| 3.0 * z).collect();
        assert!((r_rank_one(&x3, &e1).unwrap() - 3.0 * want).abs() < 1e-14);
        assert!(matches!(
            r_rank_one(&[Complex64::ZERO], &[Complex64::ONE]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn rank_one_closed_form_matches_support_scan() {
        for i in 0..6u64 {
            let n = 2 + (i as usize) % 4;
            let mut rng = rng_from_seed(900 + i);
            let x = unit_vector_with(n, &mut rng);
            let y = unit_vector_with(n, &mut rng);
            let m = outer(&x, &y);
            let closed = r_rank_one(&x, &y).unwrap();
            let scanned = numerical_radius(&m).unwrap();
            assert!(
                (closed - scanned).abs() < 1e-9,
                "closed {closed} vs scanned {scanned}"
            );
        }
    }

    #[test]
    fn sample_boundary_points_are_consistent() {
        let a = CMatrix::new(2, 2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
            .unwrap();
        let s = RangeSample::compute(&a, 32).unwrap();
        assert_eq!(s.angles.len(), 32);
        for i in 0..32 {
            let z = c(s.boundary[i][0], s.boundary[i][1]);
            // The boundary point realizes its support value...
            let dir = Complex64::from_polar(1.0, s.angles[i]);
            assert!(((dir * z).re - s.support[i]).abs() < 1e-9);
            // ...and lies in the range.
            assert!(in_range(z, &a, 1e-8).unwrap());
        }
        assert!(matches!(
            RangeSample::compute(&a, 4),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let a = CMatrix::identity(2);
        let s = RangeSample::compute(&a, 8).unwrap();
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.trim().lines().collect();
        assert_eq!(lines[0], "theta,support,boundary_re,boundary_im");
        assert_eq!(lines.len(), 9);
    }

    #[test]
    fn psd_product_spectra_are_contained() {
        let tols = Tolerances::default();
        for i in 0..8u64 {
            let n = 2 + (i as usize) % 4;
            let p = rand_psd(n, 40 + i);
            let phase = Complex64::from_polar(1.3, 0.7 * i as f64);
            let a = p.scale(phase);
            let mut rng = rng_from_seed(600 + i);
            let b = crate::random::ginibre_with(n, &mut rng);
            let rep = product_containment_check(&a, &b, &tols).unwrap();
            assert!(
                rep.all_contained,
                "i={i}: margins {:?}",
                rep.eigenvalues.iter().map(|e| e.margin).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn containment_rejects_non_psd_left_factor() {
        let tols = Tolerances::default();
        let a = CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]); // Hermitian, not PSD-ray
        let b = CMatrix::identity(2);
        assert!(matches!(
            product_containment_check(&a, &b, &tols),
            Err(Error::NotPsdMultiple(_))
        ));
        let nn = CMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert!(matches!(
            product_containment_check(&nn, &b, &tols),
            Err(Error::NotNormal { .. })
        ));
    }

    #[test]
    fn containment_zero_factor_and_diagonal_case() {
        let tols = Tolerances::default();
        let z = CMatrix::zeros(2, 2);
        let b = CMatrix::diag(&[c(2.0, 0.0), c(-1.0, 0.0)]);
        let rep = product_containment_check(&z, &b, &tols).unwrap();
        assert!(rep.all_contained);

        // Diagonal PSD times diagonal B: products s * w are exactly the
        // eigenvalues; margins should be essentially zero.
        let a = CMatrix::diag(&[c(0.5, 0.0), c(2.0, 0.0)]);
        let rep = product_containment_check(&a, &b, &tols).unwrap();
        assert!(rep.all_contained);
        assert!((rep.segment[0] - 0.5).abs() < 1e-12);
        assert!((rep.segment[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_vector_membership_in_field_of_values() {
        // <A v, v> for any unit v lies in W(A).
        let a = CMatrix::new(3, 3, vec![
            c(1.0, 0.2), c(0.5, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(-0.3, 1.0), c(0.25, 0.0),
            c(0.1, 0.0), c(0.0, 0.0), c(0.4, -0.6),
        ])
        .unwrap();
        for i in 0..12u64 {
            let v = rand_unit_vector(3, 70 + i);
            let z = inner(&a.matvec(&v), &v);
            assert!(in_range(z, &a, 1e-8).unwrap(), "point {z} escaped");
        }
    }
}
