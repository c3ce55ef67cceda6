use crate::linalg::{op_norm, schur};
use crate::matrix::CMatrix;
use crate::random::{ginibre_with, haar_unitary_with, rng_from_seed};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// The two engineered ways an instance can break the product bound: two
/// eigenvalue clusters tied for the peak modulus, or a rescaled matrix whose
/// norm exceeds the shifted unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    TwoPeaks,
    NormExcess,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::TwoPeaks => "two_peaks",
            ViolationKind::NormExcess => "norm_excess",
        }
    }
}

/// Random matrix that satisfies `rho(AB) <= r(A) r(B)` for every `B`, built
/// as `A = mu (I + L)/2` from a contraction `L` with eigenvalue 1. The
/// contraction's remaining spectrum is kept away from 1 (so the dominant
/// eigenvalue of `A` is decisively unique) and away from the unit circle near
/// 1 (so no second eigenvalue of `A` sneaks up to the peak modulus).
pub fn gen_satisfying(n: usize, seed: u64) -> CMatrix {
    assert!(n >= 1, "dimension must be positive");
    let mut rng = rng_from_seed(seed);
    let mu = random_mu(&mut rng);
    let k = rng.random_range(1..=n);
    let m = n - k;
    if m == 0 {
        return CMatrix::identity(n).scale(mu);
    }

    let kmat = admissible_contraction(m, &mut rng);
    let core = CMatrix::identity(k).direct_sum(&kmat);
    let v = haar_unitary_with(n, &mut rng);
    let l = v.mul(&core).mul(&v.adjoint());
    CMatrix::identity(n).add(&l).scale(0.5 * mu)
}

fn random_mu(rng: &mut ChaCha8Rng) -> Complex64 {
    let modulus = rng.random_range(0.5..2.0);
    let phase = rng.random_range(0.0..TAU);
    Complex64::from_polar(modulus, phase)
}

/// Contraction block whose spectrum avoids 1 by at least 1e-3 and satisfies
/// `|1 + lambda| <= 2 - 2e-5`, so the assembled instance keeps a clear gap
/// between its dominant eigenvalue and the rest.
fn admissible_contraction(m: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    for _ in 0..400 {
        let candidate = if rng.random::<f64>() < 0.25 {
            // Embed a -I block: the assembled matrix picks up a zero block,
            // exercising the q > 0 branch of the decomposition.
            let j = rng.random_range(1..=m);
            let inner = if j == m {
                CMatrix::identity(m).scale(-Complex64::ONE)
            } else {
                let neg = CMatrix::identity(j).scale(-Complex64::ONE);
                neg.direct_sum(&scaled_ginibre(m - j, rng))
            };
            let w = haar_unitary_with(m, rng);
            w.mul(&inner).mul(&w.adjoint())
        } else {
            scaled_ginibre(m, rng)
        };
        let Ok(s) = schur(&candidate) else { continue };
        let ok = s.eigenvalues().iter().all(|lam| {
            (lam - Complex64::ONE).norm() >= 1e-3
                && (Complex64::ONE + lam).norm() <= 2.0 - 2e-5
        });
        if ok {
            return candidate;
        }
    }
    // Statistically unreachable; the zero contraction is always admissible.
    CMatrix::zeros(m, m)
}

fn scaled_ginibre(sz: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = ginibre_with(sz, rng);
    let target = rng.random_range(0.3..0.95);
    let nrm = op_norm(&g).unwrap_or(0.0);
    if nrm <= 1e-300 {
        return CMatrix::zeros(sz, sz);
    }
    g.scale(Complex64::new(target / nrm, 0.0))
}

/// Random matrix that violates the product bound in a controlled way.
///
/// `margin` in (0, 0.5] sets how decisively: for `TwoPeaks` it lower-bounds
/// the angular separation of the two tied peak eigenvalues; for `NormExcess`
/// the rescaled matrix has `||2A/mu - I|| = 1 + margin` exactly.
pub fn gen_violating(n: usize, seed: u64, kind: ViolationKind, margin: f64) -> CMatrix {
    assert!(n >= 2, "violating instances need dimension at least 2");
    assert!(
        margin > 0.0 && margin <= 0.5,
        "margin must lie in (0, 0.5], got {margin}"
    );
    let mut rng = rng_from_seed(seed);
    match kind {
        ViolationKind::TwoPeaks => {
            let rho = rng.random_range(0.5..2.0);
            let phi = rng.random_range(0.0..TAU);
            let sep = rng.random_range(margin..(TAU - margin));
            let mut eigs = vec![
                Complex64::from_polar(rho, phi),
                Complex64::from_polar(rho, phi + sep),
            ];
            for _ in 2..n {
                let r = 0.8 * rho * rng.random::<f64>().sqrt();
                eigs.push(Complex64::from_polar(r, rng.random_range(0.0..TAU)));
            }
            let v = haar_unitary_with(n, &mut rng);
            v.mul(&CMatrix::diag(&eigs)).mul(&v.adjoint())
        }
        ViolationKind::NormExcess => {
            let mu = random_mu(&mut rng);
            let k = rng.random_range(1..=(n - 1));
            let m = n - k;
            let g = if m == 1 {
                CMatrix::diag(&[Complex64::new(-(1.0 + margin), 0.0)])
            } else {
                // Nilpotent excess block: keeps the spectrum of A at
                // {mu, mu/2} so the dominant eigenvalue stays unique.
                let raw = ginibre_with(m, &mut rng);
                let mut nil = CMatrix::zeros(m, m);
                for i in 0..m {
                    for j in i + 1..m {
                        nil.set(i, j, raw.at(i, j));
                    }
                }
                let nrm = op_norm(&nil).unwrap_or(0.0);
                if nrm <= 1e-10 {
                    for i in 0..m - 1 {
                        nil.set(i, i + 1, Complex64::ONE);
                    }
                }
                let nrm = op_norm(&nil).unwrap();
                nil.scale(Complex64::new((1.0 + margin) / nrm, 0.0))
            };
            let core = CMatrix::identity(k).direct_sum(&g);
            let v = haar_unitary_with(n, &mut rng);
            let l = v.mul(&core).mul(&v.adjoint());
            CMatrix::identity(n).add(&l).scale(0.5 * mu)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate;
    use crate::tol::Tolerances;

    #[test]
    fn satisfying_instances_pass_the_gate() {
        let tols = Tolerances::default();
        for (i, n) in (0..40u64).map(|i| (i, 1 + (i as usize * 7) % 12)) {
            let a = gen_satisfying(n, 1000 + i);
            let v = gate::check(&a, &tols).unwrap();
            assert!(
                v.satisfied,
                "seed {i} dim {n} not satisfied: {:?}",
                v.diagnostics
            );
            assert_eq!(v.max_modulus_count, 1);
        }
    }

    #[test]
    fn two_peak_instances_fail_with_a_tied_peak() {
        let tols = Tolerances::default();
        for i in 0..25u64 {
            let n = 2 + (i as usize) % 7;
            let a = gen_violating(n, 2000 + i, ViolationKind::TwoPeaks, 0.2);
            let v = gate::check(&a, &tols).unwrap();
            assert!(!v.satisfied, "seed {i} dim {n} unexpectedly satisfied");
            assert!(v.max_modulus_count >= 2, "expected a tied peak modulus");
        }
    }

    #[test]
    fn norm_excess_instances_fail_with_the_prescribed_norm() {
        let tols = Tolerances::default();
        for i in 0..25u64 {
            let n = 2 + (i as usize) % 7;
            let margin = 0.1 + 0.01 * (i as f64 % 5.0);
            let a = gen_violating(n, 3000 + i, ViolationKind::NormExcess, margin);
            let v = gate::check(&a, &tols).unwrap();
            assert!(!v.satisfied, "seed {i} dim {n} unexpectedly satisfied");
            assert_eq!(v.max_modulus_count, 1);
            let cn = v.contraction_norm.expect("contraction norm defined");
            assert!(
                (cn - (1.0 + margin)).abs() < 1e-9,
                "contraction norm {cn} vs 1 + {margin}"
            );
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_satisfying(5, 77);
        let b = gen_satisfying(5, 77);
        assert_eq!(a, b);
        let c = gen_violating(4, 9, ViolationKind::TwoPeaks, 0.3);
        let d = gen_violating(4, 9, ViolationKind::TwoPeaks, 0.3);
        assert_eq!(c, d);
    }

    #[test]
    #[should_panic(expected = "margin")]
    fn margin_outside_range_panics() {
        gen_violating(3, 1, ViolationKind::NormExcess, 0.75);
    }
}
