use crate::linalg::qr_unitary;
use crate::matrix::{normalized, CMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// All randomness in the crate flows through a counter-based stream cipher
/// generator so that every artifact is reproducible from a single `u64` seed,
/// on any platform.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer over (master, index); gives statistically independent
/// substream seeds for parallel or per-trial work.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

pub(crate) fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub(crate) fn ginibre_with(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| gaussian_complex(rng))
}

/// Square matrix of independent standard complex Gaussians.
pub fn rand_ginibre(n: usize, seed: u64) -> CMatrix {
    assert!(n >= 1, "dimension must be positive");
    ginibre_with(n, &mut rng_from_seed(seed))
}

pub(crate) fn haar_unitary_with(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = ginibre_with(n, rng);
    let (q, r) = qr_unitary(&g);
    // Fixing the phases of R's diagonal makes the distribution exactly Haar.
    let phases: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = r.at(i, i);
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::ONE
            }
        })
        .collect();
    CMatrix::from_fn(n, n, |i, j| q.at(i, j) * phases[j])
}

/// Haar-distributed unitary matrix.
pub fn rand_unitary(n: usize, seed: u64) -> CMatrix {
    assert!(n >= 1, "dimension must be positive");
    haar_unitary_with(n, &mut rng_from_seed(seed))
}

/// Gaussian Hermitian matrix (G + G*)/2.
pub fn rand_hermitian(n: usize, seed: u64) -> CMatrix {
    assert!(n >= 1, "dimension must be positive");
    ginibre_with(n, &mut rng_from_seed(seed)).hermitian_part()
}

/// Positive semidefinite matrix with spectrum uniform in [0, 1], conjugated
/// by a Haar unitary.
pub fn rand_psd(n: usize, seed: u64) -> CMatrix {
    assert!(n >= 1, "dimension must be positive");
    let mut rng = rng_from_seed(seed);
    let v = haar_unitary_with(n, &mut rng);
    let d = CMatrix::diag(
        &(0..n)
            .map(|_| Complex64::new(rng.random::<f64>(), 0.0))
            .collect::<Vec<_>>(),
    );
    v.mul(&d).mul(&v.adjoint())
}

pub(crate) fn unit_vector_with(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| gaussian_complex(rng)).collect();
        if let Ok(u) = normalized(&v) {
            return u;
        }
    }
}

/// Unit vector uniform on the complex sphere.
pub fn rand_unit_vector(n: usize, seed: u64) -> Vec<Complex64> {
    assert!(n >= 1, "dimension must be positive");
    unit_vector_with(n, &mut rng_from_seed(seed))
}
