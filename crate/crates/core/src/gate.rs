use crate::error::{Error, Result};
use crate::linalg::{inverse, lambda_min_hermitian, op_norm, schur, swap_schur_diag};
use crate::matrix::{serde_c64, serde_c64_opt, CMatrix};
use crate::tol::Tolerances;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Outcome of the product-bound test for a single matrix.
///
/// `satisfied` means `rho(AB) <= r(A) r(B)` holds for every `B`. This is
/// decided by two facts about `A`: exactly one eigenvalue value attains the
/// peak modulus (`max_modulus_count == 1` — repeated copies of the same value
/// count once), and the rescaled matrix stays in the shifted ball,
/// `||A/mu - I/2|| <= 1/2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateVerdict {
    pub satisfied: bool,
    /// The zero matrix satisfies the bound vacuously but admits no scaling.
    pub trivial_zero: bool,
    pub spectral_radius: f64,
    /// Dominant eigenvalue (cluster mean); absent for zero or nilpotent input.
    #[serde(with = "serde_c64_opt")]
    pub mu: Option<Complex64>,
    /// Number of eigenvalue clusters tied for the peak modulus.
    pub max_modulus_count: usize,
    /// `||2A/mu - I||`; at most `1 + 2 tol` exactly when the norm test passes.
    pub contraction_norm: Option<f64>,
    /// The norm test landed within the boundary band; the verdict is
    /// tolerance-sensitive.
    pub near_boundary: bool,
    pub diagnostics: Vec<String>,
}

/// Decide the product bound for `a` via the dominant-eigenvalue norm test.
pub fn check(a: &CMatrix, tols: &Tolerances) -> Result<GateVerdict> {
    a.require_square()?;
    if a.is_zero() {
        return Ok(trivial_zero_verdict());
    }
    let norm_a = op_norm(a)?;
    let eigs = schur(a)?.eigenvalues();
    verdict_from_eigs(a, &eigs, norm_a, tols, false)
}

/// Fast path for normal matrices: the norm test reduces to checking that
/// every eigenvalue lies in the closed disk of radius |mu|/2 around mu/2.
/// Returns `NotNormal` when the commutator is too large to trust the shortcut.
pub fn check_normal(a: &CMatrix, tols: &Tolerances) -> Result<GateVerdict> {
    a.require_square()?;
    if a.is_zero() {
        return Ok(trivial_zero_verdict());
    }
    let scale = a.fro_norm();
    let comm = a.adjoint().mul(a).sub(&a.mul(&a.adjoint())).fro_norm();
    if comm > tols.normality_coeff * scale * scale {
        return Err(Error::NotNormal { deviation: comm });
    }
    let norm_a = op_norm(a)?;
    let eigs = schur(a)?.eigenvalues();
    verdict_from_eigs(a, &eigs, norm_a, tols, true)
}

fn trivial_zero_verdict() -> GateVerdict {
    GateVerdict {
        satisfied: true,
        trivial_zero: true,
        spectral_radius: 0.0,
        mu: None,
        max_modulus_count: 0,
        contraction_norm: None,
        near_boundary: false,
        diagnostics: vec!["zero matrix: the product bound holds vacuously".into()],
    }
}

fn verdict_from_eigs(
    a: &CMatrix,
    eigs: &[Complex64],
    norm_a: f64,
    tols: &Tolerances,
    eigs_only: bool,
) -> Result<GateVerdict> {
    let rho = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut diagnostics = Vec::new();
    if rho <= 1e-13 * (1.0 + norm_a) {
        diagnostics
            .push("spectral radius is numerically zero; no dominant scaling exists".into());
        return Ok(GateVerdict {
            satisfied: false,
            trivial_zero: false,
            spectral_radius: rho,
            mu: None,
            max_modulus_count: 0,
            contraction_norm: None,
            near_boundary: false,
            diagnostics,
        });
    }

    let tol_cluster = tols.cluster_coeff * (1.0 + norm_a);
    let clusters = cluster_eigenvalues(eigs, tol_cluster);
    let peak: Vec<&Cluster> = clusters
        .iter()
        .filter(|c| c.peak_modulus >= rho - tol_cluster)
        .collect();
    let count = peak.len();
    // Tie-break among peak clusters lexicographically on the mean value:
    // similarity-invariant, unlike the order the Schur iteration found them.
    let mu = peak
        .iter()
        .map(|c| c.mean())
        .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)))
        .unwrap();

    // ||A/mu - I/2||, from the eigenvalues alone on the normal path.
    let norm_half = if eigs_only {
        eigs.iter()
            .map(|lam| (lam / mu - Complex64::new(0.5, 0.0)).norm())
            .fold(0.0, f64::max)
    } else {
        let n = a.rows();
        let shifted = CMatrix::from_fn(n, n, |i, j| {
            a.at(i, j) / mu - if i == j { Complex64::new(0.5, 0.0) } else { Complex64::ZERO }
        });
        op_norm(&shifted)?
    };

    if count > 1 {
        diagnostics.push(format!(
            "peak modulus {rho:.6e} is attained by {count} distinct eigenvalue values"
        ));
    }
    if norm_half > 0.5 + tols.gate_slack {
        diagnostics.push(format!(
            "rescaled matrix escapes the shifted ball: ||A/mu - I/2|| = {norm_half:.12}"
        ));
    }
    let near_boundary = (norm_half - 0.5).abs() <= tols.boundary_band;
    if near_boundary {
        diagnostics.push(
            "norm test lies within the boundary band; the verdict is tolerance-sensitive".into(),
        );
    }

    Ok(GateVerdict {
        satisfied: count == 1 && norm_half <= 0.5 + tols.gate_slack,
        trivial_zero: false,
        spectral_radius: rho,
        mu: Some(mu),
        max_modulus_count: count,
        contraction_norm: Some(2.0 * norm_half),
        near_boundary,
        diagnostics,
    })
}

struct Cluster {
    sum: Complex64,
    count: usize,
    peak_modulus: f64,
}

impl Cluster {
    fn mean(&self) -> Complex64 {
        self.sum / self.count as f64
    }
}

/// Greedy clustering of eigenvalues by absolute distance; repeated copies of
/// one eigenvalue collapse to a single cluster so uniqueness questions are
/// about values, not multiplicities.
fn cluster_eigenvalues(eigs: &[Complex64], tol: f64) -> Vec<Cluster> {
    let mut clusters: Vec<Cluster> = Vec::new();
    for &e in eigs {
        match clusters
            .iter_mut()
            .find(|c| (c.mean() - e).norm() <= tol)
        {
            Some(c) => {
                c.sum += e;
                c.count += 1;
                c.peak_modulus = c.peak_modulus.max(e.norm());
            }
            None => clusters.push(Cluster {
                sum: e,
                count: 1,
                peak_modulus: e.norm(),
            }),
        }
    }
    clusters
}

/// Canonical block form of a matrix that passes the gate: up to a unitary,
/// `A = mu (I_p + 0_q + C)` as a direct sum, with `C` invertible and
/// `||C - I/2|| <= 1/2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CanonicalForm {
    #[serde(with = "serde_c64")]
    pub mu: Complex64,
    pub p: usize,
    pub q: usize,
    pub c: Option<CMatrix>,
    pub u: CMatrix,
}

impl CanonicalForm {
    /// Dimension of the whole matrix.
    pub fn dim(&self) -> usize {
        self.p + self.q + self.c.as_ref().map_or(0, |c| c.rows())
    }

    /// `mu * U (I_p + 0_q + C) U*`.
    pub fn reassemble(&self) -> CMatrix {
        let n = self.dim();
        let (p, q) = (self.p, self.q);
        let core = CMatrix::from_fn(n, n, |i, j| {
            if i < p + q || j < p + q {
                if i == j && i < p {
                    self.mu
                } else {
                    Complex64::ZERO
                }
            } else {
                self.mu * self.c.as_ref().unwrap().at(i - p - q, j - p - q)
            }
        });
        self.u.mul(&core).mul(&self.u.adjoint())
    }
}

/// Compute the canonical decomposition of a satisfying matrix. Errors when
/// the gate fails, when the reordered triangular form does not split into the
/// promised blocks, or when the extracted block violates its invariants.
pub fn decompose(a: &CMatrix, tols: &Tolerances) -> Result<CanonicalForm> {
    let n = a.require_square()?;
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let verdict = check(a, tols)?;
    if !verdict.satisfied {
        return Err(Error::GateNotSatisfied(verdict.diagnostics.join("; ")));
    }
    let mu = verdict.mu.expect("satisfied verdict always carries mu");
    let norm_a = op_norm(a)?;

    let s = schur(a)?;
    let mut t = s.t;
    let mut u = s.u;

    // Classify diagonal entries of T/mu as 1, 0, or generic, then bubble the
    // classes into [ones, zeros, generic] order with unitary adjacent swaps.
    let delta = tols.cluster_coeff * (1.0 + norm_a) / mu.norm();
    let class_of = |z: Complex64| -> u8 {
        if (z - Complex64::ONE).norm() <= delta {
            0
        } else if z.norm() <= delta {
            1
        } else {
            2
        }
    };
    let mut labels: Vec<u8> = (0..n).map(|i| class_of(t.at(i, i) / mu)).collect();
    loop {
        let mut swapped = false;
        for k in 0..n - 1 {
            if labels[k] > labels[k + 1] {
                swap_schur_diag(&mut t, &mut u, k);
                labels.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }
    let p = labels.iter().filter(|&&l| l == 0).count();
    let q = labels.iter().filter(|&&l| l == 1).count();

    // A peak-modulus diagonal entry forces its row to vanish, and a zero
    // diagonal entry its column; together the first p+q rows must be zero
    // right of the diagonal.
    let threshold = tols.split_coeff * (1.0 + norm_a);
    let mut offender = 0.0f64;
    for i in 0..p + q {
        for j in i + 1..n {
            offender = offender.max(t.at(i, j).norm());
        }
    }
    if offender > threshold {
        return Err(Error::SplitVerification {
            offender,
            threshold,
        });
    }

    let c = if p + q < n {
        Some(t.sub_block(p + q, n, p + q, n).scale(1.0 / mu))
    } else {
        None
    };
    if let Some(cm) = &c {
        let m = cm.rows();
        let shifted = CMatrix::from_fn(m, m, |i, j| {
            cm.at(i, j) - if i == j { Complex64::new(0.5, 0.0) } else { Complex64::ZERO }
        });
        let cnorm = op_norm(&shifted)?;
        if cnorm > 0.5 + tols.gate_slack {
            return Err(Error::GateNotSatisfied(format!(
                "extracted block has ||C - I/2|| = {cnorm:.12}, beyond 1/2"
            )));
        }
        let cinv = inverse(cm)?;
        let lmin = lambda_min_hermitian(&cinv.hermitian_part())?;
        if lmin < 1.0 - tols.boundary_band {
            return Err(Error::GateNotSatisfied(format!(
                "extracted block has lambda_min(Re(C^-1)) = {lmin:.12}, below 1"
            )));
        }
    }

    let form = CanonicalForm { mu, p, q, c, u };
    let residual = op_norm(&form.reassemble().sub(a))?;
    let rethresh = tols.reassembly_coeff * (1.0 + norm_a);
    if residual > rethresh {
        return Err(Error::Reassembly {
            residual,
            threshold: rethresh,
        });
    }
    Ok(form)
}

/// The two equivalent half-disk predicates for an invertible block `C`:
/// `||C - I/2|| <= 1/2` and `lambda_min(Re(C^-1)) >= 1`, evaluated
/// independently with no slack, plus agreement bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct HalfdiskReport {
    pub norm_holds: bool,
    pub eig_holds: bool,
    pub norm_value: f64,
    pub min_real_eig: f64,
    /// Either quantity is within the agreement band of its threshold, so the
    /// booleans may legitimately differ.
    pub borderline: bool,
    pub agree: bool,
}

pub fn halfdisk_equiv(c: &CMatrix, tols: &Tolerances) -> Result<HalfdiskReport> {
    let m = c.require_square()?;
    let shifted = CMatrix::from_fn(m, m, |i, j| {
        c.at(i, j) - if i == j { Complex64::new(0.5, 0.0) } else { Complex64::ZERO }
    });
    let norm_value = op_norm(&shifted)?;
    let cinv = inverse(c)?;
    let min_real_eig = lambda_min_hermitian(&cinv.hermitian_part())?;
    let norm_holds = norm_value <= 0.5;
    let eig_holds = min_real_eig >= 1.0;
    let borderline = (norm_value - 0.5).abs() <= tols.equiv_band
        || (min_real_eig - 1.0).abs() <= tols.equiv_band;
    Ok(HalfdiskReport {
        norm_holds,
        eig_holds,
        norm_value,
        min_real_eig,
        borderline,
        agree: norm_holds == eig_holds,
    })
}
