use serde::{Deserialize, Serialize};

/// Central record of every tolerance and grid parameter used by the
/// decision-level operations. `Default` holds the values the test suite is
/// calibrated against; the CLI can override fields from a JSON file.
///
/// The low-level eigenvalue kernels read their convergence thresholds from
/// `Tolerances::default()` rather than from a caller-supplied record, so the
/// numbers below remain the single source of truth while kernel results stay
/// independent of per-run overrides.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Jacobi sweep stops when off-diagonal Frobenius mass falls below
    /// `jacobi_off_coeff * ||H||_F`.
    pub jacobi_off_coeff: f64,
    /// Hard cap on Jacobi sweeps before reporting non-convergence.
    pub jacobi_max_sweeps: usize,
    /// A subdiagonal entry deflates when below
    /// `schur_deflation_coeff * (|t_kk| + |t_k+1,k+1|)`.
    pub schur_deflation_coeff: f64,
    /// QR iteration budget is `schur_iter_factor * n` shift steps.
    pub schur_iter_factor: usize,
    /// Number of support-function angles on the initial numerical-radius grid.
    pub radius_angles: usize,
    /// Golden-section refinement runs until the angular bracket is this wide.
    pub radius_refine_width: f64,
    /// Default membership tolerance for numerical-range queries.
    pub in_range_tol: f64,
    /// Eigenvalues of `A` cluster together within
    /// `cluster_coeff * (1 + ||A||)`.
    pub cluster_coeff: f64,
    /// Slack allowed on the contraction test `||A/mu - I/2|| <= 1/2`.
    pub gate_slack: f64,
    /// `|norm - 1/2|` below this width flags a borderline verdict.
    pub boundary_band: f64,
    /// Off-diagonal blocks of the reordered triangular form must vanish to
    /// `split_coeff * (1 + ||A||)`.
    pub split_coeff: f64,
    /// Reassembling a canonical decomposition must reproduce `A` to
    /// `reassembly_coeff * (1 + ||A||)`.
    pub reassembly_coeff: f64,
    /// Agreement band for the two invertible-factor predicates; disagreement
    /// outside it is an error.
    pub equiv_band: f64,
    /// A rank-one ratio above `1 + violation_excess` counts as a violation.
    pub violation_excess: f64,
    /// A serialized witness must reproduce its ratio to this accuracy.
    pub witness_recheck: f64,
    /// Normality check: `||A*A - AA*|| <= normality_coeff * ||A||^2`.
    pub normality_coeff: f64,
    /// Relative test for eigenvalue collinearity in scaled-PSD detection.
    pub collinear_tol: f64,
    /// Scale-grid resolution for product-spectrum containment checks.
    pub containment_grid: usize,
    /// Relative floor for the logarithmic part of the containment grid.
    pub containment_floor: f64,
    /// Margin at or below this certifies containment of a product eigenvalue.
    pub containment_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            jacobi_off_coeff: 1e-13,
            jacobi_max_sweeps: 30,
            schur_deflation_coeff: 1e-13,
            schur_iter_factor: 40,
            radius_angles: 720,
            radius_refine_width: 1e-12,
            in_range_tol: 1e-8,
            cluster_coeff: 1e-7,
            gate_slack: 1e-8,
            boundary_band: 1e-6,
            split_coeff: 1e-6,
            reassembly_coeff: 1e-8,
            equiv_band: 2e-6,
            violation_excess: 1e-6,
            witness_recheck: 1e-8,
            normality_coeff: 1e-10,
            collinear_tol: 1e-8,
            containment_grid: 2000,
            containment_floor: 1e-12,
            containment_tol: 1e-8,
        }
    }
}
