//! Spectral bounds for operator products.
//!
//! The central question: for a fixed square complex matrix `A`, does
//! `rho(A B) <= r(A) r(B)` hold for every matrix `B`, where `rho` is the
//! spectral radius and `r` the numerical radius? The crate decides this with
//! a norm test on a rescaled copy of `A`, produces the canonical block
//! decomposition that explains a positive answer, hunts for violating `B`
//! when the answer is negative, and ships the numerical-range machinery the
//! analysis rests on.

pub mod attack;
pub mod error;
pub mod gate;
pub mod gen;
pub mod io;
pub mod linalg;
pub mod matrix;
pub mod random;
pub mod range;
pub mod sweep;
pub mod tol;

pub use attack::{
    attack_general, attack_rank_one, probe_slack, probe_witness, rank_one_ratio, verify_witness,
    Budget, Witness, WitnessKind,
};
pub use error::{Error, Result};
pub use gate::{check, check_normal, decompose, halfdisk_equiv, CanonicalForm, GateVerdict};
pub use gen::{gen_satisfying, gen_violating, ViolationKind};
pub use io::{load_matrix, save_json, DecompositionFile, MatrixFile, VerifyFile};
pub use linalg::{
    herm_eig, inverse, lambda_max_hermitian, lambda_min_hermitian, op_norm, schur,
    spectral_radius, HermEig, SchurForm,
};
pub use matrix::{inner, normalized, outer, vnorm, CMatrix};
pub use range::{
    in_range, numerical_radius, product_containment_check, r_rank_one, ContainmentReport,
    RangeSample,
};
pub use sweep::{run_sweep, SweepConfig, SweepMode, SweepReport, TrialRecord};
pub use tol::Tolerances;
