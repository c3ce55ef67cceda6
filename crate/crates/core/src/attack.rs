use crate::error::{Error, Result};
use crate::linalg::{herm_eig, op_norm, schur, spectral_radius, swap_schur_diag};
use crate::matrix::{
    inner, normalized, outer, require_unit, serde_c64_vec_opt, vnorm, CMatrix,
};
use crate::random::{ginibre_with, mix_seed, rng_from_seed, unit_vector_with};
use crate::range::{numerical_radius, r_rank_one};
use crate::tol::Tolerances;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Search effort: `restarts` independent starting points, each refined for at
/// most `iters` improvement steps (gradient steps for the rank-one search,
/// coordinate passes for the general search).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Budget {
    pub restarts: usize,
    pub iters: usize,
}

impl Budget {
    /// Default effort for the rank-one search; cheap per step.
    pub fn for_rank_one() -> Self {
        Budget {
            restarts: 50,
            iters: 500,
        }
    }

    /// Default effort for the dense search; each step costs a numerical
    /// radius, so the defaults are small.
    pub fn for_general() -> Self {
        Budget {
            restarts: 4,
            iters: 4,
        }
    }

    /// Multiply both knobs by `factor`, keeping each at least 1.
    pub fn scaled(&self, factor: f64) -> Self {
        let stretch = |v: usize| ((v as f64 * factor).round().max(1.0)) as usize;
        Budget {
            restarts: stretch(self.restarts),
            iters: stretch(self.iters),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    RankOne,
    General,
    Probe,
}

/// A concrete counterexample candidate `B` with its achieved ratio
/// `rho(AB) / (r(A) r(B))`. Rank-one and probe witnesses carry the pair
/// `(x, y)` with `B = x (x) y`; the matrix is stored redundantly so a
/// serialized witness can be re-verified without trusting the vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub ratio: f64,
    #[serde(with = "serde_c64_vec_opt", skip_serializing_if = "Option::is_none", default)]
    pub x: Option<Vec<Complex64>>,
    #[serde(with = "serde_c64_vec_opt", skip_serializing_if = "Option::is_none", default)]
    pub y: Option<Vec<Complex64>>,
    pub b: CMatrix,
    pub seed: u64,
    pub restarts: usize,
    pub iterations: usize,
}

/// Ratio `rho(A x(x)y) / (r(A) r(x(x)y))` via the closed forms
/// `rho = |<Ax, y>|` and `r = (||x|| ||y|| + |<x, y>|)/2`.
pub fn rank_one_ratio(a: &CMatrix, x: &[Complex64], y: &[Complex64]) -> Result<f64> {
    let n = a.require_square()?;
    if x.len() != n || y.len() != n {
        return Err(Error::DimMismatch(format!(
            "rank-one pair must have length {n}, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let r_a = numerical_radius(a)?;
    if r_a <= 1e-13 * (1.0 + a.max_abs()) {
        return Err(Error::ZeroMatrix);
    }
    Ok(inner(&a.matvec(x), y).norm() / (r_a * r_rank_one(x, y)?))
}

/// First-order violation certificate for the decoupled probe family. Given
/// the rescaled complement block `T` (dominant direction removed, reducing),
/// unit vectors `x`, `y` in the block and mixing weight `t` in (0, 1), this is
/// the slack of the product bound at the probe pair; a negative value
/// certifies a rank-one violation. Its derivative at `t = 0` is
/// `1/2 - ||T - I/2||` evaluated at the top singular pair, so any norm excess
/// drives the slack negative for small `t`.
pub fn probe_slack(t_mat: &CMatrix, x: &[Complex64], y: &[Complex64], t: f64) -> Result<f64> {
    let m = t_mat.require_square()?;
    if x.len() != m || y.len() != m {
        return Err(Error::DimMismatch(format!(
            "probe vectors must have length {m}, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    require_unit(x, 1e-8)?;
    require_unit(y, 1e-8)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "probe weight t must lie strictly inside (0, 1), got {t}"
        )));
    }
    let h = inner(x, y);
    let s = inner(&t_mat.matvec(x), y);
    let base = Complex64::new(1.0 - t, 0.0);
    Ok(0.5 * (1.0 + (base + h * t).norm()) - (base + s * t).norm())
}

/// Schur-based probe ingredients: the unitary with a dominant eigenvector
/// first, the rescaled complement block, and the top singular pair of that
/// block shifted by `I/2`.
pub(crate) struct ProbeParts {
    pub(crate) u: CMatrix,
    pub(crate) t_hat: CMatrix,
    pub(crate) v: Vec<Complex64>,
    pub(crate) w: Vec<Complex64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) sigma: f64,
}

/// `None` when the matrix is too small or has no usable dominant eigenvalue.
pub(crate) fn probe_parts(a: &CMatrix) -> Result<Option<ProbeParts>> {
    let n = a.require_square()?;
    if n < 2 {
        return Ok(None);
    }
    let s = schur(a)?;
    let mut t = s.t;
    let mut u = s.u;
    let k = (0..n)
        .max_by(|&i, &j| t.at(i, i).norm().total_cmp(&t.at(j, j).norm()))
        .unwrap();
    for j in (1..=k).rev() {
        swap_schur_diag(&mut t, &mut u, j - 1);
    }
    let mu = t.at(0, 0);
    if mu.norm() <= 1e-13 * (1.0 + a.max_abs()) {
        return Ok(None);
    }
    let t_hat = t.sub_block(1, n, 1, n).scale(1.0 / mu);
    let m = n - 1;
    let shifted = CMatrix::from_fn(m, m, |i, j| {
        t_hat.at(i, j) - if i == j { Complex64::new(0.5, 0.0) } else { Complex64::ZERO }
    });
    let (v, w, sigma) = if shifted.fro_norm() <= 1e-14 * (1.0 + t_hat.fro_norm()) {
        let mut e = vec![Complex64::ZERO; m];
        e[0] = Complex64::ONE;
        (e.clone(), e, 0.0)
    } else {
        let gram = herm_eig(&shifted.adjoint().mul(&shifted))?;
        let v = gram.eigenvector(m - 1);
        let sigma = gram.values[m - 1].max(0.0).sqrt();
        let mv = shifted.matvec(&v);
        let w = if vnorm(&mv) > 1e-14 {
            normalized(&mv)?
        } else {
            v.clone()
        };
        (v, w, sigma)
    };
    Ok(Some(ProbeParts { u, t_hat, v, w, sigma }))
}

/// Deterministic probe-family witness: mix a dominant eigenvector with the
/// top singular direction of the shifted complement block, scanning the
/// mixing weight and reporting the honestly evaluated best ratio.
pub fn probe_witness(a: &CMatrix, seed: u64) -> Result<Witness> {
    let parts = probe_parts(a)?.ok_or_else(|| {
        Error::InvalidArgument(
            "probe construction needs dimension >= 2 and a nonzero dominant eigenvalue".into(),
        )
    })?;
    let r_a = numerical_radius(a)?;
    if r_a <= 1e-13 * (1.0 + a.max_abs()) {
        return Err(Error::ZeroMatrix);
    }
    let grid = 40;
    let mut best: Option<(f64, Vec<Complex64>, Vec<Complex64>)> = None;
    for g in 0..grid {
        let t = 1e-3 * (0.99f64 / 1e-3).powf(g as f64 / (grid - 1) as f64);
        let (x, y) = probe_pair(&parts, t);
        let f = unit_pair_ratio(a, r_a, &x, &y);
        if best.as_ref().is_none_or(|b| f > b.0) {
            best = Some((f, x, y));
        }
    }
    let (ratio, x, y) = best.unwrap();
    Ok(Witness {
        kind: WitnessKind::Probe,
        ratio,
        b: outer(&x, &y),
        x: Some(x),
        y: Some(y),
        seed,
        restarts: 1,
        iterations: grid,
    })
}

/// Embed block-space directions into the full space through the Schur basis.
fn probe_pair(parts: &ProbeParts, t: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let head = (1.0 - t).sqrt();
    let tail = t.sqrt();
    let lift = |block: &[Complex64]| {
        let mut v = Vec::with_capacity(block.len() + 1);
        v.push(Complex64::new(head, 0.0));
        v.extend(block.iter().map(|z| z * tail));
        parts.u.matvec(&v)
    };
    (lift(&parts.v), lift(&parts.w))
}

/// Objective for unit vectors: `2 |<Ax, y>| / (r(A) (1 + |<x, y>|))`.
fn unit_pair_ratio(a: &CMatrix, r_a: f64, x: &[Complex64], y: &[Complex64]) -> f64 {
    let s = inner(&a.matvec(x), y);
    let h = inner(x, y);
    2.0 * s.norm() / (r_a * (1.0 + h.norm()))
}

/// Ascent directions (conjugate-coordinate derivatives) of the objective at a
/// unit pair. `adj_y` must be `A* y` and `ax` must be `A x`.
fn gradients(
    r_a: f64,
    x: &[Complex64],
    y: &[Complex64],
    ax: &[Complex64],
    adj_y: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let s = inner(ax, y);
    let h = inner(x, y);
    let d = 1.0 + h.norm();
    let ps = if s.norm() > 0.0 { s / s.norm() } else { Complex64::ONE };
    let ph = if h.norm() > 0.0 { h / h.norm() } else { Complex64::ZERO };
    let lead = 1.0 / (r_a * d);
    let pull = s.norm() / (r_a * d * d);
    let gx: Vec<Complex64> = (0..x.len())
        .map(|i| ps * adj_y[i] * lead - (x[i] + ph * y[i]) * pull)
        .collect();
    let gy: Vec<Complex64> = (0..y.len())
        .map(|i| ps.conj() * ax[i] * lead - (y[i] + ph.conj() * x[i]) * pull)
        .collect();
    (gx, gy)
}

/// Remove the component along `base` (complex span), then the raw vector.
fn tangent(g: &[Complex64], base: &[Complex64]) -> Vec<Complex64> {
    let along = inner(g, base);
    g.iter().zip(base).map(|(gi, bi)| gi - bi * along).collect()
}

fn step(v: &[Complex64], dir: &[Complex64], eta: f64) -> Result<Vec<Complex64>> {
    normalized(
        &v.iter()
            .zip(dir)
            .map(|(vi, di)| vi + di * eta)
            .collect::<Vec<_>>(),
    )
}

/// Maximize `rho(A x(x)y) / (r(A) r(x(x)y))` over unit pairs by projected
/// gradient ascent with multiplicative step control.
fn climb(a: &CMatrix, r_a: f64, x: &mut Vec<Complex64>, y: &mut Vec<Complex64>, iters: usize) {
    let adj = a.adjoint();
    let mut f = unit_pair_ratio(a, r_a, x, y);
    let mut eta = 0.25;
    for _ in 0..iters {
        let ax = a.matvec(x);
        let ay = adj.matvec(y);
        let (gx, gy) = gradients(r_a, x, y, &ax, &ay);
        let dx = tangent(&gx, x);
        let dy = tangent(&gy, y);
        if vnorm(&dx) + vnorm(&dy) <= 1e-15 * (1.0 + f) {
            break;
        }
        let (cx, cy) = match (step(x, &dx, eta), step(y, &dy, eta)) {
            (Ok(cx), Ok(cy)) => (cx, cy),
            _ => break,
        };
        let fc = unit_pair_ratio(a, r_a, &cx, &cy);
        if fc > f {
            *x = cx;
            *y = cy;
            f = fc;
            eta *= 1.4;
        } else {
            eta *= 0.5;
        }
        if eta < 1e-13 {
            break;
        }
    }
}

/// Hunt for a rank-one violator by multistart projected gradient ascent.
/// Start 0 uses the probe family, start 1 the top singular pair of `A`, and
/// the rest are random unit pairs drawn deterministically from `seed`.
pub fn attack_rank_one(a: &CMatrix, budget: &Budget, seed: u64) -> Result<Witness> {
    let n = a.require_square()?;
    let r_a = numerical_radius(a)?;
    if r_a <= 1e-13 * (1.0 + a.max_abs()) {
        return Err(Error::ZeroMatrix);
    }
    let restarts = budget.restarts.max(1);
    let parts = probe_parts(a)?;
    let mut best: Option<(f64, Vec<Complex64>, Vec<Complex64>)> = None;
    for restart in 0..restarts {
        let mut pair = None;
        if restart == 0 {
            if let Some(parts) = &parts {
                pair = Some(best_probe_pair(a, r_a, parts));
            }
        } else if restart == 1 {
            pair = singular_pair(a);
        }
        let (mut x, mut y) = pair.unwrap_or_else(|| {
            let mut rng = rng_from_seed(mix_seed(seed, restart as u64));
            (unit_vector_with(n, &mut rng), unit_vector_with(n, &mut rng))
        });
        climb(a, r_a, &mut x, &mut y, budget.iters);
        let f = unit_pair_ratio(a, r_a, &x, &y);
        if best.as_ref().is_none_or(|b| f > b.0) {
            best = Some((f, x, y));
        }
    }
    let (ratio, x, y) = best.unwrap();
    Ok(Witness {
        kind: WitnessKind::RankOne,
        ratio,
        b: outer(&x, &y),
        x: Some(x),
        y: Some(y),
        seed,
        restarts,
        iterations: budget.iters,
    })
}

fn best_probe_pair(a: &CMatrix, r_a: f64, parts: &ProbeParts) -> (Vec<Complex64>, Vec<Complex64>) {
    let grid = 20;
    let mut best: Option<(f64, Vec<Complex64>, Vec<Complex64>)> = None;
    for g in 0..grid {
        let t = 1e-3 * (0.1f64 / 1e-3).powf(g as f64 / (grid - 1) as f64);
        let (x, y) = probe_pair(parts, t);
        let f = unit_pair_ratio(a, r_a, &x, &y);
        if best.as_ref().is_none_or(|b| f > b.0) {
            best = Some((f, x, y));
        }
    }
    let (_, x, y) = best.unwrap();
    (x, y)
}

/// Top singular pair of `A` itself: `x` the top eigenvector of `A* A`,
/// `y` the normalized image `A x`.
fn singular_pair(a: &CMatrix) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    let n = a.rows();
    let gram = herm_eig(&a.adjoint().mul(a)).ok()?;
    let x = gram.eigenvector(n - 1);
    let ax = a.matvec(&x);
    let y = normalized(&ax).ok()?;
    Some((x, y))
}

/// Hunt for a violator over dense `B` by coordinate search on matrix entries,
/// normalizing to unit operator norm (the objective is scale-invariant).
/// Start 0 is the identity, start 1 the rank-one witness found with a reduced
/// budget, and the rest random dense matrices.
pub fn attack_general(a: &CMatrix, budget: &Budget, seed: u64) -> Result<Witness> {
    let n = a.require_square()?;
    let r_a = numerical_radius(a)?;
    if r_a <= 1e-13 * (1.0 + a.max_abs()) {
        return Err(Error::ZeroMatrix);
    }
    let starts = budget.restarts.max(1);
    let passes = budget.iters.max(1);
    let eval = |b: &CMatrix| -> Result<f64> {
        let rb = numerical_radius(b)?;
        if rb <= 1e-13 * (1.0 + b.max_abs()) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(spectral_radius(&a.mul(b))? / (r_a * rb))
    };
    let mut best: Option<(f64, CMatrix)> = None;
    for start in 0..starts {
        let mut b = match start {
            0 => CMatrix::identity(n),
            1 => {
                let reduced = Budget {
                    restarts: 8,
                    iters: 150,
                };
                attack_rank_one(a, &reduced, mix_seed(seed, 777))?.b
            }
            _ => {
                let mut rng = rng_from_seed(mix_seed(seed, 1000 + start as u64));
                ginibre_with(n, &mut rng)
            }
        };
        let scale = op_norm(&b)?;
        if scale > 0.0 {
            b = b.scale(Complex64::new(1.0 / scale, 0.0));
        }
        let mut fb = eval(&b)?;
        let mut delta = 0.25;
        for _ in 0..passes {
            let mut improved = false;
            for i in 0..n {
                for j in 0..n {
                    for dir in [
                        Complex64::new(delta, 0.0),
                        Complex64::new(-delta, 0.0),
                        Complex64::new(0.0, delta),
                        Complex64::new(0.0, -delta),
                    ] {
                        let mut cand = b.clone();
                        cand.set(i, j, cand.at(i, j) + dir);
                        let fc = eval(&cand)?;
                        if fc > fb {
                            b = cand;
                            fb = fc;
                            improved = true;
                        }
                    }
                }
            }
            if improved {
                let scale = op_norm(&b)?;
                b = b.scale(Complex64::new(1.0 / scale, 0.0));
            } else {
                delta *= 0.5;
            }
            if delta < 1e-4 {
                break;
            }
        }
        if best.as_ref().is_none_or(|prev| fb > prev.0) {
            best = Some((fb, b));
        }
    }
    let (ratio, b) = best.unwrap();
    Ok(Witness {
        kind: WitnessKind::General,
        ratio,
        x: None,
        y: None,
        b,
        seed,
        restarts: starts,
        iterations: passes,
    })
}

/// Recompute a witness ratio from its serialized content alone. Rank-one and
/// probe witnesses must carry vectors consistent with the stored matrix; the
/// dense kind is re-evaluated with the full spectral machinery.
pub fn verify_witness(a: &CMatrix, w: &Witness, tols: &Tolerances) -> Result<f64> {
    let n = a.require_square()?;
    if w.b.rows() != n || w.b.cols() != n {
        return Err(Error::DimMismatch(format!(
            "witness matrix is {}x{}, expected {n}x{n}",
            w.b.rows(),
            w.b.cols()
        )));
    }
    match w.kind {
        WitnessKind::RankOne | WitnessKind::Probe => {
            let missing =
                || Error::InvalidArgument("rank-one witness must carry its vector pair".into());
            let x = w.x.as_ref().ok_or_else(missing)?;
            let y = w.y.as_ref().ok_or_else(missing)?;
            let drift = outer(x, y).max_abs_diff(&w.b);
            if drift > tols.witness_recheck * (1.0 + w.b.max_abs()) {
                return Err(Error::InvalidArgument(format!(
                    "stored matrix differs from the vector product by {drift:.3e}"
                )));
            }
            rank_one_ratio(a, x, y)
        }
        WitnessKind::General => {
            let r_a = numerical_radius(a)?;
            if r_a <= 1e-13 * (1.0 + a.max_abs()) {
                return Err(Error::ZeroMatrix);
            }
            let rb = numerical_radius(&w.b)?;
            if rb <= 1e-13 * (1.0 + w.b.max_abs()) {
                return Err(Error::ZeroMatrix);
            }
            Ok(spectral_radius(&a.mul(&w.b))? / (r_a * rb))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_satisfying, gen_violating, ViolationKind};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // ---- probe slack ----

    #[test]
    fn probe_slack_hand_values() {
        // T = [3/2]: slack(t) = -t/2 exactly.
        let t_mat = CMatrix::from_real(1, 1, &[1.5]);
        let e = vec![Complex64::ONE];
        for t in [0.02, 0.1, 0.4] {
            let s = probe_slack(&t_mat, &e, &e, t).unwrap();
            assert!((s + t / 2.0).abs() < 1e-14, "t={t}: {s}");
        }

        // T = I: the slack vanishes on aligned pairs.
        let id = CMatrix::identity(2);
        let e1 = vec![Complex64::ONE, Complex64::ZERO];
        assert!(probe_slack(&id, &e1, &e1, 0.3).unwrap().abs() < 1e-14);

        // T = [1/2]: strictly inside, slack is +t/2.
        let half = CMatrix::from_real(1, 1, &[0.5]);
        let s = probe_slack(&half, &e, &e, 0.2).unwrap();
        assert!((s - 0.1).abs() < 1e-14);
    }

    #[test]
    fn probe_slack_rejects_bad_input() {
        let t_mat = CMatrix::identity(2);
        let e1 = vec![Complex64::ONE, Complex64::ZERO];
        let long = vec![Complex64::ONE; 3];
        let fat = vec![c(2.0, 0.0), Complex64::ZERO];
        assert!(matches!(
            probe_slack(&t_mat, &e1, &e1, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            probe_slack(&t_mat, &e1, &e1, 1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            probe_slack(&t_mat, &fat, &e1, 0.5),
            Err(Error::NotUnit { .. })
        ));
        assert!(matches!(
            probe_slack(&t_mat, &long, &long, 0.5),
            Err(Error::DimMismatch(_))
        ));
    }

    #[test]
    fn probe_slack_goes_negative_on_norm_excess_instances() {
        // For block-built norm-excess instances the complement block is
        // reducing, the shifted norm is (1 + margin)/2, and the slack obeys
        // slack(t) ~ -margin t / 2 for small t.
        let margin = 0.3;
        for seed in [3u64, 11, 29] {
            let a = gen_violating(4, seed, ViolationKind::NormExcess, margin);
            let parts = probe_parts(&a).unwrap().unwrap();
            assert!(
                (parts.sigma - (1.0 + margin) / 2.0).abs() < 1e-9,
                "sigma = {}",
                parts.sigma
            );
            let t = 0.01;
            let s = probe_slack(&parts.t_hat, &parts.v, &parts.w, t).unwrap();
            assert!(s < 0.0, "seed {seed}: slack {s}");
            assert!(s > -margin * t, "seed {seed}: slack {s} below linear model");
        }
    }

    // ---- closed-form ratios ----

    #[test]
    fn rank_one_ratio_hand_values() {
        // A = diag(1, -1): x = (1,1)/sqrt2, y = (1,-1)/sqrt2 gives ratio 2.
        let a = CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = vec![c(s, 0.0), c(s, 0.0)];
        let y = vec![c(s, 0.0), c(-s, 0.0)];
        assert!((rank_one_ratio(&a, &x, &y).unwrap() - 2.0).abs() < 1e-9);

        // A = [[0,1],[0,0]]: x = e2, y = e1 gives the extreme ratio 4.
        let nil = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e1 = vec![Complex64::ONE, Complex64::ZERO];
        let e2 = vec![Complex64::ZERO, Complex64::ONE];
        assert!((rank_one_ratio(&nil, &e2, &e1).unwrap() - 4.0).abs() < 1e-9);

        // Scale invariance in both vectors.
        let xs: Vec<_> = x.iter().map(|z| z * c(3.0, 1.0)).collect();
        assert!(
            (rank_one_ratio(&a, &xs, &y).unwrap() - rank_one_ratio(&a, &x, &y).unwrap()).abs()
                < 1e-12
        );
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_from_seed(515);
        for case in 0..5 {
            let a = ginibre_with(3, &mut rng);
            let r_a = numerical_radius(&a).unwrap();
            let x = unit_vector_with(3, &mut rng);
            let y = unit_vector_with(3, &mut rng);
            let ax = a.matvec(&x);
            let ay = a.adjoint().matvec(&y);
            let (gx, gy) = gradients(r_a, &x, &y, &ax, &ay);

            // The objective extends scale-invariantly to non-unit vectors, so
            // raw steps (no renormalization) probe the same function.
            let raw = |xx: &[Complex64], yy: &[Complex64]| {
                rank_one_ratio(&a, xx, yy).unwrap()
            };
            let eps = 1e-6;
            let shift = |v: &[Complex64], d: &[Complex64], e: f64| -> Vec<Complex64> {
                v.iter().zip(d).map(|(vi, di)| vi + di * e).collect()
            };

            let dirs = [gx.clone(), unit_vector_with(3, &mut rng)];
            for d in &dirs {
                let num =
                    (raw(&shift(&x, d, eps), &y) - raw(&shift(&x, d, -eps), &y)) / (2.0 * eps);
                let pred = 2.0 * inner(d, &gx).re;
                assert!(
                    (num - pred).abs() < 1e-4 * (1.0 + pred.abs()),
                    "case {case}: x-deriv {num} vs {pred}"
                );
            }
            let dirs = [gy.clone(), unit_vector_with(3, &mut rng)];
            for d in &dirs {
                let num =
                    (raw(&x, &shift(&y, d, eps)) - raw(&x, &shift(&y, d, -eps))) / (2.0 * eps);
                let pred = 2.0 * inner(d, &gy).re;
                assert!(
                    (num - pred).abs() < 1e-4 * (1.0 + pred.abs()),
                    "case {case}: y-deriv {num} vs {pred}"
                );
            }
        }
    }

    // ---- rank-one search ----

    #[test]
    fn search_finds_known_global_optima() {
        let budget = Budget {
            restarts: 20,
            iters: 300,
        };
        let a = CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let w = attack_rank_one(&a, &budget, 7).unwrap();
        assert!(w.ratio > 2.0 - 1e-4 && w.ratio < 2.0 + 1e-9, "{}", w.ratio);

        let nil = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let w = attack_rank_one(&nil, &budget, 7).unwrap();
        assert!(w.ratio > 4.0 - 1e-4 && w.ratio < 4.0 + 1e-9, "{}", w.ratio);
    }

    #[test]
    fn satisfying_instances_never_beat_one() {
        let budget = Budget {
            restarts: 30,
            iters: 300,
        };
        let fixture = CMatrix::from_real(3, 3, &[
            1.0, 0.0, 0.0,
            0.0, 0.5, 0.5,
            0.0, 0.0, 0.5,
        ]);
        let w = attack_rank_one(&fixture, &budget, 11).unwrap();
        assert!(w.ratio <= 1.0 + 1e-8, "fixture ratio {}", w.ratio);
        assert!(w.ratio > 0.9, "search should get near the boundary");

        for (dim, seed) in [(3usize, 41u64), (5, 42), (8, 43)] {
            let a = gen_satisfying(dim, seed);
            let w = attack_rank_one(&a, &budget, seed).unwrap();
            assert!(w.ratio <= 1.0 + 1e-8, "dim {dim} ratio {}", w.ratio);
        }
    }

    #[test]
    fn violating_instances_are_detected() {
        let budget = Budget::for_rank_one();
        let mut found = 0;
        let mut total = 0;
        for kind in [ViolationKind::TwoPeaks, ViolationKind::NormExcess] {
            for (dim, seed) in [(2usize, 5u64), (4, 6), (6, 7)] {
                total += 1;
                let a = gen_violating(dim, seed, kind, 0.2);
                let w = attack_rank_one(&a, &budget, seed).unwrap();
                if w.ratio > 1.0 + 1e-6 {
                    found += 1;
                    let again = verify_witness(&a, &w, &Tolerances::default()).unwrap();
                    assert!((again - w.ratio).abs() < 1e-8);
                }
            }
        }
        assert!(found >= total - 1, "found {found} of {total}");
    }

    #[test]
    fn probe_witness_beats_one_on_norm_excess() {
        let a = gen_violating(3, 19, ViolationKind::NormExcess, 0.3);
        let w = probe_witness(&a, 0).unwrap();
        assert_eq!(w.kind, WitnessKind::Probe);
        assert!(w.ratio > 1.0 + 1e-6, "{}", w.ratio);
        let again = verify_witness(&a, &w, &Tolerances::default()).unwrap();
        assert!((again - w.ratio).abs() < 1e-10);
    }

    // ---- dense search ----

    #[test]
    fn general_search_keeps_the_rank_one_head_start() {
        let a = CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let budget = Budget {
            restarts: 3,
            iters: 3,
        };
        let w = attack_general(&a, &budget, 3).unwrap();
        assert_eq!(w.kind, WitnessKind::General);
        assert!(w.x.is_none() && w.y.is_none());
        assert!(w.ratio > 1.9, "{}", w.ratio);
        let again = verify_witness(&a, &w, &Tolerances::default()).unwrap();
        assert!((again - w.ratio).abs() < 1e-8);
    }

    // ---- witnesses ----

    #[test]
    fn witness_roundtrips_through_json() {
        let a = CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let w = attack_rank_one(&a, &Budget { restarts: 10, iters: 200 }, 1).unwrap();
        let text = serde_json::to_string(&w).unwrap();
        assert!(text.contains("\"rank_one\""), "{text}");
        let back: Witness = serde_json::from_str(&text).unwrap();
        let ratio = verify_witness(&a, &back, &Tolerances::default()).unwrap();
        assert!((ratio - w.ratio).abs() < 1e-10);

        // Tampering with the stored matrix is caught.
        let mut bad = back.clone();
        bad.b = bad.b.scale(c(2.0, 0.0));
        assert!(matches!(
            verify_witness(&a, &bad, &Tolerances::default()),
            Err(Error::InvalidArgument(_))
        ));

        let general = attack_general(&a, &Budget { restarts: 2, iters: 2 }, 5).unwrap();
        let text = serde_json::to_string(&general).unwrap();
        assert!(text.contains("\"general\"") && !text.contains("\"x\""), "{text}");
        let back: Witness = serde_json::from_str(&text).unwrap();
        assert!(back.x.is_none());
    }

    #[test]
    fn budget_scaling_rounds_and_clamps() {
        let b = Budget::for_general().scaled(4.0);
        assert_eq!((b.restarts, b.iters), (16, 16));
        let tiny = Budget { restarts: 1, iters: 1 }.scaled(0.01);
        assert_eq!((tiny.restarts, tiny.iters), (1, 1));
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let z = CMatrix::zeros(2, 2);
        assert!(matches!(
            attack_rank_one(&z, &Budget::for_rank_one(), 0),
            Err(Error::ZeroMatrix)
        ));
        assert!(matches!(
            attack_general(&z, &Budget::for_general(), 0),
            Err(Error::ZeroMatrix)
        ));
    }
}
