//! Low-rank matrix completion under nuclear-norm and L1 regularization.
//!
//! Minimizes  ‖P_Ω̄(S − M)‖²_F + λ₁‖M‖₊ + λ₂‖M‖₁  subject to M agreeing with
//! S on the certain entries Ω, M symmetric with entries in [0, 1]. The solver
//! is consensus ADMM with two auxiliary copies: Z₁ takes the nuclear proximal
//! step (singular-value thresholding), Z₂ the L1 proximal step (soft
//! thresholding), and the primal block has a closed-form elementwise update
//! followed by projection onto the constraint set (clip to [0, 1], pin Ω).
//! Every update preserves symmetry, so the iterates stay feasible throughout.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::matrix::Dense;
use crate::model::{JoinGraphMatrix, LatentMatrix, ObservedMask, ProbabilityMatrix};

/// Hyperparameters of the completion objective and its ADMM solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Nuclear-norm weight λ₁.
    pub lambda1: f64,
    /// Sparsity weight λ₂.
    pub lambda2: f64,
    /// Decision threshold θ applied to latent entries.
    pub theta: f64,
    pub admm_rho: f64,
    pub max_iters: usize,
    /// Stop once the relative Frobenius change of M falls below this and the
    /// consensus copies agree to the same order.
    pub rel_tol: f64,
    /// Solve on the core submatrix (all-zero rows and columns removed) and
    /// embed the result back, instead of recovering the full matrix.
    pub use_core_submatrix: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda1: 0.5,
            lambda2: 0.1,
            theta: 0.5,
            admm_rho: 1.0,
            max_iters: 500,
            rel_tol: 1e-6,
            use_core_submatrix: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::Range("regularization weights must be non-negative".into()));
        }
        if !(0.0 < self.theta && self.theta < 1.0) {
            return Err(Error::Range(format!("theta {} outside (0,1)", self.theta)));
        }
        if self.admm_rho <= 0.0 {
            return Err(Error::Range("admm_rho must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Range("max_iters must be positive".into()));
        }
        if self.rel_tol <= 0.0 {
            return Err(Error::Range("rel_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Index set of the rows/columns retained by the core-submatrix reduction,
/// mapping core position → full-matrix position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreIndex {
    pub indices: Vec<usize>,
}

impl CoreIndex {
    pub fn n_prime(&self) -> usize {
        self.indices.len()
    }
}

/// Diagnostics of one solve call.
#[derive(Debug, Clone, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    /// Singular values of the recovered matrix, descending.
    pub spectrum: Vec<f64>,
    pub wall_time_ms: f64,
    pub converged: bool,
    /// Core size when the core-submatrix reduction was applied.
    pub core_n: Option<usize>,
}

impl SolveStats {
    /// Numerical rank of the recovered matrix: σ > 1e-6 · σ_max.
    pub fn numerical_rank(&self) -> usize {
        let sigma_max = self.spectrum.first().copied().unwrap_or(0.0);
        self.spectrum.iter().filter(|&&s| s > 1e-6 * sigma_max).count()
    }
}

/// Elementwise sign(x) · max(|x| − tau, 0): the proximal operator of τ‖·‖₁.
pub fn soft_threshold(x: &Dense, tau: f64) -> Result<Dense, Error> {
    if tau < 0.0 {
        return Err(Error::Range(format!("soft_threshold tau {tau} is negative")));
    }
    let n = x.n();
    Ok(Dense::from_fn(n, |i, j| {
        let v = x.get(i, j);
        v.signum() * (v.abs() - tau).max(0.0)
    }))
}

/// Singular-value thresholding: shrinks every singular value by `tau`,
/// flooring at zero — the proximal operator of τ‖·‖₊.
///
/// The input must be symmetric, so the SVD is computed through the
/// eigendecomposition: for M = QΛQᵀ the singular values are |λ| and the
/// shrunk matrix is Q · sign(λ)·max(|λ|−τ, 0) · Qᵀ. The result is averaged
/// with its transpose to scrub accumulated rounding asymmetry.
pub fn svt_prox(x: &Dense, tau: f64) -> Result<Dense, Error> {
    if tau < 0.0 {
        return Err(Error::Range(format!("svt_prox tau {tau} is negative")));
    }
    let n = x.n();
    if n == 0 {
        return Ok(x.clone());
    }
    debug_assert!(x.is_symmetric(1e-9), "svt_prox requires a symmetric input");
    let eig = x.to_nalgebra().symmetric_eigen();
    let mut shrunk = eig.eigenvalues.clone();
    for v in shrunk.iter_mut() {
        *v = v.signum() * (v.abs() - tau).max(0.0);
    }
    let q = eig.eigenvectors;
    let r = &q * DMatrix::from_diagonal(&shrunk) * q.transpose();
    let mut out = Dense::zeros(n);
    for i in 0..n {
        out.set(i, i, r[(i, i)]);
        for j in (i + 1)..n {
            let v = 0.5 * (r[(i, j)] + r[(j, i)]);
            out.set_sym(i, j, v);
        }
    }
    Ok(out)
}

/// Singular values of a symmetric matrix, descending.
fn spectrum_of(m: &Dense) -> Vec<f64> {
    if m.n() == 0 {
        return Vec::new();
    }
    let eig = m.to_nalgebra().symmetric_eigen();
    let mut sigma: Vec<f64> = eig.eigenvalues.iter().map(|v| v.abs()).collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    sigma
}

/// The completion objective at `m`: data fit over Ω̄ plus both norms over the
/// full matrix (Ω entries are pinned, so they contribute constants).
pub fn objective_value(s: &ProbabilityMatrix, m: &Dense, lambda1: f64, lambda2: f64) -> f64 {
    let n = m.n();
    let mut fit = 0.0;
    let mut l1 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if !s.mask.is_observed(i, j) {
                let d = s.matrix.get(i, j) - v;
                fit += d * d;
            }
            l1 += v.abs();
        }
    }
    let nuclear: f64 = spectrum_of(m).iter().sum();
    fit + lambda1 * nuclear + lambda2 * l1
}

/// Removes every all-zero row/column of the masked probability matrix,
/// returning the core submatrix and the retained index set.
pub fn extract_core(s: &ProbabilityMatrix) -> (ProbabilityMatrix, CoreIndex) {
    let n = s.n();
    let indices: Vec<usize> =
        (0..n).filter(|&i| (0..n).any(|j| s.matrix.get(i, j) != 0.0)).collect();
    let np = indices.len();
    let mut matrix = Dense::zeros(np);
    let mut mask = ObservedMask::all_observed(np);
    for (ci, &fi) in indices.iter().enumerate() {
        for (cj, &fj) in indices.iter().enumerate() {
            matrix.set(ci, cj, s.matrix.get(fi, fj));
            if ci != cj && !s.mask.is_observed(fi, fj) {
                mask.unobserve(ci, cj);
            }
        }
    }
    (ProbabilityMatrix { matrix, mask }, CoreIndex { indices })
}

/// Places a core-submatrix solution back into the full n×n frame, zero
/// everywhere outside the retained rows and columns.
pub fn embed_core(core_m: &LatentMatrix, idx: &CoreIndex, n: usize) -> Result<LatentMatrix, Error> {
    if core_m.matrix.n() != idx.n_prime() {
        return Err(Error::Shape(format!(
            "core matrix is {}x{} but the index retains {} positions",
            core_m.matrix.n(),
            core_m.matrix.n(),
            idx.n_prime()
        )));
    }
    if idx.indices.iter().any(|&i| i >= n) {
        return Err(Error::Shape(format!("core index exceeds embedding size {n}")));
    }
    let mut full = Dense::zeros(n);
    for (ci, &fi) in idx.indices.iter().enumerate() {
        for (cj, &fj) in idx.indices.iter().enumerate() {
            full.set(fi, fj, core_m.matrix.get(ci, cj));
        }
    }
    Ok(LatentMatrix { matrix: full })
}

/// Solves the completion problem. Deterministic for fixed inputs and config;
/// non-convergence at `max_iters` is reported in the stats, not an error.
pub fn solve(s: &ProbabilityMatrix, cfg: &SolverConfig) -> Result<(LatentMatrix, SolveStats), Error> {
    cfg.validate()?;
    if cfg.use_core_submatrix {
        let (core, idx) = extract_core(s);
        let core_n = idx.n_prime();
        let (core_m, mut stats) = admm(&core, cfg)?;
        stats.core_n = Some(core_n);
        let full = embed_core(&core_m, &idx, s.n())?;
        return Ok((full, stats));
    }
    admm(s, cfg)
}

fn admm(s: &ProbabilityMatrix, cfg: &SolverConfig) -> Result<(LatentMatrix, SolveStats), Error> {
    let started = std::time::Instant::now();
    let n = s.n();
    if n == 0 {
        let stats = SolveStats {
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            objective: 0.0,
            spectrum: Vec::new(),
            wall_time_ms: 0.0,
            converged: true,
            core_n: None,
        };
        return Ok((LatentMatrix { matrix: Dense::zeros(0) }, stats));
    }

    let rho = cfg.admm_rho;
    let mut x = s.matrix.clone();
    let mut z1 = x.clone();
    let mut z2 = x.clone();
    let mut u1 = Dense::zeros(n);
    let mut u2 = Dense::zeros(n);

    let mut iterations = 0;
    let mut converged = false;
    let mut primal_residual = f64::INFINITY;
    let mut dual_residual = f64::INFINITY;

    for iter in 0..cfg.max_iters {
        iterations = iter + 1;
        let x_prev = x.clone();

        // Primal block: exact minimizer of the data-fit term plus the two
        // quadratic coupling terms, under the box and Ω-pin constraints.
        for i in 0..n {
            for j in 0..n {
                let v = if s.mask.is_observed(i, j) {
                    s.matrix.get(i, j)
                } else {
                    let pull = rho * (z1.get(i, j) - u1.get(i, j))
                        + rho * (z2.get(i, j) - u2.get(i, j));
                    ((2.0 * s.matrix.get(i, j) + pull) / (2.0 + 2.0 * rho)).clamp(0.0, 1.0)
                };
                x.set(i, j, v);
            }
        }

        let z1_prev = z1;
        let z2_prev = z2;
        z1 = svt_prox(&add(&x, &u1), cfg.lambda1 / rho)?;
        z2 = soft_threshold(&add(&x, &u2), cfg.lambda2 / rho)?;
        accumulate_residual(&mut u1, &x, &z1);
        accumulate_residual(&mut u2, &x, &z2);

        primal_residual = (x.frobenius_distance(&z1).powi(2)
            + x.frobenius_distance(&z2).powi(2))
        .sqrt();
        dual_residual = rho
            * (z1.frobenius_distance(&z1_prev).powi(2)
                + z2.frobenius_distance(&z2_prev).powi(2))
            .sqrt();

        let scale = x_prev.frobenius_norm().max(1.0);
        let rel_change = x.frobenius_distance(&x_prev) / scale;
        if rel_change <= cfg.rel_tol && primal_residual <= 10.0 * cfg.rel_tol * scale {
            converged = true;
            break;
        }
    }

    let stats = SolveStats {
        iterations,
        primal_residual,
        dual_residual,
        objective: objective_value(s, &x, cfg.lambda1, cfg.lambda2),
        spectrum: spectrum_of(&x),
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        converged,
        core_n: None,
    };
    Ok((LatentMatrix { matrix: x }, stats))
}

fn add(a: &Dense, b: &Dense) -> Dense {
    Dense::from_fn(a.n(), |i, j| a.get(i, j) + b.get(i, j))
}

/// u ← u + x − z (scaled dual ascent).
fn accumulate_residual(u: &mut Dense, x: &Dense, z: &Dense) {
    let n = u.n();
    for i in 0..n {
        for j in 0..n {
            u.set(i, j, u.get(i, j) + x.get(i, j) - z.get(i, j));
        }
    }
}

/// Applies the decision rule: certain entries pass through unchanged, latent
/// entries become 1 exactly when the recovered value reaches θ.
pub fn threshold_decisions(
    m: &LatentMatrix,
    mask: &ObservedMask,
    theta: f64,
) -> Result<JoinGraphMatrix, Error> {
    if !(0.0 < theta && theta < 1.0) {
        return Err(Error::Range(format!("theta {theta} outside (0,1)")));
    }
    let n = m.matrix.n();
    let mut out = Dense::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let v = m.matrix.get(i, j);
            let decided =
                if mask.is_observed(i, j) { v } else if v >= theta { 1.0 } else { 0.0 };
            out.set(i, j, decided);
        }
    }
    Ok(JoinGraphMatrix { matrix: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_symmetric(n: usize, seed: u64) -> Dense {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut m = Dense::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..1.0);
                m.set_sym(i, j, v);
            }
        }
        m
    }

    /// Star-pattern instance: column 0 joins columns 1..=spokes, a random
    /// share of positions observed, priors equal to the truth.
    fn star_instance(n: usize, spokes: usize, observed_share: f64, seed: u64) -> ProbabilityMatrix {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut matrix = Dense::zeros(n);
        for j in 1..=spokes {
            matrix.set_sym(0, j, 1.0);
        }
        let mut mask = ObservedMask::all_observed(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() >= observed_share {
                    mask.unobserve(i, j);
                }
            }
        }
        ProbabilityMatrix { matrix, mask }
    }

    #[test]
    fn soft_threshold_closed_form() {
        let x = Dense::from_rows(2, &[0.7, 0.1, -0.6, 0.0]).unwrap();
        let r = soft_threshold(&x, 0.2).unwrap();
        // Matches the closed form under IEEE evaluation.
        assert_eq!(r.get(0, 0), 0.7f64 - 0.2);
        assert!((r.get(0, 0) - 0.5).abs() < 1e-15);
        assert_eq!(r.get(0, 1), 0.0);
        assert_eq!(r.get(1, 0), -(0.6f64 - 0.2));
        assert_eq!(r.get(1, 1), 0.0);
        assert_eq!(soft_threshold(&x, 0.0).unwrap(), x);
        assert!(soft_threshold(&x, -0.1).is_err());
    }

    #[test]
    fn svt_on_diagonal_matrix_shrinks_the_diagonal() {
        let mut x = Dense::zeros(3);
        x.set(0, 0, 3.0);
        x.set(1, 1, 1.0);
        x.set(2, 2, 0.2);
        let r = svt_prox(&x, 0.5).unwrap();
        let got: Vec<f64> = (0..3).map(|i| r.get(i, i)).collect();
        let sorted = {
            let mut v = got.clone();
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            v
        };
        assert!((sorted[0] - 2.5).abs() < 1e-10);
        assert!((sorted[1] - 0.5).abs() < 1e-10);
        assert!(sorted[2].abs() < 1e-10);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(r.get(i, j).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn svt_with_zero_tau_reproduces_the_input() {
        let x = random_symmetric(6, 3);
        let r = svt_prox(&x, 0.0).unwrap();
        assert!(x.frobenius_distance(&r) < 1e-10);
    }

    #[test]
    fn svt_spectra_match_shrunk_input_spectra() {
        for seed in 0..10 {
            let x = random_symmetric(5, seed);
            let r = svt_prox(&x, 0.3).unwrap();
            let input_sigma = spectrum_of(&x);
            let output_sigma = spectrum_of(&r);
            for (si, so) in input_sigma.iter().zip(&output_sigma) {
                assert!(
                    (so - (si - 0.3).max(0.0)).abs() < 1e-8,
                    "seed {seed}: sigma {si} -> {so}"
                );
            }
        }
    }

    #[test]
    fn zero_regularization_reproduces_the_priors() {
        let s = star_instance(8, 3, 0.4, 11);
        let cfg = SolverConfig {
            lambda1: 0.0,
            lambda2: 0.0,
            max_iters: 3000,
            rel_tol: 1e-12,
            ..SolverConfig::default()
        };
        let (m, stats) = solve(&s, &cfg).unwrap();
        assert!(stats.converged);
        assert!(m.matrix.frobenius_distance(&s.matrix) < 1e-8);
    }

    #[test]
    fn huge_l1_weight_zeroes_all_latent_entries() {
        let s = star_instance(8, 3, 0.4, 12);
        let cfg = SolverConfig {
            lambda1: 0.0,
            lambda2: 1000.0,
            max_iters: 2000,
            rel_tol: 1e-10,
            ..SolverConfig::default()
        };
        let (m, _) = solve(&s, &cfg).unwrap();
        for (i, j) in s.mask.unobserved_upper_pairs() {
            assert!(m.matrix.get(i, j).abs() < 1e-6, "latent ({i},{j}) = {}", m.matrix.get(i, j));
        }
    }

    #[test]
    fn certain_entries_are_pinned_exactly() {
        let s = star_instance(10, 4, 0.5, 13);
        let (m, _) = solve(&s, &SolverConfig::default()).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                if s.mask.is_observed(i, j) {
                    assert_eq!(m.matrix.get(i, j), s.matrix.get(i, j));
                }
            }
        }
        assert!(m.matrix.is_symmetric(0.0));
    }

    #[test]
    fn latent_count_above_theta_is_non_increasing_in_lambda2() {
        let s = star_instance(12, 5, 0.35, 17);
        let mut previous = usize::MAX;
        for lambda2 in [0.0, 0.1, 0.5, 1.0, 2.0] {
            let cfg = SolverConfig { lambda2, ..SolverConfig::default() };
            let (m, _) = solve(&s, &cfg).unwrap();
            let count = s
                .mask
                .unobserved_upper_pairs()
                .into_iter()
                .filter(|&(i, j)| m.matrix.get(i, j) >= cfg.theta)
                .count();
            assert!(count <= previous, "lambda2 {lambda2}: {count} > {previous}");
            previous = count;
        }
    }

    #[test]
    fn numerical_rank_is_non_increasing_in_lambda1() {
        let s = star_instance(12, 5, 0.35, 19);
        let mut previous = usize::MAX;
        for lambda1 in [0.1, 0.5, 1.0, 2.0] {
            let cfg = SolverConfig { lambda1, ..SolverConfig::default() };
            let (_, stats) = solve(&s, &cfg).unwrap();
            let rank = stats.numerical_rank();
            assert!(rank <= previous, "lambda1 {lambda1}: rank {rank} > {previous}");
            previous = rank;
        }
    }

    #[test]
    fn recovers_a_planted_star_exactly_at_default_parameters() {
        let truth = star_instance(20, 12, 0.3, 23);
        let (m, _) = solve(&truth, &SolverConfig::default()).unwrap();
        let decisions = threshold_decisions(&m, &truth.mask, 0.5).unwrap();
        // The planted adjacency pattern is star_instance's dense matrix with
        // every entry certain; compare against the full pattern.
        for i in 0..20 {
            for j in 0..20 {
                let want = if (i == 0 && (1..=12).contains(&j)) || (j == 0 && (1..=12).contains(&i))
                {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(decisions.matrix.get(i, j), want, "at ({i},{j})");
            }
        }
    }

    #[test]
    fn core_extraction_keeps_only_nonzero_rows() {
        let mut s = star_instance(10, 3, 1.0, 29);
        // Everything observed; only the star rows are nonzero.
        let (core, idx) = extract_core(&s);
        assert_eq!(idx.indices, vec![0, 1, 2, 3]);
        assert_eq!(core.n(), 4);

        // Round-trip: embedding the core restores the nonzero pattern.
        let embedded =
            embed_core(&LatentMatrix { matrix: core.matrix.clone() }, &idx, 10).unwrap();
        assert_eq!(embedded.matrix, s.matrix);

        // All-zero matrix gives an empty core.
        s.matrix = Dense::zeros(10);
        let (core, idx) = extract_core(&s);
        assert_eq!(core.n(), 0);
        assert_eq!(idx.n_prime(), 0);
        let zero = embed_core(&LatentMatrix { matrix: Dense::zeros(0) }, &idx, 5).unwrap();
        assert_eq!(zero.matrix, Dense::zeros(5));

        // Dense matrix: identity reduction.
        let dense = ProbabilityMatrix {
            matrix: Dense::from_fn(3, |i, j| if i == j { 0.0 } else { 0.5 }),
            mask: {
                let mut m = ObservedMask::all_observed(3);
                for i in 0..3 {
                    for j in (i + 1)..3 {
                        m.unobserve(i, j);
                    }
                }
                m
            },
        };
        let (core, idx) = extract_core(&dense);
        assert_eq!(idx.indices, vec![0, 1, 2]);
        assert_eq!(core.matrix, dense.matrix);
    }

    #[test]
    fn embed_rejects_inconsistent_shapes() {
        let idx = CoreIndex { indices: vec![0, 2] };
        let bad = LatentMatrix { matrix: Dense::zeros(3) };
        assert!(matches!(embed_core(&bad, &idx, 5), Err(Error::Shape(_))));
    }

    #[test]
    fn core_solve_matches_full_solve_on_the_core_block() {
        let s = star_instance(12, 4, 0.4, 31);
        let full_cfg = SolverConfig { max_iters: 2000, rel_tol: 1e-10, ..SolverConfig::default() };
        let core_cfg = SolverConfig { use_core_submatrix: true, ..full_cfg };
        let (m_core, stats) = solve(&s, &core_cfg).unwrap();
        assert!(stats.core_n.is_some());
        // The embedded solution satisfies the constraints of the full frame.
        for i in 0..12 {
            for j in 0..12 {
                if s.mask.is_observed(i, j) && s.matrix.get(i, j) != 0.0 {
                    assert_eq!(m_core.matrix.get(i, j), s.matrix.get(i, j));
                }
            }
        }
    }

    #[test]
    fn threshold_uses_inclusive_comparison_and_mask_passthrough() {
        let mut mask = ObservedMask::all_observed(3);
        mask.unobserve(0, 1);
        mask.unobserve(0, 2);
        let mut m = Dense::zeros(3);
        m.set_sym(0, 1, 0.49);
        m.set_sym(0, 2, 0.5);
        m.set_sym(1, 2, 1.0); // certain entry, passes through
        let decided = threshold_decisions(&LatentMatrix { matrix: m }, &mask, 0.5).unwrap();
        assert_eq!(decided.matrix.get(0, 1), 0.0);
        assert_eq!(decided.matrix.get(0, 2), 1.0);
        assert_eq!(decided.matrix.get(1, 2), 1.0);
        assert!(threshold_decisions(
            &LatentMatrix { matrix: Dense::zeros(3) },
            &mask,
            1.0
        )
        .is_err());
    }

    #[test]
    fn solver_is_deterministic() {
        let s = star_instance(10, 4, 0.4, 37);
        let (m1, s1) = solve(&s, &SolverConfig::default()).unwrap();
        let (m2, s2) = solve(&s, &SolverConfig::default()).unwrap();
        assert_eq!(m1.matrix, m2.matrix);
        assert_eq!(s1.iterations, s2.iterations);
        assert_eq!(s1.objective, s2.objective);
    }

    #[test]
    fn empty_matrix_solves_trivially() {
        let s = ProbabilityMatrix {
            matrix: Dense::zeros(0),
            mask: ObservedMask::all_observed(0),
        };
        let (m, stats) = solve(&s, &SolverConfig::default()).unwrap();
        assert_eq!(m.matrix.n(), 0);
        assert!(stats.converged);
    }
}
