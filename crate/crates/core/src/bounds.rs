//! Auxiliary-fidelity bound for deterministic cloning and state estimation.
//!
//! Coordinates: every state is a column. `Ã` (`r × n`) holds coordinates of
//! states whose Gram matrix is `X^(M)`, `B` (`r × n`) holds coordinates of
//! the exact clones `|ψ_i^N⟩` (Gram `X^(N)`), both in one `r`-dimensional
//! space, `r = max(rank X^(M), rank X^(N))`. A cloner is a unitary `V` on that
//! space, producing outputs `|α_i⟩ = V|ã_i⟩`.
//!
//! For a sign pattern `λ`, the auxiliary objective
//! `|Σ η_i λ_i ⟨b_i|V|ã_i⟩| = |tr(V·Ã η λ B†)|` is maximized by the polar
//! factor of `O(λ) = Ã η λ B†`, with maximum equal to its trace norm. The
//! pattern is chosen by enumeration subject to the sign condition
//! `λ_i ⟨b_i|V|ã_i⟩ ≥ 0`, and the fidelity bound is the square of the
//! resulting maximum.

use alloc::string::String;
use alloc::vec::Vec;

use crate::numerics::{
    polar_max_unitary, psd_factor, pseudo_inverse, Mat, NumericsError, C64, RANK_TOL,
};
use crate::states::{gram_power, PureStateFamily, StatesError};

/// Largest family accepted by the sign-pattern enumeration.
pub const MAX_STATES: usize = 16;

/// Default tolerance of the sign condition on `λ_i ⟨b_i|V|ã_i⟩`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BoundsError {
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("{n} states exceed the sign-pattern enumeration cap of {max}", max = MAX_STATES)]
    TooManyStates { n: usize },
    #[error(transparent)]
    States(#[from] StatesError),
    #[error("numerical failure: {0}")]
    Numerics(#[from] NumericsError),
}

/// Number of output copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopyCount {
    Finite(u32),
    /// The estimation limit, where the exact clones become orthonormal.
    Infinite,
}

/// A family together with `M` input copies and `N` output copies.
#[derive(Debug, Clone, PartialEq)]
pub struct CloneTask {
    family: PureStateFamily,
    m_copies: u32,
    n_copies: CopyCount,
}

impl CloneTask {
    pub fn new(
        family: PureStateFamily,
        m_copies: u32,
        n_copies: CopyCount,
    ) -> Result<Self, BoundsError> {
        if m_copies < 1 {
            return Err(BoundsError::InvalidTask("M must be at least 1".into()));
        }
        if let CopyCount::Finite(n) = n_copies {
            if n < m_copies {
                return Err(BoundsError::InvalidTask(alloc::format!(
                    "N ({n}) must be at least M ({m_copies})"
                )));
            }
        }
        if family.n() > MAX_STATES {
            return Err(BoundsError::TooManyStates { n: family.n() });
        }
        Ok(Self {
            family,
            m_copies,
            n_copies,
        })
    }

    pub fn family(&self) -> &PureStateFamily {
        &self.family
    }

    pub fn m_copies(&self) -> u32 {
        self.m_copies
    }

    pub fn n_copies(&self) -> CopyCount {
        self.n_copies
    }

    fn finite_n(&self) -> Result<u32, BoundsError> {
        match self.n_copies {
            CopyCount::Finite(n) => Ok(n),
            CopyCount::Infinite => Err(BoundsError::InvalidTask(
                "N is infinite; use the estimation bound".into(),
            )),
        }
    }
}

/// `λ ∈ {±1}ⁿ` with `λ_1 = +1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn all_plus(n: usize) -> Self {
        Self(alloc::vec![1; n])
    }

    /// Fails unless every entry is ±1 and the first is +1.
    pub fn new(signs: Vec<i8>) -> Option<Self> {
        let valid = signs.first() == Some(&1) && signs.iter().all(|&s| s == 1 || s == -1);
        valid.then_some(Self(signs))
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sign(&self, i: usize) -> f64 {
        f64::from(self.0[i])
    }
}

/// All `2^(n−1)` sign patterns with `λ_1 = +1`, in binary counting order over
/// entries `2..n` (entry `n` least significant, `+` before `−`).
pub fn enumerate_lambdas(n: usize) -> Vec<SignPattern> {
    assert!(n >= 1, "need at least one state");
    let free = n - 1;
    (0..1u64 << free)
        .map(|k| {
            let signs = (0..n)
                .map(|i| {
                    if i == 0 || (k >> (free - i)) & 1 == 0 {
                        1
                    } else {
                        -1
                    }
                })
                .collect();
            SignPattern(signs)
        })
        .collect()
}

/// Knobs for the bound pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    /// Relative eigenvalue cut used when factorizing Gram matrices.
    pub rank_tol: f64,
    /// Slack in the sign condition.
    pub feasibility_tol: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            rank_tol: RANK_TOL,
            feasibility_tol: FEASIBILITY_TOL,
        }
    }
}

/// Outcome for one sign pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaDiagnostic {
    pub lambda: SignPattern,
    pub trace_norm: f64,
    pub feasible: bool,
}

/// Maximum of the auxiliary fidelity over unitaries and sign patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryOptimum {
    pub fprime_opt: f64,
    pub lambda_chosen: SignPattern,
    /// False when no pattern passed the sign condition; `fprime_opt` is then
    /// the largest trace norm over all patterns.
    pub feasible: bool,
    pub v_opt: Mat,
    pub diagnostics: Vec<LambdaDiagnostic>,
}

/// `t_i = ⟨b_i|V|ã_i⟩` for every state.
fn overlaps(v: &Mat, a_tilde: &Mat, b_mat: &Mat) -> Vec<C64> {
    let m = b_mat.adjoint().matmul(v).matmul(a_tilde);
    m.diagonal()
}

/// Enumerates sign patterns and maximizes `|tr(V Ã η λ B†)|` for each.
///
/// `a_tilde` and `b_mat` must both be `r × n`.
pub fn optimize_auxiliary(
    a_tilde: &Mat,
    b_mat: &Mat,
    priors: &[f64],
    feasibility_tol: f64,
) -> Result<AuxiliaryOptimum, BoundsError> {
    let n = priors.len();
    if a_tilde.cols() != n || b_mat.cols() != n || a_tilde.rows() != b_mat.rows() {
        return Err(NumericsError::DimensionMismatch {
            expected: (b_mat.rows(), n),
            found: (a_tilde.rows(), a_tilde.cols()),
        }
        .into());
    }
    if n > MAX_STATES {
        return Err(BoundsError::TooManyStates { n });
    }
    let b_adj = b_mat.adjoint();

    let mut diagnostics = Vec::with_capacity(1 << (n - 1));
    let mut best: Option<(usize, Mat)> = None;
    let mut best_any: Option<(usize, Mat)> = None;
    for (index, lambda) in enumerate_lambdas(n).into_iter().enumerate() {
        // O(λ) = Ã · diag(η_i λ_i) · B†
        let weighted = Mat::from_fn(a_tilde.rows(), n, |i, j| {
            a_tilde[(i, j)] * (priors[j] * lambda.sign(j))
        });
        let o = weighted.matmul(&b_adj);
        let polar = polar_max_unitary(&o)?;
        let t = overlaps(&polar.v_opt, a_tilde, b_mat);
        let feasible = t.iter().enumerate().all(|(i, ti)| {
            lambda.sign(i) * ti.re >= -feasibility_tol && ti.im.abs() <= feasibility_tol
        });
        diagnostics.push(LambdaDiagnostic {
            lambda,
            trace_norm: polar.trace_norm,
            feasible,
        });
        let better = |cur: &Option<(usize, Mat)>| {
            cur.as_ref()
                .is_none_or(|(k, _)| polar.trace_norm > diagnostics[*k].trace_norm)
        };
        if better(&best_any) {
            best_any = Some((index, polar.v_opt.clone()));
        }
        if feasible && better(&best) {
            best = Some((index, polar.v_opt));
        }
    }

    let feasible = best.is_some();
    let (index, v_opt) = best.or(best_any).expect("at least one sign pattern");
    Ok(AuxiliaryOptimum {
        fprime_opt: diagnostics[index].trace_norm.clamp(0.0, 1.0),
        lambda_chosen: diagnostics[index].lambda.clone(),
        feasible,
        v_opt,
        diagnostics,
    })
}

/// Result of [`clone_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// Maximum of the auxiliary fidelity `F′ = Σ η_i |⟨ψ_i^N|α_i⟩|`.
    pub fprime_opt: f64,
    pub lambda_chosen: SignPattern,
    pub feasible: bool,
    /// `fprime_opt²`, a lower bound on the optimal global fidelity.
    pub fidelity_lower_bound: f64,
    pub v_opt: Mat,
    /// Columns: coordinates of states with Gram `X^(M)`.
    pub a_tilde: Mat,
    /// Columns: coordinates of the exact clones, Gram `X^(N)`.
    pub b_mat: Mat,
    /// `c_ij = ⟨ψ_j^N|α_i⟩` for the constructed cloner.
    pub coeffs: Mat,
    pub priors: Vec<f64>,
    pub rank_m: usize,
    pub rank_n: usize,
    pub diagnostics: Vec<LambdaDiagnostic>,
}

/// Factorizes `X^(m)` and `X^(n)` and pads both factors to a common row count.
pub fn task_coordinates(
    family: &PureStateFamily,
    m: u32,
    n: u32,
    rank_tol: f64,
) -> Result<(Mat, Mat, usize, usize), BoundsError> {
    let xm = gram_power(family, m)?.x;
    let xn = gram_power(family, n)?.x;
    let a = psd_factor(&xm, rank_tol)?;
    let b = psd_factor(&xn, rank_tol)?;
    let r = a.rank.max(b.rank);
    Ok((a.factor.pad_rows(r), b.factor.pad_rows(r), a.rank, b.rank))
}

/// Lower bound on the optimal global fidelity of an `M → N` cloner.
pub fn clone_bound(task: &CloneTask, opts: BoundOptions) -> Result<BoundReport, BoundsError> {
    let n_copies = task.finite_n()?;
    let family = task.family();
    let (a_tilde, b_mat, rank_m, rank_n) =
        task_coordinates(family, task.m_copies(), n_copies, opts.rank_tol)?;
    let aux = optimize_auxiliary(&a_tilde, &b_mat, family.priors(), opts.feasibility_tol)?;
    let coeffs = b_mat
        .adjoint()
        .matmul(&aux.v_opt)
        .matmul(&a_tilde)
        .transpose();
    Ok(BoundReport {
        fprime_opt: aux.fprime_opt,
        lambda_chosen: aux.lambda_chosen,
        feasible: aux.feasible,
        fidelity_lower_bound: aux.fprime_opt * aux.fprime_opt,
        v_opt: aux.v_opt,
        a_tilde,
        b_mat,
        coeffs,
        priors: family.priors().to_vec(),
        rank_m,
        rank_n,
        diagnostics: aux.diagnostics,
    })
}

/// Output states `|α_i⟩ = V|ã_i⟩` of the constructed cloner, one per column.
pub fn output_states(report: &BoundReport) -> Mat {
    report.v_opt.matmul(&report.a_tilde)
}

/// Expansion `|α_i⟩ ≈ Σ_j d_ij |ψ_j^N⟩` in the (generally non-orthogonal)
/// exact-clone basis, via the pseudo-inverse of `B`. Exact when the outputs
/// lie in the span of the clones and the clones are linearly independent.
pub fn expansion_coefficients(report: &BoundReport) -> Result<Mat, BoundsError> {
    let pinv = pseudo_inverse(&report.b_mat, RANK_TOL)?;
    Ok(pinv.matmul(&output_states(report)).transpose())
}

/// Result of [`estimation_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    /// Lower bound on the average correct-identification probability.
    pub p_lower_bound: f64,
    pub fprime_opt: f64,
    pub lambda_chosen: SignPattern,
    pub feasible: bool,
    /// `E_ij = ⟨α_i|e_j⟩`, the conjugate of the expansion coefficient
    /// `c_ij = ⟨e_j|α_i⟩`, so that `E E† = X^(M)` for complex Gram matrices too.
    pub e_mat: Mat,
    /// `c_ij = ⟨e_j|α_i⟩`.
    pub coeffs: Mat,
    /// `|c_ii|²`.
    pub correct_probs: Vec<f64>,
    /// `Σ η_i |c_ii|²` for the constructed measurement.
    pub achieved_p: f64,
    pub v_opt: Mat,
    pub a_tilde: Mat,
    pub x_m: Mat,
    pub diagnostics: Vec<LambdaDiagnostic>,
}

impl EstimationReport {
    /// `‖E E† − X^(M)‖_F`.
    pub fn e_residual(&self) -> f64 {
        (&self.e_mat.matmul(&self.e_mat.adjoint()) - &self.x_m).frobenius_norm()
    }
}

/// Estimation limit `N → ∞`: the exact clones are orthonormal (`B = I`).
pub fn estimation_bound(
    family: &PureStateFamily,
    m: u32,
    opts: BoundOptions,
) -> Result<EstimationReport, BoundsError> {
    if m < 1 {
        return Err(BoundsError::InvalidTask("M must be at least 1".into()));
    }
    let n = family.n();
    if n > MAX_STATES {
        return Err(BoundsError::TooManyStates { n });
    }
    let x_m = gram_power(family, m)?.x;
    let a_tilde = psd_factor(&x_m, opts.rank_tol)?.factor.pad_rows(n);
    let b_mat = Mat::identity(n);
    let aux = optimize_auxiliary(&a_tilde, &b_mat, family.priors(), opts.feasibility_tol)?;
    let outputs = aux.v_opt.matmul(&a_tilde);
    let coeffs = outputs.transpose();
    let e_mat = outputs.adjoint();
    let correct_probs: Vec<f64> = (0..n).map(|i| coeffs[(i, i)].norm_sqr()).collect();
    let achieved_p = family
        .priors()
        .iter()
        .zip(&correct_probs)
        .map(|(p, c)| p * c)
        .sum();
    Ok(EstimationReport {
        p_lower_bound: aux.fprime_opt * aux.fprime_opt,
        fprime_opt: aux.fprime_opt,
        lambda_chosen: aux.lambda_chosen,
        feasible: aux.feasible,
        e_mat,
        coeffs,
        correct_probs,
        achieved_p,
        v_opt: aux.v_opt,
        a_tilde,
        x_m,
        diagnostics: aux.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ONE;
    use crate::states::{equal_overlap_family, family_from_gram, two_state_family, uniform_priors};
    use alloc::vec;

    fn real_pair(s: f64) -> PureStateFamily {
        two_state_family(C64::new(s, 0.0), [0.5, 0.5]).unwrap()
    }

    #[test]
    fn lambda_enumeration() {
        assert_eq!(enumerate_lambdas(1), vec![SignPattern(vec![1])]);
        let three: Vec<Vec<i8>> = enumerate_lambdas(3).into_iter().map(|l| l.0).collect();
        assert_eq!(
            three,
            vec![
                vec![1, 1, 1],
                vec![1, 1, -1],
                vec![1, -1, 1],
                vec![1, -1, -1]
            ]
        );
        assert_eq!(enumerate_lambdas(5).len(), 16);
    }

    #[test]
    fn sign_pattern_validation() {
        assert!(SignPattern::new(vec![1, -1]).is_some());
        assert!(SignPattern::new(vec![-1, 1]).is_none());
        assert!(SignPattern::new(vec![1, 0]).is_none());
    }

    #[test]
    fn task_validation() {
        let f = real_pair(0.5);
        assert!(CloneTask::new(f.clone(), 2, CopyCount::Finite(1)).is_err());
        assert!(CloneTask::new(f.clone(), 0, CopyCount::Finite(1)).is_err());
        let t = CloneTask::new(f, 1, CopyCount::Infinite).unwrap();
        assert!(matches!(
            clone_bound(&t, BoundOptions::default()),
            Err(BoundsError::InvalidTask(_))
        ));
        let big = equal_overlap_family(17, 0.1).unwrap();
        assert!(matches!(
            CloneTask::new(big, 1, CopyCount::Finite(2)),
            Err(BoundsError::TooManyStates { n: 17 })
        ));
    }

    #[test]
    fn two_state_one_to_two() {
        let s: f64 = 0.5;
        let expected =
            0.5 * (((1.0 + s) * (1.0 + s * s)).sqrt() + ((1.0 - s) * (1.0 - s * s)).sqrt());
        let t = CloneTask::new(real_pair(s), 1, CopyCount::Finite(2)).unwrap();
        let r = clone_bound(&t, BoundOptions::default()).unwrap();
        assert!(r.feasible);
        assert!((r.fprime_opt - expected).abs() < 1e-12);
        assert!((r.fprime_opt - 0.9908394).abs() < 1e-7);
        assert!((r.fidelity_lower_bound - 0.9817627).abs() < 1e-7);
        assert_eq!(r.fidelity_lower_bound, r.fprime_opt * r.fprime_opt);
    }

    #[test]
    fn orthogonal_family_is_cloned_exactly() {
        let f = family_from_gram(Mat::identity(3), vec![0.2, 0.3, 0.5]).unwrap();
        let t = CloneTask::new(f, 1, CopyCount::Finite(4)).unwrap();
        let r = clone_bound(&t, BoundOptions::default()).unwrap();
        assert!((r.fprime_opt - 1.0).abs() < 1e-12);
        assert_eq!(r.lambda_chosen, SignPattern::all_plus(3));
        assert!(r.feasible);
    }

    #[test]
    fn equal_copy_counts_give_unit_bound() {
        let f = equal_overlap_family(3, 0.4).unwrap();
        let t = CloneTask::new(f, 2, CopyCount::Finite(2)).unwrap();
        let r = clone_bound(&t, BoundOptions::default()).unwrap();
        assert!((r.fidelity_lower_bound - 1.0).abs() < 1e-10);
    }

    #[test]
    fn outputs_preserve_gram() {
        let t = CloneTask::new(real_pair(0.5), 1, CopyCount::Finite(2)).unwrap();
        let r = clone_bound(&t, BoundOptions::default()).unwrap();
        let out = output_states(&r);
        let x1 = gram_power(t.family(), 1).unwrap().x;
        assert!((&out.adjoint().matmul(&out) - &x1).frobenius_norm() <= 1e-10);
        // outputs lie in the span of two independent clones
        let d = expansion_coefficients(&r).unwrap();
        let rebuilt = r.b_mat.matmul(&d.transpose());
        assert!((&rebuilt - &out).frobenius_norm() <= 1e-9);
    }

    #[test]
    fn parallel_family_gives_one_output() {
        let ones = Mat::from_fn(3, 3, |_, _| ONE);
        let f = family_from_gram(ones, uniform_priors(3)).unwrap();
        let t = CloneTask::new(f, 1, CopyCount::Finite(3)).unwrap();
        let r = clone_bound(&t, BoundOptions::default()).unwrap();
        assert_eq!((r.rank_m, r.rank_n), (1, 1));
        assert!((r.fidelity_lower_bound - 1.0).abs() < 1e-10);
        let out = output_states(&r);
        assert_eq!(out.rows(), 1);
        assert!((out[(0, 0)] - out[(0, 1)]).norm() < 1e-12);
        assert!((out[(0, 0)] - out[(0, 2)]).norm() < 1e-12);
    }

    #[test]
    fn helstrom_two_state() {
        let r = estimation_bound(&real_pair(0.8), 1, BoundOptions::default()).unwrap();
        assert!((r.p_lower_bound - 0.8).abs() < 1e-12);
        let direct = (0.5 * (1.8f64.sqrt() + 0.2f64.sqrt())).powi(2);
        assert!((r.p_lower_bound - direct).abs() < 1e-12);
        assert!(r.e_residual() <= 1e-10);
        assert!(r.achieved_p >= r.p_lower_bound - 1e-9);

        let r = estimation_bound(&real_pair(0.6), 2, BoundOptions::default()).unwrap();
        assert!((r.p_lower_bound - 0.9664761).abs() < 1e-7);
    }

    #[test]
    fn estimation_of_orthogonal_states() {
        let f = family_from_gram(Mat::identity(4), uniform_priors(4)).unwrap();
        let r = estimation_bound(&f, 1, BoundOptions::default()).unwrap();
        assert!((r.p_lower_bound - 1.0).abs() < 1e-12);
        assert!(r.correct_probs.iter().all(|&p| (p - 1.0).abs() < 1e-12));
    }

    #[test]
    fn complex_gram_estimation_residual() {
        let g = Mat::from_rows(&[
            &[ONE, C64::new(0.3, 0.4), C64::new(0.0, -0.2)],
            &[C64::new(0.3, -0.4), ONE, C64::new(0.1, 0.1)],
            &[C64::new(0.0, 0.2), C64::new(0.1, -0.1), ONE],
        ]);
        let f = family_from_gram(g, uniform_priors(3)).unwrap();
        let r = estimation_bound(&f, 1, BoundOptions::default()).unwrap();
        assert!(r.e_residual() <= 1e-10);
        assert!(r.achieved_p >= r.p_lower_bound - 1e-9);
    }
}
