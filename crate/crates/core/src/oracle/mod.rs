//! Direct numerical maximization of the global fidelity
//! `F(V) = Σ η_i |⟨ψ_i^N|V|α̃_i⟩|²` over the unitary group.
//!
//! This is the independent check on the bound: it never uses the
//! trace-norm argument, only the objective itself. Each restart runs
//! Riemannian gradient ascent, `V ← V·exp(α·S(∇))`, with an analytic
//! gradient and Armijo backtracking. Restart 0 starts from the cloner built
//! by [`crate::bounds::clone_bound`]; the others from random unitaries. The
//! result is the best value found, which is not certified to be the optimum.

mod closed_form;
mod unitary;

use alloc::string::String;
use alloc::vec::Vec;

pub use closed_form::{helstrom_reference, two_state_closed_form};
pub use unitary::{generator, UnitaryPoint};

use crate::bounds::{clone_bound, BoundOptions, BoundsError, CloneTask, CopyCount, SignPattern};
use crate::numerics::{inner, Mat, NumericsError, C64};
use crate::rng;
use unitary::{params_gradient, GeneratorExp};

/// Armijo sufficient-increase constant.
pub const ARMIJO: f64 = 1e-4;

/// Accepted `‖V†V − I‖_F` for externally supplied unitaries.
pub const UNITARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("value out of range: {0}")]
    BadRange(String),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("numerical failure: {0}")]
    Numerics(#[from] NumericsError),
}

fn check_shapes(v: &Mat, a_tilde: &Mat, b_mat: &Mat, priors: &[f64]) -> Result<(), OracleError> {
    let r = v.rows();
    let n = priors.len();
    if !v.is_square()
        || a_tilde.rows() != r
        || b_mat.rows() != r
        || a_tilde.cols() != n
        || b_mat.cols() != n
    {
        return Err(OracleError::DimensionMismatch(alloc::format!(
            "V {}x{}, Ã {}x{}, B {}x{}, {} priors",
            v.rows(),
            v.cols(),
            a_tilde.rows(),
            a_tilde.cols(),
            b_mat.rows(),
            b_mat.cols(),
            n
        )));
    }
    let defect = v.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(OracleError::NotUnitary { defect });
    }
    Ok(())
}

/// `⟨b_i|V|ã_i⟩` for all `i`.
fn overlaps(v: &Mat, a_tilde: &Mat, b_mat: &Mat) -> Vec<C64> {
    let va = v.matmul(a_tilde);
    (0..a_tilde.cols())
        .map(|i| inner(&b_mat.column(i), &va.column(i)))
        .collect()
}

/// Global fidelity `Σ η_i |⟨b_i|V|ã_i⟩|²`.
pub fn true_fidelity(
    v: &Mat,
    a_tilde: &Mat,
    b_mat: &Mat,
    priors: &[f64],
) -> Result<f64, OracleError> {
    check_shapes(v, a_tilde, b_mat, priors)?;
    Ok(fidelity_unchecked(v, a_tilde, b_mat, priors))
}

fn fidelity_unchecked(v: &Mat, a_tilde: &Mat, b_mat: &Mat, priors: &[f64]) -> f64 {
    overlaps(v, a_tilde, b_mat)
        .iter()
        .zip(priors)
        .map(|(t, p)| p * t.norm_sqr())
        .sum()
}

/// Auxiliary fidelity for a fixed sign pattern, `|Σ η_i λ_i ⟨b_i|V|ã_i⟩|`.
pub fn fprime_value(
    v: &Mat,
    a_tilde: &Mat,
    b_mat: &Mat,
    priors: &[f64],
    lambda: &SignPattern,
) -> Result<f64, OracleError> {
    check_shapes(v, a_tilde, b_mat, priors)?;
    if lambda.len() != priors.len() {
        return Err(OracleError::DimensionMismatch(alloc::format!(
            "{} signs for {} states",
            lambda.len(),
            priors.len()
        )));
    }
    let sum: C64 = overlaps(v, a_tilde, b_mat)
        .iter()
        .enumerate()
        .map(|(i, t)| t * (priors[i] * lambda.sign(i)))
        .sum();
    Ok(sum.norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Extra ambient dimensions beyond the span of the exact clones.
    pub extra_dims: usize,
    pub bound: BoundOptions,
}

impl OracleOptions {
    /// 50 restarts up to three states, 200 beyond.
    pub fn default_restarts(n_states: usize) -> usize {
        if n_states <= 3 {
            50
        } else {
            200
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.restarts < 1 {
            return Err(OracleError::InvalidOptions(
                "restarts must be at least 1".into(),
            ));
        }
        if self.grad_tol.is_nan() || self.grad_tol <= 0.0 {
            return Err(OracleError::InvalidOptions(
                "gradient tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn for_states(n_states: usize, seed: u64) -> Self {
        Self {
            restarts: Self::default_restarts(n_states),
            seed,
            ..Self::default()
        }
    }
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            restarts: 50,
            seed: 0,
            max_iters: 2000,
            grad_tol: 1e-9,
            extra_dims: 0,
            bound: BoundOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub f_opt_numeric: f64,
    pub v_best: Mat,
    pub restarts_used: usize,
    /// Whether at least one restart reached the gradient tolerance.
    pub converged: bool,
    pub best_restart_index: usize,
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub index: usize,
    pub fidelity: f64,
    pub v: Mat,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Coordinates and warm start shared by all restarts of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleProblem {
    pub a_tilde: Mat,
    pub b_mat: Mat,
    pub priors: Vec<f64>,
    pub warm_start: Mat,
    /// The bound this oracle is checking, `fprime_opt²`.
    pub fidelity_lower_bound: f64,
}

impl OracleProblem {
    /// Builds the coordinates of a finite-`N` task, embedded in
    /// `extra_dims` additional dimensions.
    pub fn from_task(task: &CloneTask, opts: &OracleOptions) -> Result<Self, OracleError> {
        if task.n_copies() == CopyCount::Infinite {
            return Err(OracleError::InvalidOptions(
                "the oracle needs a finite N".into(),
            ));
        }
        let report = clone_bound(task, opts.bound)?;
        let r = report.a_tilde.rows() + opts.extra_dims;
        Ok(Self {
            a_tilde: report.a_tilde.pad_rows(r),
            b_mat: report.b_mat.pad_rows(r),
            priors: task.family().priors().to_vec(),
            warm_start: report.v_opt.direct_sum_identity(opts.extra_dims),
            fidelity_lower_bound: report.fidelity_lower_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.a_tilde.rows()
    }

    pub fn fidelity(&self, v: &Mat) -> f64 {
        fidelity_unchecked(v, &self.a_tilde, &self.b_mat, &self.priors)
    }

    /// `G = Σ η_i t_i |b_i⟩⟨ã_i|`, so that `dF = 2 Re tr(G† dV)`.
    fn euclidean_gradient(&self, v: &Mat) -> (f64, Mat) {
        let t = overlaps(v, &self.a_tilde, &self.b_mat);
        let f = t
            .iter()
            .zip(&self.priors)
            .map(|(t, p)| p * t.norm_sqr())
            .sum();
        let r = self.dim();
        let g = Mat::from_fn(r, r, |j, k| {
            (0..self.priors.len())
                .map(|i| t[i] * self.priors[i] * self.b_mat[(j, i)] * self.a_tilde[(k, i)].conj())
                .sum()
        });
        (f, g)
    }

    /// `F` and its gradient with respect to the point's parameters.
    pub fn value_and_gradient(&self, point: &UnitaryPoint) -> (f64, Vec<f64>) {
        let v = point.unitary();
        let (f, g) = self.euclidean_gradient(&v);
        let gamma = point.exp().pullback(&point.base().adjoint().matmul(&g));
        (f, params_gradient(&gamma))
    }

    /// Max relative deviation between the analytic gradient and central
    /// differences, `|g − g_fd| / max(1, |g|)`.
    pub fn gradient_check(&self, point: &UnitaryPoint, step: f64) -> Result<f64, OracleError> {
        if !(1e-7..=1e-4).contains(&step) {
            return Err(OracleError::BadRange(alloc::format!(
                "step {step} outside [1e-7, 1e-4]"
            )));
        }
        let (_, analytic) = self.value_and_gradient(point);
        let mut worst: f64 = 0.0;
        for (p, &g) in analytic.iter().enumerate() {
            let shifted = |delta: f64| -> Result<f64, OracleError> {
                let mut params = point.params().to_vec();
                params[p] += delta;
                let q = UnitaryPoint::new(point.base().clone(), params)?;
                Ok(self.fidelity(&q.unitary()))
            };
            let fd = (shifted(step)? - shifted(-step)?) / (2.0 * step);
            worst = worst.max((g - fd).abs() / g.abs().max(1.0));
        }
        Ok(worst)
    }

    /// Gradient ascent from `start`.
    pub fn ascend(
        &self,
        start: Mat,
        index: usize,
        opts: &OracleOptions,
    ) -> Result<RestartOutcome, OracleError> {
        let r = self.dim();
        let mut v = start;
        let (_, mut g) = self.euclidean_gradient(&v);
        let mut step = 1.0;
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut iterations = 0;
        let mut grad_norm;
        loop {
            // Riemannian gradient: parameters at θ = 0 around the current point.
            let grad = params_gradient(&v.adjoint().matmul(&g));
            grad_norm = libm::sqrt(grad.iter().map(|x| x * x).sum());
            if grad_norm <= opts.grad_tol || iterations >= opts.max_iters {
                break;
            }
            iterations += 1;

            // Barzilai–Borwein trial step, then halving until Armijo holds.
            if let Some((s_prev, g_prev)) = &prev {
                let ss: f64 = s_prev.iter().map(|x| x * x).sum();
                let sy: f64 = s_prev
                    .iter()
                    .zip(g_prev)
                    .zip(&grad)
                    .map(|((s, a), b)| s * (a - b))
                    .sum();
                step = if sy > 0.0 { ss / sy } else { 2.0 * step };
            }
            step = step.min(core::f64::consts::PI / grad_norm);
            let slope = grad_norm * grad_norm;

            let accepted = loop {
                let dir: Vec<f64> = grad.iter().map(|x| x * step).collect();
                let e = GeneratorExp::new(&dir, r)?;
                let dv = v.matmul(&e.minus_identity());
                let gain = self.fidelity_gain(&v, &dv);
                if gain >= ARMIJO * step * slope {
                    break Some((dir, &v + &dv));
                }
                step *= 0.5;
                if step * grad_norm < 1e-18 {
                    break None;
                }
            };
            let Some((dir, v_new)) = accepted else { break };
            v = v_new;
            g = self.euclidean_gradient(&v).1;
            prev = Some((dir, grad));
        }
        Ok(RestartOutcome {
            index,
            fidelity: self.fidelity(&v).clamp(0.0, 1.0),
            v,
            converged: grad_norm <= opts.grad_tol,
            iterations,
            grad_norm,
        })
    }

    /// `F(V + dV) − F(V)` evaluated from the overlap increments, which stays
    /// accurate when the increase is far below the rounding level of `F`.
    fn fidelity_gain(&self, v: &Mat, dv: &Mat) -> f64 {
        let t = overlaps(v, &self.a_tilde, &self.b_mat);
        let dt = overlaps(dv, &self.a_tilde, &self.b_mat);
        t.iter()
            .zip(&dt)
            .zip(&self.priors)
            .map(|((t, d), p)| p * (d * (t + t + d).conj()).re)
            .sum()
    }

    /// Starting unitary of restart `index`: the warm start for 0, a random
    /// unitary from stream `index` of `seed` otherwise.
    pub fn start(&self, index: usize, seed: u64) -> Result<Mat, OracleError> {
        if index == 0 {
            return Ok(self.warm_start.clone());
        }
        let mut rng = rng::stream(seed, index as u64);
        Ok(UnitaryPoint::random(&mut rng, self.dim())?.unitary())
    }

    pub fn run_restart(
        &self,
        index: usize,
        opts: &OracleOptions,
    ) -> Result<RestartOutcome, OracleError> {
        self.ascend(self.start(index, opts.seed)?, index, opts)
    }
}

/// Best outcome by fidelity, ties to the lowest restart index.
pub fn select_best(outcomes: Vec<RestartOutcome>) -> Option<OracleResult> {
    let restarts_used = outcomes.len();
    let converged = outcomes.iter().any(|o| o.converged);
    let mut best: Option<RestartOutcome> = None;
    for o in outcomes {
        let replace = match &best {
            None => true,
            Some(b) => o.fidelity > b.fidelity || (o.fidelity == b.fidelity && o.index < b.index),
        };
        if replace {
            best = Some(o);
        }
    }
    best.map(|b| OracleResult {
        f_opt_numeric: b.fidelity,
        v_best: b.v,
        restarts_used,
        converged,
        best_restart_index: b.index,
    })
}

/// Best global fidelity found over `opts.restarts` gradient-ascent runs.
pub fn maximize_fidelity(
    task: &CloneTask,
    opts: &OracleOptions,
) -> Result<OracleResult, OracleError> {
    opts.validate()?;
    let problem = OracleProblem::from_task(task, opts)?;
    let outcomes = (0..opts.restarts)
        .map(|i| problem.run_restart(i, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(select_best(outcomes).expect("at least one restart"))
}

/// [`OracleProblem::gradient_check`] for the coordinates of `task`, embedded
/// in the point's dimension when that is larger.
pub fn gradient_check(
    task: &CloneTask,
    point: &UnitaryPoint,
    step: f64,
) -> Result<f64, OracleError> {
    let mut problem = OracleProblem::from_task(task, &OracleOptions::default())?;
    let r = point.dim();
    if r < problem.dim() {
        return Err(OracleError::DimensionMismatch(alloc::format!(
            "point dimension {r} below the task dimension {}",
            problem.dim()
        )));
    }
    problem.a_tilde = problem.a_tilde.pad_rows(r);
    problem.b_mat = problem.b_mat.pad_rows(r);
    problem.gradient_check(point, step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ONE;
    use crate::states::{equal_overlap_family, family_from_gram, two_state_family, uniform_priors};

    fn pair_task(s: f64, m: u32, n: u32) -> CloneTask {
        let f = two_state_family(C64::new(s, 0.0), [0.5, 0.5]).unwrap();
        CloneTask::new(f, m, CopyCount::Finite(n)).unwrap()
    }

    #[test]
    fn fidelity_of_perfect_clone() {
        let t = pair_task(0.3, 2, 2);
        let r = clone_bound(&t, BoundOptions::default()).unwrap();
        let v = Mat::identity(r.a_tilde.rows());
        assert!((true_fidelity(&v, &r.b_mat, &r.b_mat, &r.priors).unwrap() - 1.0).abs() < 1e-14);
        let fp =
            fprime_value(&v, &r.b_mat, &r.b_mat, &r.priors, &SignPattern::all_plus(2)).unwrap();
        assert!((fp - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_of_orthogonal_misassignment() {
        let a = Mat::identity(2);
        let swap = Mat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(true_fidelity(&swap, &a, &a, &[0.5, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_at_bound_cloner() {
        let t = pair_task(0.5, 1, 2);
        let r = clone_bound(&t, BoundOptions::default()).unwrap();
        let f = true_fidelity(&r.v_opt, &r.a_tilde, &r.b_mat, &r.priors).unwrap();
        assert!((f - 0.9817627).abs() < 1e-7);
        assert!((f - two_state_closed_form(0.5, 1, 2).unwrap().1).abs() < 1e-9);
        let fp = fprime_value(&r.v_opt, &r.a_tilde, &r.b_mat, &r.priors, &r.lambda_chosen).unwrap();
        assert!((fp - r.fprime_opt).abs() < 1e-10);
    }

    #[test]
    fn shape_and_unitarity_errors() {
        let a = Mat::identity(2);
        assert!(matches!(
            true_fidelity(&Mat::identity(3), &a, &a, &[0.5, 0.5]),
            Err(OracleError::DimensionMismatch(_))
        ));
        let not_unitary = Mat::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            true_fidelity(&not_unitary, &a, &a, &[0.5, 0.5]),
            Err(OracleError::NotUnitary { .. })
        ));
    }

    #[test]
    fn two_state_oracle_matches_closed_form() {
        let t = pair_task(0.5, 1, 2);
        let res = maximize_fidelity(
            &t,
            &OracleOptions {
                restarts: 20,
                seed: 11,
                ..OracleOptions::default()
            },
        )
        .unwrap();
        assert!((res.f_opt_numeric - 0.9817627).abs() < 1e-6);
        assert_eq!(res.restarts_used, 20);
    }

    #[test]
    fn orthogonal_family_oracle() {
        let f = family_from_gram(Mat::identity(3), uniform_priors(3)).unwrap();
        let t = CloneTask::new(f, 1, CopyCount::Finite(2)).unwrap();
        let res = maximize_fidelity(
            &t,
            &OracleOptions {
                restarts: 5,
                ..OracleOptions::default()
            },
        )
        .unwrap();
        assert!((res.f_opt_numeric - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_state_has_zero_gradient() {
        let f = family_from_gram(Mat::from_fn(1, 1, |_, _| ONE), alloc::vec![1.0]).unwrap();
        let t = CloneTask::new(f, 1, CopyCount::Finite(3)).unwrap();
        let problem = OracleProblem::from_task(&t, &OracleOptions::default()).unwrap();
        let point = UnitaryPoint::new(Mat::identity(1), alloc::vec![0.7]).unwrap();
        let (f, g) = problem.value_and_gradient(&point);
        assert!((f - 1.0).abs() < 1e-15);
        assert!(g.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = equal_overlap_family(3, 0.5).unwrap();
        let t = CloneTask::new(f, 1, CopyCount::Finite(2)).unwrap();
        let mut rng = rng::stream(21, 0);
        for _ in 0..5 {
            let p = UnitaryPoint::random(&mut rng, 3).unwrap();
            assert!(gradient_check(&t, &p, 1e-5).unwrap() <= 1e-5);
        }
    }

    #[test]
    fn gradient_check_rejects_bad_step() {
        let t = pair_task(0.5, 1, 2);
        let p = UnitaryPoint::new(Mat::identity(2), alloc::vec![0.0; 4]).unwrap();
        assert!(matches!(
            gradient_check(&t, &p, 1e-2),
            Err(OracleError::BadRange(_))
        ));
    }

    #[test]
    fn restarts_are_reproducible() {
        let f = equal_overlap_family(3, 0.5).unwrap();
        let t = CloneTask::new(f, 1, CopyCount::Finite(2)).unwrap();
        let opts = OracleOptions {
            restarts: 4,
            seed: 3,
            ..OracleOptions::default()
        };
        assert_eq!(
            maximize_fidelity(&t, &opts).unwrap(),
            maximize_fidelity(&t, &opts).unwrap()
        );
    }

    #[test]
    fn rejects_zero_restarts() {
        let t = pair_task(0.5, 1, 2);
        let opts = OracleOptions {
            restarts: 0,
            ..OracleOptions::default()
        };
        assert!(matches!(
            maximize_fidelity(&t, &opts),
            Err(OracleError::InvalidOptions(_))
        ));
    }
}
