use clonebound_core::bounds::{
    clone_bound, enumerate_lambdas, estimation_bound, optimize_auxiliary, output_states,
    task_coordinates, BoundOptions, CloneTask, CopyCount,
};
use clonebound_core::numerics::{Mat, C64};
use clonebound_core::oracle::{fprime_value, true_fidelity, UnitaryPoint};
use clonebound_core::rng;
use clonebound_core::states::{
    equal_overlap_family, family_from_gram, gram_power, random_family_with_priors,
    two_state_family, uniform_priors,
};
use proptest::prelude::*;

fn task(seed: u64, n: usize, d: usize, m: u32, big_n: u32) -> CloneTask {
    CloneTask::new(
        random_family_with_priors(seed, n, d),
        m,
        CopyCount::Finite(big_n),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn outputs_preserve_the_input_gram(seed in any::<u64>(), n in 1usize..5, d in 1usize..4, m in 1u32..3, extra in 0u32..3) {
        let t = task(seed, n, d, m, m + extra);
        let r = clone_bound(&t, BoundOptions::default()).unwrap();
        let out = output_states(&r);
        let xm = gram_power(t.family(), m).unwrap().x;
        prop_assert!((&out.adjoint().matmul(&out) - &xm).frobenius_norm() <= 1e-10);
        prop_assert!((0.0..=1.0).contains(&r.fidelity_lower_bound));
        prop_assert!(r.v_opt.unitarity_defect() <= 1e-10);
    }

    #[test]
    fn no_unitary_beats_the_trace_norm(seed in any::<u64>(), n in 2usize..4, d in 1usize..4) {
        let t = task(seed, n, d, 1, 2);
        let r = clone_bound(&t, BoundOptions::default()).unwrap();
        let best = r.diagnostics.iter().map(|row| row.trace_norm).fold(0.0, f64::max);
        let mut g = rng::stream(seed, 99);
        for _ in 0..50 {
            let v = UnitaryPoint::random(&mut g, r.a_tilde.rows()).unwrap().unitary();
            for row in &r.diagnostics {
                let fp = fprime_value(&v, &r.a_tilde, &r.b_mat, &r.priors, &row.lambda).unwrap();
                prop_assert!(fp <= row.trace_norm + 1e-9);
            }
        }
        prop_assert!(r.fprime_opt <= best + 1e-12);
    }

    #[test]
    fn bound_cloner_achieves_the_bound(seed in any::<u64>(), n in 1usize..5, d in 1usize..4) {
        let t = task(seed, n, d, 1, 2);
        let r = clone_bound(&t, BoundOptions::default()).unwrap();
        let f = true_fidelity(&r.v_opt, &r.a_tilde, &r.b_mat, &r.priors).unwrap();
        prop_assert!(f >= r.fidelity_lower_bound - 1e-10);
    }

    #[test]
    fn estimation_is_self_consistent(seed in any::<u64>(), n in 1usize..5, d in 1usize..4, m in 1u32..4) {
        let f = random_family_with_priors(seed, n, d);
        let r = estimation_bound(&f, m, BoundOptions::default()).unwrap();
        prop_assert!(r.e_residual() <= 1e-10);
        prop_assert!(r.achieved_p >= r.p_lower_bound - 1e-9);
        prop_assert!(r.correct_probs.iter().all(|&p| (-1e-12..=1.0 + 1e-12).contains(&p)));
    }
}

#[test]
fn bound_is_invariant_under_relabeling() {
    let f = random_family_with_priors(11, 3, 3);
    let perm = [2, 0, 1];
    let g = f.gram();
    let permuted = Mat::from_fn(3, 3, |i, j| g[(perm[i], perm[j])]);
    let priors = perm.iter().map(|&k| f.priors()[k]).collect();
    let f2 = family_from_gram(permuted, priors).unwrap();
    let a = clone_bound(
        &CloneTask::new(f, 1, CopyCount::Finite(2)).unwrap(),
        BoundOptions::default(),
    )
    .unwrap();
    let b = clone_bound(
        &CloneTask::new(f2, 1, CopyCount::Finite(2)).unwrap(),
        BoundOptions::default(),
    )
    .unwrap();
    assert!((a.fidelity_lower_bound - b.fidelity_lower_bound).abs() < 1e-10);
}

#[test]
fn bound_is_invariant_under_refactorization() {
    let f = random_family_with_priors(21, 3, 3);
    let (a, b, _, _) = task_coordinates(&f, 1, 2, 1e-12).unwrap();
    let base = optimize_auxiliary(&a, &b, f.priors(), 1e-9).unwrap();
    let mut g = rng::stream(21, 5);
    for _ in 0..10 {
        let w1 = UnitaryPoint::random(&mut g, a.rows()).unwrap().unitary();
        let w2 = UnitaryPoint::random(&mut g, a.rows()).unwrap().unitary();
        let other = optimize_auxiliary(&w1.matmul(&a), &w2.matmul(&b), f.priors(), 1e-9).unwrap();
        assert!((other.fprime_opt - base.fprime_opt).abs() < 1e-10);
    }
}

#[test]
fn vectors_and_gram_give_the_same_bound() {
    let f = random_family_with_priors(5, 3, 2);
    let g = family_from_gram(f.gram().clone(), f.priors().to_vec()).unwrap();
    let a = clone_bound(
        &CloneTask::new(f, 1, CopyCount::Finite(3)).unwrap(),
        BoundOptions::default(),
    )
    .unwrap();
    let b = clone_bound(
        &CloneTask::new(g, 1, CopyCount::Finite(3)).unwrap(),
        BoundOptions::default(),
    )
    .unwrap();
    assert!((a.fidelity_lower_bound - b.fidelity_lower_bound).abs() < 1e-12);
}

#[test]
fn two_state_values() {
    let f = two_state_family(C64::new(0.5, 0.0), [0.5, 0.5]).unwrap();
    let r = clone_bound(
        &CloneTask::new(f, 1, CopyCount::Finite(2)).unwrap(),
        BoundOptions::default(),
    )
    .unwrap();
    assert!((r.fprime_opt - 0.9908394).abs() < 1e-7);
    assert!((r.fidelity_lower_bound - 0.9817627).abs() < 1e-7);
    assert!(r.feasible);
}

#[test]
fn identity_gram_is_perfectly_cloneable() {
    let f = family_from_gram(Mat::identity(4), uniform_priors(4)).unwrap();
    let r = clone_bound(
        &CloneTask::new(f.clone(), 2, CopyCount::Finite(5)).unwrap(),
        BoundOptions::default(),
    )
    .unwrap();
    assert!((r.fidelity_lower_bound - 1.0).abs() < 1e-10);
    let e = estimation_bound(&f, 1, BoundOptions::default()).unwrap();
    assert!((e.p_lower_bound - 1.0).abs() < 1e-10);
}

#[test]
fn equal_overlap_estimation_is_reproducible() {
    let f = equal_overlap_family(3, 0.5).unwrap();
    let a = estimation_bound(&f, 2, BoundOptions::default()).unwrap();
    let b = estimation_bound(&f, 2, BoundOptions::default()).unwrap();
    assert_eq!(a, b);
    assert!(a.e_residual() <= 1e-10);
}

#[test]
fn task_validation() {
    let f = equal_overlap_family(2, 0.3).unwrap();
    assert!(CloneTask::new(f.clone(), 0, CopyCount::Finite(1)).is_err());
    assert!(CloneTask::new(f.clone(), 3, CopyCount::Finite(2)).is_err());
    assert!(CloneTask::new(f, 1, CopyCount::Infinite).is_ok());
    assert_eq!(enumerate_lambdas(4).len(), 8);
    assert!(CloneTask::new(
        equal_overlap_family(17, 0.1).unwrap(),
        1,
        CopyCount::Finite(2)
    )
    .is_err());
}
