use clonebound_core::numerics::{Mat, C64};
use clonebound_core::states::{
    equal_overlap_family, family_from_gram, family_from_vectors, gram_power, random_family,
    random_family_with_priors, tensor_power_check, StatesError,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_power_is_multiplicative(seed in any::<u64>(), n in 1usize..5, d in 1usize..4, m in 1u32..4, k in 1u32..4) {
        let f = random_family(seed, n, d);
        let xm = gram_power(&f, m).unwrap().x;
        let xk = gram_power(&f, k).unwrap().x;
        let xmk = gram_power(&f, m + k).unwrap().x;
        let hadamard = Mat::from_fn(n, n, |i, j| xm[(i, j)] * xk[(i, j)]);
        prop_assert!((&xmk - &hadamard).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn tensor_powers_match_gram_power(seed in any::<u64>(), n in 1usize..4, d in 1usize..4, m in 1u32..4) {
        let f = random_family(seed, n, d);
        prop_assert!(tensor_power_check(&f, m, 4096).unwrap() <= 1e-12);
    }

    #[test]
    fn random_priors_are_a_distribution(seed in any::<u64>(), n in 1usize..8) {
        let f = random_family_with_priors(seed, n, 3);
        let sum: f64 = f.priors().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(f.priors().iter().all(|&p| p >= 0.0));
    }
}

#[test]
fn random_family_is_deterministic() {
    assert_eq!(random_family(7, 3, 2), random_family(7, 3, 2));
    assert_ne!(random_family(7, 3, 2), random_family(8, 3, 2));
}

#[test]
fn one_dimensional_states_are_parallel() {
    let f = random_family(1, 2, 1);
    assert!((f.gram()[(0, 1)].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn priors_must_sum_to_one() {
    let err = family_from_gram(Mat::identity(2), vec![0.5, 0.4]).unwrap_err();
    assert!(err.to_string().contains("priors must sum to 1"));
}

#[test]
fn gram_must_be_psd_with_unit_diagonal() {
    let bad = Mat::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
    assert!(family_from_gram(bad, vec![0.5, 0.5]).is_err());
    let off = Mat::from_real_rows(&[&[2.0, 0.0], &[0.0, 1.0]]);
    assert!(family_from_gram(off, vec![0.5, 0.5]).is_err());
}

#[test]
fn vectors_must_be_normalized() {
    let v = vec![vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]];
    assert!(matches!(
        family_from_vectors(v, vec![1.0]),
        Err(StatesError::NotNormalized { .. })
    ));
}

#[test]
fn equal_overlap_gram() {
    let f = equal_overlap_family(3, 0.5).unwrap();
    let x2 = gram_power(&f, 2).unwrap().x;
    assert!((x2[(0, 2)].re - 0.25).abs() < 1e-15);
}

#[test]
fn check_needs_vectors_and_respects_cap() {
    let f = equal_overlap_family(2, 0.5).unwrap();
    assert!(matches!(
        tensor_power_check(&f, 2, 4096),
        Err(StatesError::NoVectors)
    ));
    let g = random_family(3, 2, 4);
    assert!(tensor_power_check(&g, 6, 4096).is_ok());
    assert!(matches!(
        tensor_power_check(&g, 7, 4096),
        Err(StatesError::DimensionTooLarge { .. })
    ));
}
