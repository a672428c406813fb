//! Pure-state families `{|ψ_i⟩, η_i}` and their tensor-power Gram matrices.
//!
//! A family can be given by explicit unit vectors or by its Gram matrix
//! alone. The bound pipeline only ever consumes inner products, so Gram-only
//! families are first-class; the operations that need amplitudes (the
//! explicit tensor-product check) reject them.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::numerics::{hermitian_eig, inner, vec_norm, Mat, NumericsError, C64, ONE, RANK_TOL};
use crate::rng;

/// Tolerance on Gram and prior invariants.
pub const FAMILY_TOL: f64 = 1e-12;

/// Tolerance on the norm of user-supplied state vectors.
pub const NORM_TOL: f64 = 1e-10;

/// Default cap on `d^m` for [`tensor_power_check`].
pub const DEFAULT_MAX_DIM: usize = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatesError {
    #[error("family must contain at least one state")]
    EmptyFamily,
    #[error("state {index} is not normalized (norm {norm})")]
    NotNormalized { index: usize, norm: f64 },
    #[error("state {index} has length {found}, expected {expected}")]
    LengthMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("{0}")]
    BadPriors(String),
    #[error("invalid Gram matrix: {0}")]
    InvalidGram(String),
    #[error("exponent must be at least 1 (got {0})")]
    BadExponent(u32),
    #[error("vectors required: family was given by its Gram matrix only")]
    NoVectors,
    #[error("tensor power dimension {dim}^{power} exceeds the cap {max_dim}")]
    DimensionTooLarge {
        dim: usize,
        power: u32,
        max_dim: usize,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `n` pure states with prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateFamily {
    gram: Mat,
    priors: Vec<f64>,
    vectors: Option<Vec<Vec<C64>>>,
}

impl PureStateFamily {
    /// Number of states.
    pub fn n(&self) -> usize {
        self.priors.len()
    }

    /// Hilbert-space dimension, when amplitudes are known.
    pub fn dim(&self) -> Option<usize> {
        self.vectors.as_ref().map(|v| v[0].len())
    }

    /// Single-copy Gram matrix, `gram[i][j] = ⟨ψ_i|ψ_j⟩`.
    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn vectors(&self) -> Option<&[Vec<C64>]> {
        self.vectors.as_deref()
    }

    /// Same states with different priors.
    pub fn with_priors(&self, priors: Vec<f64>) -> Result<Self, StatesError> {
        validate_priors(&priors, self.n())?;
        Ok(Self {
            priors,
            ..self.clone()
        })
    }
}

fn validate_priors(priors: &[f64], n: usize) -> Result<(), StatesError> {
    if priors.len() != n {
        return Err(StatesError::BadPriors(alloc::format!(
            "expected {n} priors, found {}",
            priors.len()
        )));
    }
    if let Some(p) = priors.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(StatesError::BadPriors(alloc::format!(
            "priors must be finite and nonnegative (found {p})"
        )));
    }
    let sum: f64 = priors.iter().sum();
    if (sum - 1.0).abs() > FAMILY_TOL {
        return Err(StatesError::BadPriors(alloc::format!(
            "priors must sum to 1 (sum = {sum})"
        )));
    }
    Ok(())
}

/// Family from explicit state vectors.
///
/// Vectors must have unit norm within [`NORM_TOL`]; they are rescaled to unit
/// norm exactly so the Gram diagonal is 1.
pub fn family_from_vectors(
    vectors: Vec<Vec<C64>>,
    priors: Vec<f64>,
) -> Result<PureStateFamily, StatesError> {
    if vectors.is_empty() {
        return Err(StatesError::EmptyFamily);
    }
    let d = vectors[0].len();
    if d == 0 {
        return Err(StatesError::LengthMismatch {
            index: 0,
            expected: 1,
            found: 0,
        });
    }
    let mut normalized = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.into_iter().enumerate() {
        if v.len() != d {
            return Err(StatesError::LengthMismatch {
                index,
                expected: d,
                found: v.len(),
            });
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(StatesError::Numerics(NumericsError::NonFinite));
        }
        let norm = vec_norm(&v);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(StatesError::NotNormalized { index, norm });
        }
        normalized.push(v.into_iter().map(|z| z / norm).collect::<Vec<_>>());
    }
    validate_priors(&priors, normalized.len())?;
    let n = normalized.len();
    let gram = Mat::from_fn(n, n, |i, j| {
        if i == j {
            ONE
        } else {
            inner(&normalized[i], &normalized[j])
        }
    });
    Ok(PureStateFamily {
        gram,
        priors,
        vectors: Some(normalized),
    })
}

/// Family given only by its Gram matrix.
pub fn family_from_gram(gram: Mat, priors: Vec<f64>) -> Result<PureStateFamily, StatesError> {
    let n = gram.rows();
    if n == 0 {
        return Err(StatesError::EmptyFamily);
    }
    if !gram.is_square() {
        return Err(StatesError::InvalidGram(alloc::format!(
            "not square ({}x{})",
            gram.rows(),
            gram.cols()
        )));
    }
    if !gram.is_finite() {
        return Err(StatesError::InvalidGram("non-finite entry".into()));
    }
    let defect = gram.hermitian_defect();
    if defect > FAMILY_TOL {
        return Err(StatesError::InvalidGram(alloc::format!(
            "not Hermitian (defect {defect:e})"
        )));
    }
    for i in 0..n {
        let d = gram[(i, i)];
        if (d - ONE).norm() > FAMILY_TOL {
            return Err(StatesError::InvalidGram(alloc::format!(
                "diagonal entry {i} is {} (states must be normalized)",
                d.re
            )));
        }
    }
    validate_priors(&priors, n)?;
    let gram = Mat::from_fn(n, n, |i, j| match i.cmp(&j) {
        core::cmp::Ordering::Equal => ONE,
        core::cmp::Ordering::Less => gram[(i, j)],
        core::cmp::Ordering::Greater => gram[(j, i)].conj(),
    });
    let eig = hermitian_eig(&gram, FAMILY_TOL)?;
    let min = eig.min_eigenvalue();
    if min < -RANK_TOL * eig.max_eigenvalue() {
        return Err(StatesError::InvalidGram(alloc::format!(
            "not positive semidefinite (eigenvalue {min:e})"
        )));
    }
    Ok(PureStateFamily {
        gram,
        priors,
        vectors: None,
    })
}

/// Two states with overlap `⟨ψ_1|ψ_2⟩ = s`.
pub fn two_state_family(s: C64, priors: [f64; 2]) -> Result<PureStateFamily, StatesError> {
    family_from_gram(
        Mat::from_rows(&[&[ONE, s], &[s.conj(), ONE]]),
        priors.to_vec(),
    )
}

/// `n` states with equal real pairwise overlap `s` and uniform priors.
pub fn equal_overlap_family(n: usize, s: f64) -> Result<PureStateFamily, StatesError> {
    let gram = Mat::from_fn(n, n, |i, j| if i == j { ONE } else { C64::new(s, 0.0) });
    family_from_gram(gram, uniform_priors(n))
}

pub fn uniform_priors(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Entrywise power `X^(m)`, `x[i][j] = gram[i][j]^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramPower {
    pub m: u32,
    pub x: Mat,
}

/// Gram matrix of the `m`-fold tensor powers: the entrywise `m`-th power of
/// the single-copy Gram matrix, computed by repeated multiplication.
pub fn gram_power(family: &PureStateFamily, m: u32) -> Result<GramPower, StatesError> {
    if m < 1 {
        return Err(StatesError::BadExponent(m));
    }
    let g = family.gram();
    let n = g.rows();
    let mut x = Mat::identity(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let base = g[(i, j)];
            let mut acc = base;
            for _ in 1..m {
                acc *= base;
            }
            x[(i, j)] = acc;
            x[(j, i)] = acc.conj();
        }
    }
    Ok(GramPower { m, x })
}

/// `n` Haar-random pure states in dimension `d` with uniform priors.
///
/// Components are independent standard complex Gaussians, normalized.
pub fn random_family(seed: u64, n: usize, d: usize) -> PureStateFamily {
    assert!(
        n >= 1 && d >= 1,
        "need at least one state and one dimension"
    );
    let mut rng = rng::stream(seed, 0);
    let vectors = random_vectors(&mut rng, n, d);
    family_from_vectors(vectors, uniform_priors(n)).expect("generated vectors are normalized")
}

/// Like [`random_family`] but with priors drawn uniformly from the simplex.
pub fn random_family_with_priors(seed: u64, n: usize, d: usize) -> PureStateFamily {
    assert!(
        n >= 1 && d >= 1,
        "need at least one state and one dimension"
    );
    let mut rng = rng::stream(seed, 0);
    let vectors = random_vectors(&mut rng, n, d);
    let mut priors: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = priors.iter().sum();
    priors.iter_mut().for_each(|p| *p /= total);
    family_from_vectors(vectors, priors).expect("generated family is valid")
}

fn random_vectors(rng: &mut rng::Rng, n: usize, d: usize) -> Vec<Vec<C64>> {
    (0..n)
        .map(|_| {
            let v: Vec<C64> = (0..d)
                .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
                .collect();
            let norm = vec_norm(&v);
            v.into_iter().map(|z| z / norm).collect()
        })
        .collect()
}

/// Random unit vector of dimension `d`.
pub fn random_state(rng: &mut rng::Rng, d: usize) -> Vec<C64> {
    random_vectors(rng, 1, d).pop().expect("one vector")
}

/// Builds `|ψ_i⟩^{⊗m} ⊗ |Σ⟩` explicitly for every state and returns
/// `max_ij |⟨ψ_i^{⊗m}Σ|ψ_j^{⊗m}Σ⟩ − gram[i][j]^m|`.
///
/// The blank `|Σ⟩` is the first canonical basis vector of a `d`-dimensional
/// register; its inner product with itself is computed, not assumed.
pub fn tensor_power_check(
    family: &PureStateFamily,
    m: u32,
    max_dim: usize,
) -> Result<f64, StatesError> {
    let vectors = family.vectors().ok_or(StatesError::NoVectors)?;
    if m < 1 {
        return Err(StatesError::BadExponent(m));
    }
    let d = vectors[0].len();
    let too_large = StatesError::DimensionTooLarge {
        dim: d,
        power: m,
        max_dim,
    };
    match d.checked_pow(m) {
        Some(total) if total <= max_dim => {}
        _ => return Err(too_large),
    }

    let powers: Vec<Vec<C64>> = vectors.iter().map(|v| kron_power(v, m)).collect();
    let mut blank = vec![C64::new(0.0, 0.0); d];
    blank[0] = ONE;
    let blank_overlap = inner(&blank, &blank);

    let expected = gram_power(family, m)?.x;
    let n = family.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let explicit = inner(&powers[i], &powers[j]) * blank_overlap;
            worst = worst.max((explicit - expected[(i, j)]).norm());
        }
    }
    Ok(worst)
}

fn kron_power(v: &[C64], m: u32) -> Vec<C64> {
    let mut out = v.to_vec();
    for _ in 1..m {
        out = out
            .iter()
            .flat_map(|&a| v.iter().map(move |&b| a * b))
            .collect();
    }
    out
}
