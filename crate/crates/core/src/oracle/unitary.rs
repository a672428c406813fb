use alloc::vec::Vec;

use rand::Rng as _;

use crate::numerics::{hermitian_eig, EigResult, Mat, NumericsError, C64};
use crate::rng::Rng;

/// Point `V = base · exp(S(θ))` on the unitary group.
///
/// `θ` has `r²` real entries: the first `r` are the imaginary diagonal of the
/// skew-Hermitian generator (`S_kk = iθ_k`), followed by `(re, im)` pairs of
/// the strict upper triangle in row-major order (`S_jk = z`, `S_kj = −z̄`).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryPoint {
    base: Mat,
    params: Vec<f64>,
    exp: GeneratorExp,
}

impl UnitaryPoint {
    pub fn new(base: Mat, params: Vec<f64>) -> Result<Self, NumericsError> {
        let r = base.rows();
        if !base.is_square() || params.len() != r * r {
            return Err(NumericsError::DimensionMismatch {
                expected: (r, r * r),
                found: (base.cols(), params.len()),
            });
        }
        let exp = GeneratorExp::new(&params, r)?;
        Ok(Self { base, params, exp })
    }

    /// `exp(S(θ))` with `θ` uniform in `[−π, π]` per entry.
    pub fn random(rng: &mut Rng, r: usize) -> Result<Self, NumericsError> {
        let params = (0..r * r)
            .map(|_| rng.random_range(-core::f64::consts::PI..=core::f64::consts::PI))
            .collect();
        Self::new(Mat::identity(r), params)
    }

    pub fn dim(&self) -> usize {
        self.base.rows()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn base(&self) -> &Mat {
        &self.base
    }

    /// The unitary `base · exp(S)`.
    pub fn unitary(&self) -> Mat {
        self.base.matmul(&self.exp.v)
    }

    pub(crate) fn exp(&self) -> &GeneratorExp {
        &self.exp
    }
}

/// Skew-Hermitian generator for a parameter vector.
pub fn generator(params: &[f64], r: usize) -> Mat {
    assert_eq!(params.len(), r * r, "need r² parameters");
    let mut s = Mat::zeros(r, r);
    for k in 0..r {
        s[(k, k)] = C64::new(0.0, params[k]);
    }
    let mut idx = r;
    for j in 0..r {
        for k in (j + 1)..r {
            let z = C64::new(params[idx], params[idx + 1]);
            s[(j, k)] = z;
            s[(k, j)] = -z.conj();
            idx += 2;
        }
    }
    s
}

/// Maps a generator-space gradient matrix `Γ` (with `dF = 2 Re⟨Γ, dS⟩`) to
/// the parameter gradient.
pub(crate) fn params_gradient(gamma: &Mat) -> Vec<f64> {
    let r = gamma.rows();
    let mut g = Vec::with_capacity(r * r);
    for k in 0..r {
        g.push(2.0 * gamma[(k, k)].im);
    }
    for j in 0..r {
        for k in (j + 1)..r {
            g.push(2.0 * (gamma[(j, k)].re - gamma[(k, j)].re));
            g.push(2.0 * (gamma[(j, k)].im + gamma[(k, j)].im));
        }
    }
    g
}

/// `exp(S)` through the eigendecomposition of the Hermitian `iS`:
/// `iS = Q diag(μ) Q†`, `exp(S) = Q diag(e^{−iμ}) Q†`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GeneratorExp {
    pub q: Mat,
    pub mu: Vec<f64>,
    pub v: Mat,
}

impl GeneratorExp {
    pub fn new(params: &[f64], r: usize) -> Result<Self, NumericsError> {
        let h = generator(params, r).scale(C64::new(0.0, 1.0));
        let eig = hermitian_eig(&h, 1e-12)?;
        let v = eig.reconstruct_complex(|mu| C64::new(libm::cos(mu), -libm::sin(mu)));
        Ok(Self {
            q: eig.eigenvectors,
            mu: eig.eigenvalues,
            v,
        })
    }

    /// `exp(S) − I`, accurate when `S` is small.
    pub fn minus_identity(&self) -> Mat {
        let eig = EigResult {
            eigenvalues: self.mu.clone(),
            eigenvectors: self.q.clone(),
        };
        eig.reconstruct_complex(|mu| {
            let half = libm::sin(0.5 * mu);
            C64::new(-2.0 * half * half, -libm::sin(mu))
        })
    }

    /// Divided differences of `z ↦ e^z` at the eigenvalues `−iμ` of `S`.
    pub fn divided_differences(&self) -> Mat {
        let r = self.mu.len();
        Mat::from_fn(r, r, |j, k| {
            let (a, b) = (self.mu[j], self.mu[k]);
            let mid = 0.5 * (a + b);
            let half = 0.5 * (a - b);
            let sinc = if half.abs() < 1e-8 {
                1.0 - half * half / 6.0
            } else {
                libm::sin(half) / half
            };
            C64::new(libm::cos(mid), -libm::sin(mid)) * sinc
        })
    }

    /// Pulls a Euclidean gradient `G` of `F(V)` at `V = base·exp(S)` back to
    /// generator space: `Γ = Q ((Q† base† G Q) ∘ conj(Φ)) Q†`.
    pub fn pullback(&self, base_adj_g: &Mat) -> Mat {
        let q = &self.q;
        let ghat = q.adjoint().matmul(base_adj_g).matmul(q);
        let phi = self.divided_differences();
        let r = ghat.rows();
        let mhat = Mat::from_fn(r, r, |j, k| ghat[(j, k)] * phi[(j, k)].conj());
        q.matmul(&mhat).matmul(&q.adjoint())
    }
}
