use alloc::vec::Vec;

use super::{hermitian_eig, inner, vec_norm, Mat, NumericsError, C64, ZERO};

/// Relative Hermitian defect accepted by the kernels built on [`hermitian_eig`].
const HERMITIAN_TOL: f64 = 1e-10;

/// Full singular value decomposition `o = U diag(σ) W†`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// `rows × rows`, unitary.
    pub u: Mat,
    /// `min(rows, cols)` values, descending.
    pub sigma: Vec<f64>,
    /// `cols × cols`, unitary.
    pub w: Mat,
}

impl Svd {
    pub fn reconstruct(&self) -> Mat {
        let (m, k) = (self.u.rows(), self.w.rows());
        Mat::from_fn(m, k, |i, j| {
            self.sigma
                .iter()
                .enumerate()
                .map(|(l, &s)| self.u[(i, l)] * self.w[(j, l)].conj() * s)
                .sum()
        })
    }
}

/// Singular value decomposition from the eigendecomposition of `o†o`.
///
/// Right singular vectors come from the eigenvectors of `o†o`; each left
/// vector is `o·w_k` normalized, re-orthogonalized against the larger ones,
/// and columns belonging to (numerically) zero singular values are completed
/// by Gram–Schmidt over the standard basis.
pub fn svd(o: &Mat) -> Result<Svd, NumericsError> {
    if !o.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    let (m, k) = (o.rows(), o.cols());
    let p = m.min(k);
    let gram = o.adjoint().matmul(o);
    let eig = hermitian_eig(&gram, HERMITIAN_TOL)?;

    // descending eigenvalue order, stable within ties
    let mut w = Mat::zeros(k, k);
    for j in 0..k {
        w.set_column(j, &eig.eigenvectors.column(k - 1 - j));
    }
    reverse_ties(&mut w, &eig.eigenvalues);

    let images: Vec<Vec<C64>> = (0..k).map(|j| o.mul_vec(&w.column(j))).collect();
    let mut sigma: Vec<f64> = images.iter().map(|x| vec_norm(x)).collect();

    // Order by the directly computed norms; these can disagree with the
    // eigenvalue order at the rounding level.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let w = Mat::from_fn(k, k, |i, j| w[(i, order[j])]);
    let images: Vec<Vec<C64>> = order.iter().map(|&j| images[j].clone()).collect();
    sigma = order.iter().map(|&j| sigma[j]).collect();

    let smax = sigma.first().copied().unwrap_or(0.0);
    let zero_cut = 64.0 * f64::EPSILON * smax;
    let mut ucols: Vec<Vec<C64>> = Vec::with_capacity(m);
    for (j, x) in images.iter().enumerate().take(p) {
        if sigma[j] <= zero_cut || sigma[j] == 0.0 {
            break;
        }
        let mut r = x.clone();
        orthogonalize(&mut r, &ucols);
        orthogonalize(&mut r, &ucols);
        let nr = vec_norm(&r);
        if nr <= zero_cut {
            break;
        }
        ucols.push(r.iter().map(|z| z / nr).collect());
    }
    complete_basis(&mut ucols, m);

    sigma.truncate(p);
    Ok(Svd {
        u: Mat::from_columns(&ucols),
        sigma,
        w,
    })
}

/// After reversing an ascending eigenvector order, ties end up reversed too;
/// restore their original relative order so identity-like inputs stay fixed.
fn reverse_ties(w: &mut Mat, ascending: &[f64]) {
    let k = ascending.len();
    let desc: Vec<f64> = ascending.iter().rev().copied().collect();
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && desc[end] == desc[start] {
            end += 1;
        }
        let block: Vec<Vec<C64>> = (start..end).map(|j| w.column(j)).collect();
        for (off, col) in block.iter().rev().enumerate() {
            w.set_column(start + off, col);
        }
        start = end;
    }
}

fn orthogonalize(r: &mut [C64], basis: &[Vec<C64>]) {
    for b in basis {
        let c = inner(b, r);
        for (x, &y) in r.iter_mut().zip(b) {
            *x -= c * y;
        }
    }
}

/// Extends orthonormal `cols` to `dim` vectors using the standard basis.
fn complete_basis(cols: &mut Vec<Vec<C64>>, dim: usize) {
    while cols.len() < dim {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for e in 0..dim {
            let mut r = alloc::vec![ZERO; dim];
            r[e] = C64::new(1.0, 0.0);
            orthogonalize(&mut r, cols);
            orthogonalize(&mut r, cols);
            let nr = vec_norm(&r);
            if best.as_ref().is_none_or(|(bn, _)| nr > *bn) {
                best = Some((nr, r));
            }
        }
        let (nr, r) = best.expect("dim > 0");
        cols.push(r.iter().map(|z| z / nr).collect());
    }
}

/// Unitary maximizing `|tr(V·O)|` together with the maximum (the trace norm).
#[derive(Debug, Clone, PartialEq)]
pub struct PolarResult {
    pub v_opt: Mat,
    pub trace_norm: f64,
    /// Descending.
    pub singular_values: Vec<f64>,
}

/// `V = W·U†` from `o = U Σ W†`, so that `V·o = W Σ W† = √(o†o)` and
/// `tr(V·o) = Σσ` with zero phase.
pub fn polar_max_unitary(o: &Mat) -> Result<PolarResult, NumericsError> {
    if !o.is_square() {
        return Err(NumericsError::NotSquare {
            rows: o.rows(),
            cols: o.cols(),
        });
    }
    let Svd { u, sigma, w } = svd(o)?;
    let v_opt = w.matmul(&u.adjoint());
    let trace_norm = sigma.iter().sum();
    Ok(PolarResult {
        v_opt,
        trace_norm,
        singular_values: sigma,
    })
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues in `[-tol·λ_max, 0)` are clamped to zero; anything lower is
/// rejected.
pub fn matrix_sqrt_psd(h: &Mat, tol: f64) -> Result<Mat, NumericsError> {
    let eig = hermitian_eig(h, HERMITIAN_TOL)?;
    check_psd(eig.min_eigenvalue(), eig.max_eigenvalue(), tol)?;
    Ok(eig.reconstruct_with(|l| libm::sqrt(l.max(0.0))))
}

fn check_psd(min: f64, max: f64, tol: f64) -> Result<(), NumericsError> {
    if min < -tol * max.max(f64::MIN_POSITIVE) {
        return Err(NumericsError::NotPsd { eigenvalue: min });
    }
    Ok(())
}

/// Factor `F` (`rank × n`) with `F†F = x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdFactor {
    pub factor: Mat,
    pub rank: usize,
}

/// Factorizes a Hermitian PSD matrix as `x = F†F` with `F` of full row rank.
///
/// Row `k` of `F` is `√λ_k q_k†` for the eigenpairs with `λ_k > tol·λ_max`,
/// largest first. Dropping the remaining eigenpairs is what removes the
/// linearly dependent directions of a rank-deficient Gram matrix.
pub fn psd_factor(x: &Mat, tol: f64) -> Result<PsdFactor, NumericsError> {
    let eig = hermitian_eig(x, HERMITIAN_TOL)?;
    let lmax = eig.max_eigenvalue();
    check_psd(eig.min_eigenvalue(), lmax, tol)?;
    let n = x.rows();
    let cut = tol * lmax;
    // descending, ties in original order
    let mut keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > cut).collect();
    keep.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let rank = keep.len();
    let q = &eig.eigenvectors;
    let factor = Mat::from_fn(rank, n, |i, j| {
        let k = keep[i];
        q[(j, k)].conj() * libm::sqrt(eig.eigenvalues[k])
    });
    Ok(PsdFactor { factor, rank })
}

/// Moore–Penrose pseudo-inverse; singular values at or below `tol·σ_max` are treated as zero.
pub fn pseudo_inverse(o: &Mat, tol: f64) -> Result<Mat, NumericsError> {
    let Svd { u, sigma, w } = svd(o)?;
    let smax = sigma.first().copied().unwrap_or(0.0);
    let (m, k) = (o.rows(), o.cols());
    Ok(Mat::from_fn(k, m, |i, j| {
        sigma
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > tol * smax && s > 0.0)
            .map(|(l, &s)| w[(i, l)] * u[(j, l)].conj() / s)
            .sum()
    }))
}
