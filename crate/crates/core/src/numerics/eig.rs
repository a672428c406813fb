use alloc::vec::Vec;

use super::{Mat, NumericsError, C64, JACOBI_TOL, MAX_SWEEPS, ZERO};

/// Eigendecomposition `h = Q diag(λ) Q†` of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, in the order of `eigenvalues`.
    pub eigenvectors: Mat,
}

impl EigResult {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `Q diag(f(λ)) Q†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Mat {
        let q = &self.eigenvectors;
        let n = q.rows();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        Mat::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for (k, &w) in fl.iter().enumerate() {
                acc += q[(i, k)] * q[(j, k)].conj() * w;
            }
            acc
        })
    }

    /// `Q diag(f(λ)) Q†` for a complex-valued spectral function.
    pub fn reconstruct_complex(&self, f: impl Fn(f64) -> C64) -> Mat {
        let q = &self.eigenvectors;
        let n = q.rows();
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        Mat::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for (k, &w) in fl.iter().enumerate() {
                acc += q[(i, k)] * w * q[(j, k)].conj();
            }
            acc
        })
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// `tol` bounds the accepted relative Hermitian defect `‖h − h†‖_F / ‖h‖_F`.
/// The input is symmetrized before iterating.
pub fn hermitian_eig(h: &Mat, tol: f64) -> Result<EigResult, NumericsError> {
    if !h.is_square() {
        return Err(NumericsError::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    if !h.is_finite() {
        return Err(NumericsError::NonFinite);
    }
    let n = h.rows();
    let norm = h.frobenius_norm();
    let defect = h.hermitian_defect();
    if defect > tol * norm {
        return Err(NumericsError::NotHermitian {
            defect: if norm > 0.0 { defect / norm } else { defect },
        });
    }

    let mut a = Mat::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(h[(i, i)].re, 0.0)
        } else {
            (h[(i, j)] + h[(j, i)].conj()) * 0.5
        }
    });
    let mut v = Mat::identity(n);
    let threshold = JACOBI_TOL * norm;

    let mut sweeps = 0;
    while off_diagonal_norm(&a) > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(NumericsError::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their original column order
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors = Mat::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &Mat) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    libm::sqrt(s)
}

/// Annihilates `a[p][q]` with the unitary `J = D·R`, `D = diag(1, e^{-iφ})` on
/// the (p, q) plane removing the phase of `a[p][q]` and `R` the real Jacobi
/// rotation of the resulting real symmetric 2×2 block. Updates `a ← J† a J`
/// and `v ← v J`.
fn rotate(a: &mut Mat, v: &mut Mat, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / g;

    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.is_finite() {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (libm::fabs(theta) + libm::hypot(1.0, theta))
    } else {
        0.0
    };
    let c = 1.0 / libm::hypot(1.0, t);
    let s = t * c;

    // J = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] in the (p, q) plane.
    let ph = phase.conj();
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = ph * (-s);
    let jqq = ph * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(app - t * g, 0.0);
    a[(q, q)] = C64::new(aqq + t * g, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(h: &Mat, e: &EigResult) -> f64 {
        (h - &e.reconstruct_with(|l| l)).frobenius_norm()
    }

    #[test]
    fn symmetric_two_by_two() {
        let h = Mat::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let e = hermitian_eig(&h, 1e-12).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-14);
        assert!(residual(&h, &e) < 1e-14);
    }

    #[test]
    fn identity_is_fixed() {
        let e = hermitian_eig(&Mat::identity(3), 1e-12).unwrap();
        assert_eq!(e.eigenvalues, alloc::vec![1.0, 1.0, 1.0]);
        assert!(e.eigenvectors.unitarity_defect() < 1e-15);
    }

    #[test]
    fn pauli_y() {
        let i = C64::new(0.0, 1.0);
        let h = Mat::from_rows(&[&[ZERO, -i], &[i, ZERO]]);
        let e = hermitian_eig(&h, 1e-12).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(residual(&h, &e) < 1e-14);
        assert!(e.eigenvectors.unitarity_defect() < 1e-14);
    }

    #[test]
    fn complex_three_by_three() {
        let h = Mat::from_rows(&[
            &[C64::new(2.0, 0.0), C64::new(0.3, -0.7), C64::new(-1.0, 0.2)],
            &[C64::new(0.3, 0.7), C64::new(-1.0, 0.0), C64::new(0.0, 0.5)],
            &[
                C64::new(-1.0, -0.2),
                C64::new(0.0, -0.5),
                C64::new(0.5, 0.0),
            ],
        ]);
        let e = hermitian_eig(&h, 1e-12).unwrap();
        assert!(residual(&h, &e) < 1e-13);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = e.eigenvalues.iter().sum();
        assert!((trace - 1.5).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = Mat::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(
            hermitian_eig(&h, 1e-12),
            Err(NumericsError::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_non_square() {
        let h = Mat::zeros(2, 3);
        assert!(matches!(
            hermitian_eig(&h, 1e-12),
            Err(NumericsError::NotSquare { .. })
        ));
    }

    #[test]
    fn zero_matrix() {
        let e = hermitian_eig(&Mat::zeros(3, 3), 1e-12).unwrap();
        assert_eq!(e.eigenvalues, alloc::vec![0.0; 3]);
    }
}
