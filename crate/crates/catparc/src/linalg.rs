//! Dense symmetric eigen-decomposition and derived matrix functions.
//!
//! Matrices in this pipeline are small (block sizes are bounded by the number
//! of residue categories), so a cyclic Jacobi solver is accurate and fast
//! enough; it also keeps the core free of external BLAS/LAPACK backends and
//! generic over the scalar type.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Full spectrum of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymmetricSpectrum<F> {
    pub eigenvalues: Vec<F>,
    /// Orthonormal eigenvectors, one column per eigenvalue.
    pub eigenvectors: Array2<F>,
}

/// Eigen-decomposition of a symmetric matrix via cyclic Jacobi rotations.
///
/// The input is symmetrized as `(M + M^T)/2` first; non-finite entries are
/// rejected.
pub fn sym_eig<F: Scalar>(m: &Array2<F>) -> Result<SymmetricSpectrum<F>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Numeric(format!(
            "sym_eig requires a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite entry in symmetric matrix".into()));
    }

    let half = F::from_f64_lossy(0.5);
    let mut a = Array2::<F>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            a[[i, j]] = (m[[i, j]] + m[[j, i]]) * half;
        }
    }

    let mut v = Array2::<F>::eye(n);
    if n <= 1 {
        let eigenvalues = if n == 1 { vec![a[[0, 0]]] } else { vec![] };
        return Ok(SymmetricSpectrum {
            eigenvalues,
            eigenvectors: v,
        });
    }

    let eps = F::epsilon() * F::from_f64_lossy(1e2);
    let max_sweeps = 100;
    for _ in 0..max_sweeps {
        let mut off = F::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off = off + a[[i, j]] * a[[i, j]];
            }
        }
        let scale: F = (0..n).map(|i| a[[i, i]] * a[[i, i]]).sum::<F>() + off + off;
        if off + off <= eps * eps * scale.max(F::one()) {
            break;
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == F::zero() {
                    continue;
                }
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                let theta = (aqq - app) / (apq + apq);
                // tan of the rotation angle, smaller root for stability
                let t = {
                    let sign = if theta >= F::zero() { F::one() } else { -F::one() };
                    sign / (theta.abs() + (theta * theta + F::one()).sqrt())
                };
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[[j, j]]
            .partial_cmp(&a[[i, i]])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let eigenvalues: Vec<F> = order.iter().map(|&i| a[[i, i]]).collect();
    let mut vectors = Array2::<F>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[[k, dst]] = v[[k, src]];
        }
    }

    Ok(SymmetricSpectrum {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Reconstructs `V f(Λ) V^T` for a scalar function of the eigenvalues.
fn spectral_map<F: Scalar>(spec: &SymmetricSpectrum<F>, f: impl Fn(F) -> F) -> Array2<F> {
    let n = spec.eigenvalues.len();
    let v = &spec.eigenvectors;
    let mut out = Array2::<F>::zeros((n, n));
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        let flam = f(lam);
        for i in 0..n {
            let vik = v[[i, k]] * flam;
            for j in 0..n {
                out[[i, j]] = out[[i, j]] + vik * v[[j, k]];
            }
        }
    }
    out
}

/// Default ridge used before inverting near-collinear residual covariance
/// blocks: `1e-8 * trace(M) / dim`.
pub fn default_ridge<F: Scalar>(m: &Array2<F>) -> F {
    let n = m.nrows();
    if n == 0 {
        return F::zero();
    }
    let trace: F = (0..n).map(|i| m[[i, i]]).sum();
    F::from_f64_lossy(1e-8) * trace / F::from_usize_lossy(n)
}

/// Inverse matrix square root `V diag((λ+ridge)^{-1/2}) V^T` of a symmetric
/// positive definite matrix.
pub fn inv_sqrt_sym<F: Scalar>(m: &Array2<F>, ridge: F) -> Result<Array2<F>> {
    let spec = sym_eig(m)?;
    let floor = F::from_f64_lossy(1e-12);
    if let Some(&lam_min) = spec.eigenvalues.last() {
        if lam_min + ridge <= floor {
            return Err(Error::Numeric(format!(
                "matrix not positive definite: smallest eigenvalue {} with ridge {}",
                lam_min, ridge
            )));
        }
    }
    Ok(spectral_map(&spec, |lam| {
        F::one() / (lam + ridge).sqrt()
    }))
}

/// Inverse of a symmetric positive definite matrix through its spectrum.
pub fn inv_sym<F: Scalar>(m: &Array2<F>, ridge: F) -> Result<Array2<F>> {
    let spec = sym_eig(m)?;
    let floor = F::from_f64_lossy(1e-12);
    if let Some(&lam_min) = spec.eigenvalues.last() {
        if lam_min + ridge <= floor {
            return Err(Error::Numeric(format!(
                "matrix not invertible: smallest eigenvalue {} with ridge {}",
                lam_min, ridge
            )));
        }
    }
    Ok(spectral_map(&spec, |lam| F::one() / (lam + ridge)))
}

/// Symmetric square root `V diag(max(λ,0)^{1/2}) V^T`.
pub fn sqrt_sym<F: Scalar>(m: &Array2<F>) -> Result<Array2<F>> {
    let spec = sym_eig(m)?;
    Ok(spectral_map(&spec, |lam| lam.max(F::zero()).sqrt()))
}

/// Largest singular value of a (rectangular) matrix.
pub fn spectral_norm<F: Scalar>(m: &Array2<F>) -> Result<F> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(F::zero());
    }
    // Work on the smaller Gram matrix.
    let gram = if m.nrows() <= m.ncols() {
        m.dot(&m.t())
    } else {
        m.t().dot(m)
    };
    let spec = sym_eig(&gram)?;
    let top = spec.eigenvalues.first().copied().unwrap_or(F::zero());
    Ok(top.max(F::zero()).sqrt())
}
