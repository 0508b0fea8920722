//! Small dense linear-algebra helpers shared by the model, solver and
//! certification code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative tolerance for the PSD check: `min eig >= -PSD_REL_TOL * max eig`.
pub const PSD_REL_TOL: f64 = 1e-8;

const EIGEN_MAX_ITER: usize = 100_000;

fn decomposition_error(m: &DMatrix<f64>) -> Error {
    let diag = m.diagonal();
    Error::Decomposition {
        dim: m.nrows(),
        max_abs: m.amax(),
        diag_min: diag.min(),
        diag_max: diag.max(),
    }
}

fn require_square(m: &DMatrix<f64>, context: &'static str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::dims(
            context,
            "square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    Ok(())
}

/// Eigendecomposition of the symmetrized input `(m + mᵀ)/2`.
pub fn sym_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    require_square(m, "symmetric eigendecomposition")?;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(decomposition_error(m));
    }
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::try_new(sym, f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(|| decomposition_error(m))
}

/// Fails with the offending eigenvalue when `m` is not (numerically) PSD.
pub fn check_psd(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() == 0 {
        return Ok(());
    }
    let eig = sym_eigen(m)?;
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if min < -PSD_REL_TOL * max.max(0.0) || (max <= 0.0 && min < 0.0) {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    Ok(())
}

/// Symmetric square root through the eigendecomposition, with negative
/// eigenvalues clamped to zero. Works for singular PSD matrices where a
/// Cholesky factor does not exist.
pub fn sym_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = sym_eigen(m)?;
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&roots) * q.transpose())
}

/// `ρ(Σ) = max_j √Σ_jj`.
pub fn max_diag_sqrt(m: &DMatrix<f64>) -> f64 {
    m.diagonal().iter().fold(0.0_f64, |acc, &d| acc.max(d.max(0.0).sqrt()))
}

/// Largest Euclidean column norm of `x`, divided by `√n`.
pub fn max_scaled_column_norm(x: &DMatrix<f64>) -> f64 {
    let n = x.nrows() as f64;
    x.column_iter().map(|c| c.norm()).fold(0.0, f64::max) / n.sqrt()
}

/// Largest eigenvalue of `XᵀX/n`, i.e. `s₁(X/√n)²`.
pub fn max_gram_eigenvalue(x: &DMatrix<f64>) -> Result<f64> {
    let n = x.nrows() as f64;
    let gram = x.tr_mul(x) / n;
    Ok(sym_eigen(&gram)?.eigenvalues.max().max(0.0))
}

/// Singular values of `x`, descending.
pub fn singular_values(x: &DMatrix<f64>) -> DVector<f64> {
    let mut sv: Vec<f64> = x.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    DVector::from_vec(sv)
}

pub fn l1_norm(v: &DVector<f64>) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_singular_psd_matrix() {
        // rank one: [[1,1],[1,1]] = 2 * uuᵀ with u = (1,1)/√2; its root is uuᵀ·√2.
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let r = sym_sqrt(&m).unwrap();
        let expected = 1.0 / 2f64.sqrt();
        for v in r.iter() {
            assert!((v - expected).abs() < 1e-12);
        }
        assert!((&r * &r - &m).amax() < 1e-12);
    }

    #[test]
    fn psd_check_reports_offending_eigenvalue() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match check_psd(&m) {
            Err(Error::NotPsd { min_eigenvalue, .. }) => assert!((min_eigenvalue + 1.0).abs() < 1e-12),
            other => panic!("expected NotPsd, got {other:?}"),
        }
        assert!(check_psd(&DMatrix::zeros(3, 3)).is_ok());
        assert!(check_psd(&(-DMatrix::<f64>::identity(2, 2))).is_err());
    }

    #[test]
    fn non_finite_input_is_a_decomposition_error() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, f64::NAN, 1.0]);
        assert!(matches!(sym_eigen(&m), Err(Error::Decomposition { dim: 2, .. })));
    }
}
