//! Dense helpers on top of nalgebra: generalized symmetric eigenproblems,
//! nullspaces, Gram-weighted operator norms and discrete dual norms.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Eigenpairs of `A x = λ M x`, `A` symmetric and `M` symmetric positive
/// definite, with eigenvalues ascending and `M`-orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn cholesky(m: &DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(symmetrize(m)).ok_or(Error::SingularMatrix(what))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn generalized_eigen(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<GeneralizedEigen> {
    let chol = cholesky(m, "Gram matrix is not positive definite")?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᵀ
    let y = l
        .solve_lower_triangular(&symmetrize(a))
        .ok_or(Error::SingularMatrix("triangular factor"))?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::SingularMatrix("triangular factor"))?;
    let eig = symmetrize(&c).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let sorted = DMatrix::from_fn(c.nrows(), order.len(), |r, k| {
        eig.eigenvectors[(r, order[k])]
    });
    let vectors = l
        .transpose()
        .solve_upper_triangular(&sorted)
        .ok_or(Error::SingularMatrix("triangular factor"))?;
    Ok(GeneralizedEigen { values, vectors })
}

/// Orthonormal basis of `{x : B x = 0}` from the singular values of `B`
/// below `tol · σ_max`. Also returns the rank and the singular values in
/// descending order.
pub fn nullspace(b: &DMatrix<f64>, tol: f64) -> Result<(DMatrix<f64>, usize, Vec<f64>)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    let n = b.ncols();
    // pad to at least square so the thin SVD returns a full right basis
    let rows = b.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (b.nrows(), n)).copy_from(b);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s >= tol * smax && s > 0.0).count();
    let kernel: Vec<usize> = order[rank..].to_vec();
    let z = DMatrix::from_fn(n, kernel.len(), |r, k| v_t[(kernel[k], r)]);
    Ok((z, rank, sv))
}

/// Singular values of `L_l⁻¹ X L_r⁻ᵀ`, descending, where `L_l`, `L_r` are the
/// Cholesky factors of the row and column Gram matrices.
pub fn weighted_singular_values(
    x: &DMatrix<f64>,
    left: &DMatrix<f64>,
    right: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    let ll = cholesky(left, "left Gram matrix is not positive definite")?.l();
    let lr = cholesky(right, "right Gram matrix is not positive definite")?.l();
    let y = ll
        .solve_lower_triangular(x)
        .ok_or(Error::SingularMatrix("triangular factor"))?;
    let w = lr
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::SingularMatrix("triangular factor"))?;
    let mut sv: Vec<f64> = w.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// `sup_{x,y} yᵀ X x / (‖y‖_L ‖x‖_R)` for Gram matrices `L` (rows) and `R` (columns).
pub fn operator_norm(x: &DMatrix<f64>, left: &DMatrix<f64>, right: &DMatrix<f64>) -> Result<f64> {
    Ok(weighted_singular_values(x, left, right)?
        .first()
        .copied()
        .unwrap_or(0.0))
}

/// `sqrt(fᵀ G⁻¹ f)`.
pub fn dual_norm(f: &DVector<f64>, gram: &DMatrix<f64>) -> Result<f64> {
    let chol = cholesky(gram, "Gram matrix is not positive definite")?;
    Ok(f.dot(&chol.solve(f)).max(0.0).sqrt())
}

/// `sqrt(xᵀ G x)`.
pub fn gram_norm(x: &DVector<f64>, gram: &DMatrix<f64>) -> f64 {
    x.dot(&(gram * x)).max(0.0).sqrt()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
