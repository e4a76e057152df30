//! Brezzi constants, the mixed solve and its a posteriori stability check.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::fields::limit_norms;
use crate::galerkin::{MixedSystem, ModelParams};
use crate::linalg::{dual_norm, gram_norm, nullspace, symmetrize, weighted_singular_values};

/// Relative singular-value cutoff used for kernels of `B` and `Bᵀ`.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrezziConstants {
    pub alpha0: f64,
    pub k0: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    pub dim_ker_b: usize,
    pub dim_ker_bt: usize,
}

/// Orthonormal basis of `ker B` in reduced `V_h` coordinates.
pub fn kernel_basis(system: &MixedSystem, tol: f64) -> Result<DMatrix<f64>> {
    Ok(nullspace(&system.b, tol)?.0)
}

/// Smallest eigenpair of `(Zᵀ sym(A) Z, Zᵀ M_V Z)`. The returned vector is
/// the minimizer in `V_h` coordinates, normalized in `M_V`.
pub fn coercivity_constant(system: &MixedSystem, z: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    if z.ncols() == 0 {
        return Err(Error::TrivialKernel);
    }
    let a = z.transpose() * symmetrize(&system.a) * z;
    let m = z.transpose() * &system.mv * z;
    let eig = crate::linalg::generalized_eigen(&a, &m)?;
    Ok((eig.values[0], z * eig.vectors.column(0)))
}

/// `𝒜(v, v) / ‖v‖²_V`.
pub fn rayleigh_quotient(system: &MixedSystem, v: &DVector<f64>) -> f64 {
    v.dot(&(&system.a * v)) / v.dot(&(&system.mv * v))
}

/// Inf-sup constant of `B` in the `(M_Q, M_V)` norms and the dimension of
/// `ker Bᵀ`. Generalized singular values below `RANK_TOL · σ_max` count
/// towards the kernel; `k0` is the smallest one above.
pub fn infsup_constant(system: &MixedSystem) -> Result<(f64, usize)> {
    let sv = weighted_singular_values(&system.b, &system.mq, &system.mv)?;
    let nq = system.b.nrows();
    let smax = sv.first().copied().unwrap_or(0.0);
    // B has at most min(nq, nv) nonzero singular values; the rest of ker Bᵀ is implied
    let mut positive: Vec<f64> = sv
        .iter()
        .copied()
        .filter(|&s| s >= RANK_TOL * smax && s > 0.0)
        .collect();
    positive.truncate(nq);
    let dim_ker_bt = nq - positive.len();
    let k0 = positive.last().copied().unwrap_or(0.0);
    Ok((k0, dim_ker_bt))
}

pub fn form_norm(form: &DMatrix<f64>, left: &DMatrix<f64>, right: &DMatrix<f64>) -> Result<f64> {
    crate::linalg::operator_norm(form, left, right)
}

pub fn brezzi_constants(system: &MixedSystem) -> Result<BrezziConstants> {
    let z = kernel_basis(system, RANK_TOL)?;
    let (alpha0, _) = coercivity_constant(system, &z)?;
    let (k0, dim_ker_bt) = infsup_constant(system)?;
    Ok(BrezziConstants {
        alpha0,
        k0,
        norm_a: form_norm(&system.a, &system.mv, &system.mv)?,
        norm_b: form_norm(&system.b, &system.mq, &system.mv)?,
        dim_ker_b: z.ncols(),
        dim_ker_bt,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedSolution {
    pub u: DVector<f64>,
    pub p: DVector<f64>,
    /// `‖A U + Bᵀ P − F‖ / ‖F‖` (absolute when `F = 0`).
    pub primal_residual: f64,
    /// `‖B U − G‖ / max(‖G‖, 1)`.
    pub constraint_residual: f64,
}

/// Direct LU solve of `[[A, Bᵀ], [B, 0]] [U; P] = [F; G]`.
pub fn solve_mixed(system: &MixedSystem) -> Result<MixedSolution> {
    let nv = system.a.nrows();
    let nq = system.b.nrows();
    let (_, rank, _) = nullspace(&system.b.transpose(), RANK_TOL)?;
    if rank < nq {
        return Err(Error::PairingDeficient {
            dim_ker_bt: nq - rank,
        });
    }
    let mut k = DMatrix::zeros(nv + nq, nv + nq);
    k.view_mut((0, 0), (nv, nv)).copy_from(&system.a);
    k.view_mut((0, nv), (nv, nq))
        .copy_from(&system.b.transpose());
    k.view_mut((nv, 0), (nq, nv)).copy_from(&system.b);
    let mut rhs = DVector::zeros(nv + nq);
    rhs.rows_mut(0, nv).copy_from(&system.f);
    rhs.rows_mut(nv, nq).copy_from(&system.g);
    let x = k
        .lu()
        .solve(&rhs)
        .ok_or(Error::PairingDeficient { dim_ker_bt: 0 })?;
    let u = x.rows(0, nv).into_owned();
    let p = x.rows(nv, nq).into_owned();
    let r1 = (&system.a * &u + system.b.transpose() * &p - &system.f).norm();
    let r2 = (&system.b * &u - &system.g).norm();
    let fnorm = system.f.norm();
    Ok(MixedSolution {
        primal_residual: if fnorm > 0.0 { r1 / fnorm } else { r1 },
        constraint_residual: r2 / system.g.norm().max(1.0),
        u,
        p,
    })
}

/// Both sides of the two a posteriori stability bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityCheck {
    pub u_norm: f64,
    pub u_bound: f64,
    pub p_norm: f64,
    pub p_bound: f64,
}

impl StabilityCheck {
    pub fn holds(&self) -> bool {
        self.u_norm <= self.u_bound && self.p_norm <= self.p_bound
    }
}

/// `‖U‖ ≤ ‖F‖'/α₀ + (‖𝒜‖/α₀ + 1)‖G‖'/k₀` and
/// `‖P‖ ≤ (1 + ‖𝒜‖/α₀)(‖F‖'/k₀ + ‖𝒜‖‖G‖'/k₀²)`.
pub fn stability_check(
    system: &MixedSystem,
    sol: &MixedSolution,
    c: &BrezziConstants,
) -> Result<StabilityCheck> {
    let fd = dual_norm(&system.f, &system.mv)?;
    let gd = dual_norm(&system.g, &system.mq)?;
    let ratio = 1.0 + c.norm_a / c.alpha0;
    Ok(StabilityCheck {
        u_norm: gram_norm(&sol.u, &system.mv),
        u_bound: fd / c.alpha0 + ratio * gd / c.k0,
        p_norm: gram_norm(&sol.p, &system.mq),
        p_bound: ratio * (fd / c.k0 + c.norm_a * gd / (c.k0 * c.k0)),
    })
}

/// Relative distance of the solution to the Navier–Stokes and Fourier laws.
pub fn limit_consistency(
    system: &MixedSystem,
    sol: &MixedSolution,
    params: &ModelParams,
) -> (f64, f64) {
    let [ns, sigma, fourier, s] = limit_norms(&system.spaces, &sol.u, &sol.p, params);
    (ns / sigma.max(params.kn), fourier / s.max(params.kn))
}
