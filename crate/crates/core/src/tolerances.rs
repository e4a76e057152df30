//! Every threshold a verification check is compared against, in one table.

use serde::{Deserialize, Serialize};

/// Smallest admissible symbol singular value at `‖ξ‖ = 1`.
pub const ELLIPTICITY_MIN_SV: f64 = crate::symbol::ELLIPTICITY_THRESHOLD;
/// Residual of the planar kernel witness.
pub const WITNESS_RESIDUAL: f64 = 1e-12;
/// Minimum number of sampled complex directions per dimension.
pub const MIN_COMPLEX_SAMPLES: usize = 10_000;
/// Rational prefactors compared in floating point.
pub const PREFACTOR: f64 = 1e-15;
/// Korn quotient recomputed by quadrature versus the eigenvalue.
pub const RAYLEIGH: f64 = 1e-9;
/// Relative slack allowed in every link of the coercivity chains.
pub const CHAIN_RELATIVE: f64 = 1e-12;
/// Number of random fields in the chain sweep.
pub const CHAIN_FIELDS: usize = 200;
/// Weak divergence residual of the right inverses.
pub const WEAK_RESIDUAL: f64 = 1e-10;
/// Pointwise distance of `τ` from the range of the projection.
pub const RANGE_RESIDUAL: f64 = 1e-13;
/// Relative defect of `‖τ‖² = ∫ u·v`.
pub const ENERGY_IDENTITY: f64 = 1e-10;
/// Relative change of the bound ratio under `N → N+1`.
pub const BOUND_RATIO_DRIFT: f64 = 0.2;
/// Block structure and skew identity of the assembled operators.
pub const STRUCTURE: f64 = 1e-12;
/// Relative slack in `k0 ≤ ‖B‖` and `alpha0 ≤ ‖A‖`.
pub const BREZZI_CHAIN: f64 = 1e-10;
/// Relative residuals of the linear solve.
pub const SOLVE_RESIDUAL: f64 = 1e-10;
/// Relative deviation from exact linearity of the solution map.
pub const LINEARITY: f64 = 1e-11;
/// Number of seeded data sets in the solve suite.
pub const SOLVE_DATA_SETS: usize = 10;
/// Polynomial degree of the Stokes-limit sweep; coarser spaces do not
/// resolve the asymptotic regime.
pub const LIMIT_DEGREE: usize = 4;
/// Knudsen numbers of the Stokes-limit sweep.
pub const LIMIT_KN: [f64; 3] = [1.0, 0.3, 0.1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceEntry {
    pub name: String,
    pub value: f64,
    pub meaning: String,
}

/// The table embedded in every report.
pub fn table() -> Vec<ToleranceEntry> {
    let rows: [(&str, f64, &str); 19] = [
        (
            "ellipticity_min_sv",
            ELLIPTICITY_MIN_SV,
            "smallest symbol singular value counted as injective",
        ),
        (
            "witness_residual",
            WITNESS_RESIDUAL,
            "symbol residual of a reported kernel witness",
        ),
        (
            "min_complex_samples",
            MIN_COMPLEX_SAMPLES as f64,
            "sampled directions per complex ellipticity check",
        ),
        (
            "prefactor",
            PREFACTOR,
            "absolute error of the prefactor table",
        ),
        (
            "rayleigh",
            RAYLEIGH,
            "relative gap between Korn eigenvalue and quadrature quotient",
        ),
        (
            "chain_relative",
            CHAIN_RELATIVE,
            "relative violation allowed in a coercivity chain link",
        ),
        (
            "chain_fields",
            CHAIN_FIELDS as f64,
            "random fields per chain sweep",
        ),
        (
            "weak_residual",
            WEAK_RESIDUAL,
            "dual-norm residual of the weak divergence identity",
        ),
        (
            "range_residual",
            RANGE_RESIDUAL,
            "pointwise distance of tau from the projection range",
        ),
        (
            "energy_identity",
            ENERGY_IDENTITY,
            "relative defect of the right-inverse energy identity",
        ),
        (
            "bound_ratio_drift",
            BOUND_RATIO_DRIFT,
            "relative change of the H1 bound ratio under N -> N+1",
        ),
        (
            "structure",
            STRUCTURE,
            "block-structure and skew-identity entries",
        ),
        (
            "brezzi_chain",
            BREZZI_CHAIN,
            "relative slack in k0 <= |B| and alpha0 <= |A|",
        ),
        (
            "solve_residual",
            SOLVE_RESIDUAL,
            "relative residuals of the saddle-point solve",
        ),
        (
            "linearity",
            LINEARITY,
            "relative deviation of the doubled-data solution",
        ),
        (
            "solve_data_sets",
            SOLVE_DATA_SETS as f64,
            "seeded data sets in the solve suite",
        ),
        (
            "limit_degree",
            LIMIT_DEGREE as f64,
            "degree of the Stokes-limit sweep",
        ),
        (
            "limit_kn_min",
            LIMIT_KN[2],
            "smallest Knudsen number of the Stokes-limit sweep",
        ),
        (
            "rank_tol",
            crate::saddle::RANK_TOL,
            "relative singular-value cutoff for kernels of B and B^T",
        ),
    ];
    rows.iter()
        .map(|&(name, value, meaning)| ToleranceEntry {
            name: name.into(),
            value,
            meaning: meaning.into(),
        })
        .collect()
}
