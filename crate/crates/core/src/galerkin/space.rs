use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::{Basis1d, Continuity, ScalarSpace};
use crate::error::{Error, Result};

/// Unknown fields of the mixed system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    /// Stress deviator, stored in stf basis coordinates.
    Sigma,
    /// Heat flux.
    S,
    Pressure,
    Velocity,
    Temperature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureMode {
    /// Pressure normalized to zero mean by dropping the constant mode.
    ZeroMean,
    Full,
}

/// Polynomial degrees and continuity of the five fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Every field continuous `Q_N`.
    EqualOrder,
    /// `σ`, `s` continuous `Q_{N+1}`; `p` continuous `Q_N`; `u`, `θ` cellwise `Q_N`.
    Enriched,
}

/// A field with `ncomp` components on one scalar space, placed at `offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBlock {
    pub field: Field,
    pub ncomp: usize,
    pub space: ScalarSpace,
    pub offset: usize,
}

impl FieldBlock {
    pub fn len(&self) -> usize {
        self.ncomp * self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len()
    }

    /// Global index of scalar basis function `i` of component `comp`.
    pub fn index(&self, comp: usize, i: usize) -> usize {
        self.offset + comp * self.space.len() + i
    }
}

/// Ordered concatenation of field blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub blocks: Vec<FieldBlock>,
}

impl Layout {
    pub fn new(fields: &[(Field, usize, ScalarSpace)]) -> Self {
        let mut offset = 0;
        let blocks = fields
            .iter()
            .map(|&(field, ncomp, space)| {
                let b = FieldBlock {
                    field,
                    ncomp,
                    space,
                    offset,
                };
                offset += b.len();
                b
            })
            .collect();
        Self { blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(FieldBlock::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block(&self, field: Field) -> Option<&FieldBlock> {
        self.blocks.iter().find(|b| b.field == field)
    }

    pub fn dim(&self) -> usize {
        self.blocks.first().map_or(3, |b| b.space.dim)
    }
}

/// Discrete subspaces `V_h = σ × s × p` and `Q_h = u × θ` on `[0,1]³`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpaces {
    pub degree: usize,
    pub subdivisions: usize,
    pub pairing: Pairing,
    pub pressure_mode: PressureMode,
    /// Unreduced layout of `(σ, s, p)`.
    pub v_layout: Layout,
    /// Layout of `(u, θ)`.
    pub q_layout: Layout,
    /// Columns span the admissible `V_h` coefficient vectors; the identity
    /// except for the zero-mean pressure block.
    pub v_reduction: DMatrix<f64>,
    /// Index ranges of σ, s, p in reduced `V_h` coordinates.
    pub v_blocks: [Range<usize>; 3],
    /// Index ranges of u, θ in `Q_h` coordinates.
    pub q_blocks: [Range<usize>; 2],
}

/// Gauss points per direction and cell used for volume and face integrals
/// of products of two basis functions of degree `≤ degree`.
pub fn quadrature_points(degree: usize) -> usize {
    degree + 2
}

impl DiscreteSpaces {
    pub fn new(
        degree: usize,
        subdivisions: usize,
        pressure_mode: PressureMode,
        pairing: Pairing,
    ) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidDiscretization(format!(
                "degree must be at least 1, got {degree}"
            )));
        }
        if subdivisions < 1 {
            return Err(Error::InvalidDiscretization(format!(
                "subdivisions must be at least 1, got {subdivisions}"
            )));
        }
        let k = subdivisions;
        let cont = |n| ScalarSpace::new(Basis1d::new(n, k, Continuity::Continuous), 3);
        let disc = |n| ScalarSpace::new(Basis1d::new(n, k, Continuity::Discontinuous), 3);
        let (vs, vp, q) = match pairing {
            Pairing::EqualOrder => (cont(degree), cont(degree), cont(degree)),
            Pairing::Enriched => (cont(degree + 1), cont(degree), disc(degree)),
        };
        let v_layout = Layout::new(&[
            (Field::Sigma, 5, vs),
            (Field::S, 3, vs),
            (Field::Pressure, 1, vp),
        ]);
        let q_layout = Layout::new(&[(Field::Velocity, 3, q), (Field::Temperature, 1, q)]);

        let np = vp.len();
        let n_full = v_layout.len();
        let p_off = v_layout.blocks[2].offset;
        let reduced_p = match pressure_mode {
            PressureMode::Full => np,
            PressureMode::ZeroMean => np - 1,
        };
        let mut v_reduction = DMatrix::zeros(n_full, p_off + reduced_p);
        for i in 0..p_off {
            v_reduction[(i, i)] = 1.0;
        }
        match pressure_mode {
            PressureMode::Full => {
                for j in 0..np {
                    v_reduction[(p_off + j, p_off + j)] = 1.0;
                }
            }
            PressureMode::ZeroMean => {
                // φ_j − (∫φ_j)·1 for every j except the corner vertex (index 0)
                let grid = vp.volume_grid(quadrature_points(vp.basis.degree));
                let means = vp.functional(&grid, None, &|_| 1.0);
                let one = vp.constant();
                for j in 1..np {
                    let col = p_off + j - 1;
                    v_reduction[(p_off + j, col)] += 1.0;
                    for (i, &c) in one.iter().enumerate() {
                        v_reduction[(p_off + i, col)] -= means[j] * c;
                    }
                }
            }
        }
        let ns = v_layout.blocks[0].len();
        let nf = v_layout.blocks[1].len();
        let nu = q_layout.blocks[0].len();
        let nt = q_layout.blocks[1].len();
        Ok(Self {
            degree,
            subdivisions,
            pairing,
            pressure_mode,
            v_layout,
            q_layout,
            v_reduction,
            v_blocks: [0..ns, ns..ns + nf, ns + nf..ns + nf + reduced_p],
            q_blocks: [0..nu, nu..nu + nt],
        })
    }

    /// Pressure mode matching the velocity prescription strength.
    pub fn pressure_mode_for(epsilon_w: f64) -> PressureMode {
        if epsilon_w == 0.0 {
            PressureMode::ZeroMean
        } else {
            PressureMode::Full
        }
    }

    pub fn dim_v(&self) -> usize {
        self.v_reduction.ncols()
    }

    pub fn dim_q(&self) -> usize {
        self.q_layout.len()
    }

    /// Full `(σ, s, p)` coefficients from reduced ones.
    pub fn expand_v(&self, reduced: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        &self.v_reduction * reduced
    }
}
