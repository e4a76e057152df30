use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::linop::{
    contract1, contract2, functional, scalar_value, stf_values, vector_values, LinOp, Region,
};
use super::space::{DiscreteSpaces, Field};
use super::ModelParams;
use crate::error::{Error, Result};
use crate::tensor::Frame;

/// Wall data on one face.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FaceData {
    pub u_n: f64,
    pub u_t1: f64,
    pub u_t2: f64,
    pub p: f64,
    pub theta: f64,
}

impl FaceData {
    fn is_finite(&self) -> bool {
        [self.u_n, self.u_t1, self.u_t2, self.p, self.theta]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Wall data on the six cube faces, indexed `2·axis + (positive as usize)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub faces: [FaceData; 6],
}

impl BoundaryData {
    pub fn uniform(data: FaceData) -> Self {
        Self { faces: [data; 6] }
    }

    pub fn face(&self, axis: usize, positive: bool) -> &FaceData {
        &self.faces[2 * axis + usize::from(positive)]
    }

    pub fn validate(&self) -> Result<()> {
        match self.faces.iter().position(|f| !f.is_finite()) {
            Some(i) => Err(Error::InvalidParameter {
                field: "boundary_data",
                reason: format!("non-finite wall value on face {i}"),
            }),
            None => Ok(()),
        }
    }
}

/// A scalar source term on the cube.
#[derive(Clone, Default)]
pub enum Source {
    #[default]
    Zero,
    Constant(f64),
    /// `Σ c · x^a y^b z^c` as `([a, b, c], c)` pairs.
    Polynomial(Vec<([u32; 3], f64)>),
    Function(Arc<dyn Fn([f64; 3]) -> f64 + Send + Sync>),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Zero => write!(f, "Zero"),
            Source::Constant(c) => write!(f, "Constant({c})"),
            Source::Polynomial(p) => f.debug_tuple("Polynomial").field(p).finish(),
            Source::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl Source {
    pub fn function(f: impl Fn([f64; 3]) -> f64 + Send + Sync + 'static) -> Self {
        Source::Function(Arc::new(f))
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        match self {
            Source::Zero => 0.0,
            Source::Constant(c) => *c,
            Source::Polynomial(terms) => terms
                .iter()
                .map(|(e, c)| {
                    c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32)
                })
                .sum(),
            Source::Function(f) => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Source::Zero)
    }
}

/// Mass source, body force and energy source.
#[derive(Debug, Clone, Default)]
pub struct VolumeSources {
    pub m_src: Source,
    pub b: [Source; 3],
    pub r_src: Source,
}

/// Load vectors `F` on `V_h` (reduced coordinates) and `G` on `Q_h`.
pub fn assemble_load(
    spaces: &DiscreteSpaces,
    params: &ModelParams,
    sources: &VolumeSources,
    bdata: &BoundaryData,
) -> Result<(DVector<f64>, DVector<f64>)> {
    params.validate()?;
    bdata.validate()?;
    let v = &spaces.v_layout;
    let q = &spaces.q_layout;
    let ew = params.epsilon_w * params.chi_tilde;
    let mut f = DVector::zeros(v.len());
    let mut g = DVector::zeros(q.len());

    let s = vector_values(Field::S, 3);
    let sig = stf_values(Field::Sigma, 3);
    let pq = scalar_value(Field::Pressure);
    for face in Region::faces() {
        let Region::Face { axis, positive } = face else {
            unreachable!()
        };
        let fr = Frame::cube_face(axis, positive);
        let w = bdata.face(axis, positive);
        let normal_data = w.u_n - ew * w.p;
        // l1(r) = −∫ θʷ r_n
        let op = contract1(&s, &fr.n).scaled(-w.theta);
        // l3(ψ) = −∫ (Σ u_tiʷ ψ_nti + (u_nʷ − εʷχ̃ pʷ) ψ_nn)
        let op = op
            .plus(&contract2(&sig, 3, &fr.n, &fr.t1).scaled(-w.u_t1))
            .plus(&contract2(&sig, 3, &fr.n, &fr.t2).scaled(-w.u_t2))
            .plus(&contract2(&sig, 3, &fr.n, &fr.n).scaled(-normal_data));
        // l5 boundary part: −∫ (u_nʷ − εʷχ̃ pʷ) q
        let op = op.plus(&pq.scaled(-normal_data));
        if !op.is_zero() {
            f += functional(v, face, &op, &|_| 1.0);
        }
    }
    if !sources.m_src.is_zero() {
        f += functional(v, Region::Volume, &pq, &|x| sources.m_src.eval(x));
    }
    // G = −l2 − l4
    if !(sources.r_src.is_zero() && sources.m_src.is_zero()) {
        let th: LinOp = scalar_value(Field::Temperature);
        g -= functional(q, Region::Volume, &th, &|x| {
            sources.r_src.eval(x) - sources.m_src.eval(x)
        });
    }
    for (i, bi) in sources.b.iter().enumerate() {
        if !bi.is_zero() {
            g -= functional(
                q,
                Region::Volume,
                &LinOp::term(Field::Velocity, i, None, 1.0),
                &|x| bi.eval(x),
            );
        }
    }
    Ok((spaces.v_reduction.transpose() * f, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::space::{Pairing, PressureMode};

    fn spaces() -> DiscreteSpaces {
        DiscreteSpaces::new(2, 1, PressureMode::Full, Pairing::Enriched).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_loads() {
        let (f, g) = assemble_load(
            &spaces(),
            &ModelParams::default(),
            &VolumeSources::default(),
            &BoundaryData::default(),
        )
        .unwrap();
        assert_eq!(f.amax(), 0.0);
        assert_eq!(g.amax(), 0.0);
    }

    #[test]
    fn wall_temperature_only_loads_heat_flux() {
        let s = spaces();
        let bd = BoundaryData::uniform(FaceData {
            theta: 1.0,
            ..Default::default()
        });
        let (f, g) = assemble_load(
            &s,
            &ModelParams::new(1.0, 1.0, 0.1).unwrap(),
            &VolumeSources::default(),
            &bd,
        )
        .unwrap();
        assert_eq!(g.amax(), 0.0);
        for (i, v) in f.iter().enumerate() {
            if *v != 0.0 {
                assert!(s.v_blocks[1].contains(&i));
            }
        }
        assert!(f.rows(s.v_blocks[1].start, s.v_blocks[1].len()).amax() > 0.0);
    }

    #[test]
    fn constant_mass_source_tests_temperature() {
        let s = spaces();
        let src = VolumeSources {
            m_src: Source::Constant(1.0),
            ..Default::default()
        };
        let (_, g) =
            assemble_load(&s, &ModelParams::default(), &src, &BoundaryData::default()).unwrap();
        let tb = &s.q_layout.blocks[1];
        let grid = tb.space.volume_grid(5);
        let expected = tb.space.functional(&grid, None, &|_| 1.0);
        for (i, e) in expected.iter().enumerate() {
            assert!((g[tb.index(0, i)] - e).abs() < 1e-14);
        }
        assert_eq!(g.rows(0, s.q_blocks[0].len()).amax(), 0.0);
    }

    #[test]
    fn sources_evaluate() {
        let p = Source::Polynomial(vec![([1, 0, 2], 2.0), ([0, 0, 0], -1.0)]);
        assert_eq!(p.eval([0.5, 3.0, 2.0]), 3.0);
        assert_eq!(Source::function(|x| x[1]).eval([0.0, 4.0, 0.0]), 4.0);
        let bad = BoundaryData::uniform(FaceData {
            p: f64::INFINITY,
            ..Default::default()
        });
        assert!(bad.validate().is_err());
    }
}
