//! Bilinear forms of the mixed system.
//!
//! Matrices have rows indexed by test functions and columns by trial
//! functions. `V_h` matrices are returned in reduced coordinates (zero-mean
//! pressure applied), `Q_h` is never reduced.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linop::{
    contract1, contract2, dot_pairs, matrix_divergence, project2, project3, scalar_gradient,
    scalar_value, stf_gradient, stf_values, vector_divergence, vector_gradient, vector_values,
    Assembler, LinOp, Region,
};
use super::load::{assemble_load, BoundaryData, VolumeSources};
use super::space::{DiscreteSpaces, Field, Layout};
use super::ModelParams;
use crate::error::{Error, Result};
use crate::tensor::{Frame, Proj2, Proj3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormId {
    #[serde(rename = "a")]
    HeatFlux,
    #[serde(rename = "b")]
    HeatDivergence,
    #[serde(rename = "c")]
    Coupling,
    #[serde(rename = "d")]
    Stress,
    #[serde(rename = "e")]
    StressDivergence,
    #[serde(rename = "f")]
    PressureStress,
    #[serde(rename = "g")]
    PressureGradient,
    #[serde(rename = "h")]
    PressureBoundary,
    #[serde(rename = "dbar")]
    TotalPressure,
    #[serde(rename = "A")]
    Primal,
    #[serde(rename = "B")]
    Constraint,
    #[serde(rename = "MV")]
    GramV,
    #[serde(rename = "MQ")]
    GramQ,
}

impl FormId {
    pub const ALL: [FormId; 13] = [
        FormId::HeatFlux,
        FormId::HeatDivergence,
        FormId::Coupling,
        FormId::Stress,
        FormId::StressDivergence,
        FormId::PressureStress,
        FormId::PressureGradient,
        FormId::PressureBoundary,
        FormId::TotalPressure,
        FormId::Primal,
        FormId::Constraint,
        FormId::GramV,
        FormId::GramQ,
    ];

    pub fn id(self) -> &'static str {
        match self {
            FormId::HeatFlux => "a",
            FormId::HeatDivergence => "b",
            FormId::Coupling => "c",
            FormId::Stress => "d",
            FormId::StressDivergence => "e",
            FormId::PressureStress => "f",
            FormId::PressureGradient => "g",
            FormId::PressureBoundary => "h",
            FormId::TotalPressure => "dbar",
            FormId::Primal => "A",
            FormId::Constraint => "B",
            FormId::GramV => "MV",
            FormId::GramQ => "MQ",
        }
    }

    /// Forms with rows in `Q_h`.
    pub fn is_q_by_v(self) -> bool {
        matches!(
            self,
            FormId::HeatDivergence
                | FormId::StressDivergence
                | FormId::PressureGradient
                | FormId::Constraint
        )
    }
}

impl FromStr for FormId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FormId::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| Error::UnknownForm(s.to_string()))
    }
}

/// Face-frame components of the V fields as linear operators.
struct FaceOps {
    s_n: LinOp,
    s_t: [LinOp; 2],
    sigma_nn: LinOp,
    sigma_nt: [LinOp; 2],
    sigma_t1t1: LinOp,
    sigma_t1t2: LinOp,
}

fn face_ops(region: Region) -> FaceOps {
    let Region::Face { axis, positive } = region else {
        unreachable!("face operators need a face region")
    };
    let fr = Frame::cube_face(axis, positive);
    let s = vector_values(Field::S, 3);
    let sig = stf_values(Field::Sigma, 3);
    FaceOps {
        s_n: contract1(&s, &fr.n),
        s_t: [contract1(&s, &fr.t1), contract1(&s, &fr.t2)],
        sigma_nn: contract2(&sig, 3, &fr.n, &fr.n),
        sigma_nt: [
            contract2(&sig, 3, &fr.n, &fr.t1),
            contract2(&sig, 3, &fr.n, &fr.t2),
        ],
        sigma_t1t1: contract2(&sig, 3, &fr.t1, &fr.t1),
        sigma_t1t2: contract2(&sig, 3, &fr.t1, &fr.t2),
    }
}

fn pair(a: &LinOp, b: &LinOp) -> (LinOp, LinOp) {
    (a.clone(), b.clone())
}

/// Unreduced forms on the layouts of a [`DiscreteSpaces`].
struct Forms<'a> {
    v: &'a Layout,
    q: &'a Layout,
    params: ModelParams,
}

impl<'a> Forms<'a> {
    fn a(&self) -> DMatrix<f64> {
        let ModelParams {
            kn, chi_tilde: chi, ..
        } = self.params;
        let mut asm = Assembler::new(self.v, self.v);
        let sym = project2(&vector_gradient(Field::S, 3), 3, Proj2::Sym);
        let div = vector_divergence(Field::S, 3);
        let vals = vector_values(Field::S, 3);
        let mut m = asm.zeros();
        asm.add(
            &mut m,
            Region::Volume,
            24.0 / 25.0 * kn,
            &dot_pairs(&sym, &sym),
        );
        asm.add(
            &mut m,
            Region::Volume,
            12.0 / 25.0 * kn,
            &[pair(&div, &div)],
        );
        asm.add(
            &mut m,
            Region::Volume,
            4.0 / 15.0 / kn,
            &dot_pairs(&vals, &vals),
        );
        for face in Region::faces() {
            let f = face_ops(face);
            asm.add(&mut m, face, 0.5 / chi, &[pair(&f.s_n, &f.s_n)]);
            asm.add(
                &mut m,
                face,
                12.0 / 25.0 * chi,
                &[pair(&f.s_t[0], &f.s_t[0]), pair(&f.s_t[1], &f.s_t[1])],
            );
        }
        m
    }

    /// `c(s, ψ)`: rows σ (test ψ), columns s.
    fn c(&self) -> DMatrix<f64> {
        let mut asm = Assembler::new(self.v, self.v);
        let ds = vector_gradient(Field::S, 3);
        let psi = stf_values(Field::Sigma, 3);
        let mut m = asm.zeros();
        asm.add(&mut m, Region::Volume, 2.0 / 5.0, &dot_pairs(&ds, &psi));
        for face in Region::faces() {
            let f = face_ops(face);
            asm.add(&mut m, face, -3.0 / 20.0, &[pair(&f.s_n, &f.sigma_nn)]);
            asm.add(
                &mut m,
                face,
                -1.0 / 5.0,
                &[
                    pair(&f.s_t[0], &f.sigma_nt[0]),
                    pair(&f.s_t[1], &f.sigma_nt[1]),
                ],
            );
        }
        m
    }

    /// Terms of `d` common to `d̄`.
    fn d_common(&self, asm: &mut Assembler, m: &mut DMatrix<f64>) {
        let ModelParams {
            kn, chi_tilde: chi, ..
        } = self.params;
        let g = project3(&stf_gradient(Field::Sigma, 3), 3, Proj3::Stf);
        let vals = stf_values(Field::Sigma, 3);
        asm.add(m, Region::Volume, kn, &dot_pairs(&g, &g));
        asm.add(m, Region::Volume, 0.5 / kn, &dot_pairs(&vals, &vals));
        for face in Region::faces() {
            let f = face_ops(face);
            let mixed = f.sigma_t1t1.clone().plus(&f.sigma_nn.scaled(0.5));
            asm.add(m, face, 9.0 / 8.0 * chi, &[pair(&f.sigma_nn, &f.sigma_nn)]);
            asm.add(
                m,
                face,
                chi,
                &[pair(&mixed, &mixed), pair(&f.sigma_t1t2, &f.sigma_t1t2)],
            );
            asm.add(
                m,
                face,
                1.0 / chi,
                &[
                    pair(&f.sigma_nt[0], &f.sigma_nt[0]),
                    pair(&f.sigma_nt[1], &f.sigma_nt[1]),
                ],
            );
        }
    }

    fn d(&self) -> DMatrix<f64> {
        let mut asm = Assembler::new(self.v, self.v);
        let mut m = asm.zeros();
        self.d_common(&mut asm, &mut m);
        let w = self.params.epsilon_w * self.params.chi_tilde;
        for face in Region::faces() {
            let f = face_ops(face);
            asm.add(&mut m, face, w, &[pair(&f.sigma_nn, &f.sigma_nn)]);
        }
        m
    }

    /// `f(p, ψ)`: rows σ, columns p.
    fn f(&self) -> DMatrix<f64> {
        let mut asm = Assembler::new(self.v, self.v);
        let mut m = asm.zeros();
        let w = self.params.epsilon_w * self.params.chi_tilde;
        let p = scalar_value(Field::Pressure);
        for face in Region::faces() {
            let f = face_ops(face);
            asm.add(&mut m, face, w, &[pair(&p, &f.sigma_nn)]);
        }
        m
    }

    fn h(&self) -> DMatrix<f64> {
        let mut asm = Assembler::new(self.v, self.v);
        let mut m = asm.zeros();
        let w = self.params.epsilon_w * self.params.chi_tilde;
        let p = scalar_value(Field::Pressure);
        for face in Region::faces() {
            asm.add(&mut m, face, w, &[pair(&p, &p)]);
        }
        m
    }

    /// `d̄` with the total-pressure boundary term.
    fn dbar(&self) -> DMatrix<f64> {
        let mut asm = Assembler::new(self.v, self.v);
        let mut m = asm.zeros();
        self.d_common(&mut asm, &mut m);
        let w = self.params.epsilon_w * self.params.chi_tilde;
        let p = scalar_value(Field::Pressure);
        for face in Region::faces() {
            let f = face_ops(face);
            let total = p.clone().plus(&f.sigma_nn);
            asm.add(&mut m, face, w, &[pair(&total, &total)]);
        }
        m
    }

    /// `e(v, σ) = ∫ Div σ · v`: rows u, columns σ.
    fn e(&self) -> DMatrix<f64> {
        let mut asm = Assembler::new(self.q, self.v);
        let div = matrix_divergence(&stf_gradient(Field::Sigma, 3), 3);
        asm.matrix(
            Region::Volume,
            1.0,
            &dot_pairs(&div, &vector_values(Field::Velocity, 3)),
        )
    }

    /// `g(p, v) = ∫ v · ∇p`: rows u, columns p.
    fn g(&self) -> DMatrix<f64> {
        let mut asm = Assembler::new(self.q, self.v);
        let grad = scalar_gradient(Field::Pressure, 3);
        asm.matrix(
            Region::Volume,
            1.0,
            &dot_pairs(&grad, &vector_values(Field::Velocity, 3)),
        )
    }

    /// `b(κ, s) = ∫ κ div s`: rows θ, columns s.
    fn b(&self) -> DMatrix<f64> {
        let mut asm = Assembler::new(self.q, self.v);
        let div = vector_divergence(Field::S, 3);
        asm.matrix(
            Region::Volume,
            1.0,
            &[pair(&div, &scalar_value(Field::Temperature))],
        )
    }

    fn gram_v(&self) -> DMatrix<f64> {
        h1_gram(self.v)
    }

    fn gram_q(&self) -> DMatrix<f64> {
        l2_gram(self.q)
    }
}

/// `L²` Gram matrix, componentwise.
pub fn l2_gram(layout: &Layout) -> DMatrix<f64> {
    let mut asm = Assembler::new(layout, layout);
    let pairs: Vec<(LinOp, LinOp)> = layout
        .blocks
        .iter()
        .flat_map(|b| (0..b.ncomp).map(move |c| LinOp::term(b.field, c, None, 1.0)))
        .map(|op| (op.clone(), op))
        .collect();
    asm.matrix(Region::Volume, 1.0, &pairs)
}

/// `H¹` Gram matrix, componentwise.
pub fn h1_gram(layout: &Layout) -> DMatrix<f64> {
    let dim = layout.dim();
    let mut asm = Assembler::new(layout, layout);
    let mut pairs = Vec::new();
    for b in &layout.blocks {
        for c in 0..b.ncomp {
            for d in std::iter::once(None).chain((0..dim).map(Some)) {
                let op = LinOp::term(b.field, c, d, 1.0);
                pairs.push((op.clone(), op));
            }
        }
    }
    asm.matrix(Region::Volume, 1.0, &pairs)
}

fn raw_form(id: FormId, spaces: &DiscreteSpaces, params: &ModelParams) -> DMatrix<f64> {
    let forms = Forms {
        v: &spaces.v_layout,
        q: &spaces.q_layout,
        params: *params,
    };
    match id {
        FormId::HeatFlux => forms.a(),
        FormId::HeatDivergence => forms.b(),
        FormId::Coupling => forms.c(),
        FormId::Stress => forms.d(),
        FormId::StressDivergence => forms.e(),
        FormId::PressureStress => forms.f(),
        FormId::PressureGradient => forms.g(),
        FormId::PressureBoundary => forms.h(),
        FormId::TotalPressure => forms.dbar(),
        FormId::Primal => {
            let c = forms.c();
            forms.a() + &c - c.transpose() + forms.dbar()
        }
        FormId::Constraint => -(forms.e() + forms.g() + forms.b()),
        FormId::GramV => forms.gram_v(),
        FormId::GramQ => forms.gram_q(),
    }
}

fn reduce(id: FormId, m: DMatrix<f64>, spaces: &DiscreteSpaces) -> DMatrix<f64> {
    let t = &spaces.v_reduction;
    match id {
        FormId::GramQ => m,
        _ if id.is_q_by_v() => m * t,
        _ => t.transpose() * m * t,
    }
}

/// Assembles one form by id (`a`–`h`, `dbar`, `A`, `B`, `MV`, `MQ`).
pub fn assemble_form(
    form_id: &str,
    spaces: &DiscreteSpaces,
    params: &ModelParams,
) -> Result<DMatrix<f64>> {
    let id = FormId::from_str(form_id)?;
    params.validate()?;
    Ok(reduce(id, raw_form(id, spaces, params), spaces))
}

/// Assembled mixed system `[[A, Bᵀ], [B, 0]]` with norms and loads.
#[derive(Debug, Clone)]
pub struct MixedSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub mv: DMatrix<f64>,
    pub mq: DMatrix<f64>,
    pub f: DVector<f64>,
    pub g: DVector<f64>,
    pub params: ModelParams,
    pub spaces: DiscreteSpaces,
}

impl MixedSystem {
    /// The same operators with different load vectors.
    pub fn with_loads(&self, f: DVector<f64>, g: DVector<f64>) -> Self {
        Self {
            f,
            g,
            ..self.clone()
        }
    }
}

pub fn assemble_system(
    spaces: &DiscreteSpaces,
    params: &ModelParams,
    sources: &VolumeSources,
    bdata: &BoundaryData,
) -> Result<MixedSystem> {
    params.validate()?;
    let forms = Forms {
        v: &spaces.v_layout,
        q: &spaces.q_layout,
        params: *params,
    };
    let c = forms.c();
    let a = forms.a() + &c - c.transpose() + forms.dbar();
    let b = -(forms.e() + forms.g() + forms.b());
    let (f, g) = assemble_load(spaces, params, sources, bdata)?;
    Ok(MixedSystem {
        a: reduce(FormId::Primal, a, spaces),
        b: reduce(FormId::Constraint, b, spaces),
        mv: reduce(FormId::GramV, forms.gram_v(), spaces),
        mq: forms.gram_q(),
        f,
        g,
        params: *params,
        spaces: spaces.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::basis::PointGrid;
    use crate::galerkin::linop::{evaluate, functional};
    use crate::galerkin::space::{Pairing, PressureMode};
    use crate::linalg::max_abs;

    fn spaces(n: usize, mode: PressureMode) -> DiscreteSpaces {
        DiscreteSpaces::new(n, 1, mode, Pairing::Enriched).unwrap()
    }

    fn params(eps: f64) -> ModelParams {
        ModelParams::new(0.7, 1.3, eps).unwrap()
    }

    #[test]
    fn unknown_form_is_rejected() {
        let s = spaces(1, PressureMode::Full);
        let err = assemble_form("zz", &s, &params(0.1)).unwrap_err();
        assert!(matches!(err, Error::UnknownForm(_)));
        for id in FormId::ALL {
            assert_eq!(FormId::from_str(id.id()).unwrap(), id);
        }
    }

    #[test]
    fn gram_matrices_are_spd() {
        for mode in [PressureMode::Full, PressureMode::ZeroMean] {
            let s = spaces(1, mode);
            let p = params(if mode == PressureMode::Full { 0.1 } else { 0.0 });
            for id in ["MV", "MQ"] {
                let m = assemble_form(id, &s, &p).unwrap();
                assert!(max_abs(&(&m - m.transpose())) < 1e-13);
                let min = m.clone().symmetric_eigen().eigenvalues.min();
                assert!(min > 0.0, "{id}: {min}");
            }
        }
    }

    #[test]
    fn total_pressure_regrouping() {
        let s = spaces(1, PressureMode::Full);
        let p = params(0.1);
        let get = |id| assemble_form(id, &s, &p).unwrap();
        let f = get("f");
        let regrouped = get("d") + &f + f.transpose() + get("h");
        assert!(max_abs(&(regrouped - get("dbar"))) < 1e-12);
        let z = params(0.0);
        let s0 = spaces(1, PressureMode::ZeroMean);
        assert_eq!(max_abs(&assemble_form("f", &s0, &z).unwrap()), 0.0);
        assert_eq!(max_abs(&assemble_form("h", &s0, &z).unwrap()), 0.0);
    }

    #[test]
    fn skew_part_is_the_coupling() {
        let s = spaces(1, PressureMode::Full);
        let p = params(0.1);
        let a = assemble_form("A", &s, &p).unwrap();
        let c = assemble_form("c", &s, &p).unwrap();
        let skew = &a - a.transpose();
        assert!(max_abs(&(&skew - 2.0 * (&c - c.transpose()))) < 1e-12);
        // the only nonzero blocks of A − Aᵀ couple σ and s
        let [sig, sf, pr] = s.v_blocks.clone();
        for (r, cblock) in [
            (&sig, &sig),
            (&sf, &sf),
            (&pr, &pr),
            (&sig, &pr),
            (&sf, &pr),
        ] {
            let v = skew.view((r.start, cblock.start), (r.len(), cblock.len()));
            assert!(v.iter().all(|x| x.abs() < 1e-12));
        }
        // symmetric parts a and d̄
        for id in ["a", "d", "dbar"] {
            let m = assemble_form(id, &s, &p).unwrap();
            assert!(max_abs(&(&m - m.transpose())) < 1e-13);
        }
    }

    #[test]
    fn constraint_block_structure() {
        let s = spaces(2, PressureMode::Full);
        let b = assemble_form("B", &s, &params(0.1)).unwrap();
        let [sig, sf, pr] = s.v_blocks.clone();
        let [u, th] = s.q_blocks.clone();
        let nonzero = |r: &std::ops::Range<usize>, c: &std::ops::Range<usize>| {
            b.view((r.start, c.start), (r.len(), c.len()))
                .iter()
                .any(|x| x.abs() > 1e-12)
        };
        assert!(nonzero(&u, &sig) && nonzero(&u, &pr) && nonzero(&th, &sf));
        assert!(!nonzero(&u, &sf) && !nonzero(&th, &sig) && !nonzero(&th, &pr));
    }

    fn interpolate(layout: &Layout, f: &dyn Fn(Field, usize, [f64; 3]) -> f64) -> DVector<f64> {
        // L² projection per component
        let mass = l2_gram(layout);
        let mut rhs = DVector::zeros(layout.len());
        for b in &layout.blocks {
            for c in 0..b.ncomp {
                let field = b.field;
                rhs += functional(
                    layout,
                    Region::Volume,
                    &LinOp::term(field, c, None, 1.0),
                    &|x| f(field, c, x),
                );
            }
        }
        mass.cholesky().unwrap().solve(&rhs)
    }

    #[test]
    fn integration_by_parts_consistency() {
        // ∫ Div σ · v + ∫ σ : Dv = ∫_Γ (σ n) · v for polynomial σ, v
        let s = spaces(2, PressureMode::Full);
        let v = &s.v_layout;
        let sigma = interpolate(v, &|f, c, x| match f {
            Field::Sigma => (c as f64 + 1.0) * x[0] * x[1] - 0.3 * x[2] * x[2] + 0.1 * c as f64,
            Field::S => x[0] - 2.0 * x[1] * x[2] + c as f64 * x[2] * x[0],
            _ => 0.0,
        });
        let sig = stf_values(Field::Sigma, 3);
        let grad_sig = stf_gradient(Field::Sigma, 3);
        let div = matrix_divergence(&grad_sig, 3);
        let vv = vector_values(Field::S, 3);
        let dv = vector_gradient(Field::S, 3);
        let space = v.blocks[0].space;
        let grid = space.volume_grid(6);
        let w: Vec<f64> = grid.iter().map(|(_, w)| w).collect();
        let integrate = |a: &LinOp, b: &LinOp, g: &PointGrid, w: &[f64]| -> f64 {
            let x = evaluate(v, &sigma, a, g, None);
            let y = evaluate(v, &sigma, b, g, None);
            x.iter().zip(&y).zip(w).map(|((a, b), w)| a * b * w).sum()
        };
        let mut lhs = 0.0;
        for i in 0..3 {
            lhs += integrate(&div[i], &vv[i], &grid, &w);
        }
        for e in 0..9 {
            lhs += integrate(&sig[e], &dv[e], &grid, &w);
        }
        let mut rhs = 0.0;
        for face in Region::faces() {
            let Region::Face { axis, positive } = face else {
                unreachable!()
            };
            let fg = space.face_grid(6, axis, positive);
            let fw: Vec<f64> = fg.iter().map(|(_, w)| w).collect();
            let fr = Frame::cube_face(axis, positive);
            for i in 0..3 {
                let row: Vec<LinOp> = (0..3).map(|j| sig[i * 3 + j].clone()).collect();
                rhs += integrate(&contract1(&row, &fr.n), &vv[i], &fg, &fw);
            }
        }
        assert!((lhs - rhs).abs() < 1e-11, "{lhs} vs {rhs}");
    }

    #[test]
    fn heat_divergence_vanishes_on_curl_fields() {
        // r = curl(ψ) with ψ = (y²z, x z², x² y) is divergence free
        let s = spaces(2, PressureMode::Full);
        let p = params(0.1);
        let r = interpolate(&s.v_layout, &|f, c, x| {
            let [x, y, z] = x;
            match (f, c) {
                (Field::S, 0) => x * x - 2.0 * x * z,
                (Field::S, 1) => y * y - 2.0 * x * y,
                (Field::S, 2) => z * z - 2.0 * y * z,
                _ => 0.0,
            }
        });
        let b = raw_form(FormId::HeatDivergence, &s, &p);
        let br = &b * &r;
        assert!(br.amax() < 1e-12, "{}", br.amax());
        // and the θ = 1 row pairing in particular
        let one = s.q_layout.blocks[1].space.constant();
        let th = s.q_blocks[1].clone();
        let val: f64 = one
            .iter()
            .enumerate()
            .map(|(i, c)| c * br[th.start + i])
            .sum();
        assert!(val.abs() < 1e-12);
    }
}
